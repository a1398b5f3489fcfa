#include <benchmark/benchmark.h>

#include <cmath>

#include "nanotrap/constants.hpp"
#include "nanotrap/dynamics.hpp"
#include "nanotrap/potential.hpp"

using namespace nanotrap;

namespace {

TrapSetup reference_setup() {
  const auto rb = rubidium87();
  const TipGeometry tip(3e-9);
  const Complex eps = permittivity_at(silver(), 780e-9);
  const double rabi = rabi_frequency_from_intensity(rb, 5.2e4);
  const double delta = detuning_for_trap_frequency(rb, tip, eps, rabi, 1e7);
  return {rb, tip, eps, TrapDrive::from_intensity(rb, 5.2e4, 780e-9, delta)};
}

void BM_IntensityWithGradient(benchmark::State& state) {
  const TipGeometry tip(2e-9);
  const Complex eps(-29.4, 0.37);
  CylPoint p{3e-9, -55e-9};
  for (auto _ : state) {
    benchmark::DoNotOptimize(intensity_factor_with_gradient(p, tip, eps));
    p.rho += 1e-15;
  }
}
BENCHMARK(BM_IntensityWithGradient);

void BM_DistanceToSurface(benchmark::State& state) {
  const TipGeometry tip(3e-9);
  CylPoint p{20e-9, -40e-9};
  for (auto _ : state) {
    benchmark::DoNotOptimize(distance_to_surface(p, tip));
    p.rho += 1e-15;
  }
}
BENCHMARK(BM_DistanceToSurface);

void BM_TotalPotentialWithGradient(benchmark::State& state) {
  const auto s = reference_setup();
  CylPoint p{1e-9, -88e-9};
  for (auto _ : state) {
    benchmark::DoNotOptimize(total_potential_with_gradient(p, s));
    p.rho += 1e-15;
  }
}
BENCHMARK(BM_TotalPotentialWithGradient);

void BM_FindTrap(benchmark::State& state) {
  const auto s = reference_setup();
  const auto ag = silver();
  for (auto _ : state) benchmark::DoNotOptimize(find_trap(s, ag));
}
BENCHMARK(BM_FindTrap)->Unit(benchmark::kMillisecond);

// Cost per integrator step, no kicks, started at rest near the minimum.
void BM_TrajectorySteps(benchmark::State& state) {
  const auto s = reference_setup();
  const auto t = find_trap(s, silver());
  const auto ctx = mc::make_trap_context(s, t);
  mc::SimConfig c;
  c.omega_z = t.omega_tz;
  c.time_step_s = 0.02 * constants::two_pi / c.omega_z;
  c.max_time_s = static_cast<double>(state.range(0)) * c.time_step_s;
  c.kick_rate = 0.0;
  c.kick_energy = constants::hbar * c.omega_z;
  c.mass_kg = s.atom.mass_kg;
  c.escape_energy = t.escape_energy();
  const mc::PhaseSpacePoint start{ctx.minimum + mc::Vec3{1e-10, 0.0, 1e-10}, {}};
  for (auto _ : state) benchmark::DoNotOptimize(mc::integrate_trajectory(c, ctx.potential, start, 0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrajectorySteps)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
