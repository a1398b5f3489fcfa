#include <doctest.h>

#include <cmath>
#include <numeric>

#include "nanotrap/constants.hpp"
#include "nanotrap/dynamics.hpp"
#include "nanotrap/errors.hpp"
#include "nanotrap/rates.hpp"
#include "oracle.hpp"

using namespace nanotrap;
using namespace nanotrap::mc;
using doctest::Approx;

namespace {

struct Reference {
  TrapSetup setup;
  TrapReport trap;
  TrapContext context;
};

// z0 = 3 nm silver tip, omega_z held at 1e7 s^-1, I = 5.2e4 W/m^2.
const Reference& reference() {
  static const Reference ref = [] {
    const auto rb = rubidium87();
    const auto ag = silver();
    const TipGeometry tip(3e-9);
    const Complex eps = permittivity_at(ag, 780e-9);
    const double intensity = 5.2e4;
    const double delta = detuning_for_trap_frequency(rb, tip, eps, rabi_frequency_from_intensity(rb, intensity), 1e7);
    TrapSetup s{rb, tip, eps, TrapDrive::from_intensity(rb, intensity, 780e-9, delta)};
    auto t = find_trap(s, ag);
    auto ctx = make_trap_context(s, t);
    return Reference{s, t, ctx};
  }();
  return ref;
}

SimConfig base_config(const Reference& ref, double kick_rate) {
  SimConfig c;
  c.omega_z = ref.trap.omega_tz;
  c.time_step_s = 0.02 * constants::two_pi / c.omega_z;
  c.max_time_s = 1e-3;
  c.n_trajectories = 1;
  c.seed = 42;
  c.kick_rate = kick_rate;
  c.kick_energy = constants::hbar * c.omega_z;
  c.mass_kg = ref.setup.atom.mass_kg;
  c.escape_energy = ref.trap.escape_energy();
  return c;
}

PotentialFn harmonic(double m, double omega) {
  return [m, omega](const Vec3& x) {
    const double k = m * omega * omega;
    return PotentialSample{0.5 * k * x.norm2(), k * x, false};
  };
}

}  // namespace

TEST_CASE("config validation") {
  const auto& ref = reference();
  REQUIRE(ref.trap.existence_ok);
  auto c = base_config(ref, 0.0);
  CHECK_NOTHROW(c.validate());
  c.time_step_s = 0.051 * constants::two_pi / c.omega_z;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = base_config(ref, 0.0);
  c.time_step_s = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = base_config(ref, 0.0);
  c.n_trajectories = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = base_config(ref, -1.0);
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("start outside the basin is rejected") {
  const auto& ref = reference();
  const auto c = base_config(ref, 0.0);
  PhaseSpacePoint p{ref.context.minimum, {0.0, 0.0, 1e3}};
  CHECK_THROWS_AS(integrate_trajectory(c, ref.context.potential, p, 0), ConfigError);
  PhaseSpacePoint inside_metal{{0.0, 0.0, 0.0}, {}};
  CHECK_THROWS_AS(integrate_trajectory(c, ref.context.potential, inside_metal, 0), ConfigError);
}

TEST_CASE("at rest at the minimum nothing happens") {
  const auto& ref = reference();
  auto c = base_config(ref, 0.0);
  c.max_time_s = 1e6 * c.time_step_s;
  c.trace_every = 100000;
  const PhaseSpacePoint start{ref.context.minimum, {}};
  const auto r = integrate_trajectory(c, ref.context.potential, start, 0);
  CHECK_FALSE(r.escaped);
  CHECK(r.kicks == 0);
  CHECK(r.escape_time_s == Approx(c.max_time_s));
  const double e0 = r.trace.front().energy_J;
  for (const auto& s : r.trace) CHECK(std::abs(s.energy_J - e0) < 1e-6 * ref.trap.u_depth);
}

TEST_CASE("bounded oscillation at half depth stays inside the energy contour") {
  const auto& ref = reference();
  auto c = base_config(ref, 0.0);
  const double target = ref.trap.u_min + 0.5 * ref.trap.u_depth;
  // Axial launch: the motion stays on the axis.
  const double speed = std::sqrt(2.0 * (target - ref.context.potential(ref.context.minimum).energy) / c.mass_kg);
  const PhaseSpacePoint start{ref.context.minimum, {0.0, 0.0, speed}};

  // Turning points of U(z) = target on the axis, by dense scan.
  const auto u_axis = [&](double z) { return total_potential({0.0, z}, ref.setup); };
  const double zm = ref.context.minimum.z;
  double z_hi = zm;
  while (u_axis(z_hi) < target) z_hi += 1e-12;
  double z_lo = zm;
  while (u_axis(z_lo) < target) z_lo -= 1e-12;

  double z_max = zm;
  double z_min = zm;
  const auto probe = [&](const Vec3& x) {
    z_max = std::max(z_max, x.z);
    z_min = std::min(z_min, x.z);
    return ref.context.potential(x);
  };
  c.max_time_s = 20.0 * constants::two_pi / c.omega_z;
  const auto r = integrate_trajectory(c, probe, start, 0);
  CHECK_FALSE(r.escaped);
  const double tol = 0.01 * (z_hi - z_lo);
  CHECK(z_max <= z_hi + tol);
  CHECK(z_max >= z_hi - tol);
  CHECK(z_min >= z_lo - tol);
  CHECK(z_min <= z_lo + tol);
}

TEST_CASE("energy has no secular drift over 1e6 steps") {
  const auto& ref = reference();
  auto c = base_config(ref, 0.0);
  c.max_time_s = 1e6 * c.time_step_s;
  c.trace_every = 1;
  const double target = ref.trap.u_min + 0.3 * ref.trap.u_depth;
  const double speed = std::sqrt(2.0 * (target - ref.context.potential(ref.context.minimum).energy) / c.mass_kg);
  const PhaseSpacePoint start{ref.context.minimum + Vec3{0.0, 0.0, 0.0}, {0.6 * speed, 0.0, 0.8 * speed}};
  const auto r = integrate_trajectory(c, ref.context.potential, start, 0);
  REQUIRE_FALSE(r.escaped);
  // Average over whole numbers of oscillation windows at both ends.
  const std::size_t window = 100000;
  const auto mean = [&](std::size_t from) {
    double acc = 0.0;
    for (std::size_t i = from; i < from + window; ++i) acc += r.trace[i].energy_J;
    return acc / window;
  };
  const double oscillation = target - ref.trap.u_min;
  const double drift = std::abs(mean(r.trace.size() - window) - mean(0)) / oscillation;
  CHECK(drift < 1e-6);
}

TEST_CASE("harmonic period at the default step") {
  const double m = 1.443e-25;
  const double omega = 1e7;
  const double period = constants::two_pi / omega;
  for (double fraction : {0.02, 0.01}) {
    SimConfig c;
    c.omega_z = omega;
    c.time_step_s = fraction * period;
    c.max_time_s = 50.0 * period;
    c.mass_kg = m;
    c.escape_energy = 1.0;
    c.trace_every = 1;
    const double amp = 1e-9;
    const auto r = integrate_trajectory(c, harmonic(m, omega), {{0.0, 0.0, amp}, {}}, 0);
    // Time the zero crossings seen by the force evaluations.
    std::vector<double> crossings;
    double last_z = amp;
    double t = 0.0;
    const auto probe = [&](const Vec3& x) {
      t += c.time_step_s;
      if ((last_z > 0.0) != (x.z > 0.0)) {
        const double frac = last_z / (last_z - x.z);
        crossings.push_back(t - c.time_step_s + frac * c.time_step_s);
      }
      last_z = x.z;
      const double k = m * omega * omega;
      return PotentialSample{0.5 * k * x.norm2(), k * x, false};
    };
    integrate_trajectory(c, probe, {{0.0, 0.0, amp}, {}}, 0);
    REQUIRE(crossings.size() > 20);
    const double measured = 2.0 * (crossings.back() - crossings.front()) / (crossings.size() - 1);
    CHECK(std::abs(measured - period) / period < 1e-3);
    CHECK_FALSE(r.escaped);
  }
}

TEST_CASE("z angular momentum conserved between kicks") {
  const auto& ref = reference();
  auto c = base_config(ref, 0.0);
  c.max_time_s = 200.0 * constants::two_pi / c.omega_z;
  const double a = 0.5 * ground_state_size(ref.setup.atom, ref.trap.omega_trho);
  const double v = 0.3 * a * ref.trap.omega_trho;
  const PhaseSpacePoint start{ref.context.minimum + Vec3{a, 0.0, 0.0}, {0.0, v, 0.1 * v}};
  const auto r = integrate_trajectory(c, ref.context.potential, start, 0);
  REQUIRE_FALSE(r.escaped);
  const auto lz = [](const PhaseSpacePoint& p) {
    return p.position.x * p.velocity.y - p.position.y * p.velocity.x;
  };
  CHECK(lz(r.final_state) == Approx(lz(start)).epsilon(1e-10));
}

TEST_CASE("determinism and independence from threading") {
  const auto& ref = reference();
  auto c = base_config(ref, 3e5);
  c.n_trajectories = 12;
  c.max_time_s = 2e-4;
  const auto a = estimate_lifetime_mc(c, ref.context, 1);
  const auto b = estimate_lifetime_mc(c, ref.context, 1);
  const auto p = estimate_lifetime_mc(c, ref.context, 3);
  REQUIRE(a.trajectories.size() == 12);
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(a.trajectories[i].escape_time_s == b.trajectories[i].escape_time_s);
    CHECK(a.trajectories[i].final_energy_J == b.trajectories[i].final_energy_J);
    CHECK(a.trajectories[i].kicks == b.trajectories[i].kicks);
    CHECK(a.trajectories[i].escape_time_s == p.trajectories[i].escape_time_s);
    CHECK(a.trajectories[i].final_energy_J == p.trajectories[i].final_energy_J);
  }
  CHECK(a.median_s == p.median_s);
  c.seed = 43;
  const auto d = estimate_lifetime_mc(c, ref.context, 1);
  bool differs = false;
  for (std::size_t i = 0; i < 12; ++i) differs |= d.trajectories[i].escape_time_s != a.trajectories[i].escape_time_s;
  CHECK(differs);
}

TEST_CASE("no kicks: every run is censored") {
  const auto& ref = reference();
  auto c = base_config(ref, 0.0);
  c.n_trajectories = 4;
  c.max_time_s = 2e-5;
  const auto e = estimate_lifetime_mc(c, ref.context, 1);
  CHECK(e.all_censored);
  CHECK(e.median_is_lower_bound);
  CHECK(e.censored_fraction == 1.0);
  for (const auto& t : e.trajectories) CHECK(t.escape_time_s == Approx(c.max_time_s));
}

TEST_CASE("escape bookkeeping") {
  const auto& ref = reference();
  auto c = base_config(ref, 5e5);
  c.n_trajectories = 20;
  c.max_time_s = 5e-4;
  const auto e = estimate_lifetime_mc(c, ref.context, 1);
  for (const auto& t : e.trajectories) {
    CHECK(t.escape_time_s <= c.max_time_s * (1.0 + 1e-12));
    if (t.escaped && !t.surface_contact) CHECK(t.final_energy_J > c.escape_energy);
    if (!t.escaped) CHECK(t.final_energy_J < c.escape_energy);
  }
  CHECK(e.q1_s <= e.median_s);
  CHECK(e.median_s <= e.q3_s);
  CHECK(e.iqr_s == Approx(e.q3_s - e.q1_s));
}

TEST_CASE("initial states are ground-state matched") {
  const auto& ref = reference();
  std::vector<double> dz;
  std::vector<double> vz;
  for (std::uint64_t i = 0; i < 2000; ++i) {
    const auto p = sample_initial_state(ref.context, 9, i);
    dz.push_back(p.position.z - ref.context.minimum.z);
    vz.push_back(p.velocity.z);
  }
  const auto rms = [](const std::vector<double>& v) {
    return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0) / v.size());
  };
  const double m = ref.setup.atom.mass_kg;
  const double w = ref.context.omega_z;
  CHECK(rms(dz) == Approx(std::sqrt(constants::hbar / (2.0 * m * w))).epsilon(0.1));
  CHECK(rms(vz) == Approx(std::sqrt(constants::hbar * w / (2.0 * m))).epsilon(0.1));
}

TEST_CASE("ensemble heating is linear at kick_rate * hbar omega") {
  const auto& ref = reference();
  const double rate = 1e6;
  auto c = base_config(ref, rate);
  const double hw = constants::hbar * c.omega_z;
  // Stop well before the mean reaches half the depth.
  c.max_time_s = 0.4 * ref.trap.u_depth / (rate * hw);
  const auto period_steps = static_cast<std::size_t>(std::llround(1.0 / 0.02));
  c.trace_every = period_steps;
  const int n = 200;
  std::vector<double> times;
  std::vector<double> mean;
  int used = 0;
  for (int i = 0; i < n; ++i) {
    const auto start = sample_initial_state(ref.context, c.seed, static_cast<std::uint64_t>(i));
    const auto r = integrate_trajectory(c, ref.context.potential, start, static_cast<std::uint64_t>(i));
    if (r.escaped) continue;  // early fluctuations; rare this far below the barrier
    if (mean.empty()) {
      mean.assign(r.trace.size(), 0.0);
      for (const auto& s : r.trace) times.push_back(s.time_s);
    }
    for (std::size_t k = 0; k < mean.size() && k < r.trace.size(); ++k) mean[k] += r.trace[k].energy_J;
    ++used;
  }
  REQUIRE(used > n * 0.9);
  for (auto& m : mean) m /= used;
  // Least-squares slope.
  const double tm = std::accumulate(times.begin(), times.end(), 0.0) / times.size();
  const double em = std::accumulate(mean.begin(), mean.end(), 0.0) / mean.size();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    num += (times[k] - tm) * (mean[k] - em);
    den += (times[k] - tm) * (times[k] - tm);
  }
  CHECK(num / den == Approx(rate * hw).epsilon(0.2));
}

TEST_CASE("doubling the kick rate roughly halves the median escape time") {
  const auto& ref = reference();
  auto c = base_config(ref, 4e5);
  c.n_trajectories = 200;
  c.max_time_s = 20.0 * lifetime(ref.trap.u_depth, ref.trap.omega_tz, c.kick_rate);
  const auto slow = estimate_lifetime_mc(c, ref.context, 1);
  c.kick_rate *= 2.0;
  const auto fast = estimate_lifetime_mc(c, ref.context, 1);
  REQUIRE_FALSE(slow.median_is_lower_bound);
  REQUIRE_FALSE(fast.median_is_lower_bound);
  CHECK(fast.median_s / slow.median_s == Approx(0.5).epsilon(0.3));
}
