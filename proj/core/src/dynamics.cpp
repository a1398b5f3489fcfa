#include "nanotrap/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "nanotrap/constants.hpp"
#include "nanotrap/errors.hpp"

namespace nanotrap::mc {

namespace c = constants;

void SimConfig::validate() const {
  std::ostringstream problems;
  if (!(omega_z > 0.0)) problems << " omega_z must be positive;";
  if (!(time_step_s > 0.0)) problems << " time_step must be positive;";
  if (omega_z > 0.0 && time_step_s > 0.05 * c::two_pi / omega_z * (1.0 + 1e-12)) {
    problems << " time_step exceeds 0.05 trap periods;";
  }
  if (!(max_time_s > 0.0)) problems << " max_time must be positive;";
  if (n_trajectories < 1) problems << " n_trajectories must be >= 1;";
  if (!(kick_rate >= 0.0)) problems << " kick_rate must be non-negative;";
  if (!(kick_energy >= 0.0)) problems << " kick_energy must be non-negative;";
  if (!(mass_kg > 0.0)) problems << " mass must be positive;";
  if (const auto text = problems.str(); !text.empty()) throw ConfigError("invalid Monte Carlo config:" + text);
}

namespace {

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

Vec3 isotropic_unit(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> cos_theta(-1.0, 1.0);
  std::uniform_real_distribution<double> phi(0.0, c::two_pi);
  const double ct = cos_theta(rng);
  const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
  const double p = phi(rng);
  return {st * std::cos(p), st * std::sin(p), ct};
}

}  // namespace

TrajectoryResult integrate_trajectory(const SimConfig& config, const PotentialFn& potential,
                                      const PhaseSpacePoint& initial, std::uint64_t stream) {
  config.validate();
  auto rng = make_stream(config.seed, stream);
  std::exponential_distribution<double> waiting(config.kick_rate > 0.0 ? config.kick_rate : 1.0);
  const double kick_speed = std::sqrt(2.0 * config.kick_energy / config.mass_kg);
  const double inv_m = 1.0 / config.mass_kg;
  const double dt = config.time_step_s;

  Vec3 x = initial.position;
  Vec3 v = initial.velocity;
  PotentialSample s = potential(x);
  const auto energy = [&] { return 0.5 * config.mass_kg * v.norm2() + s.energy; };
  if (s.contact || !(energy() < config.escape_energy)) {
    throw ConfigError("initial phase-space point is outside the trap basin");
  }

  TrajectoryResult result;
  double next_kick =
      config.kick_rate > 0.0 ? waiting(rng) : std::numeric_limits<double>::infinity();
  const auto n_steps = static_cast<std::size_t>(std::ceil(config.max_time_s / dt));
  if (config.trace_every > 0) result.trace.push_back({0.0, energy()});

  double t = 0.0;
  for (std::size_t step = 1; step <= n_steps; ++step) {
    v += (-0.5 * dt * inv_m) * s.gradient;
    x += dt * v;
    s = potential(x);
    t = dt * static_cast<double>(step);
    if (s.contact) {
      result.escaped = true;
      result.surface_contact = true;
      result.escape_time_s = t;
      result.final_energy_J = 0.5 * config.mass_kg * v.norm2();
      result.final_state = {x, v};
      return result;
    }
    v += (-0.5 * dt * inv_m) * s.gradient;

    while (next_kick <= t) {
      v += kick_speed * isotropic_unit(rng);
      ++result.kicks;
      next_kick += waiting(rng);
    }

    const double e = energy();
    if (config.trace_every > 0 && step % config.trace_every == 0) result.trace.push_back({t, e});
    if (e > config.escape_energy) {
      result.escaped = true;
      result.escape_time_s = t;
      result.final_energy_J = e;
      result.final_state = {x, v};
      return result;
    }
  }
  result.escape_time_s = std::min(t, config.max_time_s);
  result.final_energy_J = energy();
  result.final_state = {x, v};
  return result;
}

TrapContext make_trap_context(const TrapSetup& setup, const TrapReport& trap) {
  if (!trap.existence_ok) throw DomainError("Monte Carlo oracle needs an existing trap");
  TrapContext ctx;
  ctx.potential = [setup](const Vec3& p) {
    const double rho = std::sqrt(p.x * p.x + p.y * p.y);
    const auto g = total_potential_with_gradient({rho, p.z}, setup, true);
    if (g.inside) return PotentialSample{0.0, {}, true};
    Vec3 grad{0.0, 0.0, g.d_z};
    if (rho > 0.0) {
      grad.x = g.d_rho * p.x / rho;
      grad.y = g.d_rho * p.y / rho;
    }
    return PotentialSample{g.value, grad, false};
  };
  ctx.minimum = {0.0, 0.0, trap.z_trap_m};
  ctx.omega_z = trap.omega_tz;
  ctx.omega_rho = trap.omega_trho;
  ctx.mass_kg = setup.atom.mass_kg;
  ctx.escape_energy = trap.escape_energy();
  return ctx;
}

PhaseSpacePoint sample_initial_state(const TrapContext& context, std::uint64_t seed, std::uint64_t stream) {
  // A separate stream family keeps the start independent of the kick sequence.
  auto rng = make_stream(seed ^ 0x9e3779b97f4a7c15ULL, stream);
  std::normal_distribution<double> unit(0.0, 1.0);
  const double m = context.mass_kg;
  const double sx_rho = std::sqrt(c::hbar / (2.0 * m * context.omega_rho));
  const double sx_z = std::sqrt(c::hbar / (2.0 * m * context.omega_z));
  const double sv_rho = std::sqrt(c::hbar * context.omega_rho / (2.0 * m));
  const double sv_z = std::sqrt(c::hbar * context.omega_z / (2.0 * m));
  for (int attempt = 0; attempt < 1000; ++attempt) {
    PhaseSpacePoint p;
    p.position = context.minimum + Vec3{sx_rho * unit(rng), sx_rho * unit(rng), sx_z * unit(rng)};
    p.velocity = {sv_rho * unit(rng), sv_rho * unit(rng), sv_z * unit(rng)};
    const auto s = context.potential(p.position);
    if (!s.contact && 0.5 * m * p.velocity.norm2() + s.energy < context.escape_energy) return p;
  }
  throw DomainError("could not draw an initial state inside the trap basin");
}

namespace {

// Empirical quantile with censored runs sorted to +inf.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  if (std::isinf(sorted[hi])) return sorted[hi];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

LifetimeEstimate estimate_lifetime_mc(const SimConfig& config, const TrapContext& context, int threads) {
  config.validate();
  LifetimeEstimate out;
  const auto n = static_cast<std::size_t>(config.n_trajectories);
  out.trajectories.resize(n);

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const auto start = sample_initial_state(context, config.seed, i);
      out.trajectories[i] = integrate_trajectory(config, context.potential, start, i);
    }
  };
  const int n_threads = std::clamp(threads, 1, static_cast<int>(std::min<std::size_t>(n, 256)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
  }

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> times;
  times.reserve(n);
  std::size_t censored = 0;
  for (const auto& r : out.trajectories) {
    times.push_back(r.escaped ? r.escape_time_s : inf);
    if (!r.escaped) ++censored;
  }
  std::sort(times.begin(), times.end());
  out.censored_fraction = static_cast<double>(censored) / static_cast<double>(n);
  out.all_censored = censored == n;
  if (out.all_censored) {
    out.median_is_lower_bound = true;
    return out;
  }

  out.q1_s = quantile(times, 0.25);
  out.median_s = quantile(times, 0.5);
  out.q3_s = quantile(times, 0.75);
  out.median_is_lower_bound = std::isinf(out.median_s);
  if (std::isinf(out.median_s)) out.median_s = config.max_time_s;
  if (std::isinf(out.q1_s)) out.q1_s = config.max_time_s;
  if (std::isinf(out.q3_s)) out.q3_s = config.max_time_s;
  out.iqr_s = out.q3_s - out.q1_s;
  return out;
}

}  // namespace nanotrap::mc
