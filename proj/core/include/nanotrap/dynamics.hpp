#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "nanotrap/potential.hpp"

// Monte Carlo escape-time oracle: classical trajectories in the trap
// potential, heated by isotropic momentum kicks arriving as a Poisson
// process. Integration is velocity-Verlet (leapfrog) in Cartesian
// coordinates; with an axisymmetric potential the z angular momentum is
// conserved between kicks.
namespace nanotrap::mc {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  friend Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
  [[nodiscard]] double norm2() const { return x * x + y * y + z * z; }
};

struct PotentialSample {
  double energy = 0.0;  // J
  Vec3 gradient;        // J/m
  bool contact = false; // point is on or inside the material surface
};

using PotentialFn = std::function<PotentialSample(const Vec3&)>;

struct SimConfig {
  double time_step_s = 0.0;
  double max_time_s = 0.0;
  int n_trajectories = 1;
  std::uint64_t seed = 0;
  double kick_rate = 0.0;    // Poisson rate of jump events, 1/s
  double kick_energy = 0.0;  // mean energy per event, hbar omega_z
  double mass_kg = 0.0;
  double escape_energy = 0.0;  // absolute threshold on the mechanical energy, J
  double omega_z = 0.0;        // reference trap frequency for the step bound
  std::size_t trace_every = 0; // record (t, E) every N steps; 0 disables

  /// time_step in (0, 0.05 * 2 pi / omega_z], n_trajectories >= 1,
  /// non-negative rates. Throws ConfigError.
  void validate() const;
};

struct PhaseSpacePoint {
  Vec3 position;
  Vec3 velocity;
};

struct EnergySample {
  double time_s;
  double energy_J;
};

struct TrajectoryResult {
  bool escaped = false;
  bool surface_contact = false;
  double escape_time_s = 0.0;  // max_time when censored
  double final_energy_J = 0.0;
  std::size_t kicks = 0;
  PhaseSpacePoint final_state;
  std::vector<EnergySample> trace;
};

/// One trajectory. `stream` selects an independent RNG stream derived from
/// (config.seed, stream). Throws ConfigError if `initial` is not inside the
/// trap basin.
TrajectoryResult integrate_trajectory(const SimConfig& config, const PotentialFn& potential,
                                      const PhaseSpacePoint& initial, std::uint64_t stream);

/// The trap as seen by the oracle.
struct TrapContext {
  PotentialFn potential;
  Vec3 minimum;         // trap centre (on the axis)
  double omega_z = 0.0;
  double omega_rho = 0.0;
  double mass_kg = 0.0;
  double escape_energy = 0.0;
};

/// Cartesian wrapper of total_potential_with_gradient (vdW included) for an
/// existing trap.
TrapContext make_trap_context(const TrapSetup& setup, const TrapReport& trap);

/// Ground-state-matched Gaussian start: per axis, position width
/// sqrt(hbar / (2 m omega_i)) and velocity width sqrt(hbar omega_i / (2 m)).
PhaseSpacePoint sample_initial_state(const TrapContext& context, std::uint64_t seed, std::uint64_t stream);

struct LifetimeEstimate {
  bool all_censored = false;
  bool median_is_lower_bound = false;  // half or more of the runs were censored
  double median_s = 0.0;
  double q1_s = 0.0;
  double q3_s = 0.0;
  double iqr_s = 0.0;
  double censored_fraction = 0.0;
  std::vector<TrajectoryResult> trajectories;
};

/// Runs config.n_trajectories trajectories from sample_initial_state. The
/// result does not depend on `threads`.
LifetimeEstimate estimate_lifetime_mc(const SimConfig& config, const TrapContext& context, int threads = 1);

}  // namespace nanotrap::mc
