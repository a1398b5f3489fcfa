#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nanotrap/config.hpp"
#include "nanotrap/dynamics.hpp"
#include "nanotrap/io.hpp"
#include "nanotrap/rates.hpp"

// Everything behind the command-line front end: typed configuration,
// single-point reports, figure data, sweeps, the loading check and the
// Monte Carlo comparison. Results come back as CSV tables and JSON text; the
// CLI only writes them out.
namespace nanotrap::pipeline {

inline constexpr std::string_view kSchemaVersion = "1";

enum class DetuningMode { fixed, hold_omega };

struct SweepSpec {
  enum class Parameter { z0, intensity, detuning, trap_frequency };
  Parameter parameter = Parameter::intensity;
  double min = 0.0;
  double max = 0.0;
  int n_points = 2;
  bool log_spacing = true;

  /// n_points >= 2, min < max, positive bounds for log spacing.
  void validate() const;
  [[nodiscard]] std::vector<double> values() const;
};

std::string_view to_string(SweepSpec::Parameter p);

struct McSettings {
  int n_trajectories = 1000;
  double time_step_fraction = 0.02;
  std::optional<double> max_time_s;
  double max_time_factor = 10.0;
  std::optional<double> kick_rate;
};

struct RunConfig {
  AtomSpecies atom = rubidium87();
  TipMaterial material = silver();
  double z0_m = 0.0;
  double laser_wavelength_m = 0.0;
  double intensity_W_m2 = 0.0;
  DetuningMode detuning_mode = DetuningMode::hold_omega;
  double detuning_rad_s = 0.0;
  double target_omega_tz = 0.0;
  double light_shift_weight = 1.0;
  bool allow_over_cap = false;
  NoiseEnvironment noise;
  RateChannels channels;
  int n_scan = 10000;
  Grid2D grid{};
  int fig1c_points = 400;
  double fig1c_d_max_over_ztrap = 1000.0;
  double fig2a_z0_min_m = 0.0;
  double fig2a_z0_max_m = 0.0;
  int fig2a_points = 10;
  double fig2a_vdw_margin = 100.0;
  double fig2b_intensity_min_isat = 0.0;
  double fig2b_intensity_max_isat = 0.0;
  int fig2b_points = 26;
  SweepSpec sweep;
  McSettings mc;
  int loading_points = 200;
  double loading_z_max_over_z0 = 1000.0;
  std::uint64_t seed = 0;
  int threads = 1;

  /// The resolved key-value configuration, every default materialised.
  std::vector<std::pair<std::string, std::string>> echo;
};

/// Typed view of a ConfigStore. Throws ConfigError naming the key on bad
/// values.
RunConfig resolve_config(const ConfigStore& store);

/// One parameter point of a sweep.
struct PointRequest {
  double z0_m;
  double intensity_W_m2;
  DetuningMode mode;
  double detuning_rad_s;      // used when mode == fixed
  double target_omega_tz;     // used when mode == hold_omega
};

PointRequest default_request(const RunConfig& config);

struct PointResult {
  std::string status;  // ok | no_trap | over_cap | unsolvable
  std::optional<TrapSetup> setup;
  TrapReport trap;
  std::optional<RateReport> rates;
  CapCheck cap{};
  bool small_detuning = false;  // delta < 100 Gamma_0
  std::vector<std::string> warnings;
  std::string error;  // why the point is unsolvable
};

/// Builds the setup (solving the detuning when holding omega), finds the
/// trap and, if it exists, the rates. Physics failures become a status.
PointResult evaluate_point(const RunConfig& config, const PointRequest& request);

/// The configured point. Throws DomainError when the intensity exceeds the
/// material cap without allow_over_cap, or the point cannot be set up.
PointResult run_trap_report(const RunConfig& config);
std::string trap_report_json(const RunConfig& config, const PointResult& result);

enum class Figure { intensity_map, potential_profile, distance_curve, lifetime_curves };
/// fig1b | fig1c | fig2a_distance | fig2b.
Figure figure_from_name(std::string_view name);
std::string_view figure_name(Figure f);
CsvTable run_figure(Figure which, const RunConfig& config);

CsvTable run_sweep(const RunConfig& config);

struct LoadingCheck {
  Complex z_perp_formula;    // z0 (eps - 1) / (eps + 1)
  double z_perp_numeric_m;   // |z| where |E/E0 - 1| = 1, found on the computed field
  double z_trap_m;
  CsvTable table;
};
LoadingCheck run_loading_check(const RunConfig& config);
std::string loading_check_json(const RunConfig& config, const LoadingCheck& check);

struct McValidation {
  PointResult point;
  mc::SimConfig sim;
  double analytic_lifetime_s = 0.0;
  mc::LifetimeEstimate estimate;
  double ratio = 0.0;   // MC median / analytic lifetime (0 if undefined)
  bool consistent = false;
  CsvTable samples;
};
/// Throws DomainError if the configured point has no trap.
McValidation run_mc_validate(const RunConfig& config);
std::string mc_validation_json(const RunConfig& config, const McValidation& v);

}  // namespace nanotrap::pipeline
