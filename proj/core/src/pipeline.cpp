#include "nanotrap/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include <json.hpp>

#include "nanotrap/constants.hpp"
#include "nanotrap/errors.hpp"

namespace nanotrap::pipeline {

namespace c = constants;
using json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Evaluates fn(i) for i in [0, n) on `threads` workers; results are stored
// by index so the output order never depends on scheduling.
template <typename Fn>
auto parallel_map(std::size_t n, int threads, Fn fn) {
  using Result = decltype(fn(std::size_t{0}));
  std::vector<Result> out(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) out[i] = fn(i);
  };
  const int workers = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(n, 1)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < workers; ++k) pool.emplace_back(worker);
  }
  return out;
}

double positive(const ConfigStore& store, std::string_view key) {
  const double v = store.get_double(key);
  if (!(std::isfinite(v) && v > 0.0)) throw ConfigError(std::string(key) + ": must be positive, got " + store.get(key));
  return v;
}

int count(const ConfigStore& store, std::string_view key, int minimum) {
  const auto v = store.get_integer(key);
  if (v < minimum) {
    throw ConfigError(std::string(key) + ": must be at least " + std::to_string(minimum) + ", got " + store.get(key));
  }
  return static_cast<int>(v);
}

std::vector<double> spaced(double lo, double hi, int n, bool log) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    v[i] = log ? lo * std::pow(hi / lo, t) : lo + t * (hi - lo);
  }
  if (n > 1) v.back() = hi;
  return v;
}

void add_metadata(CsvTable& table, std::string_view kind, const RunConfig& config) {
  table.metadata.emplace_back("schema", "nanotrap." + std::string(kind) + "/" + std::string(kSchemaVersion));
  for (const auto& [k, v] : config.echo) table.metadata.emplace_back("config." + k, v);
}

json config_json(const RunConfig& config) {
  json j = json::object();
  for (const auto& [k, v] : config.echo) j[k] = v;
  return j;
}

// JSON has no infinity; non-finite values become null.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

void SweepSpec::validate() const {
  if (n_points < 2) throw ConfigError("sweep.n_points: must be at least 2");
  if (!(min < max)) throw ConfigError("sweep: min must be below max");
  if (log_spacing && !(min > 0.0)) throw ConfigError("sweep: log spacing needs a positive range");
}

std::vector<double> SweepSpec::values() const { return spaced(min, max, n_points, log_spacing); }

std::string_view to_string(SweepSpec::Parameter p) {
  switch (p) {
    case SweepSpec::Parameter::z0: return "z0";
    case SweepSpec::Parameter::intensity: return "intensity";
    case SweepSpec::Parameter::detuning: return "detuning";
    case SweepSpec::Parameter::trap_frequency: return "trap_frequency";
  }
  return "?";
}

namespace {

template <class F>
auto keyed(std::string_view key, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

}  // namespace

RunConfig resolve_config(const ConfigStore& store) {
  auto atom = keyed("atom.species", [&] { return species_by_name(store.get("atom.species")); });
  if (const auto& file = store.get("atom.override_file"); !file.empty()) atom = apply_species_overrides(atom, file);
  auto material = keyed("material.name", [&] { return material_by_name(store.get("material.name")); });
  if (const auto& file = store.get("material.table_file"); !file.empty()) {
    material.permittivity = PermittivityTable::load(file);
  }
  RunConfig cfg;
  cfg.atom = std::move(atom);
  cfg.material = std::move(material);
  cfg.material.resistivity_ohm_m = positive(store, "material.resistivity_ohm_m");
  cfg.material.lattice_spacing_m = positive(store, "material.lattice_spacing_m");
  cfg.material.max_intensity_W_m2 = positive(store, "material.max_intensity_W_m2");
  cfg.material.adatom_dipole_C_m = store.get_double("material.adatom_dipole_C_m");
  if (cfg.material.adatom_dipole_C_m < 0.0) throw ConfigError("material.adatom_dipole_C_m: must be non-negative");

  cfg.z0_m = positive(store, "tip.z0_nm") * c::nm;
  cfg.laser_wavelength_m = positive(store, "drive.laser_wavelength_nm") * c::nm;
  cfg.intensity_W_m2 = store.get_double("drive.intensity_W_m2");
  if (!(cfg.intensity_W_m2 >= 0.0)) throw ConfigError("drive.intensity_W_m2: must be non-negative");
  if (const auto& mode = store.get("drive.detuning_mode"); mode == "fixed") {
    cfg.detuning_mode = DetuningMode::fixed;
  } else if (mode == "hold_omega") {
    cfg.detuning_mode = DetuningMode::hold_omega;
  } else {
    throw ConfigError("drive.detuning_mode: expected fixed or hold_omega, got '" + mode + "'");
  }
  cfg.detuning_rad_s = positive(store, "drive.detuning_rad_s");
  cfg.target_omega_tz = positive(store, "drive.target_omega_tz_rad_s");
  cfg.light_shift_weight = positive(store, "drive.light_shift_weight");
  cfg.allow_over_cap = store.get_bool("drive.allow_over_cap");

  cfg.noise.temperature_K = store.get_double("noise.temperature_K");
  cfg.noise.magnetic_prefactor = store.get_double("noise.magnetic_prefactor");
  cfg.noise.geometric_reduction = store.get_optional_double("noise.geometric_reduction");
  cfg.noise.purcell_enhancement = store.get_double("noise.purcell_enhancement");
  try {
    cfg.noise.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("noise: ") + e.what());
  }
  cfg.channels = {store.get_bool("channels.optical"), store.get_bool("channels.magnetic"),
                  store.get_bool("channels.shot")};

  cfg.n_scan = count(store, "trap.n_scan", 10000);
  cfg.grid = Grid2D{store.get_double("grid.rho_min_nm") * c::nm, store.get_double("grid.rho_max_nm") * c::nm,
                    count(store, "grid.n_rho", 1),  store.get_double("grid.z_min_nm") * c::nm,
                    store.get_double("grid.z_max_nm") * c::nm, count(store, "grid.n_z", 1)};
  if (cfg.grid.rho_min_m < 0.0) throw ConfigError("grid.rho_min_nm: must be non-negative");

  cfg.fig1c_points = count(store, "fig1c.n_points", 2);
  cfg.fig1c_d_max_over_ztrap = positive(store, "fig1c.d_max_over_ztrap");
  cfg.fig2a_z0_min_m = positive(store, "fig2a.z0_min_nm") * c::nm;
  cfg.fig2a_z0_max_m = positive(store, "fig2a.z0_max_nm") * c::nm;
  cfg.fig2a_points = count(store, "fig2a.n_points", 2);
  cfg.fig2a_vdw_margin = positive(store, "fig2a.vdw_margin");
  cfg.fig2b_intensity_min_isat = positive(store, "fig2b.intensity_min_isat");
  cfg.fig2b_intensity_max_isat = positive(store, "fig2b.intensity_max_isat");
  cfg.fig2b_points = count(store, "fig2b.n_points", 2);

  const auto& param = store.get("sweep.parameter");
  if (param == "z0") {
    cfg.sweep.parameter = SweepSpec::Parameter::z0;
  } else if (param == "intensity") {
    cfg.sweep.parameter = SweepSpec::Parameter::intensity;
  } else if (param == "detuning") {
    cfg.sweep.parameter = SweepSpec::Parameter::detuning;
  } else if (param == "trap_frequency") {
    cfg.sweep.parameter = SweepSpec::Parameter::trap_frequency;
  } else {
    throw ConfigError("sweep.parameter: expected z0, intensity, detuning or trap_frequency, got '" + param + "'");
  }
  cfg.sweep.min = store.get_double("sweep.min");
  cfg.sweep.max = store.get_double("sweep.max");
  cfg.sweep.n_points = count(store, "sweep.n_points", 2);
  if (const auto& spacing = store.get("sweep.spacing"); spacing == "log") {
    cfg.sweep.log_spacing = true;
  } else if (spacing == "linear") {
    cfg.sweep.log_spacing = false;
  } else {
    throw ConfigError("sweep.spacing: expected linear or log, got '" + spacing + "'");
  }
  cfg.sweep.validate();

  cfg.mc.n_trajectories = count(store, "mc.n_trajectories", 1);
  cfg.mc.time_step_fraction = positive(store, "mc.time_step_fraction");
  if (cfg.mc.time_step_fraction > 0.05) throw ConfigError("mc.time_step_fraction: must not exceed 0.05");
  cfg.mc.max_time_s = store.get_optional_double("mc.max_time_s");
  cfg.mc.max_time_factor = positive(store, "mc.max_time_factor");
  cfg.mc.kick_rate = store.get_optional_double("mc.kick_rate");

  cfg.loading_points = count(store, "loading.n_points", 2);
  cfg.loading_z_max_over_z0 = positive(store, "loading.z_max_over_z0");
  if (cfg.loading_z_max_over_z0 <= 1.0) throw ConfigError("loading.z_max_over_z0: must exceed 1");

  const auto seed = store.get_integer("run.seed");
  if (seed < 0) throw ConfigError("run.seed: must be non-negative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.threads = count(store, "run.threads", 1);
  cfg.echo = store.entries();
  return cfg;
}

PointRequest default_request(const RunConfig& config) {
  return {config.z0_m, config.intensity_W_m2, config.detuning_mode, config.detuning_rad_s, config.target_omega_tz};
}

PointResult evaluate_point(const RunConfig& config, const PointRequest& request) {
  PointResult r;
  try {
    const TipGeometry tip(request.z0_m);
    const Complex eps = permittivity_at(config.material, config.laser_wavelength_m);
    const double rabi = rabi_frequency_from_intensity(config.atom, request.intensity_W_m2);
    const double delta = request.mode == DetuningMode::fixed
                             ? request.detuning_rad_s
                             : detuning_for_trap_frequency(config.atom, tip, eps, rabi, request.target_omega_tz,
                                                           config.light_shift_weight);
    if (!(delta > 0.0)) throw DomainError("detuning must be positive");
    TrapSetup setup{config.atom, tip, eps,
                    TrapDrive{request.intensity_W_m2, config.laser_wavelength_m, delta, rabi, config.light_shift_weight}};
    r.cap = intensity_cap_check(request.intensity_W_m2, config.material);
    r.small_detuning = delta < 100.0 * config.atom.linewidth_rad_s;
    r.trap = find_trap(setup, config.material, {.n_scan = config.n_scan, .include_vdw = true, .numeric_frequencies = true});
    r.warnings = r.trap.validity_warnings;
    if (r.small_detuning) r.warnings.emplace_back("detuning below 100 Gamma_0: two-level light shift is marginal");
    if (!r.cap.ok) r.warnings.emplace_back("intensity exceeds the material cap");
    if (r.trap.existence_ok) r.rates = compute_rates(setup, r.trap, config.material, config.noise, config.channels);
    r.setup = std::move(setup);
    if (!r.trap.existence_ok) {
      r.status = "no_trap";
    } else if (!r.cap.ok && !config.allow_over_cap) {
      r.status = "over_cap";
    } else {
      r.status = "ok";
    }
  } catch (const DomainError& e) {
    r.status = "unsolvable";
    r.error = e.what();
  } catch (const RangeError& e) {
    r.status = "unsolvable";
    r.error = e.what();
  }
  return r;
}

PointResult run_trap_report(const RunConfig& config) {
  auto r = evaluate_point(config, default_request(config));
  if (r.status == "unsolvable") throw DomainError(r.error);
  if (!r.cap.ok && !config.allow_over_cap) {
    throw DomainError("intensity " + format_number(config.intensity_W_m2) + " W/m^2 exceeds the " +
                      config.material.name + " cap of " + format_number(config.material.max_intensity_W_m2) +
                      " W/m^2 (set drive.allow_over_cap = true to override)");
  }
  return r;
}

std::string trap_report_json(const RunConfig& config, const PointResult& r) {
  json j;
  j["schema"] = "nanotrap.trap_report/" + std::string(kSchemaVersion);
  j["status"] = r.status;
  if (!r.error.empty()) j["error"] = r.error;
  if (r.setup) {
    const auto& s = *r.setup;
    const double u0 = s.drive.u0();
    const double hg = c::hbar * s.atom.linewidth_rad_s;
    j["atom"] = s.atom.name;
    j["material"] = config.material.name;
    j["z0_m"] = s.tip.z0();
    j["epsilon_real"] = s.epsilon.real();
    j["epsilon_imag"] = s.epsilon.imag();
    j["intensity_W_m2"] = s.drive.intensity_W_m2;
    j["intensity_over_isat"] = s.drive.intensity_W_m2 / s.atom.saturation_intensity_W_m2;
    j["detuning_rad_s"] = s.drive.detuning_rad_s;
    j["detuning_over_gamma0"] = s.drive.detuning_rad_s / s.atom.linewidth_rad_s;
    j["rabi_rad_s"] = s.drive.rabi_rad_s;
    j["U0_J"] = u0;
    j["U0_over_hbar_gamma0"] = u0 / hg;
    const auto& t = r.trap;
    j["existence_ok"] = t.existence_ok;
    j["existence_analytic"] = t.existence_analytic;
    j["z_trap_m"] = t.z_trap_m;
    j["z_trap_analytic_m"] = t.z_trap_analytic_m;
    j["d_surface_m"] = t.d_surface_m;
    j["d_surface_nm"] = t.d_surface_m / c::nm;
    j["residual_intensity"] = t.residual_intensity;
    j["U_min_J"] = t.u_min;
    j["U_depth_J"] = t.u_depth;
    j["U_depth_over_U0"] = t.u_depth / u0;
    j["barrier_surface_J"] = number_or_null(t.barrier_surface);
    j["barrier_infinity_J"] = number_or_null(t.barrier_infinity);
    j["omega_tz_rad_s"] = t.omega_tz;
    j["omega_trho_rad_s"] = t.omega_trho;
    j["omega_tz_over_2pi_Hz"] = t.omega_tz / c::two_pi;
    j["a_z_m"] = t.a_z;
    j["a_z_nm"] = t.a_z / c::nm;
    j["enhanced_recoil_J"] = t.enhanced_recoil;
    j["numeric_omega_tz_rad_s"] = t.numeric.omega_z;
    j["numeric_omega_trho_rad_s"] = t.numeric.omega_rho;
    j["numeric_saddle"] = t.numeric.saddle;
    j["patch_force_bound_N"] = t.patch_force_bound;
    j["patch_displacement_m"] = t.patch_displacement;
    j["patch_is_upper_bound"] = true;
    j["cap_ok"] = r.cap.ok;
    j["max_intensity_W_m2"] = r.cap.max_intensity_W_m2;
    j["small_detuning"] = r.small_detuning;
  }
  if (r.rates) {
    const auto& q = *r.rates;
    j["gamma_jump_opt_s"] = q.gamma_jump_opt;
    j["gamma_flip_mag_s"] = q.gamma_flip_mag;
    j["gamma_jump_mag_s"] = q.gamma_jump_mag;
    j["gamma_shot_bound_s"] = q.gamma_shot_bound;
    j["heating_power_W"] = q.heating_power;
    j["lifetime_s"] = number_or_null(q.lifetime);
    j["lifetime_infinite"] = std::isinf(q.lifetime);
    j["spin_flip_time_s"] = number_or_null(q.spin_flip_time);
    j["scattering_coherence_time_s"] = number_or_null(q.scattering_coherence_time);
    j["scattering_coherence_time_is_approximate"] = true;
    j["total_emission_rate_s"] = q.total_emission_rate;
    j["geometric_reduction_applied"] = q.geometric_reduction;
  }
  j["temperature_K"] = config.noise.temperature_K;
  j["magnetic_prefactor"] = config.noise.magnetic_prefactor;
  j["purcell_enhancement"] = config.noise.purcell_enhancement;
  j["channels"] = {{"optical", config.channels.optical},
                   {"magnetic", config.channels.magnetic},
                   {"shot", config.channels.shot}};
  j["warnings"] = r.warnings;
  j["config"] = config_json(config);
  return j.dump(2) + "\n";
}

Figure figure_from_name(std::string_view name) {
  if (name == "fig1b") return Figure::intensity_map;
  if (name == "fig1c") return Figure::potential_profile;
  if (name == "fig2a_distance") return Figure::distance_curve;
  if (name == "fig2b") return Figure::lifetime_curves;
  throw ConfigError("unknown figure '" + std::string(name) + "' (fig1b, fig1c, fig2a_distance, fig2b)");
}

std::string_view figure_name(Figure f) {
  switch (f) {
    case Figure::intensity_map: return "fig1b";
    case Figure::potential_profile: return "fig1c";
    case Figure::distance_curve: return "fig2a_distance";
    case Figure::lifetime_curves: return "fig2b";
  }
  return "?";
}

namespace {

CsvTable intensity_map_table(const RunConfig& config) {
  const TipGeometry tip(config.z0_m);
  const Complex eps = permittivity_at(config.material, config.laser_wavelength_m);
  CsvTable table;
  add_metadata(table, "fig1b", config);
  table.columns = {"rho_nm", "z_nm", "intensity_factor"};
  for (const auto& s : intensity_map(config.grid, tip, eps)) {
    table.rows.push_back({format_number(s.rho_m / c::nm), format_number(s.z_m / c::nm),
                          format_number(s.intensity_factor)});
  }
  return table;
}

CsvTable potential_profile_table(const RunConfig& config) {
  const auto point = evaluate_point(config, default_request(config));
  if (!point.setup) throw DomainError("fig1c: " + point.error);
  const auto& setup = *point.setup;
  const double u0 = setup.drive.u0();
  const double z0 = setup.tip.z0();
  const double zt = std::abs(point.trap.z_trap_analytic_m);

  CsvTable table;
  add_metadata(table, "fig1c", config);
  table.metadata.emplace_back("U0_J", format_number(u0));
  table.metadata.emplace_back("z_trap_nm", format_number(point.trap.z_trap_m / c::nm));
  table.columns = {"z_nm", "U_opt_over_U0", "U_vdw_over_U0", "U_total_over_U0"};
  for (double d : spaced(1e-2 * z0, config.fig1c_d_max_over_ztrap * zt, config.fig1c_points, true)) {
    const CylPoint p{0.0, -(z0 + d)};
    const double u_opt = optical_potential(p, setup.drive, setup.tip, setup.epsilon);
    const double u_vdw = vdw_potential(distance_to_surface(p, setup.tip), setup.atom);
    table.rows.push_back({format_number(p.z / c::nm), format_number(u_opt / u0), format_number(u_vdw / u0),
                          format_number((u_opt + u_vdw) / u0)});
  }
  return table;
}

CsvTable distance_curve_table(const RunConfig& config) {
  const Complex eps = permittivity_at(config.material, config.laser_wavelength_m);
  const auto z0s = spaced(config.fig2a_z0_min_m, config.fig2a_z0_max_m, config.fig2a_points, false);
  const auto rows = parallel_map(z0s.size(), config.threads, [&](std::size_t i) {
    const TipGeometry tip(z0s[i]);
    const double rabi = rabi_frequency_from_intensity(config.atom, config.intensity_W_m2);
    const double u0_target = config.fig2a_vdw_margin * c::hbar * existence_threshold_rate(config.atom, tip, eps);
    const double delta = config.light_shift_weight * c::hbar * rabi * rabi / u0_target;
    std::vector<std::string> row;
    const double d_formula = std::abs(eps) * tip.z0();
    try {
      const TrapSetup setup{config.atom, tip, eps,
                            TrapDrive{config.intensity_W_m2, config.laser_wavelength_m, delta, rabi,
                                      config.light_shift_weight}};
      const auto trap = find_trap(setup, config.material, {.n_scan = config.n_scan, .include_vdw = true,
                                                           .numeric_frequencies = false});
      const double d_num = trap.existence_ok ? trap.d_surface_m : kNaN;
      row = {format_number(tip.z0() / c::nm), format_number(std::abs(eps)), format_number(d_formula / c::nm),
             format_number(d_num / c::nm), format_number((d_num - d_formula) / d_formula),
             trap.existence_ok ? "ok" : "no_trap"};
    } catch (const DomainError&) {
      row = {format_number(tip.z0() / c::nm), format_number(std::abs(eps)), format_number(d_formula / c::nm),
             "nan", "nan", "unsolvable"};
    }
    return row;
  });
  CsvTable table;
  add_metadata(table, "fig2a_distance", config);
  table.columns = {"z0_nm", "abs_eps", "d_formula_nm", "d_numeric_nm", "relative_difference", "status"};
  table.rows = rows;
  return table;
}

struct LifetimeCurve {
  std::string_view id;
  double z0_m;
  double omega_z;
};
constexpr LifetimeCurve kLifetimeCurves[] = {
    {"z0_3nm_omega_1e7", 3e-9, 1e7},
    {"z0_3nm_omega_1e8", 3e-9, 1e8},
    {"z0_1nm_omega_1e8", 1e-9, 1e8},
};

std::vector<std::string> rate_columns(const PointResult& r) {
  const auto v = [](double x) { return format_number(x); };
  if (!r.rates) return {"nan", "nan", "nan", "nan", "nan", "nan"};
  const auto& q = *r.rates;
  return {v(r.trap.u_depth), v(q.lifetime), v(q.spin_flip_time), v(q.gamma_jump_opt), v(q.gamma_jump_mag),
          v(q.gamma_shot_bound)};
}

CsvTable lifetime_curves_table(const RunConfig& config) {
  const auto intensities =
      spaced(config.fig2b_intensity_min_isat, config.fig2b_intensity_max_isat, config.fig2b_points, true);
  const std::size_t per_curve = intensities.size();
  const std::size_t n = per_curve * std::size(kLifetimeCurves);
  const auto results = parallel_map(n, config.threads, [&](std::size_t i) {
    const auto& curve = kLifetimeCurves[i / per_curve];
    const double intensity = intensities[i % per_curve] * config.atom.saturation_intensity_W_m2;
    return evaluate_point(config, {curve.z0_m, intensity, DetuningMode::hold_omega, 0.0, curve.omega_z});
  });

  CsvTable table;
  add_metadata(table, "fig2b", config);
  table.columns = {"curve",           "z0_nm",         "target_omega_tz_rad_s", "intensity_over_isat",
                   "intensity_W_m2",  "detuning_rad_s", "detuning_over_gamma0", "status",
                   "cap_ok",          "u_depth_J",     "lifetime_s",            "spin_flip_time_s",
                   "gamma_jump_opt_s", "gamma_jump_mag_s", "gamma_shot_bound_s"};
  for (std::size_t i = 0; i < n; ++i) {
    const auto& curve = kLifetimeCurves[i / per_curve];
    const auto& r = results[i];
    const double intensity_isat = intensities[i % per_curve];
    const double delta = r.setup ? r.setup->drive.detuning_rad_s : kNaN;
    std::vector<std::string> row = {std::string(curve.id),
                                    format_number(curve.z0_m / c::nm),
                                    format_number(curve.omega_z),
                                    format_number(intensity_isat),
                                    format_number(intensity_isat * config.atom.saturation_intensity_W_m2),
                                    format_number(delta),
                                    format_number(delta / config.atom.linewidth_rad_s),
                                    r.status,
                                    r.cap.ok ? "true" : "false"};
    for (auto& v : rate_columns(r)) row.push_back(std::move(v));
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace

CsvTable run_figure(Figure which, const RunConfig& config) {
  switch (which) {
    case Figure::intensity_map: return intensity_map_table(config);
    case Figure::potential_profile: return potential_profile_table(config);
    case Figure::distance_curve: return distance_curve_table(config);
    case Figure::lifetime_curves: return lifetime_curves_table(config);
  }
  throw ConfigError("unknown figure");
}

CsvTable run_sweep(const RunConfig& config) {
  using P = SweepSpec::Parameter;
  const auto values = config.sweep.values();
  const auto results = parallel_map(values.size(), config.threads, [&](std::size_t i) {
    auto req = default_request(config);
    switch (config.sweep.parameter) {
      case P::z0: req.z0_m = values[i] * c::nm; break;
      case P::intensity: req.intensity_W_m2 = values[i]; break;
      case P::detuning:
        req.mode = DetuningMode::fixed;
        req.detuning_rad_s = values[i];
        break;
      case P::trap_frequency:
        req.mode = DetuningMode::hold_omega;
        req.target_omega_tz = values[i];
        break;
    }
    return evaluate_point(config, req);
  });

  CsvTable table;
  add_metadata(table, "sweep", config);
  table.metadata.emplace_back("swept_parameter", std::string(to_string(config.sweep.parameter)));
  table.columns = {"value",          "status",           "z0_nm",          "intensity_W_m2",
                   "detuning_rad_s", "existence_ok",     "z_trap_nm",      "d_surface_nm",
                   "U0_J",           "u_depth_J",        "omega_tz_rad_s", "omega_trho_rad_s",
                   "a_z_nm",         "numeric_omega_tz_rad_s", "numeric_omega_trho_rad_s", "cap_ok",
                   "small_detuning", "gamma_flip_mag_s", "lifetime_s",     "spin_flip_time_s",
                   "gamma_jump_opt_s", "gamma_jump_mag_s", "gamma_shot_bound_s"};
  const auto v = [](double x) { return format_number(x); };
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& r = results[i];
    std::vector<std::string> row{v(values[i]), r.status};
    if (r.setup) {
      const auto& s = *r.setup;
      const auto& t = r.trap;
      row.insert(row.end(), {v(s.tip.z0() / c::nm), v(s.drive.intensity_W_m2), v(s.drive.detuning_rad_s),
                             t.existence_ok ? "true" : "false", v(t.z_trap_m / c::nm), v(t.d_surface_m / c::nm),
                             v(s.drive.u0()), v(t.u_depth), v(t.omega_tz), v(t.omega_trho), v(t.a_z / c::nm),
                             v(t.numeric.omega_z), v(t.numeric.omega_rho), r.cap.ok ? "true" : "false",
                             r.small_detuning ? "true" : "false",
                             v(r.rates ? r.rates->gamma_flip_mag : kNaN)});
    } else {
      row.resize(row.size() + 16, "nan");
    }
    const auto rates = rate_columns(r);
    row.insert(row.end(), rates.begin() + 1, rates.end());
    table.rows.push_back(std::move(row));
  }
  return table;
}

LoadingCheck run_loading_check(const RunConfig& config) {
  const TipGeometry tip(config.z0_m);
  const Complex eps = permittivity_at(config.material, config.laser_wavelength_m);
  LoadingCheck out;
  out.z_perp_formula = perpendicular_perturbation_length(tip, eps);
  out.z_trap_m = trap_position(tip, eps).z_m;

  // Where the induced part |E/E0 - 1| drops to the incident amplitude. It
  // falls off as 1/|z|, so bisect in log |z|.
  const auto excess = [&](double abs_z) { return std::abs(total_field_perpendicular(-abs_z, tip, eps) - 1.0) - 1.0; };
  double lo = std::log(1e-6 * tip.z0());
  double hi = std::log(1e6 * tip.z0());
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    (excess(std::exp(mid)) > 0.0 ? lo : hi) = mid;
  }
  out.z_perp_numeric_m = std::exp(0.5 * (lo + hi));

  add_metadata(out.table, "loading_check", config);
  out.table.metadata.emplace_back("z_perp_formula_nm", format_number(std::abs(out.z_perp_formula) / c::nm));
  out.table.metadata.emplace_back("z_perp_numeric_nm", format_number(out.z_perp_numeric_m / c::nm));
  out.table.metadata.emplace_back("z_trap_nm", format_number(out.z_trap_m / c::nm));
  out.table.columns = {"abs_z_nm", "field_re", "field_im", "field_abs"};
  for (double z : spaced(tip.z0(), config.loading_z_max_over_z0 * tip.z0(), config.loading_points, true)) {
    const Complex e = total_field_perpendicular(-z, tip, eps);
    out.table.rows.push_back(
        {format_number(z / c::nm), format_number(e.real()), format_number(e.imag()), format_number(std::abs(e))});
  }
  return out;
}

std::string loading_check_json(const RunConfig& config, const LoadingCheck& check) {
  json j;
  j["schema"] = "nanotrap.loading_check/" + std::string(kSchemaVersion);
  j["z_perp_formula_real_m"] = check.z_perp_formula.real();
  j["z_perp_formula_imag_m"] = check.z_perp_formula.imag();
  j["z_perp_formula_abs_m"] = std::abs(check.z_perp_formula);
  j["z_perp_numeric_m"] = check.z_perp_numeric_m;
  j["z_trap_m"] = check.z_trap_m;
  j["z_perp_over_abs_z_trap"] = check.z_perp_numeric_m / std::abs(check.z_trap_m);
  j["config"] = config_json(config);
  return j.dump(2) + "\n";
}

McValidation run_mc_validate(const RunConfig& config) {
  McValidation v;
  v.point = evaluate_point(config, default_request(config));
  if (v.point.status == "unsolvable") throw DomainError(v.point.error);
  if (!v.point.trap.existence_ok) throw DomainError("no trap at the configured point; nothing to validate");
  if (!v.point.cap.ok && !config.allow_over_cap) throw DomainError("intensity exceeds the material cap");
  const auto& trap = v.point.trap;
  const auto& rates = *v.point.rates;
  v.analytic_lifetime_s = rates.lifetime;

  const double period = c::two_pi / trap.omega_tz;
  const double enabled_rate = (config.channels.optical ? rates.gamma_jump_opt : 0.0) +
                              (config.channels.magnetic ? rates.gamma_jump_mag : 0.0) +
                              (config.channels.shot ? rates.gamma_shot_bound : 0.0);
  v.sim.time_step_s = config.mc.time_step_fraction * period;
  v.sim.kick_rate = config.mc.kick_rate.value_or(enabled_rate);
  v.sim.kick_energy = c::hbar * trap.omega_tz;
  v.sim.mass_kg = config.atom.mass_kg;
  v.sim.escape_energy = trap.escape_energy();
  v.sim.omega_z = trap.omega_tz;
  v.sim.n_trajectories = config.mc.n_trajectories;
  v.sim.seed = config.seed;
  // With an explicit kick rate the analytic reference follows it.
  if (config.mc.kick_rate) v.analytic_lifetime_s = lifetime(trap.u_depth, trap.omega_tz, *config.mc.kick_rate);
  if (config.mc.max_time_s) {
    v.sim.max_time_s = *config.mc.max_time_s;
  } else if (std::isfinite(v.analytic_lifetime_s)) {
    v.sim.max_time_s = config.mc.max_time_factor * v.analytic_lifetime_s;
  } else {
    v.sim.max_time_s = 1e4 * period;
  }

  const auto ctx = mc::make_trap_context(*v.point.setup, trap);
  v.estimate = mc::estimate_lifetime_mc(v.sim, ctx, config.threads);
  if (std::isinf(v.analytic_lifetime_s)) {
    v.consistent = v.estimate.all_censored;
  } else if (!v.estimate.all_censored) {
    v.ratio = v.estimate.median_s / v.analytic_lifetime_s;
    v.consistent = v.ratio >= 1.0 / 3.0 && v.ratio <= 3.0;
  }

  add_metadata(v.samples, "mc_samples", config);
  v.samples.columns = {"trajectory_id", "escaped", "escape_time_s", "final_energy_J"};
  for (std::size_t i = 0; i < v.estimate.trajectories.size(); ++i) {
    const auto& t = v.estimate.trajectories[i];
    v.samples.rows.push_back({std::to_string(i), t.escaped ? "true" : "false", format_number(t.escape_time_s),
                              format_number(t.final_energy_J)});
  }
  return v;
}

std::string mc_validation_json(const RunConfig& config, const McValidation& v) {
  json j;
  j["schema"] = "nanotrap.mc_validation/" + std::string(kSchemaVersion);
  j["analytic_lifetime_s"] = number_or_null(v.analytic_lifetime_s);
  j["analytic_lifetime_infinite"] = std::isinf(v.analytic_lifetime_s);
  j["mc_all_censored"] = v.estimate.all_censored;
  j["mc_median_s"] = v.estimate.all_censored ? json(nullptr) : json(v.estimate.median_s);
  j["mc_median_is_lower_bound"] = v.estimate.median_is_lower_bound;
  j["mc_q1_s"] = v.estimate.q1_s;
  j["mc_q3_s"] = v.estimate.q3_s;
  j["mc_iqr_s"] = v.estimate.iqr_s;
  j["mc_censored_fraction"] = v.estimate.censored_fraction;
  j["ratio_mc_over_analytic"] = v.ratio;
  j["consistent"] = v.consistent;
  j["n_trajectories"] = v.sim.n_trajectories;
  j["time_step_s"] = v.sim.time_step_s;
  j["max_time_s"] = v.sim.max_time_s;
  j["kick_rate_s"] = v.sim.kick_rate;
  j["kick_energy_J"] = v.sim.kick_energy;
  j["escape_energy_J"] = v.sim.escape_energy;
  j["seed"] = v.sim.seed;
  j["trap"] = json::parse(trap_report_json(config, v.point));
  return j.dump(2) + "\n";
}

}  // namespace nanotrap::pipeline
