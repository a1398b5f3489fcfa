#include "nanotrap/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "nanotrap/errors.hpp"
#include "nanotrap/io.hpp"
#include "nanotrap/rates.hpp"

namespace nanotrap {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<KeyValueEntry> parse_key_value(std::istream& in, std::string_view source) {
  std::vector<KeyValueEntry> entries;
  std::string section;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto cut = line.find_first_of("#;"); cut != std::string_view::npos) line = line.substr(0, cut);
    line = trim(line);
    if (line.empty()) continue;
    const auto here = std::string(source) + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(here + ": unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) throw ConfigError(here + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(here + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(here + ": missing key before '='");
    entries.push_back({section, std::string(key), std::string(trim(line.substr(eq + 1))), line_no});
  }
  return entries;
}

double parse_double(std::string_view text, std::string_view where) {
  const auto t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(std::string(where) + ": expected a number, got '" + std::string(text) + "'");
  }
  return value;
}

long long parse_integer(std::string_view text, std::string_view where) {
  const auto t = trim(text);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(std::string(where) + ": expected an integer, got '" + std::string(text) + "'");
  }
  return value;
}

bool parse_bool(std::string_view text, std::string_view where) {
  const auto t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(std::string(where) + ": expected true/false, got '" + std::string(text) + "'");
}

const std::vector<ConfigKey>& config_keys() {
  static const std::string prefactor = format_number(kCalibratedMagneticPrefactor);
  static const std::vector<ConfigKey> keys = {
      {"atom.species", "Rb87", "built-in atom species"},
      {"atom.override_file", "", "optional key-value file overriding species fields"},
      {"material.name", "silver", "built-in tip material"},
      {"material.table_file", "", "optional permittivity table (wavelength_nm eps_real eps_imag)"},
      {"material.resistivity_ohm_m", "1.59e-8", "tip resistivity"},
      {"material.lattice_spacing_m", "4.086e-10", "lattice spacing a of the tip metal"},
      {"material.max_intensity_W_m2", "1e10", "melting cap on the incident intensity"},
      {"material.adatom_dipole_C_m", "3.33564095198e-30", "adatom dipole p0 for the patch bound"},
      {"tip.z0_nm", "2", "paraboloid curvature parameter z0"},
      {"drive.laser_wavelength_nm", "780", "wavelength at which eps_L is evaluated"},
      {"drive.intensity_W_m2", "1e9", "incident intensity"},
      {"drive.detuning_mode", "hold_omega", "fixed | hold_omega"},
      {"drive.detuning_rad_s", "3.8e13", "detuning for detuning_mode = fixed (angular)"},
      {"drive.target_omega_tz_rad_s", "1e7", "axial trap frequency held by hold_omega (angular)"},
      {"drive.light_shift_weight", "1", "scalar weight on U0 standing in for fine-structure averaging"},
      {"drive.allow_over_cap", "false", "permit intensities above the material cap"},
      {"noise.temperature_K", "300", "tip temperature"},
      {"noise.magnetic_prefactor", prefactor, "dimensionless prefactor of the spin-flip rate"},
      {"noise.geometric_reduction", "auto", "noise reduction factor; auto = (z0/z_trap)^2"},
      {"noise.purcell_enhancement", "1", "Gamma_total^(z) / Gamma_0"},
      {"channels.optical", "true", "optical jumps heat the trap"},
      {"channels.magnetic", "true", "magnetic jumps heat the trap"},
      {"channels.shot", "true", "shot-noise bound heats the trap"},
      {"trap.n_scan", "10000", "axial scan points of the trap finder (>= 10000)"},
      {"grid.rho_min_nm", "0", "intensity map rho start"},
      {"grid.rho_max_nm", "60", "intensity map rho end"},
      {"grid.n_rho", "121", "intensity map rho points"},
      {"grid.z_min_nm", "-120", "intensity map z start"},
      {"grid.z_max_nm", "20", "intensity map z end"},
      {"grid.n_z", "141", "intensity map z points"},
      {"fig1c.n_points", "400", "on-axis potential samples (log-spaced in d)"},
      {"fig1c.d_max_over_ztrap", "1000", "outer end of the potential scan in units of |z_trap|"},
      {"fig2a.z0_min_nm", "0.5", "distance curve z0 start"},
      {"fig2a.z0_max_nm", "5", "distance curve z0 end"},
      {"fig2a.n_points", "10", "distance curve points"},
      {"fig2a.vdw_margin", "100", "U0 in units of the closed-form existence threshold"},
      {"fig2b.intensity_min_isat", "1e4", "lifetime curve intensity start (units of I_sat)"},
      {"fig2b.intensity_max_isat", "1e9", "lifetime curve intensity end (units of I_sat)"},
      {"fig2b.n_points", "26", "lifetime curve points per curve (log-spaced)"},
      {"sweep.parameter", "intensity", "z0 | intensity | detuning | trap_frequency"},
      {"sweep.min", "1e6", "sweep start (z0 in nm, intensity in W/m^2, rates in rad/s)"},
      {"sweep.max", "1e10", "sweep end"},
      {"sweep.n_points", "9", "sweep points (>= 2)"},
      {"sweep.spacing", "log", "linear | log"},
      {"mc.n_trajectories", "1000", "Monte Carlo trajectories"},
      {"mc.time_step_fraction", "0.02", "time step in trap periods (<= 0.05)"},
      {"mc.max_time_s", "auto", "censoring time; auto = max_time_factor x analytic lifetime"},
      {"mc.max_time_factor", "10", "censoring time in units of the analytic lifetime"},
      {"mc.kick_rate", "auto", "jump rate; auto = summed heating rates of the enabled channels"},
      {"loading.n_points", "200", "loading-check samples (log-spaced in |z|)"},
      {"loading.z_max_over_z0", "1000", "loading-check outer |z| in units of z0"},
      {"run.seed", "12345", "RNG seed"},
      {"run.threads", "1", "worker threads"},
  };
  return keys;
}

ConfigStore::ConfigStore() {
  for (const auto& k : config_keys()) values_.emplace(std::string(k.name), Value{std::string(k.default_value), "default"});
}

void ConfigStore::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  load(in, path.string());
}

void ConfigStore::load(std::istream& in, std::string_view source) {
  for (const auto& e : parse_key_value(in, source)) {
    const auto full = e.section.empty() ? e.key : e.section + "." + e.key;
    const auto here = std::string(source) + ":" + std::to_string(e.line);
    if (!values_.contains(full)) throw ConfigError(here + ": unknown key '" + full + "'");
    set(full, e.value, here);
  }
}

void ConfigStore::assign(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("--set expects key=value, got '" + std::string(assignment) + "'");
  }
  set(trim(assignment.substr(0, eq)), std::string(trim(assignment.substr(eq + 1))), "--set");
}

void ConfigStore::set(std::string_view key, std::string value, std::string origin) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(origin + ": unknown key '" + std::string(key) + "'");
  it->second = Value{std::move(value), std::move(origin)};
}

const std::string& ConfigStore::get(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown key '" + std::string(key) + "'");
  return it->second.text;
}

std::string ConfigStore::where(std::string_view key) const {
  const auto it = values_.find(key);
  return (it == values_.end() ? std::string("?") : it->second.origin) + ": " + std::string(key);
}

double ConfigStore::get_double(std::string_view key) const { return parse_double(get(key), where(key)); }

long long ConfigStore::get_integer(std::string_view key) const { return parse_integer(get(key), where(key)); }

bool ConfigStore::get_bool(std::string_view key) const { return parse_bool(get(key), where(key)); }

std::optional<double> ConfigStore::get_optional_double(std::string_view key) const {
  const auto& text = get(key);
  if (text.empty() || text == "auto") return std::nullopt;
  return parse_double(text, where(key));
}

std::vector<std::pair<std::string, std::string>> ConfigStore::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : config_keys()) out.emplace_back(std::string(k.name), get(k.name));
  return out;
}

std::string ConfigStore::to_ini() const {
  std::ostringstream out;
  std::string section;
  for (const auto& [key, value] : entries()) {
    const auto dot = key.find('.');
    const auto s = key.substr(0, dot);
    if (s != section) {
      if (!section.empty()) out << '\n';
      out << '[' << s << "]\n";
      section = s;
    }
    out << key.substr(dot + 1) << " = " << value << '\n';
  }
  return out.str();
}

}  // namespace nanotrap
