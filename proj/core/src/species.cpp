#include "nanotrap/species.hpp"

#include <cmath>
#include <fstream>

#include "nanotrap/config.hpp"
#include "nanotrap/constants.hpp"
#include "nanotrap/errors.hpp"

namespace nanotrap {

namespace c = constants;

double AtomSpecies::wavenumber() const { return c::two_pi / transition_wavelength_m; }

double AtomSpecies::transition_frequency() const {
  return c::speed_of_light * wavenumber();
}

void AtomSpecies::validate() const {
  const auto check = [&](double v, const char* field) {
    if (!(std::isfinite(v) && v > 0.0)) {
      throw DomainError("species '" + name + "': " + field + " must be positive and finite");
    }
  };
  check(mass_kg, "mass_kg");
  check(transition_wavelength_m, "transition_wavelength_m");
  check(linewidth_rad_s, "linewidth_rad_s");
  check(saturation_intensity_W_m2, "saturation_intensity_W_m2");
  check(static_polarizability, "static_polarizability");
  check(electron_g_factor, "electron_g_factor");
}

AtomSpecies rubidium87() {
  return AtomSpecies{
      .name = "Rb87",
      .mass_kg = 1.443e-25,
      .transition_wavelength_m = 780e-9,
      .linewidth_rad_s = 3.8e7,
      .saturation_intensity_W_m2 = 17.0,  // 1.7 mW/cm^2
      .static_polarizability = 318.8 * c::atomic_unit_polarizability,
      .electron_g_factor = c::electron_g_factor,
  };
}

std::vector<std::string> species_names() { return {"Rb87"}; }

AtomSpecies species_by_name(std::string_view name) {
  if (name == "Rb87" || name == "rb87") return rubidium87();
  throw ConfigError("unknown atom species '" + std::string(name) + "' (known: Rb87)");
}

AtomSpecies apply_species_overrides(AtomSpecies base, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open atom override file " + path.string());
  for (const auto& entry : parse_key_value(in, path.string())) {
    const auto where = path.string() + ":" + std::to_string(entry.line);
    if (entry.key == "name") {
      base.name = entry.value;
      continue;
    }
    const double v = parse_double(entry.value, where + ": " + entry.key);
    if (entry.key == "mass_kg") {
      base.mass_kg = v;
    } else if (entry.key == "transition_wavelength_m") {
      base.transition_wavelength_m = v;
    } else if (entry.key == "linewidth_rad_s") {
      base.linewidth_rad_s = v;
    } else if (entry.key == "saturation_intensity_W_m2") {
      base.saturation_intensity_W_m2 = v;
    } else if (entry.key == "static_polarizability_C_m2_per_V") {
      base.static_polarizability = v;
    } else if (entry.key == "electron_g_factor") {
      base.electron_g_factor = v;
    } else {
      throw ConfigError(where + ": unknown atom key '" + entry.key + "'");
    }
  }
  base.validate();
  return base;
}

double recoil_energy(const AtomSpecies& atom) {
  const double k = atom.wavenumber();
  return c::hbar * c::hbar * k * k / (2.0 * atom.mass_kg);
}

double rabi_frequency_from_intensity(const AtomSpecies& atom, double intensity_W_m2) {
  if (!(intensity_W_m2 >= 0.0)) throw DomainError("intensity must be non-negative");
  return atom.linewidth_rad_s * std::sqrt(intensity_W_m2 / (2.0 * atom.saturation_intensity_W_m2));
}

double intensity_from_rabi_frequency(const AtomSpecies& atom, double rabi_rad_s) {
  const double ratio = rabi_rad_s / atom.linewidth_rad_s;
  return 2.0 * atom.saturation_intensity_W_m2 * ratio * ratio;
}

}  // namespace nanotrap
