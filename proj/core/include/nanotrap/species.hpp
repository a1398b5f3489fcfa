#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace nanotrap {

/// A trapped two-level atom. Every frequency and rate is angular (rad/s).
struct AtomSpecies {
  std::string name;
  double mass_kg = 0.0;
  double transition_wavelength_m = 0.0;
  double linewidth_rad_s = 0.0;              // Gamma_0
  double saturation_intensity_W_m2 = 0.0;
  double static_polarizability = 0.0;        // C m^2 / V
  double electron_g_factor = 0.0;

  /// k_a = 2 pi / lambda_a.
  [[nodiscard]] double wavenumber() const;
  /// omega_a = c k_a.
  [[nodiscard]] double transition_frequency() const;

  /// Throws DomainError unless every field is strictly positive and finite.
  void validate() const;
};

/// 87Rb on the D2 line, using lambda_a = 780 nm, Gamma_0 = 3.8e7 s^-1 and
/// I_sat = 1.7 mW/cm^2.
AtomSpecies rubidium87();

/// Names of the built-in species.
std::vector<std::string> species_names();

/// Built-in species by name (case sensitive). Throws ConfigError if unknown.
AtomSpecies species_by_name(std::string_view name);

/// Applies `key = value` overrides from a file to `base`. Accepted keys:
/// name, mass_kg, transition_wavelength_m, linewidth_rad_s,
/// saturation_intensity_W_m2, static_polarizability_C_m2_per_V,
/// electron_g_factor. Lines may carry `#` comments; an optional `[atom]`
/// section header is ignored.
AtomSpecies apply_species_overrides(AtomSpecies base, const std::filesystem::path& path);

/// Free-space recoil energy E_R = hbar^2 k_a^2 / (2 m).
double recoil_energy(const AtomSpecies& atom);

/// Rabi frequency of the incident field,
///   Omega_0 = Gamma_0 sqrt(I / (2 I_sat)),
/// the standard two-level convention (I = 2 I_sat gives Omega_0 = Gamma_0).
double rabi_frequency_from_intensity(const AtomSpecies& atom, double intensity_W_m2);

/// Inverse of rabi_frequency_from_intensity.
double intensity_from_rabi_frequency(const AtomSpecies& atom, double rabi_rad_s);

}  // namespace nanotrap
