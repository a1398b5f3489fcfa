#pragma once

#include <optional>

#include "nanotrap/potential.hpp"

namespace nanotrap {

/// Dimensionless prefactor of the magnetic spin-flip rate, calibrated so
/// that a z0 = 3 nm silver tip at 300 K gives a 10 ms spin-flip time at
/// d = |Re eps| z0 with the default (z0/z_trap)^2 reduction applied.
/// Reproduced by tools/nanotrap_calibrate and checked in the unit tests.
inline constexpr double kCalibratedMagneticPrefactor = 6.4154780137017475e-01;

/// Orientation-averaged Purcell factors at lambda = 780 nm for silver tips.
struct PurcellPreset {
  double z0_m;
  double purcell_factor;
};
inline constexpr PurcellPreset kPurcellPresets[] = {{1e-9, 6.0}, {3e-9, 0.2}};

/// Gamma_total^(z) / Gamma_0 from an effective Purcell factor P, 1 + P.
inline double purcell_enhancement_from_factor(double purcell_factor) { return 1.0 + purcell_factor; }

struct NoiseEnvironment {
  double temperature_K = 300.0;
  double magnetic_prefactor = kCalibratedMagneticPrefactor;
  /// Suppression of the semi-infinite-substrate noise by the small solid
  /// angle of the tip. Unset means (z0 / z_trap)^2.
  std::optional<double> geometric_reduction;
  /// Gamma_total^(z) = Gamma_0 * purcell_enhancement.
  double purcell_enhancement = 1.0;

  void validate() const;
};

/// Heating channels that feed the lifetime.
struct RateChannels {
  bool optical = true;
  bool magnetic = true;
  bool shot = true;
};

struct RateReport {
  double gamma_jump_opt = 0.0;    // 1/s
  double gamma_flip_mag = 0.0;    // hyperfine-changing, 1/s
  double gamma_jump_mag = 0.0;    // motional, 1/s
  double gamma_shot_bound = 0.0;  // upper bound, 1/s
  double heating_power = 0.0;     // J/s
  double lifetime = 0.0;          // s, +inf when nothing heats
  double spin_flip_time = 0.0;    // s, +inf when T = 0
  double scattering_coherence_time = 0.0;  // 1 / gamma_jump_opt, approximate
  double geometric_reduction = 0.0;        // value actually applied
  double total_emission_rate = 0.0;        // Gamma_total^(z), 1/s
};

/// (z0 / z_trap)^2.
double default_geometric_reduction(const TipGeometry& tip, Complex eps);

/// Gamma_jump,opt = Gamma_total^(z) (E_R' / (hbar omega_z)) (Omega_0^2 / delta^2).
double optical_jump_rate(const TrapSetup& setup, const TrapReport& trap, const NoiseEnvironment& env);

struct MagneticRates {
  double flip;  // Gamma_flip = C g (mu0 mu_B g_S)^2 k_B T / (hbar^2 rho_res d)
  double jump;  // Gamma_flip (a_z / d)^2
};

/// Throws DomainError for d <= 0.
MagneticRates magnetic_rates(double a_z, double distance_m, const AtomSpecies& atom, const TipMaterial& material,
                             double temperature_K, double prefactor, double geometric_reduction);

/// Gamma_jump,opt (a_z / d)^2, an upper bound on laser shot-noise heating.
double shot_noise_bound(double gamma_jump_opt, double a_z, double distance_m);

/// Linear heating: each jump deposits one phonon hbar omega_z, so
/// lifetime = U_depth / (hbar omega_z * sum of jump rates). Returns +inf if
/// the summed rate is zero.
double lifetime(double u_depth, double omega_z, double total_jump_rate);

struct CapCheck {
  bool ok;
  double intensity_W_m2;
  double max_intensity_W_m2;
};

/// ok iff I <= I_max (inclusive).
CapCheck intensity_cap_check(double intensity_W_m2, const TipMaterial& material);

/// delta B = hbar / (g_S mu_B sqrt(T2)), T / sqrt(Hz).
double magnetometry_sensitivity(double t2_s, const AtomSpecies& atom);

/// All rates for one trap. The trap must exist (DomainError otherwise).
RateReport compute_rates(const TrapSetup& setup, const TrapReport& trap, const TipMaterial& material,
                         const NoiseEnvironment& env, const RateChannels& channels = {});

/// Prefactor C such that the spin-flip time equals target_s for a tip of
/// curvature z0 at the laser wavelength, using d = |Re eps| z0, the given
/// temperature and the default geometric reduction.
double calibrate_magnetic_prefactor(const AtomSpecies& atom, const TipMaterial& material, double z0_m,
                                    double wavelength_m, double temperature_K = 300.0, double target_s = 10e-3);

}  // namespace nanotrap
