#pragma once

#include <string>
#include <vector>

#include "nanotrap/field.hpp"
#include "nanotrap/material.hpp"
#include "nanotrap/species.hpp"

namespace nanotrap {

/// Blue-detuned drive of the tip. U0 = w hbar Omega_0^2 / delta is the
/// optical potential far from the tip; w is a scalar light-shift weight that
/// stands in for fine-structure averaging (1 for a pure two-level atom).
struct TrapDrive {
  double intensity_W_m2 = 0.0;
  double laser_wavelength_m = 780e-9;
  double detuning_rad_s = 0.0;  // omega_L - omega_a, > 0
  double rabi_rad_s = 0.0;      // Omega_0, consistent with intensity
  double light_shift_weight = 1.0;

  static TrapDrive from_intensity(const AtomSpecies& atom, double intensity_W_m2, double laser_wavelength_m,
                                  double detuning_rad_s, double light_shift_weight = 1.0);

  /// U0 in J. Throws DomainError if the detuning is not positive.
  [[nodiscard]] double u0() const;
};

/// Everything the potential depends on for one parameter point.
struct TrapSetup {
  AtomSpecies atom;
  TipGeometry tip;
  Complex epsilon;
  TrapDrive drive;
};

// --- potentials -----------------------------------------------------------

/// U_opt = U0 |E / E0|^2.
double optical_potential(const CylPoint& p, const TrapDrive& drive, const TipGeometry& tip, Complex eps);

/// U_vdW = -3 hbar Gamma_0 / (32 k_a^3 d^3). Throws DomainError for d <= 0.
double vdw_potential(double distance_m, const AtomSpecies& atom);

struct SurfaceProjection {
  double distance_m;  // signed: negative inside the metal
  double rho_s;       // nearest surface point
  double z_s;
};

/// Nearest point of the paraboloid in the meridian half-plane, from the
/// closed-form root of the stationarity cubic plus one Newton polish.
SurfaceProjection nearest_surface_point(const CylPoint& p, const TipGeometry& tip);

/// Euclidean distance to the tip surface (negative inside the metal). On the
/// axis below the apex this is |z| - z0.
double distance_to_surface(const CylPoint& p, const TipGeometry& tip);

/// U_opt + U_vdW(distance_to_surface). The vdW term is skipped when
/// include_vdw is false.
double total_potential(const CylPoint& p, const TrapSetup& setup, bool include_vdw = true);

struct PotentialGradient {
  double value;  // J
  double d_rho;  // J/m
  double d_z;    // J/m
  bool inside;   // point is in the metal; value and gradient are not meaningful
};

/// total_potential together with its analytic gradient in (rho, z).
PotentialGradient total_potential_with_gradient(const CylPoint& p, const TrapSetup& setup,
                                                bool include_vdw = true);

// --- trap characterisation --------------------------------------------------

struct AnalyticTrap {
  double omega_z;          // rad/s, hbar omega_z = 2 sqrt(U0 E_R')
  double omega_rho;        // omega_z / 2
  double enhanced_recoil;  // E_R' = E_R (k_a |z_trap|)^-2
  double ground_state_size;  // a_z = sqrt(hbar / (2 m omega_z))
};

AnalyticTrap trap_frequency_analytic(const TrapSetup& setup);

/// a_z for an arbitrary axial frequency.
double ground_state_size(const AtomSpecies& atom, double omega_z);

/// Right-hand side of the existence condition,
///   U0 / hbar >= 9 Gamma_0 / (32 (k_a |z_trap|)^3),
/// returned as the threshold on U0 / hbar in rad/s.
double existence_threshold_rate(const AtomSpecies& atom, const TipGeometry& tip, Complex eps);

bool trap_exists_analytic(const TrapSetup& setup);

struct NumericFrequencies {
  double omega_z = 0.0;
  double omega_rho = 0.0;
  double curvature_z = 0.0;    // d^2U/dz^2, J/m^2
  double curvature_rho = 0.0;  // d^2U/drho^2, J/m^2
  bool saddle = false;         // a curvature was not positive; frequencies are 0
};

/// Central-difference curvatures at (rho = 0, z = z_min) with
/// h = max(1e-4 |z_trap|, 10 pm) and one Richardson extrapolation step.
NumericFrequencies trap_frequency_numeric(const TrapSetup& setup, double z_min, bool include_vdw);

/// Worst-case patch-potential force from a uniform adatom layer,
///   F_p <= 0.1 p0^2 z0^2 alpha_s / (eps0^2 d^5 a^4).
/// Reported as a bound; it is never added to the potential.
double patch_force_bound(double distance_m, const TipGeometry& tip, const TipMaterial& material,
                         const AtomSpecies& atom);

struct FindTrapOptions {
  int n_scan = 10000;
  bool include_vdw = true;
  bool numeric_frequencies = true;
};

struct TrapReport {
  bool existence_ok = false;
  bool existence_analytic = false;  // the closed-form condition
  double u0 = 0.0;                  // J
  double z_trap_analytic_m = 0.0;
  double residual_intensity = 0.0;
  double z_trap_m = 0.0;            // refined minimum (analytic value if no trap)
  double d_surface_m = 0.0;
  double u_min = 0.0;               // J
  double barrier_surface = 0.0;     // highest point between minimum and surface, J
  double barrier_infinity = 0.0;    // sup of U beyond the minimum (at least U0), J
  double u_depth = 0.0;             // min of the two barriers minus u_min, J
  double omega_tz = 0.0;            // analytic
  double omega_trho = 0.0;
  double enhanced_recoil = 0.0;
  double a_z = 0.0;
  NumericFrequencies numeric;       // at the refined minimum, vdW per options
  double patch_force_bound = 0.0;   // N, at d_surface
  double patch_displacement = 0.0;  // F_p / (m omega_tz^2), m
  std::vector<std::string> validity_warnings;

  /// Absolute energy at which an atom leaves the trap, u_min + u_depth.
  [[nodiscard]] double escape_energy() const { return u_min + u_depth; }
};

/// Scans the axis from the surface out to 10 |z_trap|, refines the lowest
/// interior minimum by repeated parabolic interpolation and measures the
/// depth against both escape routes. Never throws for a missing minimum;
/// existence_ok is false and u_depth is 0 instead.
TrapReport find_trap(const TrapSetup& setup, const TipMaterial& material, const FindTrapOptions& options = {});

/// Relative tolerance (in units of |z_trap|) of the minimum refinement.
inline constexpr double kMinimumRefinementTolerance = 1e-6;

/// Detuning that yields the requested analytic omega_z at the drive's Rabi
/// frequency (closed-form inversion of the frequency formula). Throws
/// DomainError if the Rabi frequency or target is not positive.
double detuning_for_trap_frequency(const AtomSpecies& atom, const TipGeometry& tip, Complex eps,
                                   double rabi_rad_s, double omega_z, double light_shift_weight = 1.0);

/// Incident intensity at which the closed-form existence condition becomes
/// an equality, keeping the setup's detuning.
double existence_threshold_intensity_analytic(const TrapSetup& setup);

/// Smallest intensity (fixed detuning) at which find_trap reports a trap,
/// by bisection in log-intensity between the given brackets.
double existence_threshold_intensity_numeric(const TrapSetup& setup, const TipMaterial& material,
                                             double lo_W_m2, double hi_W_m2, double rel_tol = 1e-4);

}  // namespace nanotrap
