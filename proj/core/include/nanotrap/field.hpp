#pragma once

#include <complex>
#include <string>
#include <vector>

namespace nanotrap {

using Complex = std::complex<double>;

/// Paraboloidal tip z(rho) = -z0 + rho^2 / (4 z0) with its apex at
/// (rho = 0, z = -z0). The metal fills the region above the surface
/// (r - z < 2 z0); the trap sits on the vacuum side of the axis, z < -z0.
class TipGeometry {
 public:
  explicit TipGeometry(double z0_m);

  [[nodiscard]] double z0() const { return z0_; }
  [[nodiscard]] double surface_z(double rho) const { return -z0_ + rho * rho / (4.0 * z0_); }

 private:
  double z0_;
};

struct CylPoint {
  double rho = 0.0;  // >= 0
  double z = 0.0;

  [[nodiscard]] double r() const;
  static CylPoint from_cartesian(double x, double y, double z);
};

/// Total field in cylindrical components (V/m, or units of E0).
struct FieldVector {
  Complex z;
  Complex rho;

  [[nodiscard]] double norm_squared() const { return std::norm(z) + std::norm(rho); }
};

/// Strictly inside the metal. Points exactly on the surface count as outside.
bool is_inside_tip(const CylPoint& p, const TipGeometry& tip);

/// Quasi-electrostatic total field for a plane wave polarized along the tip
/// axis:
///   E_z   = E0 (1 + (z0 / r)(eps - 1))
///   E_rho = E0 z0 (1 - eps) rho / (r (r - z))
/// The radial term carries an explicit rho, so it vanishes on the axis. Inside
/// the metal the field is the uniform E0 z-hat. Throws DomainError at r = 0.
FieldVector total_field_parallel(const CylPoint& p, const TipGeometry& tip, Complex eps, double e0 = 1.0);

/// |E / E0|^2 for the axial polarization.
double intensity_factor(const CylPoint& p, const TipGeometry& tip, Complex eps);

/// Gradient of intensity_factor with respect to (rho, z) for points outside
/// the tip, in 1/m.
struct IntensityGradient {
  double value;
  double d_rho;
  double d_z;
};
IntensityGradient intensity_factor_with_gradient(const CylPoint& p, const TipGeometry& tip, Complex eps);

struct TrapZero {
  double z_m;                 // z0 (Re eps - 1), on the axis below the apex
  double residual_intensity;  // |E(z_trap) / E0|^2 with the full complex eps
};

/// Field zero on the axis. Throws DomainError if Re eps >= 1.
TrapZero trap_position(const TipGeometry& tip, Complex eps);

/// On-axis x-hat field for a plane wave polarized perpendicular to the tip,
///   E = E0 (1 + ((1 - eps) / (1 + eps)) z0 / |z|).
/// Throws DomainError for eps = -1 or z = 0.
Complex total_field_perpendicular(double z, const TipGeometry& tip, Complex eps, double e0 = 1.0);

/// z_perp = z0 (eps - 1) / (eps + 1), the range over which the tip perturbs
/// a perpendicularly polarized beam.
Complex perpendicular_perturbation_length(const TipGeometry& tip, Complex eps);

struct Grid2D {
  double rho_min_m;
  double rho_max_m;
  int n_rho;
  double z_min_m;
  double z_max_m;
  int n_z;

  [[nodiscard]] double rho_at(int i) const;
  [[nodiscard]] double z_at(int j) const;
};

struct IntensitySample {
  double rho_m;
  double z_m;
  double intensity_factor;
};

/// |E/E0|^2 on the grid, row-major with rho as the outer index. Interior
/// points get 1 (uniform interior field).
std::vector<IntensitySample> intensity_map(const Grid2D& grid, const TipGeometry& tip, Complex eps);

/// Validity flags of the electrostatic approximation: k_a d > 1 and
/// z0 > 5 nm. Returns human-readable warnings, empty if none apply.
std::vector<std::string> electrostatic_validity_warnings(const TipGeometry& tip, double wavenumber,
                                                         double distance_m);

}  // namespace nanotrap
