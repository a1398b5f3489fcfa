#include "nanotrap/field.hpp"

#include <cmath>
#include <sstream>

#include "nanotrap/constants.hpp"
#include "nanotrap/errors.hpp"

namespace nanotrap {

TipGeometry::TipGeometry(double z0_m) : z0_(z0_m) {
  if (!(std::isfinite(z0_m) && z0_m > 0.0)) throw DomainError("tip curvature z0 must be positive");
}

double CylPoint::r() const { return std::sqrt(rho * rho + z * z); }

CylPoint CylPoint::from_cartesian(double x, double y, double z) { return {std::sqrt(x * x + y * y), z}; }

bool is_inside_tip(const CylPoint& p, const TipGeometry& tip) { return p.z > tip.surface_z(p.rho); }

FieldVector total_field_parallel(const CylPoint& p, const TipGeometry& tip, Complex eps, double e0) {
  const double r = p.r();
  if (r == 0.0) throw DomainError("field undefined at the paraboloid focus r = 0");
  if (is_inside_tip(p, tip)) return {Complex(e0, 0.0), Complex(0.0, 0.0)};

  const double z0 = tip.z0();
  const Complex ez = e0 * (1.0 + (z0 / r) * (eps - 1.0));
  // r - z >= 2 z0 outside the tip, so the radial factor is finite; it is
  // exactly zero on the axis.
  const Complex erho = p.rho == 0.0 ? Complex(0.0, 0.0) : e0 * z0 * (1.0 - eps) * (p.rho / (r * (r - p.z)));
  return {ez, erho};
}

double intensity_factor(const CylPoint& p, const TipGeometry& tip, Complex eps) {
  return total_field_parallel(p, tip, eps, 1.0).norm_squared();
}

IntensityGradient intensity_factor_with_gradient(const CylPoint& p, const TipGeometry& tip, Complex eps) {
  const double r = p.r();
  if (r == 0.0) throw DomainError("field undefined at the paraboloid focus r = 0");
  if (is_inside_tip(p, tip)) return {1.0, 0.0, 0.0};

  // E_z = 1 + a / r and E_rho = -a g with a = z0 (eps - 1), g = rho / (r (r - z)).
  const Complex a = tip.z0() * (eps - 1.0);
  const double r3 = r * r * r;
  const Complex ez = 1.0 + a / r;
  const Complex dez_drho = -a * (p.rho / r3);
  const Complex dez_dz = -a * (p.z / r3);

  const double q = r * (r - p.z);
  const double g = p.rho / q;
  const double dg_drho = 1.0 / q - p.rho * p.rho * (2.0 - p.z / r) / (q * q);
  const double dg_dz = p.rho / r3;
  const double a2 = std::norm(a);

  const double value = std::norm(ez) + a2 * g * g;
  // Re(conj(ez) w) written out; complex products would go through the
  // NaN-safe library multiply.
  const auto re_conj_mul = [&](Complex w) { return ez.real() * w.real() + ez.imag() * w.imag(); };
  const double d_rho = 2.0 * re_conj_mul(dez_drho) + 2.0 * a2 * g * dg_drho;
  const double d_z = 2.0 * re_conj_mul(dez_dz) + 2.0 * a2 * g * dg_dz;
  return {value, d_rho, d_z};
}

TrapZero trap_position(const TipGeometry& tip, Complex eps) {
  if (!(eps.real() < 1.0)) {
    throw DomainError("no on-axis field zero: Re(eps) must be below 1 for a trap to exist");
  }
  const double z = tip.z0() * (eps.real() - 1.0);
  // |1 + (z0 / |z|)(eps - 1)|^2 with |z| = z0 (1 - Re eps) leaves i Im(eps) / (1 - Re eps).
  const Complex e = 1.0 + (tip.z0() / std::abs(z)) * (eps - 1.0);
  return {z, std::norm(e)};
}

Complex total_field_perpendicular(double z, const TipGeometry& tip, Complex eps, double e0) {
  if (eps == Complex(-1.0, 0.0)) {
    throw DomainError("eps = -1 is the surface-plasmon pole of the perpendicular response");
  }
  if (z == 0.0) throw DomainError("perpendicular field undefined at z = 0");
  return e0 * (1.0 + ((1.0 - eps) / (1.0 + eps)) * (tip.z0() / std::abs(z)));
}

Complex perpendicular_perturbation_length(const TipGeometry& tip, Complex eps) {
  if (eps == Complex(-1.0, 0.0)) {
    throw DomainError("eps = -1 is the surface-plasmon pole of the perpendicular response");
  }
  return tip.z0() * (eps - 1.0) / (eps + 1.0);
}

double Grid2D::rho_at(int i) const {
  return n_rho == 1 ? rho_min_m : rho_min_m + (rho_max_m - rho_min_m) * i / (n_rho - 1);
}

double Grid2D::z_at(int j) const {
  return n_z == 1 ? z_min_m : z_min_m + (z_max_m - z_min_m) * j / (n_z - 1);
}

std::vector<IntensitySample> intensity_map(const Grid2D& grid, const TipGeometry& tip, Complex eps) {
  if (grid.n_rho < 1 || grid.n_z < 1) throw DomainError("grid needs at least one point per axis");
  if (grid.rho_min_m < 0.0) throw DomainError("grid rho_min must be non-negative");
  std::vector<IntensitySample> out;
  out.reserve(static_cast<std::size_t>(grid.n_rho) * static_cast<std::size_t>(grid.n_z));
  for (int i = 0; i < grid.n_rho; ++i) {
    for (int j = 0; j < grid.n_z; ++j) {
      const CylPoint p{grid.rho_at(i), grid.z_at(j)};
      const double f = (is_inside_tip(p, tip) || p.r() == 0.0) ? 1.0 : intensity_factor(p, tip, eps);
      out.push_back({p.rho, p.z, f});
    }
  }
  return out;
}

std::vector<std::string> electrostatic_validity_warnings(const TipGeometry& tip, double wavenumber,
                                                         double distance_m) {
  std::vector<std::string> warnings;
  if (wavenumber * distance_m > 1.0) {
    std::ostringstream msg;
    msg << "k_a*d = " << wavenumber * distance_m << " > 1: retardation neglected by the electrostatic model";
    warnings.push_back(msg.str());
  }
  if (tip.z0() > 5.0 * constants::nm) {
    std::ostringstream msg;
    msg << "z0 = " << tip.z0() / constants::nm << " nm > 5 nm: tip may not look sharp on the optical scale";
    warnings.push_back(msg.str());
  }
  return warnings;
}

}  // namespace nanotrap
