#include "nanotrap/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nanotrap/constants.hpp"
#include "nanotrap/errors.hpp"

namespace nanotrap {

namespace c = constants;

TrapDrive TrapDrive::from_intensity(const AtomSpecies& atom, double intensity_W_m2, double laser_wavelength_m,
                                    double detuning_rad_s, double light_shift_weight) {
  return TrapDrive{
      .intensity_W_m2 = intensity_W_m2,
      .laser_wavelength_m = laser_wavelength_m,
      .detuning_rad_s = detuning_rad_s,
      .rabi_rad_s = rabi_frequency_from_intensity(atom, intensity_W_m2),
      .light_shift_weight = light_shift_weight,
  };
}

double TrapDrive::u0() const {
  if (!(detuning_rad_s > 0.0)) throw DomainError("detuning must be positive (blue-detuned) to trap");
  return light_shift_weight * c::hbar * rabi_rad_s * rabi_rad_s / detuning_rad_s;
}

double optical_potential(const CylPoint& p, const TrapDrive& drive, const TipGeometry& tip, Complex eps) {
  return drive.u0() * intensity_factor(p, tip, eps);
}

double vdw_potential(double distance_m, const AtomSpecies& atom) {
  if (!(distance_m > 0.0)) throw DomainError("van der Waals potential needs a positive surface distance");
  const double kd = atom.wavenumber() * distance_m;
  return -3.0 * c::hbar * atom.linewidth_rad_s / (32.0 * kd * kd * kd);
}

namespace {


}  // namespace

SurfaceProjection nearest_surface_point(const CylPoint& p, const TipGeometry& tip) {
  const double z0 = tip.z0();
  const auto dist2 = [&](double rs) {
    const double dr = rs - p.rho;
    const double dz = tip.surface_z(rs) - p.z;
    return dr * dr + dz * dz;
  };
  // Stationary points of D solve rs^3 + a rs + b = 0 with a = 4 z0 (z0 - z)
  // and b = -8 z0^2 rho <= 0. The cubic is negative at 0 and convex on
  // rs > 0, so its positive root is unique and is the largest real root.
  const double a = 4.0 * z0 * (z0 - p.z);
  const double b = -8.0 * z0 * z0 * p.rho;
  const double disc = 0.25 * b * b + a * a * a / 27.0;
  double rs = 0.0;
  if (disc >= 0.0) {
    const double u = std::cbrt(-0.5 * b + std::sqrt(disc));
    if (u > 0.0) {
      // rs = u + v with u v = -a/3; divide through u^2 - u v + v^2 when
      // a > 0 so the small root does not cancel.
      const double v = -a / (3.0 * u);
      rs = a > 0.0 ? -b / (u * u - u * v + v * v) : u + v;
    }
  } else {
    const double m = std::sqrt(-a / 3.0);
    const double theta = std::acos(std::clamp(1.5 * b / (a * m), -1.0, 1.0));
    rs = 2.0 * m * std::cos(theta / 3.0);
  }
  const double f = rs * rs * rs + a * rs + b;
  const double df = 3.0 * rs * rs + a;
  if (df > 0.0) rs = std::max(0.0, rs - f / df);
  if (dist2(0.0) <= dist2(rs)) rs = 0.0;
  const double d = std::sqrt(dist2(rs));
  const double sign = is_inside_tip(p, tip) ? -1.0 : 1.0;
  return {sign * d, rs, tip.surface_z(rs)};
}

double distance_to_surface(const CylPoint& p, const TipGeometry& tip) {
  return nearest_surface_point(p, tip).distance_m;
}

double total_potential(const CylPoint& p, const TrapSetup& setup, bool include_vdw) {
  double u = optical_potential(p, setup.drive, setup.tip, setup.epsilon);
  if (include_vdw) u += vdw_potential(distance_to_surface(p, setup.tip), setup.atom);
  return u;
}

PotentialGradient total_potential_with_gradient(const CylPoint& p, const TrapSetup& setup, bool include_vdw) {
  if (is_inside_tip(p, setup.tip) || p.r() == 0.0) return {0.0, 0.0, 0.0, true};
  const double u0 = setup.drive.u0();
  const auto opt = intensity_factor_with_gradient(p, setup.tip, setup.epsilon);
  PotentialGradient out{u0 * opt.value, u0 * opt.d_rho, u0 * opt.d_z, false};
  if (!include_vdw) return out;

  const auto proj = nearest_surface_point(p, setup.tip);
  const double d = proj.distance_m;
  if (!(d > 0.0)) return {0.0, 0.0, 0.0, true};
  const double u_vdw = vdw_potential(d, setup.atom);
  // dU/dd = -3 U / d and grad d is the unit vector from the nearest surface point.
  const double du_dd = -3.0 * u_vdw / d;
  out.value += u_vdw;
  out.d_rho += du_dd * (p.rho - proj.rho_s) / d;
  out.d_z += du_dd * (p.z - proj.z_s) / d;
  return out;
}

double ground_state_size(const AtomSpecies& atom, double omega_z) {
  return std::sqrt(c::hbar / (2.0 * atom.mass_kg * omega_z));
}

AnalyticTrap trap_frequency_analytic(const TrapSetup& setup) {
  const double z_trap = trap_position(setup.tip, setup.epsilon).z_m;
  const double kz = setup.atom.wavenumber() * std::abs(z_trap);
  const double er_prime = recoil_energy(setup.atom) / (kz * kz);
  const double omega_z = 2.0 * std::sqrt(setup.drive.u0() * er_prime) / c::hbar;
  return {omega_z, 0.5 * omega_z, er_prime, omega_z > 0.0 ? ground_state_size(setup.atom, omega_z) : 0.0};
}

double existence_threshold_rate(const AtomSpecies& atom, const TipGeometry& tip, Complex eps) {
  const double kz = atom.wavenumber() * std::abs(trap_position(tip, eps).z_m);
  return 9.0 * atom.linewidth_rad_s / (32.0 * kz * kz * kz);
}

bool trap_exists_analytic(const TrapSetup& setup) {
  return setup.drive.u0() / c::hbar >= existence_threshold_rate(setup.atom, setup.tip, setup.epsilon);
}

NumericFrequencies trap_frequency_numeric(const TrapSetup& setup, double z_min, bool include_vdw) {
  const double z_trap = trap_position(setup.tip, setup.epsilon).z_m;
  const double h = std::max(1e-4 * std::abs(z_trap), 10e-12);
  const auto u = [&](double rho, double z) { return total_potential({rho, z}, setup, include_vdw); };

  const double u_center = u(0.0, z_min);
  const auto second_z = [&](double step) {
    return (u(0.0, z_min + step) + u(0.0, z_min - step) - 2.0 * u_center) / (step * step);
  };
  // U is even in rho, so U(h) + U(-h) = 2 U(h).
  const auto second_rho = [&](double step) { return 2.0 * (u(step, z_min) - u_center) / (step * step); };
  const auto richardson = [h](auto&& second) { return (4.0 * second(0.5 * h) - second(h)) / 3.0; };

  NumericFrequencies out;
  out.curvature_z = richardson(second_z);
  out.curvature_rho = richardson(second_rho);
  if (out.curvature_z <= 0.0 || out.curvature_rho <= 0.0) {
    out.saddle = true;
    return out;
  }
  out.omega_z = std::sqrt(out.curvature_z / setup.atom.mass_kg);
  out.omega_rho = std::sqrt(out.curvature_rho / setup.atom.mass_kg);
  return out;
}

double patch_force_bound(double distance_m, const TipGeometry& tip, const TipMaterial& material,
                         const AtomSpecies& atom) {
  if (!(distance_m > 0.0)) throw DomainError("patch force bound needs a positive surface distance");
  const double p0 = material.adatom_dipole_C_m;
  const double z0 = tip.z0();
  const double a = material.lattice_spacing_m;
  const double d2 = distance_m * distance_m;
  const double a2 = a * a;
  return 0.1 * p0 * p0 * z0 * z0 * atom.static_polarizability /
         (c::epsilon0 * c::epsilon0 * d2 * d2 * distance_m * a2 * a2);
}

namespace {

// Vertex of the parabola through (x - h, fm), (x, f0), (x + h, fp).
double parabola_vertex(double x, double h, double fm, double f0, double fp) {
  const double denom = fm - 2.0 * f0 + fp;
  if (denom == 0.0) return x;
  const double shift = 0.5 * h * (fm - fp) / denom;
  return x + std::clamp(shift, -h, h);
}

}  // namespace

TrapReport find_trap(const TrapSetup& setup, const TipMaterial& material, const FindTrapOptions& options) {
  TrapReport report;
  const auto zero = trap_position(setup.tip, setup.epsilon);
  const double z0 = setup.tip.z0();
  const double zt = std::abs(zero.z_m);
  report.z_trap_analytic_m = zero.z_m;
  report.residual_intensity = zero.residual_intensity;
  report.u0 = setup.drive.u0();
  report.existence_analytic = trap_exists_analytic(setup);

  const auto analytic = trap_frequency_analytic(setup);
  report.omega_tz = analytic.omega_z;
  report.omega_trho = analytic.omega_rho;
  report.enhanced_recoil = analytic.enhanced_recoil;
  report.a_z = analytic.ground_state_size;

  // Scan along s = -z from just outside the apex to 10 |z_trap|.
  const int n = std::max(options.n_scan, 10000);
  const double s_lo = z0 + 1e-4 * zt;
  const double s_hi = 10.0 * zt;
  const double ds = (s_hi - s_lo) / (n - 1);
  const auto u_axis = [&](double s) { return total_potential({0.0, -s}, setup, options.include_vdw); };
  std::vector<double> u(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) u[i] = u_axis(s_lo + ds * i);

  int best = -1;
  for (int i = 1; i + 1 < n; ++i) {
    if (u[i] < u[i - 1] && u[i] <= u[i + 1] && (best < 0 || u[i] < u[best])) best = i;
  }

  const auto finish_without_trap = [&] {
    report.existence_ok = false;
    report.u_depth = 0.0;
    report.z_trap_m = zero.z_m;
    report.d_surface_m = zt - z0;
  };

  if (best < 0) {
    finish_without_trap();
  } else {
    double s = parabola_vertex(s_lo + ds * best, ds, u[best - 1], u[best], u[best + 1]);
    for (double h = 0.1 * ds; h > 1e-7 * zt; h *= 0.1) {
      s = parabola_vertex(s, h, u_axis(s - h), u_axis(s), u_axis(s + h));
    }
    const double u_min = std::min(u_axis(s), u[best]);
    if (u_axis(s) > u[best]) s = s_lo + ds * best;

    double barrier_surface = -std::numeric_limits<double>::infinity();
    int i_barrier = 0;
    for (int i = 0; i < best; ++i) {
      if (u[i] > barrier_surface) {
        barrier_surface = u[i];
        i_barrier = i;
      }
    }
    if (i_barrier > 0 && i_barrier + 1 < best) {
      const double sb = parabola_vertex(s_lo + ds * i_barrier, ds, u[i_barrier - 1], u[i_barrier], u[i_barrier + 1]);
      barrier_surface = std::max(barrier_surface, u_axis(sb));
    }
    double barrier_infinity = report.u0;
    for (int i = best + 1; i < n; ++i) barrier_infinity = std::max(barrier_infinity, u[i]);

    report.z_trap_m = -s;
    report.d_surface_m = s - z0;
    report.u_min = u_min;
    report.barrier_surface = barrier_surface;
    report.barrier_infinity = barrier_infinity;
    report.u_depth = std::max(0.0, std::min(barrier_surface, barrier_infinity) - u_min);
    report.existence_ok = report.u_depth > 0.0;
    if (!report.existence_ok) finish_without_trap();
  }

  if (report.existence_ok && options.numeric_frequencies) {
    report.numeric = trap_frequency_numeric(setup, report.z_trap_m, options.include_vdw);
  }

  report.patch_force_bound = patch_force_bound(report.d_surface_m, setup.tip, material, setup.atom);
  if (report.omega_tz > 0.0) {
    report.patch_displacement =
        report.patch_force_bound / (setup.atom.mass_kg * report.omega_tz * report.omega_tz);
  }

  report.validity_warnings =
      electrostatic_validity_warnings(setup.tip, setup.atom.wavenumber(), report.d_surface_m);
  if (report.existence_ok != report.existence_analytic) {
    std::ostringstream msg;
    msg << "numeric trap search (" << (report.existence_ok ? "trap" : "no trap")
        << ") disagrees with the closed-form existence condition ("
        << (report.existence_analytic ? "trap" : "no trap") << ")";
    report.validity_warnings.push_back(msg.str());
  }
  return report;
}

double detuning_for_trap_frequency(const AtomSpecies& atom, const TipGeometry& tip, Complex eps, double rabi_rad_s,
                                   double omega_z, double light_shift_weight) {
  if (!(rabi_rad_s > 0.0)) throw DomainError("cannot hold the trap frequency at zero intensity");
  if (!(omega_z > 0.0)) throw DomainError("target trap frequency must be positive");
  const double kz = atom.wavenumber() * std::abs(trap_position(tip, eps).z_m);
  const double er_prime = recoil_energy(atom) / (kz * kz);
  const double hw = c::hbar * omega_z;
  const double u0_target = hw * hw / (4.0 * er_prime);
  return light_shift_weight * c::hbar * rabi_rad_s * rabi_rad_s / u0_target;
}

double existence_threshold_intensity_analytic(const TrapSetup& setup) {
  const double rate = existence_threshold_rate(setup.atom, setup.tip, setup.epsilon);
  const double rabi2 = rate * setup.drive.detuning_rad_s / setup.drive.light_shift_weight;
  return intensity_from_rabi_frequency(setup.atom, std::sqrt(rabi2));
}

double existence_threshold_intensity_numeric(const TrapSetup& setup, const TipMaterial& material, double lo_W_m2,
                                             double hi_W_m2, double rel_tol) {
  const auto exists_at = [&](double intensity) {
    TrapSetup s = setup;
    s.drive = TrapDrive::from_intensity(setup.atom, intensity, setup.drive.laser_wavelength_m,
                                        setup.drive.detuning_rad_s, setup.drive.light_shift_weight);
    return find_trap(s, material, {.n_scan = 10000, .include_vdw = true, .numeric_frequencies = false})
        .existence_ok;
  };
  if (exists_at(lo_W_m2) || !exists_at(hi_W_m2)) {
    throw DomainError("existence threshold is not bracketed by the given intensities");
  }
  double lo = std::log(lo_W_m2);
  double hi = std::log(hi_W_m2);
  while (hi - lo > rel_tol) {
    const double mid = 0.5 * (lo + hi);
    (exists_at(std::exp(mid)) ? hi : lo) = mid;
  }
  return std::exp(hi);
}

}  // namespace nanotrap
