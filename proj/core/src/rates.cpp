#include "nanotrap/rates.hpp"

#include <cmath>
#include <limits>

#include "nanotrap/constants.hpp"
#include "nanotrap/errors.hpp"

namespace nanotrap {

namespace c = constants;

void NoiseEnvironment::validate() const {
  if (!(temperature_K >= 0.0)) throw DomainError("temperature must be non-negative");
  if (!(magnetic_prefactor >= 0.0)) throw DomainError("magnetic prefactor must be non-negative");
  if (geometric_reduction && !(*geometric_reduction >= 0.0)) {
    throw DomainError("geometric reduction must be non-negative");
  }
  if (!(purcell_enhancement >= 0.0)) throw DomainError("purcell enhancement must be non-negative");
}

double default_geometric_reduction(const TipGeometry& tip, Complex eps) {
  const double ratio = tip.z0() / trap_position(tip, eps).z_m;
  return ratio * ratio;
}

double optical_jump_rate(const TrapSetup& setup, const TrapReport& trap, const NoiseEnvironment& env) {
  const double delta = setup.drive.detuning_rad_s;
  if (!(delta > 0.0)) throw DomainError("detuning must be positive");
  const double gamma_total = setup.atom.linewidth_rad_s * env.purcell_enhancement;
  const double omega_ratio = setup.drive.rabi_rad_s / delta;
  return gamma_total * (trap.enhanced_recoil / (c::hbar * trap.omega_tz)) * omega_ratio * omega_ratio;
}

MagneticRates magnetic_rates(double a_z, double distance_m, const AtomSpecies& atom, const TipMaterial& material,
                             double temperature_K, double prefactor, double geometric_reduction) {
  if (!(distance_m > 0.0)) throw DomainError("magnetic noise rates need a positive surface distance");
  const double coupling = c::mu0 * c::bohr_magneton * atom.electron_g_factor;
  const double flip = prefactor * geometric_reduction * coupling * coupling * c::boltzmann * temperature_K /
                      (c::hbar * c::hbar * material.resistivity_ohm_m * distance_m);
  const double ratio = a_z / distance_m;
  return {flip, flip * ratio * ratio};
}

double shot_noise_bound(double gamma_jump_opt, double a_z, double distance_m) {
  const double ratio = a_z / distance_m;
  return gamma_jump_opt * ratio * ratio;
}

double lifetime(double u_depth, double omega_z, double total_jump_rate) {
  const double heating = c::hbar * omega_z * total_jump_rate;
  if (heating == 0.0) return std::numeric_limits<double>::infinity();
  return u_depth / heating;
}

CapCheck intensity_cap_check(double intensity_W_m2, const TipMaterial& material) {
  return {intensity_W_m2 <= material.max_intensity_W_m2, intensity_W_m2, material.max_intensity_W_m2};
}

double magnetometry_sensitivity(double t2_s, const AtomSpecies& atom) {
  if (!(t2_s > 0.0)) throw DomainError("coherence time must be positive");
  return c::hbar / (atom.electron_g_factor * c::bohr_magneton * std::sqrt(t2_s));
}

RateReport compute_rates(const TrapSetup& setup, const TrapReport& trap, const TipMaterial& material,
                         const NoiseEnvironment& env, const RateChannels& channels) {
  if (!trap.existence_ok) throw DomainError("rates need an existing trap");
  env.validate();
  RateReport out;
  out.total_emission_rate = setup.atom.linewidth_rad_s * env.purcell_enhancement;
  out.geometric_reduction = env.geometric_reduction.value_or(default_geometric_reduction(setup.tip, setup.epsilon));

  out.gamma_jump_opt = optical_jump_rate(setup, trap, env);
  const auto mag = magnetic_rates(trap.a_z, trap.d_surface_m, setup.atom, material, env.temperature_K,
                                  env.magnetic_prefactor, out.geometric_reduction);
  out.gamma_flip_mag = mag.flip;
  out.gamma_jump_mag = mag.jump;
  out.gamma_shot_bound = shot_noise_bound(out.gamma_jump_opt, trap.a_z, trap.d_surface_m);

  const double total = (channels.optical ? out.gamma_jump_opt : 0.0) +
                       (channels.magnetic ? out.gamma_jump_mag : 0.0) +
                       (channels.shot ? out.gamma_shot_bound : 0.0);
  out.heating_power = c::hbar * trap.omega_tz * total;
  out.lifetime = lifetime(trap.u_depth, trap.omega_tz, total);
  constexpr double inf = std::numeric_limits<double>::infinity();
  out.spin_flip_time = out.gamma_flip_mag > 0.0 ? 1.0 / out.gamma_flip_mag : inf;
  out.scattering_coherence_time = out.gamma_jump_opt > 0.0 ? 1.0 / out.gamma_jump_opt : inf;
  return out;
}

double calibrate_magnetic_prefactor(const AtomSpecies& atom, const TipMaterial& material, double z0_m,
                                    double wavelength_m, double temperature_K, double target_s) {
  const Complex eps = permittivity_at(material, wavelength_m);
  const double d = std::abs(eps.real()) * z0_m;
  const double reduction = default_geometric_reduction(TipGeometry(z0_m), eps);
  const auto unit = magnetic_rates(1.0, d, atom, material, temperature_K, 1.0, reduction);
  return 1.0 / (target_s * unit.flip);
}

}  // namespace nanotrap
