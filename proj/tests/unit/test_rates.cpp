#include <doctest.h>

#include <cmath>
#include <limits>

#include "nanotrap/constants.hpp"
#include "nanotrap/errors.hpp"
#include "nanotrap/rates.hpp"
#include "oracle.hpp"

using namespace nanotrap;
using doctest::Approx;

namespace {

const Complex kEps{-30.0, 0.4};

TrapSetup make_setup(double z0, double intensity, double delta) {
  const auto rb = rubidium87();
  return {rb, TipGeometry(z0), kEps, TrapDrive::from_intensity(rb, intensity, 780e-9, delta)};
}

// A hand-built report with the given recoil, frequency and geometry.
TrapReport manual_report(double er_prime, double omega, double a_z, double d, double depth) {
  TrapReport t;
  t.existence_ok = true;
  t.enhanced_recoil = er_prime;
  t.omega_tz = omega;
  t.omega_trho = 0.5 * omega;
  t.a_z = a_z;
  t.d_surface_m = d;
  t.u_depth = depth;
  return t;
}

}  // namespace

TEST_CASE("optical jump rate") {
  const NoiseEnvironment env;
  // Omega_0^2 / delta^2 = 1e-6 with E_R' = 1e-29 J and omega = 1e8.
  auto s = make_setup(2e-9, 0.0, 1e12);
  s.drive.rabi_rad_s = 1e9;
  const auto t = manual_report(1.0e-29, 1e8, 1.9e-9, 60e-9, 1e-24);
  const double expected = oracle::rb_gamma * (1.0e-29 / (oracle::hbar * 1e8)) * 1e-6;
  CHECK(optical_jump_rate(s, t, env) == Approx(expected).epsilon(1e-13));
  CHECK(optical_jump_rate(s, t, env) == Approx(0.036).epsilon(0.01));

  // Doubling Omega_0 at fixed delta quadruples the rate.
  auto s2 = s;
  s2.drive.rabi_rad_s *= 2.0;
  CHECK(optical_jump_rate(s2, t, env) / optical_jump_rate(s, t, env) == Approx(4.0).epsilon(1e-12));
  // Doubling delta at fixed Omega_0^2 / delta halves it.
  auto s3 = s;
  s3.drive.rabi_rad_s *= std::sqrt(2.0);
  s3.drive.detuning_rad_s *= 2.0;
  CHECK(optical_jump_rate(s3, t, env) / optical_jump_rate(s, t, env) == Approx(0.5).epsilon(1e-12));
  // Purcell enhancement multiplies Gamma_0.
  NoiseEnvironment purcell = env;
  purcell.purcell_enhancement = purcell_enhancement_from_factor(0.2);
  CHECK(optical_jump_rate(s, t, purcell) / optical_jump_rate(s, t, env) == Approx(1.2).epsilon(1e-12));
  s.drive.detuning_rad_s = 0.0;
  CHECK_THROWS_AS(optical_jump_rate(s, t, env), DomainError);
}

TEST_CASE("free-space two-level identity") {
  const auto s = make_setup(2e-9, 1e8, 1e12);
  const auto t = find_trap(s, silver());
  REQUIRE(t.existence_ok);
  const NoiseEnvironment env;
  const double ratio = s.drive.rabi_rad_s / s.drive.detuning_rad_s;
  CHECK(optical_jump_rate(s, t, env) * constants::hbar * t.omega_tz ==
        Approx(s.atom.linewidth_rad_s * t.enhanced_recoil * ratio * ratio).epsilon(1e-13));
}

TEST_CASE("magnetic rates") {
  const auto rb = rubidium87();
  const auto ag = silver();
  const auto base = magnetic_rates(2e-9, 60e-9, rb, ag, 300.0, 1.0, 1.0);
  // (mu0 mu_B g_S)^2 k_B T / (hbar^2 rho d)
  const double coupling = 1.25663706212e-6 * 9.2740100783e-24 * 2.00231930436256;
  const double ref = coupling * coupling * 1.380649e-23 * 300.0 / (oracle::hbar * oracle::hbar * 1.59e-8 * 60e-9);
  CHECK(base.flip == Approx(ref).epsilon(1e-12));
  CHECK(base.jump == Approx(ref * std::pow(2.0 / 60.0, 2)).epsilon(1e-12));

  const auto far = magnetic_rates(2e-9, 120e-9, rb, ag, 300.0, 1.0, 1.0);
  CHECK(far.flip / base.flip == Approx(0.5).epsilon(1e-12));
  CHECK(far.jump / base.jump == Approx(0.125).epsilon(1e-12));
  const auto hot = magnetic_rates(2e-9, 60e-9, rb, ag, 600.0, 1.0, 1.0);
  CHECK(hot.flip / base.flip == Approx(2.0).epsilon(1e-12));
  CHECK(hot.jump / base.jump == Approx(2.0).epsilon(1e-12));
  const auto reduced = magnetic_rates(2e-9, 60e-9, rb, ag, 300.0, 0.5, 0.1);
  CHECK(reduced.flip / base.flip == Approx(0.05).epsilon(1e-12));
  const auto cold = magnetic_rates(2e-9, 60e-9, rb, ag, 0.0, 1.0, 1.0);
  CHECK(cold.flip == 0.0);
  CHECK(cold.jump == 0.0);
  CHECK_THROWS_AS(magnetic_rates(2e-9, 0.0, rb, ag, 300.0, 1.0, 1.0), DomainError);
}

TEST_CASE("magnetic prefactor calibration") {
  const auto rb = rubidium87();
  const auto ag = silver();
  const double c = calibrate_magnetic_prefactor(rb, ag, 3e-9, 780e-9);
  CHECK(c == Approx(kCalibratedMagneticPrefactor).epsilon(1e-12));
  // With the frozen constant and default reduction the anchor reads 10 ms.
  const Complex eps = permittivity_at(ag, 780e-9);
  const TipGeometry tip(3e-9);
  const auto m = magnetic_rates(1e-9, std::abs(eps.real()) * 3e-9, rb, ag, 300.0, kCalibratedMagneticPrefactor,
                                default_geometric_reduction(tip, eps));
  CHECK(1.0 / m.flip == Approx(10e-3).epsilon(1e-12));
  CHECK(default_geometric_reduction(tip, eps) ==
        Approx(std::pow(3e-9 / (3e-9 * (eps.real() - 1.0)), 2)).epsilon(1e-14));

  // At the z0 = 3 nm, delta ~ 1e6 Gamma_0 operating point the spin-flip time is ~10 ms.
  const double intensity = 1e9;
  const double delta = detuning_for_trap_frequency(rb, tip, eps, rabi_frequency_from_intensity(rb, intensity), 1e7);
  CHECK(delta / rb.linewidth_rad_s > 1e5);
  const TrapSetup s{rb, tip, eps, TrapDrive::from_intensity(rb, intensity, 780e-9, delta)};
  const auto t = find_trap(s, ag);
  REQUIRE(t.existence_ok);
  const auto r = compute_rates(s, t, ag, NoiseEnvironment{});
  CHECK(r.spin_flip_time == Approx(10e-3).epsilon(0.1));
}

TEST_CASE("shot-noise bound") {
  CHECK(shot_noise_bound(3.0, 60e-9, 60e-9) == Approx(3.0));
  CHECK(shot_noise_bound(1.0, 2e-9, 60e-9) == Approx(1.1e-3).epsilon(0.02));
  CHECK(shot_noise_bound(1.0, 2e-9, 60e-9) == Approx(1.0 / 900.0).epsilon(1e-13));
  CHECK(shot_noise_bound(0.0, 2e-9, 60e-9) == 0.0);
}

TEST_CASE("lifetime") {
  const double hw = constants::hbar * 1e7;
  CHECK(lifetime(100.0 * hw, 1e7, 10.0) == Approx(10.0).epsilon(1e-14));
  CHECK(lifetime(200.0 * hw, 1e7, 10.0) == Approx(20.0).epsilon(1e-14));
  CHECK(lifetime(100.0 * hw, 1e7, 20.0) < lifetime(100.0 * hw, 1e7, 10.0));
  CHECK(std::isinf(lifetime(100.0 * hw, 1e7, 0.0)));
}

TEST_CASE("intensity cap") {
  const auto ag = silver();
  CHECK(intensity_cap_check(1e10, ag).ok);
  CHECK(intensity_cap_check(0.0, ag).ok);
  const auto over = intensity_cap_check(1e9 * 17.0, ag);
  CHECK_FALSE(over.ok);
  CHECK(over.intensity_W_m2 == Approx(1.7e10));
  CHECK(over.max_intensity_W_m2 == 1e10);
}

TEST_CASE("magnetometry sensitivity") {
  const auto rb = rubidium87();
  const double s1 = magnetometry_sensitivity(1.0, rb);
  CHECK(s1 == Approx(oracle::hbar / (2.00231930436256 * 9.2740100783e-24)).epsilon(1e-13));
  CHECK(s1 == Approx(5.7e-12).epsilon(0.01));
  CHECK(magnetometry_sensitivity(4.0, rb) / s1 == Approx(0.5).epsilon(1e-14));
  CHECK(magnetometry_sensitivity(1e30, rb) < 1e-26);
  CHECK_THROWS_AS(magnetometry_sensitivity(0.0, rb), DomainError);
}

TEST_CASE("compute_rates: report consistency and channel toggles") {
  const auto ag = silver();
  const auto s = make_setup(3e-9, 1e8, 1e12);
  const auto t = find_trap(s, ag);
  REQUIRE(t.existence_ok);
  const NoiseEnvironment env;
  const auto r = compute_rates(s, t, ag, env);
  for (double v : {r.gamma_jump_opt, r.gamma_flip_mag, r.gamma_jump_mag, r.gamma_shot_bound, r.heating_power,
                   r.lifetime, r.spin_flip_time, r.scattering_coherence_time}) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
  }
  CHECK(r.lifetime > 0.0);
  CHECK(r.gamma_shot_bound <= r.gamma_jump_opt * std::pow(t.a_z / t.d_surface_m, 2) * (1.0 + 1e-12));
  CHECK(r.spin_flip_time == Approx(1.0 / r.gamma_flip_mag));
  CHECK(r.scattering_coherence_time == Approx(1.0 / r.gamma_jump_opt));
  CHECK(r.total_emission_rate == s.atom.linewidth_rad_s);
  const double total = r.gamma_jump_opt + r.gamma_jump_mag + r.gamma_shot_bound;
  CHECK(r.lifetime == Approx(t.u_depth / (constants::hbar * t.omega_tz * total)).epsilon(1e-13));

  const auto opt_only = compute_rates(s, t, ag, env, {.optical = true, .magnetic = false, .shot = false});
  CHECK(opt_only.lifetime == Approx(t.u_depth / (constants::hbar * t.omega_tz * r.gamma_jump_opt)).epsilon(1e-13));
  CHECK(opt_only.lifetime >= r.lifetime);
  const auto none = compute_rates(s, t, ag, env, {.optical = false, .magnetic = false, .shot = false});
  CHECK(std::isinf(none.lifetime));
  CHECK(none.gamma_jump_opt == r.gamma_jump_opt);  // rates are still reported

  NoiseEnvironment fixed = env;
  fixed.geometric_reduction = 1.0;
  const auto unreduced = compute_rates(s, t, ag, fixed);
  CHECK(unreduced.gamma_flip_mag / r.gamma_flip_mag == Approx(1.0 / r.geometric_reduction).epsilon(1e-12));

  TrapReport missing = t;
  missing.existence_ok = false;
  CHECK_THROWS_AS(compute_rates(s, missing, ag, env), DomainError);
  NoiseEnvironment bad = env;
  bad.temperature_K = -1.0;
  CHECK_THROWS_AS(compute_rates(s, t, ag, bad), DomainError);
}

TEST_CASE("rate power laws under doubling") {
  const auto ag = silver();
  const auto rb = rubidium87();
  const auto s = make_setup(3e-9, 1e8, 1e12);
  const auto t = find_trap(s, ag);
  REQUIRE(t.existence_ok);
  const NoiseEnvironment env;
  const auto r = compute_rates(s, t, ag, env);

  auto t_far = t;
  t_far.d_surface_m *= 2.0;
  const auto r_far = compute_rates(s, t_far, ag, env);
  CHECK(r_far.gamma_flip_mag / r.gamma_flip_mag == Approx(0.5).epsilon(1e-12));
  CHECK(r_far.gamma_jump_mag / r.gamma_jump_mag == Approx(0.125).epsilon(1e-12));
  CHECK(r_far.gamma_shot_bound / r.gamma_shot_bound == Approx(0.25).epsilon(1e-12));
  CHECK(r_far.gamma_jump_opt == r.gamma_jump_opt);

  NoiseEnvironment hot = env;
  hot.temperature_K *= 2.0;
  CHECK(compute_rates(s, t, ag, hot).gamma_flip_mag / r.gamma_flip_mag == Approx(2.0).epsilon(1e-12));

  auto s_rabi = s;
  s_rabi.drive.rabi_rad_s *= 2.0;
  CHECK(compute_rates(s_rabi, t, ag, env).gamma_jump_opt / r.gamma_jump_opt == Approx(4.0).epsilon(1e-12));
  auto s_delta = s;
  s_delta.drive.detuning_rad_s *= 2.0;
  CHECK(compute_rates(s_delta, t, ag, env).gamma_jump_opt / r.gamma_jump_opt == Approx(0.25).epsilon(1e-12));

  auto t_deep = t;
  t_deep.u_depth *= 2.0;
  CHECK(compute_rates(s, t_deep, ag, env).lifetime / r.lifetime == Approx(2.0).epsilon(1e-12));
  (void)rb;
}

TEST_CASE("Purcell presets") {
  REQUIRE(std::size(kPurcellPresets) == 2);
  CHECK(kPurcellPresets[0].z0_m == 1e-9);
  CHECK(kPurcellPresets[0].purcell_factor == 6.0);
  CHECK(kPurcellPresets[1].z0_m == 3e-9);
  CHECK(kPurcellPresets[1].purcell_factor == 0.2);
  CHECK(purcell_enhancement_from_factor(6.0) == 7.0);
}
