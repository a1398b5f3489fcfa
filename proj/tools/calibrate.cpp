// Prints the magnetic-noise prefactor that gives a 10 ms spin-flip time for
// Rb-87 at a 3 nm silver tip at room temperature, d = |Re eps| z0.
#include <cstdio>

#include "nanotrap/material.hpp"
#include "nanotrap/rates.hpp"
#include "nanotrap/species.hpp"

int main() {
  const auto atom = nanotrap::rubidium87();
  const auto tip = nanotrap::silver();
  const double c = nanotrap::calibrate_magnetic_prefactor(atom, tip, 3e-9, atom.transition_wavelength_m);
  std::printf("%.17g\n", c);
  return 0;
}
