#pragma once

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace nanotrap {

struct PermittivitySample {
  double wavelength_m;
  std::complex<double> epsilon;
};

// Tabulated relative permittivity, linearly interpolated in wavelength
// (real and imaginary parts independently).
class PermittivityTable {
 public:
  /// Rows must be non-empty and strictly ascending in wavelength.
  explicit PermittivityTable(std::vector<PermittivitySample> rows);

  /// Parses `wavelength_nm eps_real eps_imag` rows; `#` starts a comment.
  static PermittivityTable parse(std::istream& in, std::string_view source_name = "<stream>");
  static PermittivityTable load(const std::filesystem::path& path);

  /// Throws RangeError naming the valid band if the wavelength is outside it.
  [[nodiscard]] std::complex<double> at(double wavelength_m) const;

  [[nodiscard]] double min_wavelength() const { return rows_.front().wavelength_m; }
  [[nodiscard]] double max_wavelength() const { return rows_.back().wavelength_m; }
  [[nodiscard]] const std::vector<PermittivitySample>& rows() const { return rows_; }

 private:
  std::vector<PermittivitySample> rows_;
};

struct TipMaterial {
  std::string name;
  PermittivityTable permittivity;
  double resistivity_ohm_m;
  double lattice_spacing_m;
  double max_intensity_W_m2;  // melting cap on the incident intensity
  double adatom_dipole_C_m;   // p_0 used by the patch-force bound

  void validate() const;
};

std::complex<double> permittivity_at(const TipMaterial& material, double wavelength_m);

/// Silver: Johnson & Christy permittivity (381-1216 nm), rho = 1.59e-8 Ohm m,
/// fcc lattice constant 4.086 A, I_max = 10 mW/um^2, p_0 = 1 Debye.
TipMaterial silver();

std::vector<std::string> material_names();
TipMaterial material_by_name(std::string_view name);

}  // namespace nanotrap
