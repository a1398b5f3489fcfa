#include "nanotrap/material.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nanotrap/constants.hpp"
#include "nanotrap/errors.hpp"

namespace nanotrap {

namespace detail {
extern const std::string_view kSilverTableText;
}

PermittivityTable::PermittivityTable(std::vector<PermittivitySample> rows) : rows_(std::move(rows)) {
  if (rows_.empty()) throw ConfigError("permittivity table is empty");
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& r = rows_[i];
    if (!std::isfinite(r.wavelength_m) || !std::isfinite(r.epsilon.real()) ||
        !std::isfinite(r.epsilon.imag())) {
      throw ConfigError("permittivity table row " + std::to_string(i) + " is not finite");
    }
    if (i > 0 && !(r.wavelength_m > rows_[i - 1].wavelength_m)) {
      throw ConfigError("permittivity table must be strictly ascending in wavelength (row " +
                        std::to_string(i) + ")");
    }
  }
}

PermittivityTable PermittivityTable::parse(std::istream& in, std::string_view source_name) {
  std::vector<PermittivitySample> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    double wavelength_nm = 0, re = 0, im = 0;
    if (!(fields >> wavelength_nm >> re >> im)) {
      throw ConfigError(std::string(source_name) + ":" + std::to_string(line_no) +
                        ": expected 'wavelength_nm eps_real eps_imag'");
    }
    std::string extra;
    if (fields >> extra) {
      throw ConfigError(std::string(source_name) + ":" + std::to_string(line_no) +
                        ": unexpected trailing field '" + extra + "'");
    }
    rows.push_back({wavelength_nm * constants::nm, {re, im}});
  }
  return PermittivityTable(std::move(rows));
}

PermittivityTable PermittivityTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open permittivity table " + path.string());
  return parse(in, path.string());
}

std::complex<double> PermittivityTable::at(double wavelength_m) const {
  const double lo = min_wavelength();
  const double hi = max_wavelength();
  if (!(wavelength_m >= lo && wavelength_m <= hi)) {
    std::ostringstream msg;
    msg << "wavelength " << wavelength_m / constants::nm << " nm outside tabulated band ["
        << lo / constants::nm << ", " << hi / constants::nm << "] nm";
    throw RangeError(msg.str());
  }
  const auto upper = std::lower_bound(
      rows_.begin(), rows_.end(), wavelength_m,
      [](const PermittivitySample& s, double w) { return s.wavelength_m < w; });
  if (upper->wavelength_m == wavelength_m) return upper->epsilon;
  const auto lower = std::prev(upper);
  const double t = (wavelength_m - lower->wavelength_m) / (upper->wavelength_m - lower->wavelength_m);
  return {lower->epsilon.real() + t * (upper->epsilon.real() - lower->epsilon.real()),
          lower->epsilon.imag() + t * (upper->epsilon.imag() - lower->epsilon.imag())};
}

void TipMaterial::validate() const {
  const auto positive = [&](double v, const char* field) {
    if (!(std::isfinite(v) && v > 0.0)) {
      throw DomainError("material '" + name + "': " + field + " must be positive");
    }
  };
  positive(resistivity_ohm_m, "resistivity_ohm_m");
  positive(lattice_spacing_m, "lattice_spacing_m");
  positive(max_intensity_W_m2, "max_intensity_W_m2");
  if (!(adatom_dipole_C_m >= 0.0)) {
    throw DomainError("material '" + name + "': adatom dipole must be non-negative");
  }
}

std::complex<double> permittivity_at(const TipMaterial& material, double wavelength_m) {
  return material.permittivity.at(wavelength_m);
}

TipMaterial silver() {
  std::istringstream text{std::string(detail::kSilverTableText)};
  return TipMaterial{
      .name = "silver",
      .permittivity = PermittivityTable::parse(text, "silver_johnson_christy.dat"),
      .resistivity_ohm_m = 1.59e-8,
      .lattice_spacing_m = 4.086e-10,
      .max_intensity_W_m2 = 1e10,  // 10 mW/um^2
      .adatom_dipole_C_m = constants::debye,
  };
}

std::vector<std::string> material_names() { return {"silver"}; }

TipMaterial material_by_name(std::string_view name) {
  if (name == "silver" || name == "Ag") return silver();
  throw ConfigError("unknown tip material '" + std::string(name) + "' (known: silver)");
}

}  // namespace nanotrap
