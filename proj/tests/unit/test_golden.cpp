#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <initializer_list>
#include <string>

#include "nanotrap/errors.hpp"
#include "nanotrap/io.hpp"
#include "nanotrap/pipeline.hpp"

using namespace nanotrap;
using namespace nanotrap::pipeline;

// Regression against committed outputs. NANOTRAP_UPDATE_GOLDEN=1 rewrites
// the files instead of comparing.

namespace {

const std::filesystem::path golden_dir{NANOTRAP_GOLDEN_DIR};

RunConfig configure(std::initializer_list<std::string> assignments) {
  ConfigStore store;
  for (const auto& a : assignments) store.assign(a);
  return resolve_config(store);
}

bool numeric(const std::string& cell, double& out) {
  try {
    out = parse_number(cell);
    return true;
  } catch (const IoError&) {
    return false;
  }
}

void compare(const std::string& name, const CsvTable& actual) {
  const auto path = golden_dir / (name + ".csv");
  if (const char* flag = std::getenv("NANOTRAP_UPDATE_GOLDEN"); flag && std::string(flag) == "1") {
    actual.save(path);
    MESSAGE("rewrote " << path.string());
    return;
  }
  const auto expected = CsvTable::load(path);
  CHECK(actual.metadata == expected.metadata);
  REQUIRE(actual.columns == expected.columns);
  REQUIRE(actual.rows.size() == expected.rows.size());
  for (std::size_t i = 0; i < expected.rows.size(); ++i) {
    for (std::size_t c = 0; c < expected.columns.size(); ++c) {
      const auto& want = expected.rows[i][c];
      const auto& got = actual.rows[i][c];
      double w = 0.0;
      double g = 0.0;
      if (numeric(want, w) && numeric(got, g)) {
        if (std::isnan(w) || std::isinf(w)) {
          CHECK_MESSAGE(want == got, name << " row " << i << " " << expected.columns[c]);
          continue;
        }
        const double scale = std::max(std::abs(w), 1e-300);
        CHECK_MESSAGE(std::abs(g - w) <= 1e-9 * scale,
                      name << " row " << i << " " << expected.columns[c] << ": " << got << " vs " << want);
      } else {
        CHECK_MESSAGE(want == got, name << " row " << i << " " << expected.columns[c]);
      }
    }
  }
}

}  // namespace

TEST_CASE("sweep over intensity") { compare("sweep_intensity", run_sweep(configure({}))); }

TEST_CASE("sweep over z0") {
  compare("sweep_z0", run_sweep(configure({"sweep.parameter=z0", "sweep.min=0.5", "sweep.max=5",
                                           "sweep.n_points=10", "sweep.spacing=linear"})));
}

TEST_CASE("sweep over trap frequency") {
  compare("sweep_trap_frequency",
          run_sweep(configure({"tip.z0_nm=3", "sweep.parameter=trap_frequency", "sweep.min=1e6", "sweep.max=1e9",
                               "sweep.n_points=7"})));
}

TEST_CASE("sweep over detuning") {
  compare("sweep_detuning",
          run_sweep(configure({"drive.detuning_mode=fixed", "sweep.parameter=detuning", "sweep.min=1e10",
                               "sweep.max=1e14", "sweep.n_points=9"})));
}

TEST_CASE("lifetime curves") { compare("fig2b", run_figure(Figure::lifetime_curves, configure({}))); }

TEST_CASE("distance curve") { compare("fig2a_distance", run_figure(Figure::distance_curve, configure({}))); }

TEST_CASE("potential profile") {
  compare("fig1c", run_figure(Figure::potential_profile, configure({"tip.z0_nm=3", "fig1c.n_points=60"})));
}
