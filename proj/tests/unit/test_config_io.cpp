#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "nanotrap/config.hpp"
#include "nanotrap/errors.hpp"
#include "nanotrap/io.hpp"

using namespace nanotrap;

TEST_CASE("key-value parsing") {
  std::istringstream in("# comment\n[tip]\nz0_nm = 3   ; trailing\n\n[drive]\nintensity_W_m2=2e9\n");
  const auto entries = parse_key_value(in, "mem");
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].section == "tip");
  CHECK(entries[0].key == "z0_nm");
  CHECK(entries[0].value == "3");
  CHECK(entries[0].line == 3);
  CHECK(entries[1].value == "2e9");

  std::istringstream bad("[tip]\nno equals sign\n");
  CHECK_THROWS_AS(parse_key_value(bad, "mem"), ConfigError);
}

TEST_CASE("strict scalar parsing") {
  CHECK(parse_double(" 1.5e-3 ", "x") == 1.5e-3);
  CHECK_THROWS_AS(parse_double("1.5abc", "x"), ConfigError);
  CHECK_THROWS_AS(parse_double("", "x"), ConfigError);
  CHECK(parse_integer("42", "x") == 42);
  CHECK_THROWS_AS(parse_integer("4.2", "x"), ConfigError);
  CHECK(parse_bool("true", "x"));
  CHECK_FALSE(parse_bool("false", "x"));
  CHECK_THROWS_AS(parse_bool("maybe", "x"), ConfigError);
}

TEST_CASE("defaults, file and command-line precedence") {
  ConfigStore store;
  CHECK(store.get_double("tip.z0_nm") == 2.0);
  std::istringstream file("[tip]\nz0_nm = 3\n[run]\nseed = 7\n");
  store.load(file, "file");
  CHECK(store.get_double("tip.z0_nm") == 3.0);
  store.assign("tip.z0_nm=1.5");
  CHECK(store.get_double("tip.z0_nm") == 1.5);
  CHECK(store.get_integer("run.seed") == 7);
  CHECK_FALSE(store.get_optional_double("mc.kick_rate").has_value());
  store.assign("mc.kick_rate=12");
  CHECK(store.get_optional_double("mc.kick_rate") == 12.0);
}

TEST_CASE("unknown and malformed keys are rejected") {
  ConfigStore store;
  CHECK_THROWS_AS(store.assign("tip.radius=3"), ConfigError);
  CHECK_THROWS_AS(store.assign("tip.z0_nm"), ConfigError);
  std::istringstream file("[tip]\nwidth = 3\n");
  CHECK_THROWS_AS(store.load(file, "file"), ConfigError);
  CHECK_THROWS_AS(store.load_file("/nonexistent/config.ini"), IoError);
}

TEST_CASE("every key is echoed and the INI rendering round-trips") {
  ConfigStore store;
  store.assign("drive.intensity_W_m2=3.5e8");
  store.assign("sweep.parameter=z0");
  const auto entries = store.entries();
  CHECK(entries.size() == config_keys().size());
  std::istringstream in(store.to_ini());
  ConfigStore copy;
  copy.load(in, "roundtrip");
  CHECK(copy.entries() == entries);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, 6.02214076e23, 1e-300, -2.5e-17,
                   std::numeric_limits<double>::max(), std::numeric_limits<double>::denorm_min()}) {
    CHECK(parse_number(format_number(v)) == v);
  }
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(format_number(inf) == "inf");
  CHECK(format_number(-inf) == "-inf");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(parse_number("inf") == inf);
  CHECK(parse_number("-inf") == -inf);
  CHECK(std::isnan(parse_number("nan")));
  CHECK_THROWS_AS(parse_number("abc"), IoError);
}

TEST_CASE("csv tables round-trip with metadata") {
  CsvTable t;
  t.metadata = {{"schema", "nanotrap.test/1"}, {"config.tip.z0_nm", "3"}};
  t.columns = {"a", "b", "status"};
  t.rows = {{format_number(1.0 / 3.0), "inf", "ok"}, {"-2", "nan", "no_trap"}};
  std::stringstream io;
  t.write(io);
  const auto back = CsvTable::read(io);
  CHECK(back.schema() == "nanotrap.test/1");
  CHECK(back.metadata == t.metadata);
  CHECK(back.columns == t.columns);
  CHECK(back.rows == t.rows);
  CHECK(back.number(0, "a") == 1.0 / 3.0);
  CHECK(std::isinf(back.number(0, "b")));
  CHECK(back.text(1, "status") == "no_trap");
  CHECK_THROWS_AS((void)back.column("missing"), IoError);

  const auto path = std::filesystem::temp_directory_path() / "nanotrap_csv_roundtrip.csv";
  t.save(path);
  CHECK(CsvTable::load(path).rows == t.rows);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(CsvTable::load("/nonexistent/x.csv"), IoError);
}
