#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nanotrap/errors.hpp"
#include "nanotrap/io.hpp"
#include "nanotrap/pipeline.hpp"

namespace fs = std::filesystem;
namespace pl = nanotrap::pipeline;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kDomain = 3, kIo = 4 };

struct Options {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::vector<std::string> assignments;
  std::string figure;
};

nanotrap::ConfigStore load_store(const Options& opt) {
  nanotrap::ConfigStore store;
  if (!opt.config_path.empty()) store.load_file(opt.config_path);
  if (opt.seed) store.set("run.seed", std::to_string(*opt.seed), "--seed");
  if (opt.threads) store.set("run.threads", std::to_string(*opt.threads), "--threads");
  for (const auto& a : opt.assignments) store.assign(a);
  return store;
}

fs::path output_dir(const Options& opt) {
  fs::path dir(opt.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw nanotrap::IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void announce(const fs::path& path) { std::cout << "wrote " << path.string() << "\n"; }

int trap_report(const Options& opt) {
  const auto cfg = pl::resolve_config(load_store(opt));
  const auto result = pl::run_trap_report(cfg);
  const auto path = output_dir(opt) / "trap_report.json";
  nanotrap::write_text_file(path, pl::trap_report_json(cfg, result));
  std::cout << "status " << result.status << ", z_trap " << result.trap.z_trap_m * 1e9 << " nm, depth "
            << result.trap.u_depth << " J";
  if (result.rates) std::cout << ", lifetime " << result.rates->lifetime << " s";
  std::cout << "\n";
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  announce(path);
  return kOk;
}

int figure(const Options& opt) {
  const auto which = pl::figure_from_name(opt.figure);
  const auto cfg = pl::resolve_config(load_store(opt));
  const auto path = output_dir(opt) / (std::string(pl::figure_name(which)) + ".csv");
  pl::run_figure(which, cfg).save(path);
  announce(path);
  return kOk;
}

int loading_check(const Options& opt) {
  const auto cfg = pl::resolve_config(load_store(opt));
  const auto check = pl::run_loading_check(cfg);
  const auto dir = output_dir(opt);
  check.table.save(dir / "loading_check.csv");
  nanotrap::write_text_file(dir / "loading_check.json", pl::loading_check_json(cfg, check));
  std::cout << "z_perp " << check.z_perp_numeric_m * 1e9 << " nm, |z_trap| " << std::abs(check.z_trap_m) * 1e9
            << " nm\n";
  announce(dir / "loading_check.csv");
  announce(dir / "loading_check.json");
  return kOk;
}

int mc_validate(const Options& opt) {
  const auto cfg = pl::resolve_config(load_store(opt));
  const auto v = pl::run_mc_validate(cfg);
  const auto dir = output_dir(opt);
  v.samples.save(dir / "mc_samples.csv");
  nanotrap::write_text_file(dir / "mc_validation.json", pl::mc_validation_json(cfg, v));
  std::cout << "analytic lifetime " << v.analytic_lifetime_s << " s, MC median "
            << (v.estimate.all_censored ? std::string("censored") : std::to_string(v.estimate.median_s) + " s")
            << ", ratio " << v.ratio << (v.consistent ? " (consistent)" : " (inconsistent)") << "\n";
  announce(dir / "mc_samples.csv");
  announce(dir / "mc_validation.json");
  return kOk;
}

int sweep(const Options& opt) {
  const auto cfg = pl::resolve_config(load_store(opt));
  const auto path = output_dir(opt) / "sweep.csv";
  pl::run_sweep(cfg).save(path);
  announce(path);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optical trapping of an atom at a plasmonic nanotip"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--config", opt.config_path, "INI-style configuration file");
  app.add_option("--out", opt.out_dir, "Output directory")->capture_default_str();
  app.add_option("--seed", opt.seed, "Random seed (run.seed)");
  app.add_option("--threads", opt.threads, "Worker threads (run.threads)")->check(CLI::PositiveNumber);
  app.add_option("--set", opt.assignments, "Override a configuration key, section.key=value (repeatable)")
      ->allow_extra_args(false);
  app.fallthrough();

  int (*action)(const Options&) = nullptr;
  app.add_subcommand("trap-report", "Locate the trap and report frequencies, depth and rates")
      ->callback([&] { action = trap_report; });
  auto* fig = app.add_subcommand("figure", "Emit figure data (fig1b, fig1c, fig2a_distance, fig2b)");
  fig->add_option("name", opt.figure, "Figure name")->required();
  fig->callback([&] { action = figure; });
  app.add_subcommand("loading-check", "Field of a perpendicularly polarized beam along the axis")
      ->callback([&] { action = loading_check; });
  app.add_subcommand("mc-validate", "Compare Monte Carlo escape times with the analytic lifetime")
      ->callback([&] { action = mc_validate; });
  app.add_subcommand("sweep", "Evaluate the trap over one swept parameter")->callback([&] { action = sweep; });
  app.add_subcommand("print-config", "Print the resolved configuration as INI")->callback([&] {
    action = [](const Options& o) {
      std::cout << load_store(o).to_ini();
      return static_cast<int>(kOk);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    return action(opt);
  } catch (const nanotrap::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const nanotrap::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const nanotrap::DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kDomain;
  } catch (const nanotrap::RangeError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
