#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mildns/kernels.hpp"
#include "mildns/lab.hpp"

namespace {

using namespace mildns;

int fail(const Error& e) {
  std::cerr << "mildns: " << e.what() << "\n";
  return exit_code_for(e.kind());
}

int run_list() {
  for (const auto& info : lab::list_experiments())
    std::cout << info.id << "\t" << info.description << "\n\t  checks: " << info.checks << "\n";
  return 0;
}

int run_calibrate(const std::string& config, const std::vector<std::string>& sets, const std::string& out) {
  if (config.empty()) throw ConfigError("calibrate: --config is required");
  const auto cfg = lab::load_config(config, "", sets);
  const auto cal = lab::calibrate(cfg);
  if (out.empty()) {
    std::cout << to_json(cal).dump(2) << "\n";
  } else {
    std::filesystem::create_directories(out);
    save_calibration(std::filesystem::path(out) / "calibration.json", cal);
    std::cout << (std::filesystem::path(out) / "calibration.json").string() << "\n";
  }
  return 0;
}

int run_experiment(const std::string& id, const std::string& config, const std::vector<std::string>& sets,
                   const std::string& out) {
  auto cfg = config.empty() ? lab::make_config(id, nlohmann::json::object(), sets)
                            : lab::load_config(config, id, sets);
  if (!out.empty()) {
    cfg.out = out;
    cfg.doc["out"] = out;
  }
  if (cfg.out.empty()) throw ConfigError("out: pass --out <dir> or set \"out\" in the config");
  lab::validate(cfg);
  const auto start = std::chrono::steady_clock::now();
  const auto res = lab::run_and_write(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << res.summary.dump(2) << "\n";
  std::cerr << "mildns: " << id << " wrote " << cfg.out.string() << " in " << secs << " s ("
            << kernels::thread_count() << " threads)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-spectral lab for mild Navier-Stokes solutions.\n"
               "usage: mildns <experiment-id> [--config <path>] [--set k=v ...] --out <dir>\n"
               "       mildns list\n"
               "       mildns calibrate --config <path> [--out <dir>]"};
  std::string command, config, out;
  std::vector<std::string> sets;
  app.add_option("command", command, "experiment id, list or calibrate")->required();
  app.add_option("--config", config, "JSON config file");
  app.add_option("--set", sets, "override a config field, key=value (repeatable)")->take_all();
  app.add_option("--out", out, "output directory");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    kernels::thread_count();  // applies MILDNS_THREADS
    if (command == "list") return run_list();
    if (command == "calibrate") return run_calibrate(config, sets, out);
    return run_experiment(command, config, sets, out);
  } catch (const lab::ExperimentError& e) {
    std::cerr << "mildns: " << e.what() << "\n";
    if (!e.partial().is_null()) std::cerr << "partial trace: " << e.partial().dump() << "\n";
    return exit_code_for(e.kind());
  } catch (const Error& e) {
    return fail(e);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "mildns: " << e.what() << "\n";
    return 4;
  }
}
