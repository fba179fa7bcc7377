#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mildns/lab.hpp"

using namespace mildns;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mildns_lab_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("catalog lists the thirteen experiments") {
  const auto list = lab::list_experiments();
  CHECK(list.size() == 13);
  for (const auto& e : list) {
    CHECK_FALSE(e.description.empty());
    CHECK(lab::default_config(e.id)["experiment"] == e.id);
  }
  try {
    lab::default_config("nope");
    FAIL("unknown id accepted");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("fixed-point-demo") != std::string::npos);
    CHECK(msg.find("kernel-decay") != std::string::npos);
  }
}

TEST_CASE("overrides follow dotted paths") {
  auto doc = lab::default_config("solve");
  lab::apply_override(doc, "lattice.n=16");
  lab::apply_override(doc, "datum.kind=single_mode");
  lab::apply_override(doc, "params.write_snapshots=true");
  lab::apply_override(doc, "datum.mode=[2,1]");
  CHECK(doc["lattice"]["n"] == 16);
  CHECK(doc["datum"]["kind"] == "single_mode");
  CHECK(doc["params"]["write_snapshots"] == true);
  CHECK(doc["datum"]["mode"].size() == 2);
  CHECK_THROWS_AS(lab::apply_override(doc, "lattice.m=3"), ConfigError);
  CHECK_THROWS_AS(lab::apply_override(doc, "lattice=3"), ConfigError);
  CHECK_THROWS_AS(lab::apply_override(doc, "novalue"), ConfigError);
  CHECK_THROWS_AS(lab::make_config("solve", {{"lattice", {{"size", 3}}}}), ConfigError);
  CHECK_THROWS_AS(lab::make_config("solve", {{"experiment", "ladder"}}), ConfigError);
}

TEST_CASE("validation fails fast and writes nothing") {
  const auto out = scratch("failfast");
  for (const char* bad : {"lattice.n=33", "book.p=0.5", "mesh.horizon=1000", "datum.kind=vortex",
                          "solver.tol=-1", "calibration.mode=sometimes"}) {
    auto cfg = lab::make_config("solve", nlohmann::json::object(), {bad});
    cfg.out = out;
    CHECK_THROWS_AS(lab::validate(cfg), ConfigError);
    CHECK_THROWS_AS(lab::run_and_write(cfg), ConfigError);
    CHECK_FALSE(fs::exists(out));
  }
  auto cfg = lab::make_config("bilinear", nlohmann::json::object(), {"params.k_max=12"});
  CHECK_THROWS_AS(lab::validate(cfg), ConfigError);  // beyond n/4
  cfg = lab::make_config("heat-decay", nlohmann::json::object(), {"params.t_max=80", "params.fit_max=80"});
  CHECK_THROWS_AS(lab::validate(cfg), ConfigError);  // L^2 < 100 t_max
}

TEST_CASE("fixed-point demo table") {
  const auto res = lab::run(lab::make_config("fixed-point-demo"));
  const auto& tab = res.table("demo");
  REQUIRE(tab.rows.size() == 3);
  const auto& row = tab.rows[0];  // y, eta, ball, status, iterations, solution, exact, err, residual
  CHECK(row[3] == 1.0);
  CHECK(row[4] <= 50);
  CHECK(std::abs(row[5] - (std::sqrt(2.0) - 1.0) / 2.0) < 1e-12);
  CHECK(row[8] < 1e-12);
  CHECK(tab.rows[2][3] == -1.0);
  CHECK(tab.rows[2][2] < 0.0);
}

TEST_CASE("outputs are byte identical and carry provenance") {
  const auto dir_a = scratch("det_a");
  const auto dir_b = scratch("det_b");
  auto cfg = lab::make_config("smallness");
  cfg.out = dir_a;
  const auto a = lab::run_and_write(cfg);
  cfg.out = dir_b;
  lab::run_and_write(cfg);
  for (const char* f : {"smallness.csv", "manifest.json"}) CHECK(slurp(dir_a / f) == slurp(dir_b / f));
  CHECK(a.provenance["calibration_hash"] != "none");
  CHECK(a.provenance["config_hash"] == lab::config_hash(cfg));
  CHECK(a.provenance["version"] == lab::version);
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("calibration files are hashed and key-checked") {
  const auto dir = scratch("cal");
  fs::create_directories(dir);
  const auto cfg = lab::make_config("smallness");
  const auto cal = lab::calibrate(cfg);
  save_calibration(dir / "cal.json", cal);
  auto with_file = lab::make_config("smallness", nlohmann::json::object(),
                                    {"calibration.mode=file", "calibration.file=" + (dir / "cal.json").string()});
  const auto res = lab::run(with_file);
  CHECK(res.provenance["calibration_hash"] == io::file_hash(dir / "cal.json"));
  auto other = with_file;
  lab::apply_override(other.doc, "book.q_tilde=6");
  CHECK_THROWS_AS(lab::validate(other), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("experiment failures keep the module error and the partial trace") {
  const auto cfg = lab::make_config("solve", nlohmann::json::object(),
                                    {"datum.kind=random_band", "lattice.n=32", "mesh.nodes=16", "mesh.quad_nodes=16",
                                     "calibration.mode=auto", "solver.smallness_fraction=50"});
  try {
    lab::run(cfg);
    FAIL("large datum converged");
  } catch (const lab::ExperimentError& e) {
    CHECK(e.kind() == ErrorKind::numerical);
    CHECK(exit_code_for(e.kind()) == 3);
    CHECK(e.partial().contains("iterations"));
  }
  CHECK(exit_code_for(ErrorKind::config) == 2);
  CHECK(exit_code_for(ErrorKind::io) == 4);
}

TEST_CASE("every experiment runs from its bundled defaults") {
  for (const auto& e : lab::list_experiments()) {
    auto cfg = lab::make_config(e.id);
    cfg.out = scratch("smoke_" + e.id);
    INFO(e.id);
    const auto res = lab::run_and_write(cfg);
    CHECK(fs::exists(cfg.out / "manifest.json"));
    CHECK(fs::exists(cfg.out / (res.tables.front().first + ".csv")));
    CHECK_FALSE(res.tables.front().second.rows.empty());
    fs::remove_all(cfg.out);
  }
}
