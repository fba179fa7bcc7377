#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mildns/io.hpp"
#include "mildns/picard.hpp"

namespace mildns::lab {

inline constexpr const char* version = "mildns 0.1.0";

struct ExperimentInfo {
  std::string id;
  std::string description;
  std::string checks;  // the property the experiment measures
};

/// The 13 experiment ids with one-line descriptions.
std::vector<ExperimentInfo> list_experiments();

/// Bundled defaults for an id. Unknown ids raise ConfigError listing the valid ones.
nlohmann::json default_config(const std::string& id);

/// A single JSON document: experiment, seed, out, lattice, book, datum, mesh, solver,
/// calibration and per-experiment params.
struct ExperimentConfig {
  std::string id;
  nlohmann::json doc;
  std::filesystem::path out;
};

/// Sets a dotted path, e.g. "lattice.n=64" or "params.s_list=[-0.5,0]". The value is
/// parsed as JSON when possible and kept as a string otherwise. The key must exist in
/// the document.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Defaults for `id`, patched by `user` (keys must exist in the defaults) and then by
/// the --set style `overrides`.
ExperimentConfig make_config(const std::string& id, const nlohmann::json& user = nlohmann::json::object(),
                             const std::vector<std::string>& overrides = {});

/// Loads a config file; the id is taken from its "experiment" field unless `id` is given.
ExperimentConfig load_config(const std::filesystem::path& path, const std::string& id = "",
                             const std::vector<std::string>& overrides = {});

/// Checks every referenced parameter against its module validation without computing
/// anything. Failures surface as ConfigError naming the offending key.
void validate(const ExperimentConfig& config);

struct ExperimentResult {
  std::string id;
  std::vector<std::pair<std::string, io::Table>> tables;  // first is the primary table
  nlohmann::json summary = nlohmann::json::object();
  nlohmann::json codes = nlohmann::json::object();  // meaning of coded columns
  nlohmann::json provenance = nlohmann::json::object();
  nlohmann::json config;
  std::function<void(const std::filesystem::path&)> extra;  // optional artifact writer

  const io::Table& table(const std::string& name) const;
};

/// Failure inside an experiment: keeps the module error kind and any partial trace.
class ExperimentError : public Error {
 public:
  ExperimentError(ErrorKind kind, const std::string& what, nlohmann::json partial)
      : Error(kind, what), partial_(std::move(partial)) {}
  const nlohmann::json& partial() const noexcept { return partial_; }

 private:
  nlohmann::json partial_;
};

/// Validates, then computes. Nothing is written.
ExperimentResult run(const ExperimentConfig& config);

/// One CSV per table plus manifest.json. Output is byte-identical for identical configs.
void write_result(const std::filesystem::path& dir, const ExperimentResult& result);

/// run + write_result into config.out.
ExperimentResult run_and_write(const ExperimentConfig& config);

/// Threshold calibration for the config's lattice and book.
Calibration calibrate(const ExperimentConfig& config);

/// 64-bit FNV-1a over the canonical dump of the resolved config.
std::string config_hash(const ExperimentConfig& config);

}  // namespace mildns::lab
