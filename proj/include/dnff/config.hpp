#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "dnff/experiment.hpp"

namespace dnff {

// The subset of TOML the run configuration needs: [section] headers, bare
// keys, and values that are booleans, integers, floats, basic strings, or
// single-line arrays of those. Comments start with '#'.
using TomlScalar = std::variant<bool, std::int64_t, double, std::string>;

struct TomlValue {
  std::variant<bool, std::int64_t, double, std::string, std::vector<TomlScalar>> value;
  int line = 0;
};

// Keys are "section.key" (or "key" before any header).
using TomlDocument = std::map<std::string, TomlValue>;

TomlDocument parse_toml(const std::string& text);

struct ExperimentSettings {
  std::size_t pool_frames = 3000;
  std::size_t heldout_frames = 200;
  long eval_steps = 100000;
  std::size_t train_epochs = 400;
  std::uint64_t master_seed = 1;
};

struct RunConfig {
  SystemSpec system;
  SamplerParams sampler;
  NoiseSpec noise;
  ModelHyper model;
  TrainConfig train;
  RdfSettings rdf;
  ExperimentSettings experiment;

  ExperimentPlan plan() const;
};

// Every key is optional; anything the file does not set keeps its default.
// Unknown sections or keys, and values of the wrong type, raise InvalidInput
// naming the key path and line.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace dnff
