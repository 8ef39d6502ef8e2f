#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfglq/equilibrium.hpp"
#include "mfglq/fbsolver.hpp"
#include "mfglq/model.hpp"
#include "mfglq/simulate.hpp"

namespace mfglq {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat-sectioned key-value text, parsed strictly: unknown sections or keys,
// duplicates, and malformed lines are all errors.
struct RawConfig {
  std::map<std::string, std::map<std::string, std::string>> sections;
  bool has(const std::string& section, const std::string& key) const;
  const std::string* find(const std::string& section, const std::string& key) const;
};

RawConfig parse_config_text(const std::string& text);
RawConfig parse_config_file(const std::string& path);

struct RunConfig {
  GameClass game = GameClass::Mfg;
  GameModel model;           // PopulationModel for mfg/mpmfg, GraphonModel for gmfg
  PopulationModel pop;       // populated for mfg/mpmfg (and for gmfg via blocks)
  TimeGrid grid;
  SolverOptions solver;
  SimConfig sim;
  std::vector<int> sweep;
  int m_points = 0;          // [graphon] m_points when present
  std::string out_dir = "out";
  nlohmann::ordered_json echo;  // raw key-value echo for reports
};

// Parses, validates against the schema, and builds the model objects.
// Throws ConfigError with a message naming the offending section/key.
RunConfig load_run_config(const std::string& path);
RunConfig build_run_config(const RawConfig& raw);

}  // namespace mfglq
