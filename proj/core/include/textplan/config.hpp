// Run configuration: one struct covering every module's knobs, a flat
// key-value config file format ([section] + key = value lines), and an
// echo that records where each value came from.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "textplan/consensus.hpp"
#include "textplan/corpus.hpp"
#include "textplan/encoder.hpp"
#include "textplan/extractor.hpp"
#include "textplan/metrics.hpp"
#include "textplan/satlearn.hpp"

namespace textplan {

struct RunConfig {
  // [run]
  std::uint64_t seed = 7;
  int iterations = 100;
  bool no_em = false;    // stop after the first learned domain
  bool no_init = false;  // skip the initializer; extract with the untrained extractor
  int threads = 1;
  int plan_cap = 64;     // per-plan learners per iteration
  bool warm_start = true;
  bool early_stop = true;

  WalkConfig walk;              // [corpus]
  EncoderConfig encoder;        // [encoder]
  SatConfig sat;                // [satlearn]
  ConsensusConfig consensus;    // [consensus]
  ExtractorConfig extractor;    // [extractor]
  EvalConfig eval;              // [eval]

  bool operator==(const RunConfig&) const = default;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Overlay for values set on the command line; these win over file values.
struct ConfigOverlay {
  std::map<std::string, std::string> values;  // dotted key -> raw text

  void set(const std::string& key, const std::string& value) { values[key] = value; }
};

// Parses the documented format; unknown keys and malformed values are hard
// errors carrying the dotted key path.
RunConfig load_config(const std::string& path, const ConfigOverlay& overlay = {});
RunConfig parse_config(const std::string& text, const ConfigOverlay& overlay = {},
                       const std::string& origin = "<string>");

// Canonical config text; every key present, annotated with its provenance
// (flag / file / default). parse(echo(cfg)) reproduces cfg exactly.
std::string echo_config(const RunConfig& cfg, const ConfigOverlay& overlay = {},
                        const std::map<std::string, std::string>& file_values = {});

// Raw key/value map of a config file, used for provenance in the echo.
std::map<std::string, std::string> read_config_values(const std::string& text);

}  // namespace textplan
