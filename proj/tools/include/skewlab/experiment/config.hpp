#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "skewlab/error.hpp"

namespace skewlab::experiment {

// Config grammar, one item per line:
//
//   # comment (also after a value)
//   [section]
//   key = value
//
// Values are integers, reals, booleans (true/false), strings ("quoted" or a
// bare word) and flat lists of numbers ([1, 2.5, 3]). Sections are system,
// experiment and output; keys outside the known set are rejected.

inline const std::vector<std::string> kExperiments{
    "ftle", "branch", "census", "ay_decay", "pliss", "curve", "probe", "acim", "components", "markov"};

inline const std::vector<std::string> kFamilies{"logistic", "quadratic", "two_well", "smooth_diffeo",
                                                "viana"};

struct SystemConfig {
  std::string family = "logistic";
  double a = 1.7;          // quadratic parameter, Viana a0
  double coupling = 0.05;  // Viana alpha
  std::int64_t degree = 16;

  bool operator==(const SystemConfig&) const = default;
};

struct ExperimentConfig {
  SystemConfig system;

  std::string name = "ftle";
  std::uint64_t seed = 1;
  std::int64_t n = 1000;
  std::int64_t samples = 1000;
  std::int64_t grid = 256;  // x bins, or probe mesh size
  std::int64_t theta_grid = 128;
  double theta = 0.0;  // fiber used by 1-D experiments on a skew-product
  double delta = 0.1;
  double lambda = 0.3;
  double delta_tilde = 0.2;
  double eps = 0.01;
  double alpha = 0.01;  // slope of the initial curves
  double threshold = 0.3;
  double c1 = 0.15;
  double c2 = 0.3;
  std::vector<std::int64_t> n_list{30, 40, 50, 60};
  std::vector<double> deltas;  // empty: default grid
  std::int64_t depth = 1;
  std::int64_t k_max = 60;
  std::int64_t seeds = 10000;
  std::int64_t probes = 100;
  std::int64_t threads = 1;

  std::string out = "out";

  bool operator==(const ExperimentConfig&) const = default;
};

struct ConfigIssue {
  std::string path;  // section.key, or empty for syntax errors
  int line = 0;      // 0 when the value came from the command line
  int column = 0;
  std::string message;
};

/// ParseError or ValidationError carrying every issue found.
class ConfigError : public Error {
 public:
  ConfigError(ErrorCode code, std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

/// `section.key=value` or `key=value` assignments applied after the file.
using Overrides = std::vector<std::pair<std::string, std::string>>;

ExperimentConfig parse_config(std::string_view text, const Overrides& overrides = {});

/// Canonical text: every key, fixed order, reals with 17 significant digits.
std::string serialize(const ExperimentConfig& cfg);

/// section.key for every known key, in serialization order.
std::vector<std::string> config_keys();

}  // namespace skewlab::experiment
