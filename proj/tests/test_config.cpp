#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "skewlab/experiment/config.hpp"
#include "skewlab/rng.hpp"

using namespace skewlab;
using namespace skewlab::experiment;

namespace {

std::vector<ConfigIssue> issues_of(std::string_view text, const Overrides& o = {}) {
  try {
    parse_config(text, o);
  } catch (const ConfigError& e) {
    return e.issues();
  }
  return {};
}

ErrorCode code_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.code();
  }
  FAIL("expected a config error");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("minimal config") {
  const auto cfg = parse_config(
      "# Lyapunov exponent of the logistic map\n"
      "[system]\n"
      "family = logistic\n"
      "\n"
      "[experiment]\n"
      "name = \"ftle\"   # one orbit per sample\n"
      "n = 1000000\n"
      "seed = 1\n");
  CHECK(cfg.system.family == "logistic");
  CHECK(cfg.name == "ftle");
  CHECK(cfg.n == 1000000);
  CHECK(cfg.seed == 1);
  CHECK(cfg.samples == ExperimentConfig{}.samples);
  CHECK(parse_config("") == ExperimentConfig{});
}

TEST_CASE("unknown experiment name") {
  const auto is = issues_of("[experiment]\nname = lyapunov\n");
  REQUIRE(is.size() == 1);
  CHECK(is[0].path == "experiment.name");
  CHECK(is[0].line == 2);
  CHECK(is[0].message.find("lyapunov") != std::string::npos);
  CHECK(code_of("[experiment]\nname = lyapunov\n") == ErrorCode::kValidationError);
}

TEST_CASE("out of range values") {
  const auto is = issues_of("[experiment]\ndelta = -0.1\n");
  REQUIRE(is.size() == 1);
  CHECK(is[0].path == "experiment.delta");
  CHECK(is[0].message == "must be > 0");
  CHECK(issues_of("[experiment]\nn = 0\n")[0].path == "experiment.n");
  CHECK(issues_of("[experiment]\ntheta = 1.0\n")[0].path == "experiment.theta");
  CHECK(issues_of("[experiment]\nn = 2.5\n")[0].message == "expected an integer");
  CHECK(issues_of("[experiment]\nn_list = [30, 0]\n")[0].path == "experiment.n_list");
  CHECK(parse_config("[experiment]\nseed = 18446744073709551615\n").seed == UINT64_MAX);
  CHECK(issues_of("[experiment]\nn = 18446744073709551615\n")[0].path == "experiment.n");
  CHECK(issues_of("[experiment]\nseed = -1\n")[0].path == "experiment.seed");
}

TEST_CASE("every issue is reported") {
  const auto is = issues_of("[experiment]\ndelta = -1\nbogus = 3\nn = 0\n[plot]\n");
  REQUIRE(is.size() == 4);
  CHECK(is[0].path == "experiment.delta");
  CHECK(is[1].path == "experiment.bogus");
  CHECK(is[1].message == "unknown key");
  CHECK(is[2].path == "experiment.n");
  CHECK(is[3].path == "[plot]");
  CHECK(issues_of("n = 3\n")[0].message == "key outside of a section");
  CHECK(issues_of("[experiment]\nn = 3\nn = 4\n")[0].message == "duplicate key");
}

TEST_CASE("syntax errors carry line and column") {
  auto one = [](std::string_view text) {
    const auto is = issues_of(text);
    REQUIRE(is.size() == 1);
    return is[0];
  };
  CHECK(code_of("[experiment\n") == ErrorCode::kParseError);
  auto i = one("[experiment]\nn = 1.2.3\n");
  CHECK(i.line == 2);
  CHECK(i.column == 5);
  i = one("[system]\nfamily = \"logistic\n");
  CHECK(i.line == 2);
  CHECK(i.message == "unterminated string");
  i = one("[experiment]\n\n  just words\n");
  CHECK(i.line == 3);
  CHECK(i.column == 3);
  i = one("[experiment]\nn = 3 4\n");
  CHECK(i.column == 7);
  i = one("[experiment]\nn_list = [1, two]\n");
  CHECK(i.column == 14);
}

TEST_CASE("cross-field rules") {
  CHECK(issues_of("[experiment]\nname = curve\n")[0].path == "experiment.name");
  CHECK(issues_of("[system]\nfamily = viana\n[experiment]\nname = markov\n")[0].path == "system.family");
  CHECK(issues_of("[experiment]\nc1 = 0.5\nc2 = 0.4\n")[0].path == "experiment.c1");
  CHECK(issues_of("[experiment]\nname = components\nprobes = 50\n")[0].path == "experiment.probes");
}

TEST_CASE("overrides follow the file") {
  const auto cfg = parse_config("[experiment]\nn = 10\nseed = 4\n",
                                {{"experiment.n", "20"}, {"seed", "9"}, {"output.dir", "/tmp/a b"}});
  CHECK(cfg.n == 20);
  CHECK(cfg.seed == 9);
  CHECK(cfg.out == "/tmp/a b");
  const auto is = issues_of("", {{"n", "abc"}, {"nope", "1"}});
  REQUIRE(is.size() == 2);
  CHECK(is[0].path == "experiment.n");
  CHECK(is[0].line == 0);
  CHECK(is[1].path == "nope");
}

TEST_CASE("strings and escapes") {
  const auto cfg = parse_config("[output]\ndir = \"runs/\\\"q\\\"\\\\x\"\n");
  CHECK(cfg.out == "runs/\"q\"\\x");
  CHECK(parse_config(serialize(cfg)) == cfg);
}

TEST_CASE("serialization round trip") {
  const auto keys = config_keys();
  CHECK(std::find(keys.begin(), keys.end(), "experiment.delta_tilde") != keys.end());
  const std::string plain = serialize(ExperimentConfig{});
  CHECK(plain.rfind("[system]\nfamily = \"logistic\"\n", 0) == 0);
  CHECK(parse_config(plain) == ExperimentConfig{});

  for (std::uint64_t s = 0; s < 200; ++s) {
    CounterRng rng(77, s);
    ExperimentConfig c;
    c.system.family = kFamilies[s % kFamilies.size()];
    c.system.a = rng.uniform(0.5, 2.0);
    c.system.coupling = rng.uniform(1e-6, 0.5);
    c.system.degree = 2 + static_cast<std::int64_t>(rng.uniform() * 30);
    c.name = c.system.family == "viana" ? "curve" : "markov";
    c.seed = rng.next_u64();
    c.n = 1 + static_cast<std::int64_t>(rng.uniform() * 1e6);
    c.theta = rng.uniform();
    c.delta = rng.uniform(1e-9, 1.0);
    c.lambda = rng.uniform() * 1e3 + 1e-300;
    c.delta_tilde = std::ldexp(rng.uniform(0.5, 1.0), -static_cast<int>(s % 60));
    c.eps = 1.0 / 3.0;
    c.c1 = -rng.uniform(0.0, 5.0);
    c.c2 = rng.uniform(0.0, 5.0);
    c.n_list = {1, static_cast<std::int64_t>(s) + 2};
    c.deltas.assign(s % 4, rng.uniform(0.01, 0.2));
    c.out = "out/run-" + std::to_string(s);
    const std::string text = serialize(c);
    const auto back = parse_config(text);
    CHECK(back == c);
    CHECK(serialize(back) == text);
  }
}
