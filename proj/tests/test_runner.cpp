#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "skewlab/experiment/runner.hpp"

using namespace skewlab;
using namespace skewlab::experiment;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "skewlab_test_runner" / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json manifest(const RunResult& r) { return nlohmann::json::parse(slurp(r.manifest)); }

// Small runs of every experiment.
std::vector<ExperimentConfig> small_configs(const std::string& tag) {
  std::vector<ExperimentConfig> out;
  for (const auto& name : kExperiments) {
    ExperimentConfig c;
    c.name = name;
    c.seed = 3;
    c.n = 50;
    c.samples = 40;
    if (name == "curve" || name == "probe") {
      c.system.family = "viana";
      c.n = name == "curve" ? 5 : 20;
      c.samples = 3;
      c.grid = 16;
    }
    if (name == "census") c.n = 6;
    if (name == "ay_decay") {
      c.samples = 2000;
      c.n_list = {10, 20};
      c.deltas = {0.05, 0.1};
    }
    if (name == "acim") {
      c.samples = 2000;
      c.grid = 64;
    }
    if (name == "components") {
      c.system.family = "two_well";
      c.n = 2000;
      c.grid = 64;
    }
    if (name == "markov") c.seeds = 300;
    c.out = scratch(tag + "_" + name).string();
    out.push_back(c);
  }
  return out;
}

}  // namespace

TEST_CASE("sha256 digests") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("ftle run writes one csv and a manifest") {
  ExperimentConfig c;
  c.n = 10000;
  c.samples = 8;
  c.out = scratch("ftle").string();
  const auto r = run_experiment(c);
  CHECK(r.exit_code == 0);
  REQUIRE(r.outputs.size() == 1);
  CHECK(r.outputs[0].name == "ftle.csv");
  const auto m = manifest(r);
  CHECK(m["status"] == "ok");
  CHECK(m["seed"] == 1);
  CHECK(m["experiment"] == "ftle");
  CHECK(m["rng"]["name"] == "philox4x32-10");
  CHECK(m["config"] == serialize(c));
  CHECK(m["summary"]["mean_ftle"].get<double>() == doctest::Approx(std::log(2.0)).epsilon(0.05));
  const std::string csv = slurp(fs::path(c.out) / "ftle.csv");
  CHECK(csv.rfind("sample,theta,x,ftle\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);
}

TEST_CASE("every output is listed once with its digest") {
  for (const auto& c : small_configs("list")) {
    CAPTURE(c.name);
    const auto r = run_experiment(c);
    REQUIRE(r.exit_code == 0);
    const auto m = manifest(r);
    std::set<std::string> listed;
    for (const auto& o : m["outputs"]) {
      const std::string file = o["file"];
      CHECK(listed.insert(file).second);
      const std::string data = slurp(fs::path(c.out) / file);
      CHECK(o["sha256"] == sha256_hex(data));
      CHECK(o["bytes"] == data.size());
    }
    std::size_t on_disk = 0;
    for (const auto& e : fs::directory_iterator(c.out)) on_disk += e.path().filename() != "manifest.json";
    CHECK(on_disk == listed.size());
    CHECK_FALSE(listed.empty());
  }
}

TEST_CASE("reruns reproduce every digest") {
  const auto first = small_configs("a");
  auto second = small_configs("b");
  for (std::size_t i = 0; i < first.size(); ++i) {
    CAPTURE(first[i].name);
    second[i].threads = 3;
    const auto ra = run_experiment(first[i]);
    const auto rb = run_experiment(second[i]);
    REQUIRE(ra.outputs.size() == rb.outputs.size());
    for (std::size_t j = 0; j < ra.outputs.size(); ++j) {
      CHECK(ra.outputs[j].name == rb.outputs[j].name);
      CHECK(ra.outputs[j].sha256 == rb.outputs[j].sha256);
    }
  }
}

TEST_CASE("experiment failure is recorded") {
  ExperimentConfig c;
  c.name = "markov";
  c.system.family = "quadratic";
  c.system.a = 1.5;
  c.out = scratch("fail").string();
  const auto r = run_experiment(c);
  CHECK(r.exit_code == 1);
  CHECK(r.outputs.empty());
  const auto m = manifest(r);
  CHECK(m["status"] == "failed");
  CHECK(m["error"].get<std::string>().rfind("ClosureDiverges", 0) == 0);
}

TEST_CASE("unwritable output directory") {
  const fs::path base = scratch("blocked");
  fs::create_directories(base);
  std::ofstream(base / "file") << "x";
  ExperimentConfig c;
  c.samples = 2;
  c.n = 10;
  c.out = (base / "file" / "sub").string();
  try {
    run_experiment(c);
    FAIL("expected IOFailure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIOFailure);
  }
}
