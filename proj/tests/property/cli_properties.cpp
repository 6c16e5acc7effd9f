#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include <json.hpp>

#include "infground/config.hpp"
#include "infground/error.hpp"
#include "infground/runner.hpp"
#include "oracles.hpp"

using namespace infground;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json random_config(std::mt19937_64& rng) {
  auto coin = [&] { return std::bernoulli_distribution(0.5)(rng); };
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  const char* commands[] = {"domain", "plap", "inf", "sweep", "witness", "verify"};
  const char* presets[] = {"dumbbell", "dumbbell-asym", "stadium", "ball", "disjoint-balls"};
  json j;
  j["command"] = commands[rng() % 6];
  j["preset"] = presets[rng() % 5];
  const double delta = uniform(0.01, 0.99);
  j["delta"] = delta;
  if (coin()) j["epsilon"] = uniform(0.0, 0.9);
  if (coin()) j["grid"]["h"] = delta / 4 * uniform(0.3, 1.0);
  if (coin()) j["plap"]["p"] = uniform(2.0, 128.0);
  if (coin()) j["plap"]["tol"] = uniform(1e-12, 1e-6);
  if (coin()) j["plap"]["method"] = coin() ? "lbfgs" : "gradient";
  if (coin()) j["inf"]["stencil"] = coin() ? 4 : 8;
  if (coin()) j["inf"]["pin"] = coin() ? "full-ridge" : "right-ridge";
  if (coin()) j["inf"]["accelerate"] = coin();
  if (coin()) j["experiment"]["gap_threshold"] = uniform(0.1, 0.9);
  if (coin()) j["threads"] = static_cast<int>(rng() % 8);
  return j;
}

}  // namespace

TEST(CliProperty, CanonicalFormIsAFixedPoint) {
  std::mt19937_64 rng(51);
  for (int n = 0; n < 300; ++n) {
    const std::string text = random_config(rng).dump();
    const RunConfig c = parse_config(text);
    const std::string once = canonicalize(c);
    const RunConfig again = parse_config(once);
    EXPECT_EQ(canonicalize(again), once) << text;
    EXPECT_EQ(config_hash(again), config_hash(c));
  }
}

TEST(CliProperty, OutOfRangeValuesNameTheirKey) {
  const std::vector<std::pair<std::string, std::string>> cases{
      {R"({"delta":1.5})", "delta"},
      {R"({"epsilon":1})", "epsilon"},
      {R"({"grid":{"h":-1}})", "grid.h"},
      {R"({"grid":{"node_budget":0}})", "grid.node_budget"},
      {R"({"plap":{"tol":0}})", "plap.tol"},
      {R"({"plap":{"p_schedule":[2,1]}})", "plap.p_schedule"},
      {R"({"inf":{"max_iters":0}})", "inf.max_iters"},
      {R"({"inf":{"tol":-1e-8}})", "inf.tol"},
      {R"({"probes":{"left":[1]}})", "probes.left"},
      {R"({"threads":-2})", "threads"},
  };
  for (const auto& [text, key] : cases) {
    try {
      parse_config(text);
      ADD_FAILURE() << text << " accepted";
    } catch (const InvalidParameter& e) {
      EXPECT_EQ(std::string(e.what()).rfind(key + ":", 0), 0u) << e.what();
    }
  }
}

TEST(CliProperty, RunDirectoriesReproduce) {
  const fs::path root = fs::temp_directory_path() / "infground_cli_properties";
  fs::remove_all(root);
  for (const char* text : {R"({"command":"domain","preset":"stadium","grid":{"h":0.05}})",
                           R"({"command":"inf","preset":"dumbbell-asym","delta":0.2,"epsilon":0.2})",
                           R"({"command":"plap","preset":"ball","grid":{"h":0.125},"plap":{"p_schedule":[2,4]}})"}) {
    const fs::path a = root / "a", b = root / "b";
    const RunSummary first = run(parse_config(text), a);
    ASSERT_EQ(first.exit_code, kExitOk) << first.report;
    const RunSummary second = run(parse_config(oracle::read_file((a / "config.json").string())), b);
    ASSERT_EQ(second.exit_code, kExitOk);
    for (const std::string& f : first.files) {
      if (f == "report.json") continue;
      std::string x = oracle::read_file((a / f).string()), y = oracle::read_file((b / f).string());
      if (f == "trace.csv") {
        x = oracle::drop_last_column(x);
        y = oracle::drop_last_column(y);
      }
      EXPECT_EQ(x, y) << text << " " << f;
    }
    fs::remove_all(root);
  }
}
