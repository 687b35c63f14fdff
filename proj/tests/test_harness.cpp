// Copyright 2026 The chunkflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "chunkflow/harness.hpp"
#include "support.hpp"

using namespace chunkflow;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("chunkflow_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json small_config(const fs::path& out) {
  return {{"geometry", {{"F", 6}, {"O", 3}, {"S", 3}, {"K", 3}}},
          {"sampler", {{"steps", 8}, {"mode", "hybrid"}, {"seed", 11}}},
          {"model", {{"backend", "gp"}, {"rho", 0.8}, {"d", 2}}},
          {"metrics", {{"samples", 4}}},
          {"out", out.string()}};
}

int cli(const std::string& args) {
  const std::string cmd = std::string(CHUNKFLOW_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("parse a latent-space config") {
  const auto c = parse_config(small_config("o"));
  CHECK(c.geometry.F == 6);
  CHECK(c.geometry.N == 12);
  CHECK(c.arms.size() == 1);
  CHECK(c.arms[0].label == "hybrid");
  CHECK(c.samples == 4);
  CHECK(c.sampler.seed == 11);
}

TEST_CASE("pixel window round-trips to latent geometry") {
  json j = small_config("o");
  j["geometry"] = {{"W", 121}, {"w", 64}, {"r", 8}, {"K", 2}};
  const auto c = parse_config(j);
  CHECK(c.geometry.F == 16);
  CHECK(c.geometry.O == 8);
  CHECK(c.geometry.S == 7);
}

TEST_CASE("invalid layouts and configs are reported") {
  json j = small_config("o");
  j["geometry"] = {{"F", 6}, {"O", 2}, {"S", 3}, {"K", 3}};
  try {
    (void)parse_config(j);
    FAIL("expected a geometry error");
  } catch (const GeometryError& e) {
    CHECK(std::string(e.clause()) == "O>=S");
  }
  json bad = small_config("o");
  bad["sampler"]["mode"] = "sde";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = small_config("o");
  bad.erase("model");
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = small_config("o");
  bad["sampler"]["eta_schedule"] = "cosine";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
}

TEST_CASE("overrides replace config keys") {
  ConfigOverrides o;
  o.seed = 99;
  o.mode = "full_sde";
  o.steps = 3;
  o.chunks = 5;
  o.t_star = 0.3;
  json j = small_config("o");
  j["sampler"]["time_grid"] = {1.0, 0.5, 0.0};
  const auto c = parse_config(apply_overrides(j, o));
  CHECK(c.sampler.seed == 99);
  CHECK(c.sampler.mode == Mode::FullSde);
  CHECK(c.sampler.grid().size() == 4);
  CHECK(c.geometry.K == 5);
  CHECK(c.sampler.t_star == 0.3);
}

TEST_CASE("sweep arms") {
  json j = small_config("o");
  j["sweep"] = {{"modes", {"full_ode", "full_sde", "hybrid", "xt_match", "independent"}}};
  CHECK(parse_config(j).arms.size() == 5);
  j["sweep"] = {{"modes", {"hybrid"}}, {"t_stars", {0.25, 0.75}}};
  const auto c = parse_config(j);
  REQUIRE(c.arms.size() == 2);
  CHECK(c.arms[0].label == "hybrid_tstar0.25");
  CHECK(c.arms[1].sampler.t_star == 0.75);
}

TEST_CASE("sample files round-trip") {
  const auto dir = scratch("io");
  std::mt19937_64 rng(1);
  std::vector<Frames> xs{testing::random_frames(rng, 5, 3), testing::random_frames(rng, 5, 3)};
  write_samples(dir / "s.f64", xs, 4);
  const auto back = read_samples(dir / "s.f64");
  REQUIRE(back.size() == 2);
  CHECK(testing::bit_equal(back[0], xs[0]));
  CHECK(testing::bit_equal(back[1], xs[1]));
  CHECK(fs::file_size(dir / "s.f64") == 2 * 5 * 3 * 8);
  const json desc = json::parse(slurp(dir / "s.json"));
  CHECK(desc.at("byte_order") == "little");
}

TEST_CASE("reruns are byte-identical and the manifest reproduces them") {
  const auto a = scratch("run_a"), b = scratch("run_b"), c = scratch("run_c");
  json j = small_config(a);
  j["sweep"] = {{"modes", {"hybrid", "independent"}}};
  const json manifest = run_experiment(parse_config(j));
  j["out"] = b.string();
  run_experiment(parse_config(j));
  for (const char* f : {"samples_hybrid.f64", "samples_independent.f64", "metrics.csv", "metrics.json", "trace.csv"}) {
    CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
  }
  // Re-run from the manifest alone.
  const json from_manifest = load_config_json(a / "manifest.json");
  CHECK(from_manifest == manifest.at("config"));
  ConfigOverrides o;
  o.out = c.string();
  run_experiment(parse_config(apply_overrides(from_manifest, o)));
  CHECK(slurp(a / "samples_hybrid.f64") == slurp(c / "samples_hybrid.f64"));
  CHECK(slurp(a / "metrics.csv") == slurp(c / "metrics.csv"));
  CHECK(manifest.at("model").at("digest").get<std::string>().size() == 16);
}

TEST_CASE("plot renders svg") {
  const auto dir = scratch("plot");
  run_experiment(parse_config(small_config(dir)));
  plot_metrics(dir / "metrics.csv", dir / "m.svg");
  plot_metrics(dir / "trace.csv", dir / "t.svg");
  CHECK(slurp(dir / "m.svg").find("<svg") != std::string::npos);
  CHECK(slurp(dir / "t.svg").find("<polyline") != std::string::npos);
}

TEST_CASE("command-line exit codes") {
  const auto dir = scratch("cli");
  json j = small_config(dir / "out");
  std::ofstream(dir / "ok.json") << j.dump();
  j["geometry"]["S"] = 5;
  std::ofstream(dir / "bad_geometry.json") << j.dump();
  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK(cli("validate " + (dir / "ok.json").string()) == 0);
  CHECK(cli("run " + (dir / "ok.json").string()) == 0);
  CHECK(fs::exists(dir / "out" / "manifest.json"));
  CHECK(cli("run " + (dir / "out" / "manifest.json").string() + " --out " + (dir / "again").string()) == 0);
  CHECK(slurp(dir / "out" / "samples.f64") == slurp(dir / "again" / "samples.f64"));
  CHECK(cli("validate " + (dir / "bad_geometry.json").string()) == 2);
  CHECK(cli("validate " + (dir / "broken.json").string()) == 2);
  CHECK(cli("run " + (dir / "ok.json").string() + " --mode nope") == 2);
  CHECK(cli("plot " + (dir / "out" / "metrics.csv").string()) == 0);
}
