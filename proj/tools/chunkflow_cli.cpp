// Copyright 2026 The chunkflow Authors
// SPDX-License-Identifier: Apache-2.0

// chunkflow: run, sweep, plot and validate long-sequence sampling experiments.
//
// Exit codes: 0 success, 1 usage or I/O error, 2 config or geometry error,
// 3 numerical abort.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chunkflow/harness.hpp"

namespace fs = std::filesystem;
using namespace chunkflow;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<double> t_star;
  std::optional<int> steps;
  std::optional<int> chunks;
  std::optional<std::string> out;

  ConfigOverrides get() const { return {seed, mode, t_star, steps, chunks, out}; }
};

void add_overrides(CLI::App* cmd, Overrides& o, bool with_out) {
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--mode", o.mode, "hybrid | full_ode | full_sde | xt_match | independent");
  cmd->add_option("--t-star", o.t_star, "Threshold of the binary stochasticity schedule");
  cmd->add_option("--steps", o.steps, "Uniform step count (replaces any explicit time grid)");
  cmd->add_option("--chunks", o.chunks, "Chunk count K");
  if (with_out) cmd->add_option("--out", o.out, "Output directory");
}

template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const GeometryError& e) {
    std::cerr << "geometry error [" << e.clause() << "]: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical abort at step " << e.step() << ": " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_one(const fs::path& config_path, const ConfigOverrides& o) {
  const auto cfg = parse_config(apply_overrides(load_config_json(config_path), o));
  const auto manifest = run_experiment(cfg);
  std::cout << "wrote " << (fs::path(cfg.out) / "manifest.json").string() << " ("
            << manifest.at("artifacts").at("arms").size() << " arm(s), " << cfg.samples << " sample(s))\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chunkflow: long-sequence sampling with overlapping chunks"};
  app.require_subcommand(1);

  Overrides run_o, sweep_o, validate_o;
  std::string run_config, sweep_dir, plot_input, plot_output, validate_config;

  auto* run = app.add_subcommand("run", "Run one experiment (config file or a previous manifest)");
  run->add_option("config", run_config, "Config or manifest file")->required()->check(CLI::ExistingFile);
  add_overrides(run, run_o, true);

  auto* sweep = app.add_subcommand("sweep", "Run every *.json config in a directory");
  sweep->add_option("config-dir", sweep_dir, "Directory of configs")->required()->check(CLI::ExistingDirectory);
  add_overrides(sweep, sweep_o, true);

  auto* plot = app.add_subcommand("plot", "Render metrics.csv or trace.csv as an SVG image");
  plot->add_option("metrics-file", plot_input, "metrics.csv or trace.csv")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", plot_output, "Output SVG (default: input with .svg extension)");

  auto* validate = app.add_subcommand("validate", "Check a config's geometry without sampling");
  validate->add_option("config", validate_config, "Config file")->required()->check(CLI::ExistingFile);
  add_overrides(validate, validate_o, false);

  CLI11_PARSE(app, argc, argv);

  if (*run) return guarded([&] { return run_one(run_config, run_o.get()); });

  if (*sweep) {
    return guarded([&] {
      std::vector<fs::path> configs;
      for (const auto& entry : fs::directory_iterator(sweep_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") configs.push_back(entry.path());
      }
      std::sort(configs.begin(), configs.end());
      if (configs.empty()) throw ConfigError("no *.json configs in '" + sweep_dir + "'");
      const fs::path root = sweep_o.out.value_or("sweep_out");
      for (const auto& path : configs) {
        ConfigOverrides o = sweep_o.get();
        o.out = (root / path.stem()).string();
        run_one(path, o);
      }
      return 0;
    });
  }

  if (*plot) {
    return guarded([&] {
      fs::path out = plot_output.empty() ? fs::path(plot_input).replace_extension(".svg") : fs::path(plot_output);
      plot_metrics(plot_input, out);
      std::cout << "wrote " << out.string() << "\n";
      return 0;
    });
  }

  if (*validate) {
    return guarded([&] {
      const auto cfg = parse_config(apply_overrides(load_config_json(validate_config), validate_o.get()));
      const auto& g = cfg.geometry;
      std::cout << "ok: F=" << g.F << " O=" << g.O << " S=" << g.S << " K=" << g.K << " N=" << g.N;
      if (cfg.audio) {
        std::cout << " F_a=" << cfg.audio->window.F_a << " O_a=" << cfg.audio->window.O_a
                  << " S_a=" << cfg.audio->window.S_a;
      }
      std::cout << "\n";
      return 0;
    });
  }
  return 1;
}
