// Copyright 2026 The chunkflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chunkflow/geometry.hpp"
#include "chunkflow/metrics.hpp"
#include "chunkflow/models.hpp"
#include "chunkflow/sampler.hpp"

namespace chunkflow {

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Command-line values that replace config keys before parsing.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<double> t_star;
  std::optional<int> steps;
  std::optional<int> chunks;
  std::optional<std::string> out;
};

struct AudioSettings {
  double fps_v = 0.0;
  double rho_a = 0.0;
  AudioWindow window;
  nlohmann::json model;
  ConditionSet conditions;
};

/// One sampler configuration inside a sweep.
struct Arm {
  std::string label;
  SamplerConfig sampler;
};

struct ExperimentConfig {
  nlohmann::json resolved;  // the config after overrides; stored in the manifest
  std::optional<PixelWindowSpec> pixel;
  int r = 1;
  ChunkGeometry geometry;
  SamplerConfig sampler;
  nlohmann::json model;
  ConditionSet conditions;
  std::optional<AudioSettings> audio;
  int samples = 1;
  std::vector<Arm> arms;  // one entry unless a sweep block is present
  std::string out = "out";
};

/// Reads a config file, or the "config" block of a run manifest.
nlohmann::json load_config_json(const std::filesystem::path& path);
nlohmann::json apply_overrides(nlohmann::json config, const ConfigOverrides& overrides);
/// Throws ConfigError for bad structure and GeometryError for bad layouts.
ExperimentConfig parse_config(const nlohmann::json& config);

struct ArmResult {
  Arm arm;
  MetricsReport metrics;
  std::vector<Frames> samples;
  std::vector<Frames> audio_samples;
  std::vector<double> audio_trace;
};

struct ExperimentResult {
  std::vector<ArmResult> arms;
  nlohmann::json manifest;
};

/// Runs every arm and computes metrics. No files are touched.
ExperimentResult execute(const ExperimentConfig& config);

/// Runs and writes samples, metrics, trace and manifest under config.out.
/// Returns the manifest.
nlohmann::json run_experiment(const ExperimentConfig& config);

/// Raw little-endian doubles, samples concatenated row-major, plus a JSON
/// descriptor next to it.
void write_samples(const std::filesystem::path& path, const std::vector<Frames>& samples, std::uint64_t seed);
std::vector<Frames> read_samples(const std::filesystem::path& path);

/// Renders a metrics.csv (bar chart of seam ratios per arm) or trace.csv
/// (overlap disagreement per step) as an SVG file.
void plot_metrics(const std::filesystem::path& input, const std::filesystem::path& output);

}  // namespace chunkflow
