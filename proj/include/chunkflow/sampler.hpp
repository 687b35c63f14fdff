// Copyright 2026 The chunkflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chunkflow/execution.hpp"
#include "chunkflow/flow.hpp"
#include "chunkflow/frames.hpp"
#include "chunkflow/geometry.hpp"
#include "chunkflow/matching.hpp"
#include "chunkflow/models.hpp"
#include "chunkflow/noise.hpp"

namespace chunkflow {

/// hybrid:      Tweedie matching, stochastic renoising while t >= t*.
/// full_ode:    Tweedie matching, never stochastic.
/// full_sde:    Tweedie matching, always stochastic.
/// xt_match:    every chunk renoises with its own noise, then the noisy states
///              are blended (matching at noise level s instead of on x0_hat).
/// independent: no matching; every chunk keeps its own state.
enum class Mode { Hybrid, FullOde, FullSde, XtMatch, Independent };

/// Only the binary step schedule exists today.
enum class EtaSchedule { Binary };

std::string to_string(Mode mode);
/// Throws std::invalid_argument for an unknown name.
Mode parse_mode(const std::string& name);

class NumericalError : public std::runtime_error {
 public:
  NumericalError(int step, const std::string& what) : std::runtime_error(what), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

struct SamplerConfig {
  int steps = 50;
  /// Explicit descending grid from 1 to 0; empty means `steps` uniform steps.
  std::vector<double> time_grid;
  double t_star = 0.5;
  Mode mode = Mode::Hybrid;
  EtaSchedule eta_schedule = EtaSchedule::Binary;
  std::uint64_t seed = 0;
  double lambda_scale = 1.0;
  /// Chunk evaluations and per-frame loops; never changes results.
  Execution exec = Execution::Serial;

  /// The time grid actually used. Throws std::invalid_argument if invalid.
  std::vector<double> grid() const;
  void validate() const;
};

/// 1 if t >= t_star else 0.
double eta(double t, double t_star);
/// eta with the mode override: full_sde forces 1, full_ode forces 0.
double eta(double t, const SamplerConfig& config);

/// (1-s) bar0 + sqrt(s^2 - kappa^2) bar1 + kappa eps with kappa = s sqrt(eta).
/// eta = 0 reproduces interp_step bit for bit.
Frames stochastic_renoise(const Frames& bar0, const Frames& bar1, TimePoint s, TimePoint t,
                          double eta_val, const Frames& eps);
/// Same, drawing eps from `noise` (always drawn, so stream position does not
/// depend on eta).
Frames stochastic_renoise(const Frames& bar0, const Frames& bar1, TimePoint s, TimePoint t,
                          double eta_val, NoiseSource& noise);

struct LongBuffer {
  ChunkGeometry geometry;
  Frames values;  // N x d
};

/// Chunk k = rows [(k-1)S, (k-1)S + F).
std::vector<Frames> slice(const LongBuffer& buffer);

/// Sampler state at one time. Matched modes keep only `buffer`; independent
/// mode also keeps every chunk's private state in `chunks`, and `buffer` is
/// their hard-ownership assembly.
struct SamplerState {
  LongBuffer buffer;
  std::vector<Frames> chunks;
};

/// What a step saw, for instrumentation.
struct StepRecord {
  int step = 0;
  double t = 0.0;
  double s = 0.0;
  double eta = 0.0;
  const std::vector<Frames>* estimates = nullptr;  // per-chunk x0_hat before matching
  const Frames* noise = nullptr;  // injected eps: N x d, or K F x d per chunk for xt_match/independent
  double overlap_mse = 0.0;
};

using StepObserver = std::function<void(const StepRecord&)>;

/// One step t -> s: slice, evaluate the model once per chunk, match, renoise.
/// Throws NumericalError carrying `step_index` if the new state is not finite.
SamplerState flowlong_step(const SamplerState& state, const VelocityModel& model,
                           const ConditionSet& conditions, TimePoint t, TimePoint s,
                           const SamplerConfig& config, NoiseSource& noise, int step_index = 0,
                           const StepObserver* observer = nullptr);

struct RunResult {
  LongBuffer buffer;
  std::vector<Frames> chunks;        // final per-chunk views
  std::vector<double> overlap_trace;  // overlap_mse per step
};

/// Starting state: N x d standard normals from `noise`.
SamplerState initial_state(const ChunkGeometry& g, Eigen::Index d, Mode mode, NoiseSource& noise);

/// Full sampling from t = 1 to 0.
RunResult run(const SamplerConfig& config, const VelocityModel& model, const ConditionSet& conditions,
              const ChunkGeometry& geometry, NoiseSource& noise, const StepObserver* observer = nullptr);
/// Convenience overload using NoiseSource(config.seed).
RunResult run(const SamplerConfig& config, const VelocityModel& model, const ConditionSet& conditions,
              const ChunkGeometry& geometry);

struct BatchResult {
  std::vector<Frames> samples;
  std::vector<double> mean_overlap_trace;
};

/// `count` independent runs; run i draws from NoiseSource(seed, Video, i).
/// Runs execute concurrently when exec is Parallel; output does not change.
BatchResult sample_batch(const SamplerConfig& config, const VelocityModel& model,
                         const ConditionSet& conditions, const ChunkGeometry& geometry, int count,
                         Execution exec);

struct DualStreamResult {
  LongBuffer video;
  LongBuffer audio;
  std::vector<double> video_trace;
  std::vector<double> audio_trace;
};

/// Video and audio sampled in lock-step on one time grid. Each stream is
/// matched with its own geometry and schedule and renoised from its own
/// noise sub-stream.
DualStreamResult dual_stream_run(const SamplerConfig& config, const VelocityModel& video_model,
                                 const ChunkGeometry& video_geometry, const ConditionSet& video_conditions,
                                 const VelocityModel& audio_model, const ChunkGeometry& audio_geometry,
                                 const ConditionSet& audio_conditions, std::uint64_t stream = 0,
                                 const StepObserver* video_observer = nullptr,
                                 const StepObserver* audio_observer = nullptr);

}  // namespace chunkflow
