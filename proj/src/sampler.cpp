// Copyright 2026 The chunkflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "chunkflow/sampler.hpp"

#include <cmath>
#include <exception>

#include "chunkflow/kernels.hpp"

namespace chunkflow {

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Hybrid: return "hybrid";
    case Mode::FullOde: return "full_ode";
    case Mode::FullSde: return "full_sde";
    case Mode::XtMatch: return "xt_match";
    case Mode::Independent: return "independent";
  }
  return "?";
}

Mode parse_mode(const std::string& name) {
  for (Mode m : {Mode::Hybrid, Mode::FullOde, Mode::FullSde, Mode::XtMatch, Mode::Independent}) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown sampler mode '" + name + "'");
}

std::vector<double> SamplerConfig::grid() const {
  std::vector<double> g = time_grid;
  if (g.empty()) {
    if (steps < 1) throw std::invalid_argument("sampler needs steps >= 1");
    g.resize(static_cast<std::size_t>(steps) + 1);
    for (int i = 0; i <= steps; ++i) g[static_cast<std::size_t>(i)] = 1.0 - static_cast<double>(i) / steps;
    g.back() = 0.0;
  }
  if (g.size() < 2 || g.front() != 1.0 || g.back() != 0.0) {
    throw std::invalid_argument("time grid must run from 1 to 0");
  }
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (!(g[i] < g[i - 1])) throw std::invalid_argument("time grid must be strictly descending");
  }
  return g;
}

void SamplerConfig::validate() const {
  (void)grid();
  if (!std::isfinite(t_star)) throw std::invalid_argument("t_star must be finite");
  if (!std::isfinite(lambda_scale) || lambda_scale < 0.0) {
    throw std::invalid_argument("lambda_scale must be finite and non-negative");
  }
}

double eta(double t, double t_star) { return t >= t_star ? 1.0 : 0.0; }

double eta(double t, const SamplerConfig& config) {
  switch (config.mode) {
    case Mode::FullSde: return 1.0;
    case Mode::FullOde: return 0.0;
    default: return eta(t, config.t_star);
  }
}

Frames stochastic_renoise(const Frames& bar0, const Frames& bar1, TimePoint s, TimePoint t,
                          double eta_val, const Frames& eps) {
  if (!(s.value() < t.value())) throw std::invalid_argument("stochastic_renoise needs s < t");
  if (!(eta_val >= 0.0 && eta_val <= 1.0)) throw std::invalid_argument("eta must lie in [0, 1]");
  const double kappa = s.value() * std::sqrt(eta_val);
  Frames out;
  kernels::renoise(bar0, bar1, s.value(), kappa, eps, out, Execution::Serial);
  return out;
}

Frames stochastic_renoise(const Frames& bar0, const Frames& bar1, TimePoint s, TimePoint t,
                          double eta_val, NoiseSource& noise) {
  const Frames eps = noise.draw(bar0.rows(), bar0.cols());
  return stochastic_renoise(bar0, bar1, s, t, eta_val, eps);
}

std::vector<Frames> slice(const LongBuffer& buffer) {
  const auto& g = buffer.geometry;
  if (buffer.values.rows() != g.N) throw ShapeError("slice: buffer does not have N rows");
  std::vector<Frames> chunks;
  chunks.reserve(static_cast<std::size_t>(g.K));
  for (int k = 1; k <= g.K; ++k) chunks.emplace_back(buffer.values.middleRows(g.chunk_start(k), g.F));
  return chunks;
}

namespace {

std::vector<Vector> chunk_conditions(const ConditionSet& conditions, int K) {
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(K));
  for (int k = 1; k <= K; ++k) out.push_back(conditions.for_chunk(k));
  return out;
}

}  // namespace

SamplerState flowlong_step(const SamplerState& state, const VelocityModel& model,
                           const ConditionSet& conditions, TimePoint t, TimePoint s,
                           const SamplerConfig& config, NoiseSource& noise, int step_index,
                           const StepObserver* observer) {
  if (!(s.value() < t.value())) throw std::invalid_argument("flowlong_step needs s < t");
  const ChunkGeometry& g = state.buffer.geometry;
  const Eigen::Index d = state.buffer.values.cols();
  const bool independent = config.mode == Mode::Independent;
  const std::vector<Frames> views = independent ? state.chunks : slice(state.buffer);
  require_chunk_set(views, g, "flowlong_step");

  const auto conds = chunk_conditions(conditions, g.K);
  const auto velocities = kernels::evaluate_velocities(model, views, t, conds, config.exec);
  std::vector<Frames> x0_hat;
  x0_hat.reserve(views.size());
  for (std::size_t k = 0; k < views.size(); ++k) x0_hat.push_back(denoised_estimate(views[k], velocities[k], t));

  const double eta_val = eta(t, config);
  const double kappa = s.value() * std::sqrt(eta_val);
  const BlendSchedule schedule = lambda_schedule(g.F, g.O, config.lambda_scale);

  SamplerState next;
  next.buffer.geometry = g;
  Frames eps;

  if (independent) {
    eps = noise.draw(static_cast<Eigen::Index>(g.K) * g.F, d);
    next.chunks.resize(views.size());
    for (std::size_t k = 0; k < views.size(); ++k) {
      const Frames bar1 = noisy_from_denoised(views[k], x0_hat[k], t);
      const Frames eps_k = eps.middleRows(static_cast<Eigen::Index>(k) * g.F, g.F);
      kernels::renoise(x0_hat[k], bar1, s, kappa, eps_k, next.chunks[k], config.exec);
    }
    next.buffer.values = assemble_owned(next.chunks, g);
  } else if (config.mode == Mode::XtMatch) {
    eps = noise.draw(static_cast<Eigen::Index>(g.K) * g.F, d);
    std::vector<Frames> renoised(views.size());
    for (std::size_t k = 0; k < views.size(); ++k) {
      const Frames bar1 = noisy_from_denoised(views[k], x0_hat[k], t);
      const Frames eps_k = eps.middleRows(static_cast<Eigen::Index>(k) * g.F, g.F);
      kernels::renoise(x0_hat[k], bar1, s, kappa, eps_k, renoised[k], config.exec);
    }
    next.buffer.values = aggregate(renoised, g, schedule, config.exec);
  } else {
    eps = noise.draw(g.N, d);
    const Frames bar0 = aggregate(x0_hat, g, schedule, config.exec);
    const Frames bar1 = noisy_from_denoised(state.buffer.values, bar0, t);
    kernels::renoise(bar0, bar1, s, kappa, eps, next.buffer.values, config.exec);
  }

  if (!next.buffer.values.allFinite()) {
    throw NumericalError(step_index, "non-finite latent values after step " + std::to_string(step_index) +
                                         " (t=" + std::to_string(t.value()) + ")");
  }
  if (observer && *observer) {
    StepRecord rec;
    rec.step = step_index;
    rec.t = t;
    rec.s = s;
    rec.eta = eta_val;
    rec.estimates = &x0_hat;
    rec.noise = &eps;
    rec.overlap_mse = overlap_mse(x0_hat, g);
    (*observer)(rec);
  }
  return next;
}

SamplerState initial_state(const ChunkGeometry& g, Eigen::Index d, Mode mode, NoiseSource& noise) {
  SamplerState state;
  state.buffer.geometry = g;
  state.buffer.values = noise.draw(g.N, d);
  if (mode == Mode::Independent) state.chunks = slice(state.buffer);
  return state;
}

namespace {

void check_setup(const SamplerConfig& config, const VelocityModel& model, const ConditionSet& conditions,
                 const ChunkGeometry& g) {
  config.validate();
  validate_geometry(g);
  if (model.frames() != g.F) {
    throw ShapeError("model chunk length " + std::to_string(model.frames()) + " does not match F = " +
                     std::to_string(g.F));
  }
  conditions.validate(g.K);
}

}  // namespace

RunResult run(const SamplerConfig& config, const VelocityModel& model, const ConditionSet& conditions,
              const ChunkGeometry& geometry, NoiseSource& noise, const StepObserver* observer) {
  check_setup(config, model, conditions, geometry);
  const auto grid = config.grid();
  SamplerState state = initial_state(geometry, model.dim(), config.mode, noise);
  RunResult result;
  result.overlap_trace.reserve(grid.size() - 1);
  StepObserver trace = [&](const StepRecord& rec) {
    result.overlap_trace.push_back(rec.overlap_mse);
    if (observer && *observer) (*observer)(rec);
  };
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    state = flowlong_step(state, model, conditions, TimePoint(grid[i]), TimePoint(grid[i + 1]), config, noise,
                          static_cast<int>(i), &trace);
  }
  result.chunks = config.mode == Mode::Independent ? state.chunks : slice(state.buffer);
  result.buffer = std::move(state.buffer);
  return result;
}

RunResult run(const SamplerConfig& config, const VelocityModel& model, const ConditionSet& conditions,
              const ChunkGeometry& geometry) {
  NoiseSource noise(config.seed);
  return run(config, model, conditions, geometry, noise);
}

BatchResult sample_batch(const SamplerConfig& config, const VelocityModel& model,
                         const ConditionSet& conditions, const ChunkGeometry& geometry, int count,
                         Execution exec) {
  check_setup(config, model, conditions, geometry);
  if (count < 1) throw std::invalid_argument("sample_batch needs count >= 1");
  SamplerConfig inner = config;
  inner.exec = Execution::Serial;
  std::vector<RunResult> runs(static_cast<std::size_t>(count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  auto body = [&](int i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      NoiseSource noise(config.seed, Modality::Video, static_cast<std::uint64_t>(i));
      runs[idx] = run(inner, model, conditions, geometry, noise);
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  };
  if (exec == Execution::Serial) {
    for (int i = 0; i < count; ++i) body(i);
  } else {
#pragma omp parallel for schedule(dynamic, 4)
    for (int i = 0; i < count; ++i) body(i);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  BatchResult out;
  out.samples.reserve(runs.size());
  out.mean_overlap_trace.assign(runs.front().overlap_trace.size(), 0.0);
  for (auto& r : runs) {
    for (std::size_t i = 0; i < r.overlap_trace.size(); ++i) out.mean_overlap_trace[i] += r.overlap_trace[i];
    out.samples.push_back(std::move(r.buffer.values));
  }
  for (auto& v : out.mean_overlap_trace) v /= count;
  return out;
}

DualStreamResult dual_stream_run(const SamplerConfig& config, const VelocityModel& video_model,
                                 const ChunkGeometry& video_geometry, const ConditionSet& video_conditions,
                                 const VelocityModel& audio_model, const ChunkGeometry& audio_geometry,
                                 const ConditionSet& audio_conditions, std::uint64_t stream,
                                 const StepObserver* video_observer, const StepObserver* audio_observer) {
  if (video_geometry.K != audio_geometry.K) {
    throw GeometryError("K_v==K_a", "video and audio streams must use the same chunk count");
  }
  check_setup(config, video_model, video_conditions, video_geometry);
  check_setup(config, audio_model, audio_conditions, audio_geometry);
  const auto grid = config.grid();

  NoiseSource video_noise(config.seed, Modality::Video, stream);
  NoiseSource audio_noise(config.seed, Modality::Audio, stream);
  SamplerState video = initial_state(video_geometry, video_model.dim(), config.mode, video_noise);
  SamplerState audio = initial_state(audio_geometry, audio_model.dim(), config.mode, audio_noise);

  DualStreamResult result;
  StepObserver video_trace = [&](const StepRecord& rec) {
    result.video_trace.push_back(rec.overlap_mse);
    if (video_observer && *video_observer) (*video_observer)(rec);
  };
  StepObserver audio_trace = [&](const StepRecord& rec) {
    result.audio_trace.push_back(rec.overlap_mse);
    if (audio_observer && *audio_observer) (*audio_observer)(rec);
  };
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const TimePoint t(grid[i]);
    const TimePoint s(grid[i + 1]);
    video = flowlong_step(video, video_model, video_conditions, t, s, config, video_noise,
                          static_cast<int>(i), &video_trace);
    audio = flowlong_step(audio, audio_model, audio_conditions, t, s, config, audio_noise,
                          static_cast<int>(i), &audio_trace);
  }
  result.video = std::move(video.buffer);
  result.audio = std::move(audio.buffer);
  return result;
}

}  // namespace chunkflow
