// Copyright 2026 The chunkflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "chunkflow/matching.hpp"

#include "chunkflow/kernels.hpp"

namespace chunkflow {

BlendSchedule lambda_schedule(int F, int O, double scale) {
  if (O < 2) throw GeometryError("O>=2", "lambda schedule needs O >= 2 (divides by O-1)");
  if (O > F) throw GeometryError("O<=F", "blending zone longer than the chunk");
  BlendSchedule s;
  s.lambdas.resize(static_cast<std::size_t>(O));
  for (int i = 0; i < O; ++i) {
    s.lambdas[static_cast<std::size_t>(i)] = scale * (static_cast<double>(i) / (O - 1));
  }
  return s;
}

void require_chunk_set(std::span<const Frames> chunks, const ChunkGeometry& g, const char* what) {
  if (static_cast<int>(chunks.size()) != g.K) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(g.K) + " chunks, got " +
                     std::to_string(chunks.size()));
  }
  for (const auto& c : chunks) {
    if (c.rows() != g.F || c.cols() != chunks.front().cols()) {
      throw ShapeError(std::string(what) + ": every chunk must be F x d with F = " + std::to_string(g.F));
    }
  }
}

namespace {

void require_pair(const Frames& a, const Frames& b, const ChunkGeometry& g, const char* what) {
  require_same_shape(a, b, what);
  if (a.rows() != g.F) throw ShapeError(std::string(what) + ": chunk must have F rows");
}

}  // namespace

double guidance_loss(const Frames& est_k, const Frames& est_k1, const ChunkGeometry& g) {
  require_pair(est_k, est_k1, g, "guidance_loss");
  double sum = 0.0;
  for (int j = g.blend_begin(); j < g.F; ++j) {
    const int p = partner_frame(g, j);
    if (p < 0) continue;
    sum += (est_k.row(j) - est_k1.row(p)).squaredNorm();
  }
  return 0.5 * sum;
}

Frames guidance_gradient(const Frames& est_k, const Frames& est_k1, const ChunkGeometry& g) {
  require_pair(est_k, est_k1, g, "guidance_gradient");
  Frames grad = Frames::Zero(est_k.rows(), est_k.cols());
  for (int j = g.blend_begin(); j < g.F; ++j) {
    const int p = partner_frame(g, j);
    if (p >= 0) grad.row(j) = est_k.row(j) - est_k1.row(p);
  }
  return grad;
}

Eigen::Index overlap_entries(const ChunkGeometry& g, Eigen::Index d) {
  Eigen::Index frames = 0;
  for (int j = g.blend_begin(); j < g.F; ++j) frames += partner_frame(g, j) >= 0 ? 1 : 0;
  return frames * d;
}

std::pair<Frames, Frames> tweedie_match_pair(const Frames& est_k, const Frames& est_k1,
                                             const BlendSchedule& schedule, const ChunkGeometry& g) {
  require_pair(est_k, est_k1, g, "tweedie_match_pair");
  if (schedule.size() != g.O) throw ShapeError("tweedie_match_pair: schedule length must equal O");
  Frames bar_k = est_k;
  Frames bar_k1 = est_k1;
  const Eigen::Index d = est_k.cols();
  for (int j = g.blend_begin(); j < g.F; ++j) {
    const int p = partner_frame(g, j);
    if (p < 0) continue;
    const double lam = schedule[j - g.blend_begin()];
    // Chunk k+1 gives weight 1 - lam to chunk k's estimate: the same convex
    // combination, evaluated separately for each side.
    blend_row(est_k.row(j).data(), est_k1.row(p).data(), lam, bar_k.row(j).data(), d);
    blend_row(est_k.row(j).data(), est_k1.row(p).data(), lam, bar_k1.row(p).data(), d);
  }
  return {std::move(bar_k), std::move(bar_k1)};
}

Frames aggregate(std::span<const Frames> estimates, const ChunkGeometry& g,
                 const BlendSchedule& schedule, Execution exec) {
  require_chunk_set(estimates, g, "aggregate");
  if (schedule.size() != g.O) throw ShapeError("aggregate: schedule length must equal O");
  const BufferPartition part = partition(g);
  Frames out(g.N, estimates.front().cols());
  kernels::aggregate_owned(estimates, g, part, schedule, out, exec);
  return out;
}

Frames pairwise_iteration_oracle(std::span<const Frames> estimates, const ChunkGeometry& g,
                                 const BlendSchedule& schedule) {
  require_chunk_set(estimates, g, "pairwise_iteration_oracle");
  std::vector<Frames> matched(estimates.begin(), estimates.end());
  for (int k = 1; k < g.K; ++k) {
    auto [bar_k, bar_k1] = tweedie_match_pair(estimates[static_cast<std::size_t>(k - 1)],
                                              estimates[static_cast<std::size_t>(k)], schedule, g);
    // Only the frames the pair touched are written back, so a later pair
    // overwrites an earlier one where their zones overlap.
    for (int j = g.blend_begin(); j < g.F; ++j) {
      const int p = partner_frame(g, j);
      if (p < 0) continue;
      matched[static_cast<std::size_t>(k - 1)].row(j) = bar_k.row(j);
      matched[static_cast<std::size_t>(k)].row(p) = bar_k1.row(p);
    }
  }
  const BufferPartition part = partition(g);
  Frames out(g.N, estimates.front().cols());
  for (int gi = 0; gi < g.N; ++gi) {
    const int owner = BufferPartition::hard_owner(part.segment_at(gi));
    out.row(gi) = matched[static_cast<std::size_t>(owner - 1)].row(gi - g.chunk_start(owner));
  }
  return out;
}

Frames assemble_owned(std::span<const Frames> chunks, const ChunkGeometry& g) {
  require_chunk_set(chunks, g, "assemble_owned");
  const BufferPartition part = partition(g);
  Frames out(g.N, chunks.front().cols());
  for (const auto& seg : part.resolved) {
    const int owner = BufferPartition::hard_owner(seg);
    const auto& src = chunks[static_cast<std::size_t>(owner - 1)];
    for (int gi = seg.range.begin; gi < seg.range.end; ++gi) out.row(gi) = src.row(gi - g.chunk_start(owner));
  }
  return out;
}

double overlap_mse(std::span<const Frames> estimates, const ChunkGeometry& g) {
  require_chunk_set(estimates, g, "overlap_mse");
  if (g.K < 2) return 0.0;
  const Eigen::Index entries = overlap_entries(g, estimates.front().cols());
  if (entries == 0) return 0.0;
  double sum = 0.0;
  for (int k = 1; k < g.K; ++k) {
    sum += guidance_loss(estimates[static_cast<std::size_t>(k - 1)], estimates[static_cast<std::size_t>(k)], g) /
           static_cast<double>(entries);
  }
  return sum / (g.K - 1);
}

}  // namespace chunkflow
