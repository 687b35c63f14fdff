// Copyright 2026 The chunkflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <utility>
#include <vector>

#include "chunkflow/execution.hpp"
#include "chunkflow/frames.hpp"
#include "chunkflow/geometry.hpp"

namespace chunkflow {

/// Per-frame blend weights over the O-frame blending zone, indexed by the
/// local overlap position i = 0..O-1.
struct BlendSchedule {
  std::vector<double> lambdas;

  int size() const { return static_cast<int>(lambdas.size()); }
  double operator[](int i) const { return lambdas[static_cast<std::size_t>(i)]; }
};

/// Which per-chunk quantity is blended: the denoised estimates (Tweedie
/// matching) or the renoised states (noise-level matching ablation).
enum class MatchSpace { Denoised, Noisy };

/// lambda_i = scale * i / (O - 1). Throws GeometryError("O>=2") for O < 2 and
/// GeometryError("O<=F") for O > F.
BlendSchedule lambda_schedule(int F, int O, double scale = 1.0);

/// Chunk k's blending zone frame j pairs with chunk k+1's local frame j - S
/// (same global position). Returns -1 when chunk k+1 does not cover it,
/// which happens only when F - O < S.
inline int partner_frame(const ChunkGeometry& g, int j) { return j - g.S >= 0 ? j - g.S : -1; }

/// (1 - lam) a + lam b, row-wise. Every blend in the library goes through
/// this so all paths round identically.
inline void blend_row(const double* a, const double* b, double lam, double* out, Eigen::Index d) {
  for (Eigen::Index i = 0; i < d; ++i) out[i] = (1.0 - lam) * a[i] + lam * b[i];
}

/// 1/2 || last O frames of est_k - matching frames of est_k1 ||^2 over the
/// frames both chunks observe.
double guidance_loss(const Frames& est_k, const Frames& est_k1, const ChunkGeometry& g);

/// Gradient of guidance_loss with respect to est_k. Exactly zero off the
/// blending zone.
Frames guidance_gradient(const Frames& est_k, const Frames& est_k1, const ChunkGeometry& g);

/// Number of (frame, dimension) entries guidance_loss sums over.
Eigen::Index overlap_entries(const ChunkGeometry& g, Eigen::Index d);

/// One pairwise matching update. Both returned chunks hold the same convex
/// combination on every shared global frame.
std::pair<Frames, Frames> tweedie_match_pair(const Frames& est_k, const Frames& est_k1,
                                             const BlendSchedule& schedule, const ChunkGeometry& g);

/// Writes every global frame of the long buffer exactly once from the
/// statically resolved partition: sole owners copy, blend segments mix
/// chunks k and k+1 with the schedule.
Frames aggregate(std::span<const Frames> estimates, const ChunkGeometry& g,
                 const BlendSchedule& schedule, Execution exec = Execution::Serial);

/// Reference for aggregate: apply tweedie_match_pair to (1,2), (2,3), ...
/// on per-chunk copies, later pairs overwriting earlier ones, then read each
/// global frame from the chunk that owns it. Not used by the sampler.
Frames pairwise_iteration_oracle(std::span<const Frames> estimates, const ChunkGeometry& g,
                                 const BlendSchedule& schedule);

/// Hard-ownership assembly with no blending (blend segments take chunk k).
Frames assemble_owned(std::span<const Frames> chunks, const ChunkGeometry& g);

/// Mean over adjacent pairs of guidance_loss divided by overlap_entries.
/// Zero when K = 1.
double overlap_mse(std::span<const Frames> estimates, const ChunkGeometry& g);

/// Throws ShapeError unless there are K chunks of shape F x d.
void require_chunk_set(std::span<const Frames> chunks, const ChunkGeometry& g, const char* what);

}  // namespace chunkflow
