// Copyright 2026 The chunkflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "chunkflow/execution.hpp"
#include "chunkflow/frames.hpp"
#include "chunkflow/geometry.hpp"
#include "chunkflow/matching.hpp"
#include "chunkflow/models.hpp"

// Data-parallel inner loops of the sampler. Each kernel has a serial body
// and an OpenMP body; the serial one is the reference the tests compare
// against.
namespace chunkflow::kernels {

/// Fills `out` (N x d) from the resolved partition, one frame at a time.
void aggregate_owned(std::span<const Frames> chunks, const ChunkGeometry& g,
                     const BufferPartition& part, const BlendSchedule& schedule, Frames& out,
                     Execution exec);

/// Literal single pass with overwrites in claim order: prefix, suffix, then
/// B_1..B_{K-1} ascending with their gaps. No ownership map is consulted.
Frames aggregate_overwrite(std::span<const Frames> chunks, const ChunkGeometry& g,
                           const BlendSchedule& schedule);

/// v_k = model.velocity(chunks[k], t, conditions[k]) for every chunk.
std::vector<Frames> evaluate_velocities(const VelocityModel& model, std::span<const Frames> chunks,
                                        double t, std::span<const Vector> conditions, Execution exec);

/// out = (1-s) bar0 + sqrt(s^2 - kappa^2) bar1 + kappa eps, elementwise.
/// kappa = 0 skips the noise term entirely.
void renoise(const Frames& bar0, const Frames& bar1, double s, double kappa, const Frames& eps,
             Frames& out, Execution exec);

}  // namespace chunkflow::kernels
