// Copyright 2026 The chunkflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "chunkflow/kernels.hpp"

#include <cmath>
#include <exception>

namespace chunkflow::kernels {

namespace {

void write_frame(std::span<const Frames> chunks, const ChunkGeometry& g, const Segment& seg,
                 const BlendSchedule& schedule, int gi, Frames& out) {
  const Eigen::Index d = out.cols();
  if (seg.kind == SegmentKind::Blend) {
    int k = seg.index;
    int j = gi - g.chunk_start(k);
    if (partner_frame(g, j) < 0) {
      // Zone frame outside chunk k+1 (O + S > F): pair k never writes it, so
      // it keeps pair k-1's blend, or chunk k's value if that pair misses it too.
      if (k == 1 || j + g.S >= g.F) {
        out.row(gi) = chunks[static_cast<std::size_t>(k - 1)].row(j);
        return;
      }
      --k;
      j += g.S;
    }
    const int p = partner_frame(g, j);
    const auto& left = chunks[static_cast<std::size_t>(k - 1)];
    const auto& right = chunks[static_cast<std::size_t>(k)];
    blend_row(left.row(j).data(), right.row(p).data(), schedule[j - g.blend_begin()], out.row(gi).data(), d);
    return;
  }
  const int owner = BufferPartition::hard_owner(seg);
  out.row(gi) = chunks[static_cast<std::size_t>(owner - 1)].row(gi - g.chunk_start(owner));
}

}  // namespace

void aggregate_owned(std::span<const Frames> chunks, const ChunkGeometry& g,
                     const BufferPartition& part, const BlendSchedule& schedule, Frames& out,
                     Execution exec) {
  if (exec == Execution::Serial) {
    for (const auto& seg : part.resolved) {
      for (int gi = seg.range.begin; gi < seg.range.end; ++gi) write_frame(chunks, g, seg, schedule, gi, out);
    }
    return;
  }
#pragma omp parallel for schedule(static)
  for (int gi = 0; gi < g.N; ++gi) {
    write_frame(chunks, g, part.segment_at(gi), schedule, gi, out);
  }
}

Frames aggregate_overwrite(std::span<const Frames> chunks, const ChunkGeometry& g,
                           const BlendSchedule& schedule) {
  require_chunk_set(chunks, g, "aggregate_overwrite");
  const Eigen::Index d = chunks.front().cols();
  Frames out(g.N, d);
  const int lead = g.blend_begin();
  for (int gi = 0; gi < lead; ++gi) out.row(gi) = chunks.front().row(gi);
  for (int gi = g.chunk_start(g.K) + lead; gi < g.N; ++gi) {
    out.row(gi) = chunks.back().row(gi - g.chunk_start(g.K));
  }
  for (int k = 1; k < g.K; ++k) {
    const auto& left = chunks[static_cast<std::size_t>(k - 1)];
    const auto& right = chunks[static_cast<std::size_t>(k)];
    for (int j = lead; j < g.F; ++j) {
      const int gi = g.chunk_start(k) + j;
      const int p = partner_frame(g, j);
      if (p < 0) {
        if (k == 1 || j + g.S >= g.F) out.row(gi) = left.row(j);
      } else {
        blend_row(left.row(j).data(), right.row(p).data(), schedule[j - lead], out.row(gi).data(), d);
      }
    }
    for (int gi = g.chunk_start(k) + g.F; gi < g.chunk_start(k + 1) + lead; ++gi) {
      out.row(gi) = right.row(gi - g.chunk_start(k + 1));
    }
  }
  return out;
}

std::vector<Frames> evaluate_velocities(const VelocityModel& model, std::span<const Frames> chunks,
                                        double t, std::span<const Vector> conditions, Execution exec) {
  if (conditions.size() != chunks.size()) throw std::invalid_argument("one condition per chunk required");
  const int count = static_cast<int>(chunks.size());
  std::vector<Frames> out(chunks.size());
  std::vector<std::exception_ptr> errors(chunks.size());
  auto body = [&](int k) {
    const auto idx = static_cast<std::size_t>(k);
    try {
      out[idx] = model.velocity(chunks[idx], t, conditions[idx]);
      require_same_shape(chunks[idx], out[idx], "velocity model output");
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  };
  if (exec == Execution::Serial) {
    for (int k = 0; k < count; ++k) body(k);
  } else {
#pragma omp parallel for schedule(dynamic, 1)
    for (int k = 0; k < count; ++k) body(k);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

void renoise(const Frames& bar0, const Frames& bar1, double s, double kappa, const Frames& eps,
             Frames& out, Execution exec) {
  require_same_shape(bar0, bar1, "renoise");
  out.resize(bar0.rows(), bar0.cols());
  const double a = 1.0 - s;
  const Eigen::Index rows = bar0.rows();
  const Eigen::Index cols = bar0.cols();
  if (kappa == 0.0) {
    auto body = [&](Eigen::Index r) {
      for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = a * bar0(r, c) + s * bar1(r, c);
    };
    if (exec == Execution::Serial) {
      for (Eigen::Index r = 0; r < rows; ++r) body(r);
    } else {
#pragma omp parallel for schedule(static)
      for (Eigen::Index r = 0; r < rows; ++r) body(r);
    }
    return;
  }
  require_same_shape(bar0, eps, "renoise noise");
  const double b = std::sqrt(std::max(0.0, s * s - kappa * kappa));
  auto body = [&](Eigen::Index r) {
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = a * bar0(r, c) + b * bar1(r, c) + kappa * eps(r, c);
  };
  if (exec == Execution::Serial) {
    for (Eigen::Index r = 0; r < rows; ++r) body(r);
  } else {
#pragma omp parallel for schedule(static)
    for (Eigen::Index r = 0; r < rows; ++r) body(r);
  }
}

}  // namespace chunkflow::kernels
