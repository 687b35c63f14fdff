// Copyright 2026 The chunkflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chunkflow/frames.hpp"
#include "chunkflow/geometry.hpp"
#include "chunkflow/models.hpp"

namespace chunkflow {

/// Global indices g where the hard owner of the resolved partition changes;
/// the seam jump is x[g] - x[g-1].
std::vector<int> seam_positions(const ChunkGeometry& g);

struct SeamReport {
  double ratio = 1.0;        // mean seam jump / mean within-chunk jump
  double mean_seam = 0.0;
  double max_seam = 0.0;
  double mean_within = 0.0;
  std::vector<double> per_seam;  // mean jump at each seam
};

/// Jump norms ||x[g] - x[g-1]|| at seams against every other adjacent pair.
/// Both means zero gives ratio 1.
SeamReport seam_discontinuity(const Frames& buffer, const ChunkGeometry& g);
/// Pooled over many buffers.
SeamReport seam_discontinuity(std::span<const Frames> buffers, const ChunkGeometry& g);

/// Per-step overlap disagreement of pre-aggregation estimates. Empty for K = 1.
std::vector<double> overlap_mse_trace(std::span<const std::vector<Frames>> per_step_estimates,
                                      const ChunkGeometry& g);

/// |corr(x[g-1], x[g]) - rho| over samples, averaged over seams and feature
/// dimensions. Throws std::invalid_argument with fewer than 100 samples.
double gp_cross_seam_error(std::span<const Frames> samples, const ChunkGeometry& g, double rho);

/// Empirical correlation of frames (g-1, g) per seam, averaged over dims.
std::vector<double> cross_seam_correlation(std::span<const Frames> samples, const ChunkGeometry& g);

struct MarginalError {
  double mean_error = 0.0;  // max abs per-entry mean error
  double cov_error = 0.0;   // Frobenius norm of the covariance error
};

/// Sample mean and covariance of every chunk window (rows [(k-1)S, (k-1)S+F))
/// against the model's chunk law, averaged over the K windows. The condition
/// for chunk k is taken from `conditions`.
MarginalError chunk_marginal_error(std::span<const Frames> samples, const ChunkGeometry& g,
                                   const AnalyticModel& model, const ConditionSet& conditions);

/// Mean over frames and dims of Var(x[g] - x[g-1]). Informational only.
double increment_variance(std::span<const Frames> samples);

struct MetricsReport {
  std::string mode;
  SeamReport seams;
  double overlap_mse_first = 0.0;
  double overlap_mse_final = 0.0;
  std::vector<double> overlap_trace;
  MarginalError marginal;
  double gp_cross_seam_error = -1.0;  // negative when not applicable
  double increment_variance = 0.0;

  nlohmann::json to_json() const;
  static std::string csv_header();
  std::string csv_row() const;
};

}  // namespace chunkflow
