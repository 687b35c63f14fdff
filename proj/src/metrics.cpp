// Copyright 2026 The chunkflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "chunkflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "chunkflow/matching.hpp"

namespace chunkflow {

std::vector<int> seam_positions(const ChunkGeometry& g) {
  std::vector<int> seams;
  if (g.K < 2) return seams;
  const BufferPartition part = partition(g);
  for (std::size_t i = 1; i < part.resolved.size(); ++i) {
    if (BufferPartition::hard_owner(part.resolved[i]) != BufferPartition::hard_owner(part.resolved[i - 1])) {
      seams.push_back(part.resolved[i].range.begin);
    }
  }
  return seams;
}

SeamReport seam_discontinuity(std::span<const Frames> buffers, const ChunkGeometry& g) {
  const std::vector<int> seams = seam_positions(g);
  std::vector<bool> is_seam(static_cast<std::size_t>(g.N), false);
  for (int s : seams) is_seam[static_cast<std::size_t>(s)] = true;

  SeamReport rep;
  rep.per_seam.assign(seams.size(), 0.0);
  double within_sum = 0.0;
  long within_count = 0;
  for (const Frames& x : buffers) {
    if (x.rows() != g.N) throw ShapeError("seam_discontinuity: buffer does not have N rows");
    std::size_t si = 0;
    for (int gi = 1; gi < g.N; ++gi) {
      const double jump = (x.row(gi) - x.row(gi - 1)).norm();
      if (is_seam[static_cast<std::size_t>(gi)]) {
        rep.per_seam[si++] += jump;
        rep.max_seam = std::max(rep.max_seam, jump);
      } else {
        within_sum += jump;
        ++within_count;
      }
    }
  }
  const double n = static_cast<double>(buffers.size());
  for (auto& v : rep.per_seam) v /= n;
  double seam_sum = 0.0;
  for (double v : rep.per_seam) seam_sum += v;
  rep.mean_seam = seams.empty() ? 0.0 : seam_sum / static_cast<double>(seams.size());
  rep.mean_within = within_count ? within_sum / static_cast<double>(within_count) : 0.0;
  if (rep.mean_seam == 0.0 && rep.mean_within == 0.0) {
    rep.ratio = 1.0;
  } else if (rep.mean_within == 0.0) {
    rep.ratio = std::numeric_limits<double>::infinity();
  } else {
    rep.ratio = rep.mean_seam / rep.mean_within;
  }
  return rep;
}

SeamReport seam_discontinuity(const Frames& buffer, const ChunkGeometry& g) {
  return seam_discontinuity(std::span<const Frames>(&buffer, 1), g);
}

std::vector<double> overlap_mse_trace(std::span<const std::vector<Frames>> per_step_estimates,
                                      const ChunkGeometry& g) {
  std::vector<double> trace;
  if (g.K < 2) return trace;
  trace.reserve(per_step_estimates.size());
  for (const auto& est : per_step_estimates) trace.push_back(overlap_mse(est, g));
  return trace;
}

namespace {

double correlation(std::span<const Frames> samples, int ga, int gb, Eigen::Index dim) {
  const double n = static_cast<double>(samples.size());
  double ma = 0.0, mb = 0.0;
  for (const Frames& x : samples) {
    ma += x(ga, dim);
    mb += x(gb, dim);
  }
  ma /= n;
  mb /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (const Frames& x : samples) {
    const double a = x(ga, dim) - ma;
    const double b = x(gb, dim) - mb;
    saa += a * a;
    sbb += b * b;
    sab += a * b;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

void require_samples(std::span<const Frames> samples, const ChunkGeometry& g, std::size_t minimum,
                     const char* what) {
  if (samples.size() < minimum) {
    throw std::invalid_argument(std::string(what) + ": needs at least " + std::to_string(minimum) +
                                " samples, got " + std::to_string(samples.size()));
  }
  for (const Frames& x : samples) {
    if (x.rows() != g.N || x.cols() != samples.front().cols()) {
      throw ShapeError(std::string(what) + ": sample shape mismatch");
    }
  }
}

}  // namespace

std::vector<double> cross_seam_correlation(std::span<const Frames> samples, const ChunkGeometry& g) {
  require_samples(samples, g, 2, "cross_seam_correlation");
  const Eigen::Index d = samples.front().cols();
  std::vector<double> out;
  for (int s : seam_positions(g)) {
    double c = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) c += correlation(samples, s - 1, s, j);
    out.push_back(c / static_cast<double>(d));
  }
  return out;
}

double gp_cross_seam_error(std::span<const Frames> samples, const ChunkGeometry& g, double rho) {
  require_samples(samples, g, 100, "gp_cross_seam_error");
  const std::vector<int> seams = seam_positions(g);
  if (seams.empty()) return 0.0;
  const Eigen::Index d = samples.front().cols();
  double err = 0.0;
  for (int s : seams) {
    for (Eigen::Index j = 0; j < d; ++j) err += std::abs(correlation(samples, s - 1, s, j) - rho);
  }
  return err / static_cast<double>(seams.size() * static_cast<std::size_t>(d));
}

MarginalError chunk_marginal_error(std::span<const Frames> samples, const ChunkGeometry& g,
                                   const AnalyticModel& model, const ConditionSet& conditions) {
  require_samples(samples, g, 2, "chunk_marginal_error");
  const Eigen::Index d = samples.front().cols();
  const Eigen::Index m = static_cast<Eigen::Index>(g.F) * d;
  const Matrix target_cov = model.window_covariance();
  const double n = static_cast<double>(samples.size());

  MarginalError out;
  for (int k = 1; k <= g.K; ++k) {
    const Vector mu = model.frame_mean(conditions.for_chunk(k));
    Vector target_mean(m);
    for (int f = 0; f < g.F; ++f) target_mean.segment(f * d, d) = mu;

    Vector mean = Vector::Zero(m);
    for (const Frames& x : samples) {
      const Frames win = x.middleRows(g.chunk_start(k), g.F);
      mean += Eigen::Map<const Vector>(win.data(), m);
    }
    mean /= n;
    Matrix cov = Matrix::Zero(m, m);
    for (const Frames& x : samples) {
      const Frames win = x.middleRows(g.chunk_start(k), g.F);
      const Vector c = Eigen::Map<const Vector>(win.data(), m) - mean;
      cov.noalias() += c * c.transpose();
    }
    cov /= (n - 1.0);
    out.mean_error += (mean - target_mean).cwiseAbs().maxCoeff();
    out.cov_error += (cov - target_cov).norm();
  }
  out.mean_error /= g.K;
  out.cov_error /= g.K;
  return out;
}

double increment_variance(std::span<const Frames> samples) {
  if (samples.size() < 2) throw std::invalid_argument("increment_variance: needs at least 2 samples");
  const Eigen::Index rows = samples.front().rows();
  const Eigen::Index d = samples.front().cols();
  if (rows < 2) return 0.0;
  const double n = static_cast<double>(samples.size());
  double total = 0.0;
  for (Eigen::Index r = 1; r < rows; ++r) {
    for (Eigen::Index j = 0; j < d; ++j) {
      double s1 = 0.0, s2 = 0.0;
      for (const Frames& x : samples) {
        const double inc = x(r, j) - x(r - 1, j);
        s1 += inc;
        s2 += inc * inc;
      }
      const double mean = s1 / n;
      total += (s2 - n * mean * mean) / (n - 1.0);
    }
  }
  return total / static_cast<double>((rows - 1) * d);
}

nlohmann::json MetricsReport::to_json() const {
  return {
      {"mode", mode},
      {"seam_ratio", seams.ratio},
      {"seam_mean", seams.mean_seam},
      {"seam_max", seams.max_seam},
      {"within_mean", seams.mean_within},
      {"per_seam", seams.per_seam},
      {"overlap_mse_first", overlap_mse_first},
      {"overlap_mse_final", overlap_mse_final},
      {"overlap_trace", overlap_trace},
      {"mean_error", marginal.mean_error},
      {"cov_error", marginal.cov_error},
      {"gp_cross_seam_error", gp_cross_seam_error < 0.0 ? nlohmann::json(nullptr) : nlohmann::json(gp_cross_seam_error)},
      {"increment_variance", increment_variance},
  };
}

std::string MetricsReport::csv_header() {
  return "mode,seam_ratio,seam_mean,seam_max,within_mean,overlap_mse_first,overlap_mse_final,"
         "mean_error,cov_error,gp_cross_seam_error,increment_variance";
}

std::string MetricsReport::csv_row() const {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", mode.c_str(),
                seams.ratio, seams.mean_seam, seams.max_seam, seams.mean_within, overlap_mse_first,
                overlap_mse_final, marginal.mean_error, marginal.cov_error, gp_cross_seam_error,
                increment_variance);
  return buf;
}

}  // namespace chunkflow
