// Copyright 2026 The chunkflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chunkflow/frames.hpp"

namespace chunkflow {

/// A conditioning vector. Global conditions are shared by every chunk;
/// per-chunk conditions are appended after the global one.
struct Condition {
  enum class Role { Global, PerChunk };
  Vector values;
  Role role = Role::PerChunk;
};

/// Conditions for one run: an optional global vector plus zero or K
/// per-chunk vectors.
struct ConditionSet {
  std::optional<Condition> global;
  std::vector<Condition> per_chunk;

  /// Effective condition of chunk k (1-based): global followed by per-chunk.
  Vector for_chunk(int k) const;
  /// Throws std::invalid_argument if per_chunk is neither empty nor size K,
  /// or if any entry is non-finite.
  void validate(int K) const;
};

/// Conditional velocity field v(x_t, t, c) on F x d chunks. Implementations
/// are immutable after construction and safe to call concurrently.
class VelocityModel {
 public:
  virtual ~VelocityModel() = default;

  virtual int dim() const = 0;
  /// Native chunk length F.
  virtual int frames() const = 0;
  virtual Frames velocity(const Frames& x_t, double t, const Vector& c) const = 0;
};

/// Velocity model whose data law is known in closed form. x1 ~ N(0, I) is
/// independent of x0 throughout.
class AnalyticModel : public VelocityModel {
 public:
  /// E[x0 | x_t] for the chunk law conditioned on c.
  virtual Frames posterior_mean(const Frames& x_t, double t, const Vector& c) const = 0;

  /// (x_t - E[x0|x_t]) / t for t > 0. At t = 0 the continuous extension
  /// E[x1|x0] - E[x0|x0] = -x_t is returned.
  Frames velocity(const Frames& x_t, double t, const Vector& c) const override;

  /// Per-frame mean of the data law (length d).
  virtual Vector frame_mean(const Vector& c) const = 0;
  /// Covariance of one chunk stacked frame-major, (F d) x (F d).
  virtual Matrix window_covariance() const = 0;
  /// One exact draw of an F x d chunk from the data law.
  virtual Frames sample(std::mt19937_64& rng, const Vector& c) const = 0;

  virtual std::string backend() const = 0;
  virtual nlohmann::json params() const = 0;

  /// Same law on a different chunk length (used to draw ground-truth long
  /// sequences and to reuse one backend across geometries).
  virtual std::unique_ptr<AnalyticModel> with_frames(int F) const = 0;

  int cond_dim() const { return static_cast<int>(cond_matrix_.cols()); }
  const Matrix& cond_matrix() const { return cond_matrix_; }

 protected:
  explicit AnalyticModel(Matrix cond_matrix) : cond_matrix_(std::move(cond_matrix)) {}
  /// Mean shift B c; an empty c means no shift.
  Vector shift(const Vector& c) const;

 private:
  Matrix cond_matrix_;  // d x c_dim
};

/// Gaussian law whose chunk covariance factors as T (frames) kron D
/// (features), with a common per-frame mean. Posterior means are computed in
/// the joint eigenbasis, so each call costs two small basis changes.
class KroneckerGaussian {
 public:
  KroneckerGaussian(Matrix frame_cov, Matrix feature_cov);

  int frames() const { return static_cast<int>(frame_vecs_.rows()); }
  int dim() const { return static_cast<int>(feature_vecs_.rows()); }

  Frames posterior_mean(const Frames& x_t, double t, const Vector& mean) const;
  Frames sample(std::mt19937_64& rng, const Vector& mean) const;
  Matrix covariance() const;

 private:
  Matrix frame_vecs_;
  Vector frame_vals_;
  Matrix feature_vecs_;
  Vector feature_vals_;
};

/// Frames i.i.d. N(mu + B c, Sigma).
class GaussianModel final : public AnalyticModel {
 public:
  GaussianModel(Vector mean, Matrix cov, int F, Matrix cond_matrix = {});

  int dim() const override { return static_cast<int>(mean_.size()); }
  int frames() const override { return F_; }
  Frames posterior_mean(const Frames& x_t, double t, const Vector& c) const override;
  Vector frame_mean(const Vector& c) const override { return mean_ + shift(c); }
  Matrix window_covariance() const override { return law_.covariance(); }
  Frames sample(std::mt19937_64& rng, const Vector& c) const override;
  std::string backend() const override { return "gaussian"; }
  nlohmann::json params() const override;
  std::unique_ptr<AnalyticModel> with_frames(int F) const override;

  const Matrix& cov() const { return cov_; }

 private:
  Vector mean_;
  Matrix cov_;
  int F_;
  KroneckerGaussian law_;
};

/// Stationary Gaussian process over frames: Cov(x[i], x[j]) = rho^|i-j| D,
/// mean mu + B c on every frame.
class GaussianProcessModel final : public AnalyticModel {
 public:
  GaussianProcessModel(double rho, Vector mean, Matrix feature_cov, int F, Matrix cond_matrix = {});

  int dim() const override { return static_cast<int>(mean_.size()); }
  int frames() const override { return F_; }
  Frames posterior_mean(const Frames& x_t, double t, const Vector& c) const override;
  Vector frame_mean(const Vector& c) const override { return mean_ + shift(c); }
  Matrix window_covariance() const override { return law_.covariance(); }
  Frames sample(std::mt19937_64& rng, const Vector& c) const override;
  std::string backend() const override { return "gp"; }
  nlohmann::json params() const override;
  std::unique_ptr<AnalyticModel> with_frames(int F) const override;

  double rho() const { return rho_; }

  /// rho^|i-j| on an F x F grid.
  static Matrix ar1_kernel(double rho, int F);

 private:
  double rho_;
  Vector mean_;
  Matrix feature_cov_;
  int F_;
  KroneckerGaussian law_;
};

/// Frames i.i.d. from sum_i w_i N(mu_i + B c, Sigma_i).
class MixtureModel final : public AnalyticModel {
 public:
  MixtureModel(std::vector<double> weights, std::vector<Vector> means, std::vector<Matrix> covs,
               int F, Matrix cond_matrix = {});

  int dim() const override { return static_cast<int>(means_.front().size()); }
  int frames() const override { return F_; }
  Frames posterior_mean(const Frames& x_t, double t, const Vector& c) const override;
  Vector frame_mean(const Vector& c) const override;
  Matrix window_covariance() const override;
  Frames sample(std::mt19937_64& rng, const Vector& c) const override;
  std::string backend() const override { return "mixture"; }
  nlohmann::json params() const override;
  std::unique_ptr<AnalyticModel> with_frames(int F) const override;

 private:
  struct Component {
    double log_weight;
    Vector mean;
    Matrix cov;
    Matrix vecs;  // eigenvectors of cov
    Vector vals;  // eigenvalues of cov
  };

  std::vector<double> weights_;
  std::vector<Component> comps_;
  std::vector<Vector> means_;
  int F_;
};

/// Builds a backend from its declarative description. Recognised
/// "backend" values: "gaussian", "gp", "mixture". Throws
/// std::invalid_argument on malformed parameters.
std::unique_ptr<AnalyticModel> make_model(const nlohmann::json& spec, int F);

/// Stable 64-bit FNV-1a digest of a backend's parameters, as 16 hex digits.
std::string params_digest(const AnalyticModel& model);

}  // namespace chunkflow
