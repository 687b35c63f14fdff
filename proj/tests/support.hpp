// Copyright 2026 The chunkflow Authors
// SPDX-License-Identifier: Apache-2.0

// Test-only oracles. Nothing here calls into the library's numerical code
// paths it is used to check: posterior means come from Monte-Carlo moments
// or dense Cholesky algebra, blends from per-frame loops over raw indices.

#pragma once

#include <atomic>
#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "chunkflow/frames.hpp"
#include "chunkflow/geometry.hpp"
#include "chunkflow/models.hpp"

namespace testing {

using chunkflow::Frames;
using chunkflow::Matrix;
using chunkflow::Vector;

inline Frames random_frames(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Frames x(rows, cols);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
  return x;
}

inline std::vector<Frames> random_chunks(std::mt19937_64& rng, int K, int F, Eigen::Index d) {
  std::vector<Frames> out;
  for (int k = 0; k < K; ++k) out.push_back(random_frames(rng, F, d));
  return out;
}

inline bool bit_equal(const Frames& a, const Frames& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

/// Random symmetric positive-definite matrix with eigenvalues in [lo, hi].
inline Matrix random_spd(std::mt19937_64& rng, int d, double lo = 0.5, double hi = 2.0) {
  Eigen::HouseholderQR<Matrix> qr(random_frames(rng, d, d));
  const Matrix q = qr.householderQ();
  std::uniform_real_distribution<double> u(lo, hi);
  Vector ev(d);
  for (int i = 0; i < d; ++i) ev(i) = u(rng);
  return q * ev.asDiagonal() * q.transpose();
}

/// Dense conditional mean of x0 given x_t = (1-t) x0 + t x1 for
/// x0 ~ N(m, C), x1 ~ N(0, I): Cov(x0, x_t) Cov(x_t)^-1 (x_t - E x_t) + m.
inline Vector dense_posterior_mean(const Vector& m, const Matrix& C, const Vector& x_t, double t) {
  const Matrix cross = (1.0 - t) * C;
  const Matrix cov_t = (1.0 - t) * (1.0 - t) * C + t * t * Matrix::Identity(C.rows(), C.cols());
  return m + cross * cov_t.llt().solve(x_t - (1.0 - t) * m);
}

/// Draws n joint pairs (x0, x_t) with x0 ~ N(m, C) through a Cholesky
/// factor, estimates their first and second moments, and returns the
/// regression of x0 on x_t evaluated at `x_t`. For jointly Gaussian
/// variables this is the exact conditional mean up to sampling error.
inline Vector mc_regression_posterior_mean(const Vector& m, const Matrix& C, const Vector& x_t, double t, long n,
                                           std::uint64_t seed) {
  const Eigen::Index d = m.size();
  const Matrix L = C.llt().matrixL();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Vector s0 = Vector::Zero(d), st = Vector::Zero(d);
  Matrix stt = Matrix::Zero(d, d), s0t = Matrix::Zero(d, d);
  Vector e(d), x0(d), xt(d);
  for (long i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) e(j) = z(rng);
    x0 = m + L * e;
    for (Eigen::Index j = 0; j < d; ++j) xt(j) = (1.0 - t) * x0(j) + t * z(rng);
    s0 += x0;
    st += xt;
    stt.noalias() += xt * xt.transpose();
    s0t.noalias() += x0 * xt.transpose();
  }
  const double nn = static_cast<double>(n);
  const Vector m0 = s0 / nn, mt = st / nn;
  const Matrix ctt = stt / nn - mt * mt.transpose();
  const Matrix c0t = s0t / nn - m0 * mt.transpose();
  return m0 + c0t * ctt.llt().solve(x_t - mt);
}

/// Self-normalised importance sampling for a per-frame Gaussian mixture:
/// prior draws x0_i weighted by N(x_t; (1-t) x0_i, t^2 I).
inline Vector mc_mixture_posterior_mean(const std::vector<double>& w, const std::vector<Vector>& means,
                                        const std::vector<Matrix>& covs, const Vector& x_t, double t, long n,
                                        std::uint64_t seed) {
  const Eigen::Index d = x_t.size();
  std::vector<Matrix> L;
  for (const auto& c : covs) L.push_back(c.llt().matrixL());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::discrete_distribution<int> pick(w.begin(), w.end());
  std::vector<double> logw(static_cast<std::size_t>(n));
  std::vector<Vector> xs(static_cast<std::size_t>(n));
  double max_lw = -INFINITY;
  Vector e(d);
  for (long i = 0; i < n; ++i) {
    const int c = pick(rng);
    for (Eigen::Index j = 0; j < d; ++j) e(j) = z(rng);
    xs[static_cast<std::size_t>(i)] = means[static_cast<std::size_t>(c)] + L[static_cast<std::size_t>(c)] * e;
    const double r2 = (x_t - (1.0 - t) * xs[static_cast<std::size_t>(i)]).squaredNorm();
    logw[static_cast<std::size_t>(i)] = -0.5 * r2 / (t * t);
    max_lw = std::max(max_lw, logw[static_cast<std::size_t>(i)]);
  }
  Vector num = Vector::Zero(d);
  double den = 0.0;
  for (long i = 0; i < n; ++i) {
    const double wi = std::exp(logw[static_cast<std::size_t>(i)] - max_lw);
    num += wi * xs[static_cast<std::size_t>(i)];
    den += wi;
  }
  return num / den;
}

/// Stacks an F x d chunk frame-major into one F*d vector.
inline Vector stack(const Frames& x) {
  Vector v(x.size());
  for (Eigen::Index f = 0; f < x.rows(); ++f) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) v(f * x.cols() + j) = x(f, j);
  }
  return v;
}

inline Frames unstack(const Vector& v, Eigen::Index F, Eigen::Index d) {
  Frames x(F, d);
  for (Eigen::Index f = 0; f < F; ++f) {
    for (Eigen::Index j = 0; j < d; ++j) x(f, j) = v(f * d + j);
  }
  return x;
}

/// AR(1) covariance kron D written out entry by entry.
inline Matrix dense_ar1_cov(double rho, int F, const Matrix& D) {
  const Eigen::Index d = D.rows();
  Matrix C(F * d, F * d);
  for (int a = 0; a < F; ++a) {
    for (int b = 0; b < F; ++b) {
      C.block(a * d, b * d, d, d) = std::pow(rho, std::abs(a - b)) * D;
    }
  }
  return C;
}

/// Naive double loop over the globally aligned overlap: chunk k local j in
/// [F-O, F) against chunk k+1 local j-S.
inline double naive_loss(const Frames& a, const Frames& b, const chunkflow::ChunkGeometry& g) {
  double sum = 0.0;
  for (int j = g.F - g.O; j < g.F; ++j) {
    const int jp = j - g.S;
    if (jp < 0) continue;
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      const double diff = a(j, c) - b(jp, c);
      sum += diff * diff;
    }
  }
  return 0.5 * sum;
}

/// Velocity model wrapper that counts calls and records the largest chunk.
class CountingModel final : public chunkflow::VelocityModel {
 public:
  explicit CountingModel(const chunkflow::VelocityModel& inner) : inner_(inner) {}
  int dim() const override { return inner_.dim(); }
  int frames() const override { return inner_.frames(); }
  Frames velocity(const Frames& x_t, double t, const Vector& c) const override {
    calls_.fetch_add(1);
    long rows = static_cast<long>(x_t.rows());
    long prev = max_rows_.load();
    while (rows > prev && !max_rows_.compare_exchange_weak(prev, rows)) {
    }
    return inner_.velocity(x_t, t, c);
  }
  long calls() const { return calls_.load(); }
  long max_rows() const { return max_rows_.load(); }
  void reset() {
    calls_ = 0;
    max_rows_ = 0;
  }

 private:
  const chunkflow::VelocityModel& inner_;
  mutable std::atomic<long> calls_{0};
  mutable std::atomic<long> max_rows_{0};
};

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double saa = 0, sbb = 0, sab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
    sab += (a[i] - ma) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace testing
