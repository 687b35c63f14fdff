// Copyright 2026 The chunkflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "chunkflow/frames.hpp"

namespace chunkflow {

/// Position on the rectified-flow path: t = 1 is pure noise, t = 0 is data.
class TimePoint {
 public:
  constexpr TimePoint() = default;
  explicit TimePoint(double t);

  constexpr double value() const { return t_; }
  constexpr operator double() const { return t_; }

 private:
  double t_ = 0.0;
};

/// Denoised and noisy estimates formed at one time.
struct ChunkEstimates {
  Frames x0_hat;
  Frames x1_hat;
  TimePoint t;
};

/// (1-t) x0 + t x1.
Frames interpolant(const Frames& x0, const Frames& x1, TimePoint t);

/// Posterior mean of the data, x_t - t v.
Frames denoised_estimate(const Frames& x_t, const Frames& v, TimePoint t);

/// Posterior mean of the noise, x_t + (1-t) v. Valid at every t, including 0.
Frames noisy_estimate(const Frames& x_t, const Frames& v, TimePoint t);

/// Noisy estimate recovered from a (possibly modified) denoised estimate:
/// (x_t - (1-t) x0) / t. Requires t > 0.
Frames noisy_from_denoised(const Frames& x_t, const Frames& x0_hat, TimePoint t);

/// Both estimates from one velocity evaluation.
ChunkEstimates make_estimates(const Frames& x_t, const Frames& v, TimePoint t);

/// x_t + (s - t) v. Throws std::invalid_argument unless s < t.
Frames euler_step(const Frames& x_t, const Frames& v, TimePoint t, TimePoint s);

/// (1-s) x0_hat + s x1_hat. Throws std::invalid_argument if s > est.t; s equal
/// to est.t is allowed and reproduces x_t.
Frames interp_step(const ChunkEstimates& est, TimePoint s);

}  // namespace chunkflow
