// Copyright 2026 The chunkflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "chunkflow/flow.hpp"

#include <cmath>

namespace chunkflow {

TimePoint::TimePoint(double t) : t_(t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::invalid_argument("time point " + std::to_string(t) + " outside [0, 1]");
  }
}

Frames interpolant(const Frames& x0, const Frames& x1, TimePoint t) {
  require_same_shape(x0, x1, "interpolant");
  return (1.0 - t.value()) * x0 + t.value() * x1;
}

Frames denoised_estimate(const Frames& x_t, const Frames& v, TimePoint t) {
  require_same_shape(x_t, v, "denoised_estimate");
  return x_t - t.value() * v;
}

Frames noisy_estimate(const Frames& x_t, const Frames& v, TimePoint t) {
  require_same_shape(x_t, v, "noisy_estimate");
  return x_t + (1.0 - t.value()) * v;
}

Frames noisy_from_denoised(const Frames& x_t, const Frames& x0_hat, TimePoint t) {
  require_same_shape(x_t, x0_hat, "noisy_from_denoised");
  if (!(t.value() > 0.0)) throw std::invalid_argument("noisy_from_denoised needs t > 0");
  return (x_t - (1.0 - t.value()) * x0_hat) / t.value();
}

ChunkEstimates make_estimates(const Frames& x_t, const Frames& v, TimePoint t) {
  return {denoised_estimate(x_t, v, t), noisy_estimate(x_t, v, t), t};
}

Frames euler_step(const Frames& x_t, const Frames& v, TimePoint t, TimePoint s) {
  require_same_shape(x_t, v, "euler_step");
  if (!(s.value() < t.value())) throw std::invalid_argument("euler_step needs s < t");
  return x_t + (s.value() - t.value()) * v;
}

Frames interp_step(const ChunkEstimates& est, TimePoint s) {
  require_same_shape(est.x0_hat, est.x1_hat, "interp_step");
  if (s.value() > est.t.value()) throw std::invalid_argument("interp_step needs s <= t");
  return (1.0 - s.value()) * est.x0_hat + s.value() * est.x1_hat;
}

}  // namespace chunkflow
