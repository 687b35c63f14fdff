// Copyright 2026 The chunkflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

#include "chunkflow/frames.hpp"

namespace chunkflow {

enum class Modality : std::uint32_t { Video = 0, Audio = 1 };

/// Seeded standard-normal stream. (seed, modality, stream) selects an
/// independent sub-stream; draws are consumed row-major in call order, so a
/// fixed call sequence reproduces bit-identical noise.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed, Modality modality = Modality::Video, std::uint64_t stream = 0);

  Frames draw(Eigen::Index rows, Eigen::Index cols);
  double draw_one() { return normal_(engine_); }

  std::uint64_t seed() const { return seed_; }
  Modality modality() const { return modality_; }

 private:
  std::uint64_t seed_;
  Modality modality_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace chunkflow
