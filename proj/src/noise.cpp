// Copyright 2026 The chunkflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "chunkflow/noise.hpp"

namespace chunkflow {

namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed, Modality modality, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(modality), static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

NoiseSource::NoiseSource(std::uint64_t seed, Modality modality, std::uint64_t stream)
    : seed_(seed), modality_(modality), engine_(seeded_engine(seed, modality, stream)) {}

Frames NoiseSource::draw(Eigen::Index rows, Eigen::Index cols) {
  Frames out(rows, cols);
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = normal_(engine_);
  return out;
}

}  // namespace chunkflow
