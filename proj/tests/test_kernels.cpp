// Copyright 2026 The chunkflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "chunkflow/kernels.hpp"
#include "support.hpp"

using namespace chunkflow;
using testing::bit_equal;
using testing::random_frames;

namespace {

class Throwing final : public VelocityModel {
 public:
  int dim() const override { return 1; }
  int frames() const override { return 3; }
  Frames velocity(const Frames& x, double, const Vector&) const override {
    if (x(0, 0) > 0) throw std::runtime_error("boom");
    return x;
  }
};

class WrongShape final : public VelocityModel {
 public:
  int dim() const override { return 1; }
  int frames() const override { return 3; }
  Frames velocity(const Frames&, double, const Vector&) const override { return Frames::Zero(2, 1); }
};

}  // namespace

TEST_CASE("parallel aggregate equals the serial reference") {
  std::mt19937_64 rng(1);
  for (const auto& g : {ChunkGeometry::make(16, 8, 7, 6), ChunkGeometry::make(9, 5, 2, 5), ChunkGeometry::make(4, 2, 2, 8)}) {
    const auto part = partition(g);
    const auto sched = lambda_schedule(g.F, g.O);
    const auto chunks = testing::random_chunks(rng, g.K, g.F, 5);
    Frames a(g.N, 5), b(g.N, 5);
    kernels::aggregate_owned(chunks, g, part, sched, a, Execution::Serial);
    kernels::aggregate_owned(chunks, g, part, sched, b, Execution::Parallel);
    CHECK(bit_equal(a, b));
  }
}

TEST_CASE("parallel renoise equals the serial reference") {
  std::mt19937_64 rng(2);
  const Frames b0 = random_frames(rng, 40, 6), b1 = random_frames(rng, 40, 6), eps = random_frames(rng, 40, 6);
  for (double kappa : {0.0, 0.2, 0.5}) {
    Frames a, b;
    kernels::renoise(b0, b1, 0.5, kappa, eps, a, Execution::Serial);
    kernels::renoise(b0, b1, 0.5, kappa, eps, b, Execution::Parallel);
    CHECK(bit_equal(a, b));
  }
  Frames out;
  kernels::renoise(b0, b1, 0.5, 0.5, eps, out, Execution::Serial);
  CHECK(bit_equal(out, Frames(0.5 * b0 + 0.5 * eps)));
}

TEST_CASE("velocity evaluation: parallel equals serial, errors propagate") {
  std::mt19937_64 rng(3);
  const GaussianProcessModel model(0.5, Vector::Zero(2), Matrix::Identity(2, 2), 6);
  const auto chunks = testing::random_chunks(rng, 7, 6, 2);
  std::vector<Vector> conds(7);
  const auto a = kernels::evaluate_velocities(model, chunks, 0.4, conds, Execution::Serial);
  const auto b = kernels::evaluate_velocities(model, chunks, 0.4, conds, Execution::Parallel);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(bit_equal(a[k], b[k]));

  const Throwing bad;
  std::vector<Frames> xs{Frames::Constant(3, 1, -1.0), Frames::Constant(3, 1, 1.0)};
  std::vector<Vector> c2(2);
  CHECK_THROWS_AS(kernels::evaluate_velocities(bad, xs, 0.5, c2, Execution::Parallel), std::runtime_error);
  CHECK_THROWS_AS(kernels::evaluate_velocities(bad, xs, 0.5, c2, Execution::Serial), std::runtime_error);
  const WrongShape wrong;
  CHECK_THROWS_AS(kernels::evaluate_velocities(wrong, xs, 0.5, c2, Execution::Serial), ShapeError);
}
