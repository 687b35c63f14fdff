// Copyright 2026 The chunkflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "chunkflow/geometry.hpp"

using namespace chunkflow;

namespace {

std::string violated(const ChunkGeometry& g) {
  try {
    validate_geometry(g);
  } catch (const GeometryError& e) {
    return e.clause();
  }
  return "";
}

}  // namespace

TEST_CASE("pixel_to_latent on reference windows") {
  CHECK(pixel_to_latent({121, 64, 8}) == LatentWindow{16, 8, 7});
  CHECK(pixel_to_latent({9, 0, 8}) == LatentWindow{2, 2, 1});
  CHECK(pixel_to_latent({33, 16, 8}) == LatentWindow{5, 3, 2});
}

TEST_CASE("pixel_to_latent rejects bad windows by clause") {
  auto clause = [](PixelWindowSpec s) {
    try {
      pixel_to_latent(s);
    } catch (const GeometryError& e) {
      return e.clause();
    }
    return std::string();
  };
  CHECK(clause({120, 64, 8}) == "(W-1)%r==0");
  CHECK(clause({121, 121, 8}) == "0<=w<W");
  CHECK(clause({121, 64, 0}) == "r>=1");
  CHECK(clause({0, 0, 1}) == "W>=1");
  // floor(w/r) + floor((W-w)/r) <= F - 1, so the formulas always give O > S.
  for (int w = 0; w < 121; ++w) CHECK(clause({121, w, 8}) == "");
}

TEST_CASE("pixel_to_latent output always validates when the overlap covers the stride") {
  for (int r = 1; r <= 8; ++r) {
    for (int W = 1; W <= 130; ++W) {
      if ((W - 1) % r != 0) continue;
      for (int w = 0; w < W; ++w) {
        if (w / r > (W - w) / r) continue;
        const LatentWindow lw = pixel_to_latent({W, w, r});
        CHECK(lw.F == (W - 1) / r + 1);
        const auto g = ChunkGeometry::make(lw, 3);
        // The pixel constraints imply neither O >= 2 nor S >= 1 (W - w < r).
        const auto problems = check_geometry(g);
        for (const auto& p : problems) CHECK((p == "O>=2" || p == "S>=1"));
        if (W - w >= r) CHECK(lw.S >= 1);
      }
    }
  }
}

TEST_CASE("validate_geometry names the violated clause") {
  CHECK(violated({16, 8, 7, 4, 37}) == "");
  CHECK(violated({16, 6, 7, 2, 23}) == "O>=S");
  CHECK(violated({16, 1, 1, 2, 17}) == "O>=2");
  CHECK(violated({4, 5, 1, 2, 5}) == "O<=F");
  CHECK(violated({4, 2, 0, 2, 4}) == "S>=1");
  CHECK(violated({4, 2, 2, 0, 2}) == "K>=1");
  CHECK(violated({4, 2, 2, 2, 7}) == "N=F+(K-1)S");

  const auto all = check_geometry({4, 1, 2, 0, 9});
  CHECK(std::find(all.begin(), all.end(), "O>=S") != all.end());
  CHECK(std::find(all.begin(), all.end(), "O>=2") != all.end());
  CHECK(std::find(all.begin(), all.end(), "K>=1") != all.end());
}

TEST_CASE("partition of the reference window with K = 3") {
  const auto p = partition(ChunkGeometry::make(16, 8, 7, 3));
  CHECK(p.prefix == IndexRange{0, 8});
  REQUIRE(p.blend_zones.size() == 2);
  CHECK(p.blend_zones[0] == IndexRange{8, 16});
  CHECK(p.blend_zones[1] == IndexRange{15, 23});
  CHECK(p.suffix == IndexRange{22, 30});
  CHECK(p.gaps.empty());
  CHECK(p.blend_zones[0].intersect(p.blend_zones[1]) == IndexRange{15, 16});
  CHECK(p.segment_at(15).kind == SegmentKind::Blend);
  CHECK(p.segment_at(15).index == 2);
  CHECK(p.segment_at(14).index == 1);
  CHECK(p.segment_at(22).kind == SegmentKind::Blend);
  CHECK(p.segment_at(23).kind == SegmentKind::Suffix);
}

TEST_CASE("partition with a clean tiling has no conflicts") {
  const auto p = partition(ChunkGeometry::make(4, 2, 2, 2));
  CHECK(p.prefix == IndexRange{0, 2});
  CHECK(p.blend_zones == std::vector<IndexRange>{{2, 4}});
  CHECK(p.suffix == IndexRange{4, 6});
  CHECK(p.gaps.empty());
  CHECK(p.conflicts.empty());
}

TEST_CASE("partition reports gaps when the stride exceeds the overlap") {
  const auto p = partition(ChunkGeometry::make(6, 2, 3, 3));
  REQUIRE(p.gaps.size() == 2);
  CHECK(p.gaps[0].range == IndexRange{6, 7});
  CHECK(p.gaps[0].index == 2);
  CHECK(p.gaps[1].range == IndexRange{9, 10});
  CHECK(p.gaps[1].index == 3);
  CHECK(p.segment_at(6).kind == SegmentKind::Gap);
  CHECK(BufferPartition::hard_owner(p.segment_at(6)) == 2);
}

TEST_CASE("resolved partition covers every index exactly once (exhaustive)") {
  for (int F = 2; F <= 12; ++F) {
    for (int O = 2; O <= F; ++O) {
      for (int S = 1; S <= O; ++S) {
        for (int K = 1; K <= 5; ++K) {
          const auto g = ChunkGeometry::make(F, O, S, K);
          const auto p = partition(g);
          std::vector<int> hits(static_cast<std::size_t>(g.N), 0);
          int expect_begin = 0;
          for (const auto& seg : p.resolved) {
            CHECK(seg.range.begin == expect_begin);
            CHECK_FALSE(seg.range.empty());
            expect_begin = seg.range.end;
            for (int i = seg.range.begin; i < seg.range.end; ++i) ++hits[static_cast<std::size_t>(i)];
          }
          CHECK(expect_begin == g.N);
          CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
          for (const auto& b : p.blend_zones) CHECK(b.size() == O);
          CHECK(p.gaps.empty());
          // Every resolved blend frame lies inside its own zone.
          for (const auto& seg : p.resolved) {
            if (seg.kind != SegmentKind::Blend) continue;
            const auto& zone = p.blend_zones[static_cast<std::size_t>(seg.index - 1)];
            CHECK(zone.begin <= seg.range.begin);
            CHECK(seg.range.end <= zone.end);
          }
          // Later pairs keep contested frames.
          for (const auto& c : p.conflicts) {
            if (c.loser.kind == SegmentKind::Blend) CHECK(c.winner.index > c.loser.index);
          }
        }
      }
    }
  }
}

TEST_CASE("local_to_global index map") {
  const auto g = ChunkGeometry::make(16, 8, 7, 3);
  CHECK(local_to_global(g, 1, 0) == 0);
  CHECK(local_to_global(g, 2, 8) == 15);
  CHECK(local_to_global(g, 3, 15) == 29);
  CHECK(local_to_global(g, 3, 15) == g.N - 1);
  CHECK_THROWS_AS(local_to_global(g, 0, 0), std::out_of_range);
  CHECK_THROWS_AS(local_to_global(g, 4, 0), std::out_of_range);
  CHECK_THROWS_AS(local_to_global(g, 1, 16), std::out_of_range);
  CHECK_THROWS_AS(local_to_global(g, 1, -1), std::out_of_range);
}

TEST_CASE("local_to_global is injective per chunk and only the last chunk reaches N-1") {
  for (int F = 2; F <= 10; ++F) {
    for (int O = 2; O <= F; ++O) {
      for (int S = 1; S <= O; ++S) {
        const auto g = ChunkGeometry::make(F, O, S, 4);
        for (int k = 1; k <= g.K; ++k) {
          std::set<int> seen;
          for (int j = 0; j < F; ++j) seen.insert(local_to_global(g, k, j));
          CHECK(seen.size() == static_cast<std::size_t>(F));
          if (local_to_global(g, k, F - 1) == local_to_global(g, g.K, F - 1)) CHECK(k == g.K);
        }
      }
    }
  }
}

TEST_CASE("audio geometry on reference rates") {
  CHECK(audio_geometry(121, 64, 24, 25) == AudioWindow{126, 67, 59});
  CHECK(audio_geometry(121, 64, 24, 50) == AudioWindow{252, 133, 119});
  try {
    audio_geometry(121, 0, 24, 25);
    FAIL("expected an error");
  } catch (const GeometryError& e) {
    CHECK(e.clause() == "O_a>=S_a");
  }
  CHECK_THROWS_AS(audio_geometry(121, 64, 0, 25), GeometryError);
  CHECK_THROWS_AS(audio_geometry(121, 64, 24, -1), GeometryError);
}

TEST_CASE("audio rounding is half away from zero") {
  // 3/2 * 1 = 1.5 -> 2; (3-2)/2 = 0.5 -> 1.
  CHECK(audio_geometry(3, 2, 2, 1) == AudioWindow{2, 1, 1});
}

TEST_CASE("audio stride stays within one latent of the video stride") {
  const auto ref = audio_geometry(121, 64, 24, 25);
  CHECK(std::abs(audio_stride_offset(ref, pixel_to_latent({121, 64, 8}), 8, 24, 25)) <= 1);
  // Holds whenever w is a multiple of r and the audio rate does not exceed
  // the video frame rate (the rounding of W and of S r then differ by less
  // than one latent).
  for (int r : {1, 2, 4, 8}) {
    for (int W = 1 + 2 * r; W <= 1 + 20 * r; W += r) {
      for (int w = 0; w < W; w += r) {
        const LatentWindow v{(W - 1) / r + 1, (W - 1) / r + 1 - w / r, (W - w) / r};
        for (double fps : {12.0, 24.0, 30.0}) {
          for (double rho : {6.25, 12.5, 24.0}) {
            if (rho > fps) continue;
            const AudioWindow a{0, 0, static_cast<int>(std::round((W - w) / fps * rho))};
            CHECK(std::abs(audio_stride_offset(a, v, r, fps, rho)) <= 1);
          }
        }
      }
    }
  }
}

TEST_CASE("audio chunk layout inherits the chunk count") {
  const auto a = AudioGeometry::make(audio_geometry(121, 64, 24, 25), 3, 25, 24);
  CHECK(a.N_a == 126 + 2 * 59);
  CHECK(check_geometry(a.chunks(3)).empty());
}
