// Copyright 2026 The chunkflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "chunkflow/geometry.hpp"

#include <cmath>
#include <sstream>

namespace chunkflow {

const char* to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::Prefix: return "prefix";
    case SegmentKind::Blend: return "blend";
    case SegmentKind::Gap: return "gap";
    case SegmentKind::Suffix: return "suffix";
  }
  return "?";
}

const Segment& BufferPartition::segment_at(int g) const {
  auto it = std::upper_bound(resolved.begin(), resolved.end(), g,
                             [](int v, const Segment& s) { return v < s.range.end; });
  if (it == resolved.end() || !it->range.contains(g)) {
    throw std::out_of_range("global index " + std::to_string(g) + " outside buffer");
  }
  return *it;
}

int BufferPartition::hard_owner(const Segment& seg) {
  return seg.index;
}

LatentWindow pixel_to_latent(const PixelWindowSpec& spec) {
  if (spec.W < 1) throw GeometryError("W>=1", "pixel window must hold at least one frame");
  if (spec.r < 1) throw GeometryError("r>=1", "temporal stride must be positive");
  if (spec.w < 0 || spec.w >= spec.W) throw GeometryError("0<=w<W", "overlap start outside window");
  if ((spec.W - 1) % spec.r != 0) {
    throw GeometryError("(W-1)%r==0", "W-1 = " + std::to_string(spec.W - 1) +
                                          " is not divisible by r = " + std::to_string(spec.r));
  }
  LatentWindow win;
  win.F = (spec.W - 1) / spec.r + 1;
  win.S = (spec.W - spec.w) / spec.r;
  win.O = win.F - spec.w / spec.r;
  if (win.O < win.S) {
    throw GeometryError("O>=S", "blending zone O = " + std::to_string(win.O) +
                                    " is shorter than stride S = " + std::to_string(win.S));
  }
  return win;
}

std::vector<std::string> check_geometry(const ChunkGeometry& g) {
  std::vector<std::string> bad;
  if (g.O < g.S) bad.emplace_back("O>=S");
  if (g.O < 2) bad.emplace_back("O>=2");
  if (g.O > g.F) bad.emplace_back("O<=F");
  if (g.S < 1) bad.emplace_back("S>=1");
  if (g.K < 1) bad.emplace_back("K>=1");
  if (g.N != g.F + (g.K - 1) * g.S) bad.emplace_back("N=F+(K-1)S");
  return bad;
}

void validate_geometry(const ChunkGeometry& g) {
  auto bad = check_geometry(g);
  if (bad.empty()) return;
  std::ostringstream msg;
  msg << "invalid geometry (F=" << g.F << ", O=" << g.O << ", S=" << g.S << ", K=" << g.K
      << ", N=" << g.N << "): violates";
  for (const auto& c : bad) msg << ' ' << c;
  throw GeometryError(bad.front(), msg.str());
}

namespace {

void require_layout(const ChunkGeometry& g) {
  if (g.K < 1) throw GeometryError("K>=1", "need at least one chunk");
  if (g.S < 1) throw GeometryError("S>=1", "stride must be positive");
  if (g.O < 1 || g.O > g.F) throw GeometryError("O<=F", "blending zone must fit the chunk");
  if (g.N != g.F + (g.K - 1) * g.S) throw GeometryError("N=F+(K-1)S", "inconsistent total length");
}

}  // namespace

BufferPartition partition(const ChunkGeometry& g) {
  require_layout(g);
  BufferPartition p;
  const int lead = g.F - g.O;
  p.prefix = {0, lead};
  p.suffix = {(g.K - 1) * g.S + lead, g.N};
  for (int k = 1; k < g.K; ++k) {
    p.blend_zones.push_back({(k - 1) * g.S + lead, (k - 1) * g.S + g.F});
  }
  // G_k sits between B_k and the next blend zone (or the suffix for k = K-1).
  for (int k = 1; k < g.K; ++k) {
    IndexRange gap{(k - 1) * g.S + g.F, k * g.S + lead};
    if (!gap.empty()) p.gaps.push_back({SegmentKind::Gap, gap, k + 1});
  }

  // Static last-writer-wins: prefix, suffix, then pairs ascending with their
  // gaps. A pair overwriting the suffix keeps its full lambda ramp.
  std::vector<Segment> owner(static_cast<std::size_t>(g.N));
  std::vector<bool> claimed(static_cast<std::size_t>(g.N), false);
  auto claim = [&](const Segment& seg) {
    IndexRange run{-1, -1};
    Segment previous;
    auto flush = [&]() {
      if (!run.empty()) p.conflicts.push_back({run, previous, seg});
      run = {-1, -1};
    };
    for (int i = seg.range.begin; i < seg.range.end; ++i) {
      auto idx = static_cast<std::size_t>(i);
      if (claimed[idx]) {
        if (run.end == i && owner[idx] == previous) {
          run.end = i + 1;
        } else {
          flush();
          previous = owner[idx];
          run = {i, i + 1};
        }
      } else {
        flush();
      }
      owner[idx] = seg;
      claimed[idx] = true;
    }
    flush();
  };

  claim({SegmentKind::Prefix, p.prefix, 1});
  claim({SegmentKind::Suffix, p.suffix, g.K});
  for (int k = 1; k < g.K; ++k) {
    claim({SegmentKind::Blend, p.blend_zones[static_cast<std::size_t>(k - 1)], k});
    for (const auto& gap : p.gaps) {
      if (gap.index == k + 1) claim(gap);
    }
  }

  for (int i = 0; i < g.N; ++i) {
    const auto& seg = owner[static_cast<std::size_t>(i)];
    if (!p.resolved.empty() && p.resolved.back().kind == seg.kind &&
        p.resolved.back().index == seg.index && p.resolved.back().range.end == i) {
      p.resolved.back().range.end = i + 1;
    } else {
      p.resolved.push_back({seg.kind, {i, i + 1}, seg.index});
    }
  }
  return p;
}

int local_to_global(const ChunkGeometry& g, int k, int j) {
  if (k < 1 || k > g.K) throw std::out_of_range("chunk index " + std::to_string(k) + " outside [1, K]");
  if (j < 0 || j >= g.F) throw std::out_of_range("local frame " + std::to_string(j) + " outside [0, F)");
  return (k - 1) * g.S + j;
}

AudioWindow audio_geometry(int W, int w, double fps_v, double rho_a) {
  if (!(fps_v > 0.0)) throw GeometryError("fps_v>0", "video frame rate must be positive");
  if (!(rho_a > 0.0)) throw GeometryError("rho_a>0", "audio latent rate must be positive");
  // std::round rounds halfway cases away from zero.
  AudioWindow a;
  a.F_a = static_cast<int>(std::round(W / fps_v * rho_a));
  a.S_a = static_cast<int>(std::round((W - w) / fps_v * rho_a));
  a.O_a = a.F_a - a.S_a;
  if (a.O_a < a.S_a) {
    throw GeometryError("O_a>=S_a", "audio blending zone O_a = " + std::to_string(a.O_a) +
                                        " is shorter than audio stride S_a = " + std::to_string(a.S_a));
  }
  return a;
}

int audio_stride_offset(const AudioWindow& audio, const LatentWindow& video, int r, double fps_v,
                        double rho_a) {
  return audio.S_a - static_cast<int>(std::round(video.S * r / fps_v * rho_a));
}

}  // namespace chunkflow
