// Copyright 2026 The chunkflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace chunkflow {

/// Raised for any window-layout problem. `clause()` names the violated rule
/// (e.g. "O>=S") so callers can report it verbatim.
class GeometryError : public std::invalid_argument {
 public:
  GeometryError(std::string clause, const std::string& what)
      : std::invalid_argument(what), clause_(std::move(clause)) {}
  const std::string& clause() const noexcept { return clause_; }

 private:
  std::string clause_;
};

/// Pixel-space window: W frames, overlap starting at pixel index w, VAE
/// temporal stride r.
struct PixelWindowSpec {
  int W = 0;
  int w = 0;
  int r = 1;
};

/// Latent window triple shared by every chunk.
struct LatentWindow {
  int F = 0;
  int O = 0;
  int S = 0;

  friend bool operator==(const LatentWindow&, const LatentWindow&) = default;
};

struct ChunkGeometry {
  int F = 0;  // latent frames per chunk
  int O = 0;  // blending-zone length
  int S = 0;  // stride between chunk starts
  int K = 1;  // chunk count
  int N = 0;  // total latent frames

  /// Builds a geometry with N = F + (K-1)S. Performs no validation.
  static ChunkGeometry make(int F, int O, int S, int K) { return {F, O, S, K, F + (K - 1) * S}; }
  static ChunkGeometry make(const LatentWindow& win, int K) { return make(win.F, win.O, win.S, K); }

  /// First local index of the blending zone.
  int blend_begin() const { return F - O; }
  /// Global index of the first frame of chunk k (k is 1-based).
  int chunk_start(int k) const { return (k - 1) * S; }

  friend bool operator==(const ChunkGeometry&, const ChunkGeometry&) = default;
};

/// Audio chunk lengths derived from the video window so both streams share a
/// stride in seconds.
struct AudioWindow {
  int F_a = 0;
  int O_a = 0;
  int S_a = 0;

  friend bool operator==(const AudioWindow&, const AudioWindow&) = default;
};

struct AudioGeometry {
  int F_a = 0;
  int O_a = 0;
  int S_a = 0;
  int N_a = 0;
  double rho_a = 0.0;
  double fps_v = 0.0;

  static AudioGeometry make(const AudioWindow& win, int K, double rho_a, double fps_v) {
    return {win.F_a, win.O_a, win.S_a, win.F_a + (K - 1) * win.S_a, rho_a, fps_v};
  }

  /// The audio stream viewed as an ordinary chunk layout with K chunks.
  ChunkGeometry chunks(int K) const { return ChunkGeometry{F_a, O_a, S_a, K, N_a}; }
};

/// Half-open index range [begin, end).
struct IndexRange {
  int begin = 0;
  int end = 0;

  int size() const { return end > begin ? end - begin : 0; }
  bool empty() const { return end <= begin; }
  bool contains(int g) const { return g >= begin && g < end; }
  IndexRange intersect(const IndexRange& o) const {
    return {std::max(begin, o.begin), std::min(end, o.end)};
  }

  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

enum class SegmentKind { Prefix, Blend, Gap, Suffix };

const char* to_string(SegmentKind kind);

/// One piece of the resolved buffer. For Blend segments `index` is the pair
/// number k (chunks k and k+1 blended); otherwise it is the owning chunk.
struct Segment {
  SegmentKind kind = SegmentKind::Prefix;
  IndexRange range;
  int index = 1;

  friend bool operator==(const Segment&, const Segment&) = default;
};

/// A frame range claimed by two writers; `winner` is the pair that keeps it.
struct Conflict {
  IndexRange range;
  Segment loser;
  Segment winner;
};

struct BufferPartition {
  IndexRange prefix;
  std::vector<IndexRange> blend_zones;  // B_1 .. B_{K-1}, unresolved
  std::vector<Segment> gaps;            // only when S > O
  IndexRange suffix;
  std::vector<Conflict> conflicts;
  std::vector<Segment> resolved;        // disjoint, ascending, covers [0, N)

  /// Resolved segment containing global index g.
  const Segment& segment_at(int g) const;
  /// Chunk whose own estimate is used when no blending happens (the left
  /// member for blend segments).
  static int hard_owner(const Segment& seg);
};

/// Latent layout from a pixel window. Throws GeometryError with clause
/// "(W-1)%r==0" or "O>=S".
LatentWindow pixel_to_latent(const PixelWindowSpec& spec);

/// Every violated clause of the geometry, by name; empty means valid.
std::vector<std::string> check_geometry(const ChunkGeometry& g);

/// Throws GeometryError naming the first violated clause (message lists all).
void validate_geometry(const ChunkGeometry& g);

/// Splits [0, N) into prefix, blend zones, gaps and suffix, and resolves
/// overlaps statically: later pairs beat earlier ones, and any pair beats
/// the sole-owner suffix.
///
/// Requires N = F + (K-1)S, 1 <= O <= F, S >= 1, K >= 1. O < S is accepted
/// here so gap layouts can be inspected; the sampler rejects them.
BufferPartition partition(const ChunkGeometry& g);

/// g = (k-1)S + j. Throws std::out_of_range for k outside [1, K] or j
/// outside [0, F).
int local_to_global(const ChunkGeometry& g, int k, int j);

/// Audio lengths for a video window, rounding half away from zero.
/// Throws GeometryError("O_a>=S_a") when the overlap is too short.
AudioWindow audio_geometry(int W, int w, double fps_v, double rho_a);

/// Difference, in audio latents, between the audio stride and the video
/// latent stride converted to seconds.
int audio_stride_offset(const AudioWindow& audio, const LatentWindow& video, int r,
                        double fps_v, double rho_a);

}  // namespace chunkflow
