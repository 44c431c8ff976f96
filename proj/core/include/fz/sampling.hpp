#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "fz/types.hpp"

namespace fz::sampling {

inline constexpr double kDefaultMinSpan = 0.3;  // radians
inline constexpr double kDefaultNearTol = 0.1;
inline constexpr double kDefaultRotationThreshold = 1.5;

/// Indices for a three-frame training sample: sources a (largest yaw)
/// and c (smallest yaw), driving b strictly between.
struct Triplet {
  size_t a = 0, b = 0, c = 0;
};

/// Four-frame variant: b1 drives the large-rotation regime, b2 the
/// small-rotation regime (yaw within near_tol of a).
struct Quad {
  size_t a = 0, b1 = 0, b2 = 0, c = 0;
};

// Uniform draw over all index triples satisfying
//   yaw[a] > yaw[b] > yaw[c] and yaw[a] - yaw[c] > min_span
// (strict inequalities). Throws no_valid_sample when none qualify.
Triplet sample_triplet(const PoseTrack& track, double min_span,
                       std::mt19937_64& rng);

// Uniform draw over distinct index 4-tuples satisfying
//   yaw[a] > yaw[b1] > yaw[c], yaw[a] - yaw[c] > min_span,
//   |yaw[a] - yaw[b2]| < near_tol.
Quad sample_quad(const PoseTrack& track, double min_span, double near_tol,
                 std::mt19937_64& rng);

// Deterministic fallback used by --relax: widest-span pair as sources,
// driving frame with yaw closest to their midpoint.
Triplet max_span_triplet(const PoseTrack& track);

// Inference-time source selection: the most frontal open-eyed frame
// first (global argmin |yaw| when every frame has eyes closed), then the
// yaw extrema, duplicates removed preserving order. Ties pick the
// earliest frame.
std::vector<size_t> select_sources(const PoseTrack& track, int n_extra = 2);

// Indices of tracks whose yaw range strictly exceeds the threshold.
std::vector<size_t> filter_rotation_tracks(std::span<const PoseTrack> tracks,
                                           double threshold);

}  // namespace fz::sampling
