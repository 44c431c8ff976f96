#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "fz/error.hpp"

namespace fz {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Row-major 2x2 matrix [[a, b], [c, d]].
struct Mat2 {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
};

// Value bounds used when payloads are built. Coordinates live in the
// normalized image square [-1, 1]^2 (corners at pixel centers); Jacobian
// entries carry the same bounds as their quantizer range.
inline constexpr double kCoordLimit = 1.0;
inline constexpr double kJacobianLimit = 15.0;
inline constexpr double kExpressionLimit = 1.0;

/// Negotiated session parameters. Shape fields (n_sup, n_unsup,
/// with_jacobians, expression_size) define the payload layout; the rest
/// configure kernels and transport cadence.
struct StreamConfig {
  int n_sup = 33;
  int n_unsup = 10;
  bool with_jacobians = false;
  int expression_size = 16;  // M
  int grid_h = 32;
  int grid_w = 32;
  int keyframe_interval = 100;
  int fps = 15;

  int total_keypoints() const { return n_sup + n_unsup; }
  void validate() const;
  bool shape_equals(const StreamConfig& o) const {
    return n_sup == o.n_sup && n_unsup == o.n_unsup &&
           with_jacobians == o.with_jacobians &&
           expression_size == o.expression_size;
  }
  bool operator==(const StreamConfig&) const = default;
};

/// Keypoint coordinates in normalized image coordinates, first n_sup
/// supervised landmarks then n_unsup unsupervised keypoints. Jacobians,
/// when present, attach to the unsupervised keypoints only.
struct KeypointSet {
  std::vector<Vec2> coords;
  std::optional<std::vector<Mat2>> jacobians;
};

struct ClampStats {
  size_t coords = 0;
  size_t jacobians = 0;
  size_t expression = 0;
  size_t total() const { return coords + jacobians + expression; }
};

/// One frame's transmissible state: keypoints stored as offsets from
/// their arithmetic mean, plus the expression code.
struct MotionPayload {
  int64_t frame_index = 0;
  Vec2 mean_pos;
  KeypointSet offsets;
  std::vector<double> expression;

  // Decomposes absolute keypoints into mean + offsets, clamping coords,
  // Jacobian entries and expression values to their declared ranges.
  // Clamps are counted in `stats` when provided.
  static MotionPayload from_absolute(int64_t frame_index,
                                     const KeypointSet& absolute,
                                     std::vector<double> expression,
                                     const StreamConfig& cfg,
                                     ClampStats* stats = nullptr);

  KeypointSet absolute_keypoints() const;
};

void validate_payload(const MotionPayload& payload, const StreamConfig& cfg);

// Providers emitting expression codes in [0, 1] are remapped to the
// codec's [-1, 1] range at ingestion.
std::vector<double> expression_from_unit_range(std::vector<double> values);

/// Dense real grid, channels x height x width, row-major.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w)
      : channels(c), height(h), width(w), data(size_t(c) * h * w, 0.0) {}

  double& at(int c, int y, int x) {
    return data[(size_t(c) * height + y) * width + x];
  }
  double at(int c, int y, int x) const {
    return data[(size_t(c) * height + y) * width + x];
  }
  bool same_shape(const FeatureMap& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
};

/// Grid of normalized sampling locations (x, y per cell), height x width x 2.
/// Values are positions to sample from, not displacements.
struct FlowField {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  FlowField() = default;
  FlowField(int h, int w) : height(h), width(w), data(size_t(h) * w * 2, 0.0) {}

  double& x(int y, int x_) { return data[(size_t(y) * width + x_) * 2]; }
  double& y(int y_, int x_) { return data[(size_t(y_) * width + x_) * 2 + 1]; }
  double x(int y, int x_) const { return data[(size_t(y) * width + x_) * 2]; }
  double y(int y_, int x_) const {
    return data[(size_t(y_) * width + x_) * 2 + 1];
  }
};

/// Single-channel grid; used both for occlusion masks (entries in [0, 1])
/// and confidence maps (unconstrained logits).
struct ScalarMap {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  ScalarMap() = default;
  ScalarMap(int h, int w, double fill = 0.0)
      : height(h), width(w), data(size_t(h) * w, fill) {}

  double& at(int y, int x) { return data[size_t(y) * width + x]; }
  double at(int y, int x) const { return data[size_t(y) * width + x]; }
};

/// Canonical keypoint layout all source features are warped into.
struct ReferencePose {
  KeypointSet keypoints;
};

struct TrackFrame {
  int64_t frame_index = 0;
  double yaw = 0.0;  // radians, rotation about the vertical axis
  bool eyes_open = true;
  MotionPayload payload;
};

/// Per-frame pose records for one video.
struct PoseTrack {
  StreamConfig config;
  std::vector<TrackFrame> frames;

  void validate() const;
};

}  // namespace fz
