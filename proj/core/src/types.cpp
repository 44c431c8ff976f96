#include "fz/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fz {

void StreamConfig::validate() const {
  if (n_sup < 0 || n_unsup < 0)
    raise(errc::range_violation, "keypoint counts must be non-negative");
  if (n_sup + n_unsup < 1)
    raise(errc::range_violation, "need at least one keypoint");
  if (expression_size < 0)
    raise(errc::range_violation, "expression_size must be non-negative");
  if (grid_h < 2 || grid_w < 2)
    raise(errc::range_violation, "grid dimensions must be at least 2");
  if (keyframe_interval < 1)
    raise(errc::range_violation, "keyframe_interval must be at least 1");
  if (fps <= 0) raise(errc::range_violation, "fps must be positive");
}

namespace {

double clamp_counted(double v, double limit, size_t* counter) {
  if (v > limit) {
    ++*counter;
    return limit;
  }
  if (v < -limit) {
    ++*counter;
    return -limit;
  }
  return v;
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) raise(errc::non_finite, what);
}

}  // namespace

MotionPayload MotionPayload::from_absolute(int64_t frame_index,
                                           const KeypointSet& absolute,
                                           std::vector<double> expression,
                                           const StreamConfig& cfg,
                                           ClampStats* stats) {
  ClampStats local;
  ClampStats* s = stats ? stats : &local;

  const size_t want = size_t(cfg.total_keypoints());
  if (absolute.coords.size() != want)
    raise(errc::shape_mismatch,
          "expected " + std::to_string(want) + " keypoints, got " +
              std::to_string(absolute.coords.size()));
  if (cfg.with_jacobians) {
    if (!absolute.jacobians ||
        absolute.jacobians->size() != size_t(cfg.n_unsup))
      raise(errc::shape_mismatch, "expected " + std::to_string(cfg.n_unsup) +
                                      " Jacobians");
  } else if (absolute.jacobians) {
    raise(errc::shape_mismatch, "Jacobians present but config carries none");
  }
  if (expression.size() != size_t(cfg.expression_size))
    raise(errc::shape_mismatch,
          "expected expression code of length " +
              std::to_string(cfg.expression_size));

  MotionPayload p;
  p.frame_index = frame_index;

  KeypointSet clamped = absolute;
  for (auto& c : clamped.coords) {
    check_finite(c.x, "keypoint x");
    check_finite(c.y, "keypoint y");
    c.x = clamp_counted(c.x, kCoordLimit, &s->coords);
    c.y = clamp_counted(c.y, kCoordLimit, &s->coords);
  }
  if (clamped.jacobians) {
    for (auto& j : *clamped.jacobians) {
      for (double* e : {&j.a, &j.b, &j.c, &j.d}) {
        check_finite(*e, "Jacobian entry");
        *e = clamp_counted(*e, kJacobianLimit, &s->jacobians);
      }
    }
  }
  for (auto& e : expression) {
    check_finite(e, "expression value");
    e = clamp_counted(e, kExpressionLimit, &s->expression);
  }

  Vec2 mean;
  for (const auto& c : clamped.coords) {
    mean.x += c.x;
    mean.y += c.y;
  }
  mean.x /= double(clamped.coords.size());
  mean.y /= double(clamped.coords.size());

  p.mean_pos = mean;
  p.offsets = std::move(clamped);
  for (auto& c : p.offsets.coords) {
    c.x -= mean.x;
    c.y -= mean.y;
  }
  p.expression = std::move(expression);
  return p;
}

KeypointSet MotionPayload::absolute_keypoints() const {
  KeypointSet abs = offsets;
  for (auto& c : abs.coords) {
    c.x += mean_pos.x;
    c.y += mean_pos.y;
  }
  return abs;
}

void validate_payload(const MotionPayload& payload, const StreamConfig& cfg) {
  cfg.validate();
  const size_t want = size_t(cfg.total_keypoints());
  if (payload.offsets.coords.size() != want)
    raise(errc::shape_mismatch,
          "payload has " + std::to_string(payload.offsets.coords.size()) +
              " keypoints, config wants " + std::to_string(want));
  if (cfg.with_jacobians) {
    if (!payload.offsets.jacobians ||
        payload.offsets.jacobians->size() != size_t(cfg.n_unsup))
      raise(errc::shape_mismatch, "payload Jacobians missing or wrong count");
  } else if (payload.offsets.jacobians) {
    raise(errc::shape_mismatch, "payload carries unexpected Jacobians");
  }
  if (payload.expression.size() != size_t(cfg.expression_size))
    raise(errc::shape_mismatch, "payload expression length mismatch");

  check_finite(payload.mean_pos.x, "mean_pos.x");
  check_finite(payload.mean_pos.y, "mean_pos.y");

  KeypointSet abs = payload.absolute_keypoints();
  for (const auto& c : abs.coords) {
    check_finite(c.x, "keypoint x");
    check_finite(c.y, "keypoint y");
    if (std::abs(c.x) > kCoordLimit + 1e-12 ||
        std::abs(c.y) > kCoordLimit + 1e-12)
      raise(errc::range_violation, "absolute keypoint outside [-1, 1]");
  }
  if (payload.offsets.jacobians) {
    for (const auto& j : *payload.offsets.jacobians)
      for (double e : {j.a, j.b, j.c, j.d}) {
        check_finite(e, "Jacobian entry");
        if (std::abs(e) > kJacobianLimit)
          raise(errc::range_violation, "Jacobian entry outside [-15, 15]");
      }
  }
  for (double e : payload.expression) {
    check_finite(e, "expression value");
    if (std::abs(e) > kExpressionLimit)
      raise(errc::range_violation, "expression value outside [-1, 1]");
  }
}

std::vector<double> expression_from_unit_range(std::vector<double> values) {
  for (auto& v : values) v = 2.0 * v - 1.0;
  return values;
}

void PoseTrack::validate() const {
  config.validate();
  int64_t prev = INT64_MIN;
  for (const auto& f : frames) {
    if (f.frame_index <= prev)
      raise(errc::range_violation, "frame_index not strictly increasing");
    prev = f.frame_index;
    if (!std::isfinite(f.yaw)) raise(errc::non_finite, "yaw");
    validate_payload(f.payload, config);
  }
}

}  // namespace fz
