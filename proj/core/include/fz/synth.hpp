#pragma once

#include <cstdint>
#include <utility>

#include "fz/kernels.hpp"
#include "fz/types.hpp"

namespace fz::synth {

/// Canonical front-facing keypoint layout for a config: points spread on
/// a face-shaped ellipse, deterministic, never collinear.
KeypointSet front_face_layout(const StreamConfig& cfg);

struct GenParams {
  StreamConfig config;
  int frames = 500;
  double yaw_amplitude = 0.41;  // sinusoid peak; yaw std ~ peak / sqrt(2)
  double noise = 0.0005;        // white-noise std on coordinates
  uint64_t seed = 1;
};

/// Synthetic head-motion track: sinusoidal yaw sweep, keypoints moved by
/// a rigid 2-D approximation (horizontal compression by cos(yaw) plus a
/// lateral shift), smooth expression signals, occasional blinks.
PoseTrack gen_track(const GenParams& params);

struct AffineFit {
  Mat2 linear;
  Vec2 offset;
  double residual = 0.0;  // RMS keypoint error of the fit
};

// Least-squares affine map from `from` onto `to` coordinates. Throws
// degenerate_geometry when `from` is collinear.
AffineFit fit_affine(const KeypointSet& from, const KeypointSet& to);

// Backward-warp flow from a least-squares affine fit of dst -> src, with
// a constant confidence map equal to minus the fit residual.
std::pair<FlowField, ScalarMap> affine_flow(const KeypointSet& src,
                                            const KeypointSet& dst, int grid_h,
                                            int grid_w);

// Same flow with an occlusion-style mask exp(-residual) in (0, 1];
// suitable where the scalar output multiplies features.
std::pair<FlowField, ScalarMap> affine_motion(const KeypointSet& src,
                                              const KeypointSet& dst,
                                              int grid_h, int grid_w);

// Flow whose every cell samples its own center, with a unit scalar map.
// Stored coordinates are nudged by ULPs so the sampler's unnormalization
// lands on exact pixel centers wherever a preimage exists.
std::pair<FlowField, ScalarMap> identity_flow(int grid_h, int grid_w);

// Provider factories closing over the kernel grid size.
frontal::FlowProvider make_affine_flow_provider(int grid_h, int grid_w);
frontal::FlowProvider make_affine_motion_provider(int grid_h, int grid_w);
frontal::FlowProvider make_identity_flow_provider(int grid_h, int grid_w);
frontal::DecoderProvider make_identity_decoder();

/// Deterministic analytic encoder stand-in: channel c is a Gaussian
/// splat centered on keypoint (c mod n_kp).
FeatureMap stub_encoder(const KeypointSet& keypoints, const StreamConfig& cfg,
                        int channels = 32, double sigma = 0.1);

/// Independent reference for grid_sample: textbook four-neighbor
/// bilinear interpolation with plain per-pixel loops, zero outside.
FeatureMap brute_force_bilinear(const FeatureMap& fm, const FlowField& flow);

}  // namespace fz::synth
