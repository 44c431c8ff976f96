#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "fz/types.hpp"

namespace fz::frontal {

// Network stand-ins. All pipeline kernels are pure; providers are
// expected to be deterministic for fixed inputs and are called from a
// single task at a time.
using EncoderProvider = std::function<FeatureMap(int64_t frame_id)>;
using FlowProvider = std::function<std::pair<FlowField, ScalarMap>(
    const KeypointSet& src, const KeypointSet& dst)>;
using DecoderProvider = std::function<FeatureMap(
    const FeatureMap& embedding, const FeatureMap& conditioning)>;

// Normalized coordinate of grid cell i along an axis of n cells; the
// image square maps to [-1, 1] with corners at pixel centers.
inline double grid_coord(int i, int n) {
  return 2.0 * double(i) / double(n - 1) - 1.0;
}

/// Per-keypoint displacement heatmaps: channel k is the difference of
/// two isotropic Gaussians, destination minus source, evaluated at grid
/// centers in normalized coordinates.
FeatureMap keypoint_heatmaps(const KeypointSet& src, const KeypointSet& dst,
                             int grid_h, int grid_w, double sigma = 0.1);

/// Bilinear resampling of `fm` at the flow's normalized sampling
/// locations. Taps outside the grid read as zero.
FeatureMap grid_sample(const FeatureMap& fm, const FlowField& flow);

/// out[c,u,v] = fm[c,u,v] * mask[u,v]; mask entries must lie in [0, 1].
FeatureMap apply_occlusion(const FeatureMap& fm, const ScalarMap& mask);

/// Per-pixel softmax (max-subtracted) over the N confidence maps, then
/// the weighted sum of the warped maps. Returns the fused map and the
/// weight maps, which sum to one at every position.
std::pair<FeatureMap, std::vector<ScalarMap>> fuse(
    const std::vector<FeatureMap>& warped,
    const std::vector<ScalarMap>& confidences);

/// One constant map per expression value (spatial repetition).
FeatureMap conditioning_maps(const std::vector<double>& expression, int grid_h,
                             int grid_w);

/// gamma * (l1(fE_pred - fE_true) + l1(fL_pred - fL_true)). The feature
/// extractors are caller-supplied vectors.
double expression_loss(const std::vector<double>& fE_pred,
                       const std::vector<double>& fE_true,
                       const std::vector<double>& fL_pred,
                       const std::vector<double>& fL_true, double gamma);

struct SourceFrame {
  int64_t frame_id = 0;
  KeypointSet keypoints;
};

/// Multi-view embedding: encode each source, flow it into the reference
/// position, warp, and fuse by confidence softmax.
FeatureMap frontalize(const std::vector<SourceFrame>& sources,
                      const ReferencePose& reference,
                      const EncoderProvider& enc, const FlowProvider& fr);

/// Driving-side pipeline: flow the fused embedding from the reference to
/// the driving position, apply the occlusion map, and decode under the
/// expression conditioning maps.
FeatureMap animate(const FeatureMap& fused, const ReferencePose& reference,
                   const KeypointSet& driving, const FlowProvider& dm,
                   const DecoderProvider& dec,
                   const std::vector<double>& expression);

}  // namespace fz::frontal
