#include "fz/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fz::frontal {

namespace {

void check_spatial(const FeatureMap& fm, int h, int w, const char* what) {
  if (fm.height != h || fm.width != w)
    raise(errc::shape_mismatch, std::string(what) + ": spatial dims differ");
}

// Sampling locations this far out are treated as fully outside; keeps
// the tap arithmetic finite for arbitrary (even non-finite) flow values.
constexpr double kFarOutside = 1e12;

}  // namespace

FeatureMap keypoint_heatmaps(const KeypointSet& src, const KeypointSet& dst,
                             int grid_h, int grid_w, double sigma) {
  if (src.coords.size() != dst.coords.size())
    raise(errc::shape_mismatch, "keypoint_heatmaps: src/dst length differ");
  if (grid_h < 2 || grid_w < 2)
    raise(errc::shape_mismatch, "keypoint_heatmaps: grid too small");
  if (!(sigma > 0.0))
    raise(errc::range_violation, "keypoint_heatmaps: sigma must be positive");

  const int n = int(src.coords.size());
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
  FeatureMap out(n, grid_h, grid_w);
  for (int k = 0; k < n; ++k) {
    const Vec2 s = src.coords[k];
    const Vec2 d = dst.coords[k];
    for (int y = 0; y < grid_h; ++y) {
      const double gy = grid_coord(y, grid_h);
      for (int x = 0; x < grid_w; ++x) {
        const double gx = grid_coord(x, grid_w);
        const double dd = (gx - d.x) * (gx - d.x) + (gy - d.y) * (gy - d.y);
        const double ds = (gx - s.x) * (gx - s.x) + (gy - s.y) * (gy - s.y);
        out.at(k, y, x) =
            std::exp(-dd * inv_two_sigma2) - std::exp(-ds * inv_two_sigma2);
      }
    }
  }
  return out;
}

FeatureMap grid_sample(const FeatureMap& fm, const FlowField& flow) {
  if (flow.height != fm.height || flow.width != fm.width)
    raise(errc::shape_mismatch, "grid_sample: flow dims differ from map");

  const int h = fm.height, w = fm.width, ch = fm.channels;
  FeatureMap out(ch, h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double sx = flow.x(y, x);
      const double sy = flow.y(y, x);
      const double fx = (sx + 1.0) * 0.5 * double(w - 1);
      const double fy = (sy + 1.0) * 0.5 * double(h - 1);
      if (!(fx > -kFarOutside && fx < kFarOutside && fy > -kFarOutside &&
            fy < kFarOutside))
        continue;  // fully outside, leave zeros

      // anything beyond one cell outside stays outside; clamping keeps
      // the int casts defined for arbitrarily large finite locations
      const double fx0 = std::clamp(std::floor(fx), -2.0, double(w) + 1.0);
      const double fy0 = std::clamp(std::floor(fy), -2.0, double(h) + 1.0);
      const int x0 = int(fx0);
      const int y0 = int(fy0);
      const double wx = fx - fx0;
      const double wy = fy - fy0;

      for (int c = 0; c < ch; ++c) {
        auto tap = [&](int yy, int xx) -> double {
          return (yy >= 0 && yy < h && xx >= 0 && xx < w) ? fm.at(c, yy, xx)
                                                          : 0.0;
        };
        const double v00 = tap(y0, x0);
        const double v10 = tap(y0, x0 + 1);
        const double v01 = tap(y0 + 1, x0);
        const double v11 = tap(y0 + 1, x0 + 1);
        out.at(c, y, x) = v00 * (1.0 - wx) * (1.0 - wy) +
                          v10 * wx * (1.0 - wy) + v01 * (1.0 - wx) * wy +
                          v11 * wx * wy;
      }
    }
  }
  return out;
}

FeatureMap apply_occlusion(const FeatureMap& fm, const ScalarMap& mask) {
  if (mask.height != fm.height || mask.width != fm.width)
    raise(errc::shape_mismatch, "apply_occlusion: mask dims differ from map");
  for (double m : mask.data)
    if (!(m >= 0.0 && m <= 1.0))
      raise(errc::range_violation, "apply_occlusion: mask entry outside [0,1]");

  FeatureMap out = fm;
  for (int c = 0; c < fm.channels; ++c)
    for (int y = 0; y < fm.height; ++y)
      for (int x = 0; x < fm.width; ++x) out.at(c, y, x) *= mask.at(y, x);
  return out;
}

std::pair<FeatureMap, std::vector<ScalarMap>> fuse(
    const std::vector<FeatureMap>& warped,
    const std::vector<ScalarMap>& confidences) {
  if (warped.empty()) raise(errc::empty_input, "fuse: no source maps");
  if (warped.size() != confidences.size())
    raise(errc::shape_mismatch, "fuse: map/confidence count differ");
  const size_t n = warped.size();
  const int h = warped[0].height, w = warped[0].width;
  for (const auto& m : warped)
    if (!m.same_shape(warped[0]))
      raise(errc::shape_mismatch, "fuse: inconsistent map shapes");
  for (const auto& c : confidences)
    if (c.height != h || c.width != w)
      raise(errc::shape_mismatch, "fuse: confidence dims differ");

  FeatureMap fused(warped[0].channels, h, w);
  std::vector<ScalarMap> weights(n, ScalarMap(h, w));
  std::vector<double> exps(n);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double max_c = confidences[0].at(y, x);
      for (size_t i = 1; i < n; ++i)
        max_c = std::max(max_c, confidences[i].at(y, x));
      double sum = 0.0;
      for (size_t i = 0; i < n; ++i) {
        exps[i] = std::exp(confidences[i].at(y, x) - max_c);
        sum += exps[i];
      }
      for (size_t i = 0; i < n; ++i) {
        const double wgt = exps[i] / sum;
        weights[i].at(y, x) = wgt;
        for (int c = 0; c < fused.channels; ++c)
          fused.at(c, y, x) += wgt * warped[i].at(c, y, x);
      }
    }
  }
  return {std::move(fused), std::move(weights)};
}

FeatureMap conditioning_maps(const std::vector<double>& expression, int grid_h,
                             int grid_w) {
  FeatureMap out(int(expression.size()), grid_h, grid_w);
  for (size_t k = 0; k < expression.size(); ++k)
    for (int y = 0; y < grid_h; ++y)
      for (int x = 0; x < grid_w; ++x) out.at(int(k), y, x) = expression[k];
  return out;
}

double expression_loss(const std::vector<double>& fE_pred,
                       const std::vector<double>& fE_true,
                       const std::vector<double>& fL_pred,
                       const std::vector<double>& fL_true, double gamma) {
  if (fE_pred.size() != fE_true.size() || fL_pred.size() != fL_true.size())
    raise(errc::shape_mismatch, "expression_loss: paired lengths differ");
  if (!(gamma >= 0.0))
    raise(errc::range_violation, "expression_loss: gamma must be >= 0");

  double l1 = 0.0;
  for (size_t i = 0; i < fE_pred.size(); ++i)
    l1 += std::abs(fE_pred[i] - fE_true[i]);
  for (size_t i = 0; i < fL_pred.size(); ++i)
    l1 += std::abs(fL_pred[i] - fL_true[i]);
  return gamma * l1;
}

FeatureMap frontalize(const std::vector<SourceFrame>& sources,
                      const ReferencePose& reference,
                      const EncoderProvider& enc, const FlowProvider& fr) {
  if (sources.empty()) raise(errc::empty_input, "frontalize: no sources");

  std::vector<FeatureMap> warped;
  std::vector<ScalarMap> confidences;
  warped.reserve(sources.size());
  confidences.reserve(sources.size());
  for (const auto& src : sources) {
    FeatureMap embedding = enc(src.frame_id);
    auto [flow, confidence] = fr(src.keypoints, reference.keypoints);
    check_spatial(embedding, flow.height, flow.width, "frontalize");
    warped.push_back(grid_sample(embedding, flow));
    confidences.push_back(std::move(confidence));
  }
  return fuse(warped, confidences).first;
}

FeatureMap animate(const FeatureMap& fused, const ReferencePose& reference,
                   const KeypointSet& driving, const FlowProvider& dm,
                   const DecoderProvider& dec,
                   const std::vector<double>& expression) {
  auto [flow, occlusion] = dm(reference.keypoints, driving);
  FeatureMap warped = grid_sample(fused, flow);
  FeatureMap occluded = apply_occlusion(warped, occlusion);
  FeatureMap cond = conditioning_maps(expression, fused.height, fused.width);
  return dec(occluded, cond);
}

}  // namespace fz::frontal
