#include "fz/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace fz::metrics {

double nme(const KeypointSet& pred, const KeypointSet& gt) {
  if (pred.coords.size() != gt.coords.size())
    raise(errc::shape_mismatch, "nme: keypoint counts differ");
  if (gt.coords.empty()) raise(errc::shape_mismatch, "nme: empty keypoints");

  double min_x = gt.coords[0].x, max_x = min_x;
  double min_y = gt.coords[0].y, max_y = min_y;
  for (const auto& c : gt.coords) {
    min_x = std::min(min_x, c.x);
    max_x = std::max(max_x, c.x);
    min_y = std::min(min_y, c.y);
    max_y = std::max(max_y, c.y);
  }
  const double diag = std::hypot(max_x - min_x, max_y - min_y);
  if (!(diag > 0.0) || !std::isfinite(diag))
    raise(errc::degenerate_box, "nme: ground-truth bounding box degenerate");

  double sum = 0.0;
  for (size_t i = 0; i < gt.coords.size(); ++i)
    sum += std::hypot(pred.coords[i].x - gt.coords[i].x,
                      pred.coords[i].y - gt.coords[i].y);
  return 100.0 * sum / (double(gt.coords.size()) * diag);
}

EntropyReport entropy_report(const codec::PriorModel& prior) {
  using codec::Field;
  EntropyReport report;
  for (int ctx = 0; ctx < codec::kContextCount; ++ctx) {
    if (!prior.context_active(ctx)) continue;
    const auto& table = prior.table(ctx);
    ContextEntropy e;
    e.name = codec::context_name(ctx);
    e.alphabet = table.size();
    e.entropy_bits = table.entropy_bits();
    e.symbols_per_frame =
        codec::symbols_per_frame(Field(ctx / 2), prior.config());
    report.contexts.push_back(e);

    const double frame_bits = e.entropy_bits * e.symbols_per_frame;
    if (ctx % 2 == 0)
      report.keyframe_bits_per_frame += frame_bits;
    else
      report.delta_bits_per_frame += frame_bits;
  }
  return report;
}

}  // namespace fz::metrics
