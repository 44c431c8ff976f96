#pragma once

#include <string>
#include <vector>

#include "fz/prior.hpp"
#include "fz/types.hpp"

namespace fz::metrics {

/// Normalized mean error: mean euclidean keypoint error divided by the
/// ground-truth bounding-box diagonal, times 100.
double nme(const KeypointSet& pred, const KeypointSet& gt);

struct ContextEntropy {
  std::string name;
  uint32_t alphabet = 0;
  double entropy_bits = 0.0;     // bits/symbol
  int symbols_per_frame = 0;
};

/// Shannon entropies of a trained prior and the implied bits/frame lower
/// bounds for keyframes and delta frames.
struct EntropyReport {
  std::vector<ContextEntropy> contexts;
  double keyframe_bits_per_frame = 0.0;
  double delta_bits_per_frame = 0.0;
};

EntropyReport entropy_report(const codec::PriorModel& prior);

}  // namespace fz::metrics
