#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fz/quantize.hpp"
#include "fz/range_coder.hpp"
#include "fz/types.hpp"

namespace fz::codec {

/// Per-field integer symbol sequences for one frame: absolute codes on
/// keyframes, signed code deltas otherwise.
struct QuantizedPayload {
  int64_t frame_index = 0;
  bool is_keyframe = false;
  std::array<std::vector<int32_t>, kFieldCount> codes;
};

// Each active field owns two coding contexts: one for keyframe
// (absolute) symbols, one for delta symbols.
inline int context_index(Field field, bool keyframe) {
  return int(field) * 2 + (keyframe ? 0 : 1);
}
inline constexpr int kContextCount = 2 * kFieldCount;
std::string context_name(int ctx);

// Symbol alphabets. Keyframe symbols are the codes themselves; delta
// symbols are shifted into [0, 2 * levels - 2].
inline uint32_t keyframe_alphabet(const FieldSpec& spec) {
  return uint32_t(spec.levels());
}
inline uint32_t delta_alphabet(const FieldSpec& spec) {
  return 2u * uint32_t(spec.levels()) - 1;
}
inline uint32_t delta_to_symbol(int32_t delta, const FieldSpec& spec) {
  return uint32_t(delta + spec.levels() - 1);
}
inline int32_t symbol_to_delta(uint32_t symbol, const FieldSpec& spec) {
  return int32_t(symbol) - (spec.levels() - 1);
}

/// Static per-context symbol distributions for the arithmetic coder,
/// with the stream configuration and field specs they were trained
/// under. Immutable once built; shareable across sessions.
class PriorModel {
 public:
  PriorModel() = default;

  // Histograms of keyframe and delta symbols over `streams`, add-1
  // smoothed across each full alphabet. Entropy-coded fields are limited
  // to 16-bit widths by the coder's 32-bit precision budget.
  static PriorModel build(
      const std::vector<std::vector<QuantizedPayload>>& streams,
      const StreamConfig& cfg, const FieldSpecTable& specs);

  // Assembles a model from explicit per-context raw counts (testing and
  // synthetic distributions). Zero-length count vectors mark inactive
  // contexts.
  static PriorModel from_counts(
      const StreamConfig& cfg, const FieldSpecTable& specs,
      std::array<std::vector<uint64_t>, kContextCount> counts);

  const StreamConfig& config() const { return cfg_; }
  const FieldSpecTable& specs() const { return specs_; }
  const FieldSpec& spec(Field f) const { return specs_[int(f)]; }

  bool context_active(int ctx) const { return tables_[ctx].size() > 0; }
  const FrequencyTable& table(int ctx) const;

  uint64_t hash() const { return hash_; }

  std::vector<uint8_t> serialize() const;
  static PriorModel deserialize(std::span<const uint8_t> bytes);
  void save(const std::string& path) const;
  static PriorModel load(const std::string& path);

 private:
  void finalize();

  StreamConfig cfg_;
  FieldSpecTable specs_ = default_field_specs();
  std::array<FrequencyTable, kContextCount> tables_;
  uint64_t hash_ = 0;
};

}  // namespace fz::codec
