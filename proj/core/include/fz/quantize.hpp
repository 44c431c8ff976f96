#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "fz/types.hpp"

namespace fz::codec {

enum class Field : uint8_t {
  mean_pos = 0,
  sup_kp = 1,
  unsup_kp = 2,
  jacobian = 3,
  expression = 4,
};

inline constexpr int kFieldCount = 5;
const char* field_name(Field f);

/// Quantization contract for one payload field: uniform code over
/// [lo, hi] with 2^bits levels, both endpoints representable.
struct FieldSpec {
  Field field = Field::mean_pos;
  int bits = 12;
  double lo = -1.0;
  double hi = 1.0;

  int32_t levels() const { return int32_t(1) << bits; }
  double step() const { return (hi - lo) / double(levels() - 1); }
  void validate() const;
  bool operator==(const FieldSpec&) const = default;
};

using FieldSpecTable = std::array<FieldSpec, kFieldCount>;

// Bit widths follow the transmitted-field budget: mean position and
// unsupervised keypoints at 12 bits, supervised keypoints at 8, Jacobian
// entries at 16 in [-15, 15], expression values at 10 in [-1, 1].
FieldSpecTable default_field_specs();

// Values outside [lo, hi] saturate.
int32_t quantize(double value, const FieldSpec& spec);
double dequantize(int32_t code, const FieldSpec& spec);

// Uncoded bits per frame for the fields active under `cfg`.
int64_t raw_bits_per_frame(const StreamConfig& cfg, const FieldSpecTable& specs);

// Symbols a frame contributes to `field` under `cfg` (0 when inactive).
int symbols_per_frame(Field field, const StreamConfig& cfg);

}  // namespace fz::codec
