#include "fz/quantize.hpp"

#include <algorithm>
#include <cmath>

namespace fz::codec {

const char* field_name(Field f) {
  switch (f) {
    case Field::mean_pos: return "mean_pos";
    case Field::sup_kp: return "sup_kp";
    case Field::unsup_kp: return "unsup_kp";
    case Field::jacobian: return "jacobian";
    case Field::expression: return "expression";
  }
  return "?";
}

void FieldSpec::validate() const {
  if (bits < 1 || bits > 24)
    raise(errc::range_violation, "field bits must be in [1, 24]");
  if (!(lo < hi)) raise(errc::range_violation, "field range requires lo < hi");
}

FieldSpecTable default_field_specs() {
  return {{
      {Field::mean_pos, 12, -1.0, 1.0},
      {Field::sup_kp, 8, -1.0, 1.0},
      {Field::unsup_kp, 12, -1.0, 1.0},
      {Field::jacobian, 16, -15.0, 15.0},
      {Field::expression, 10, -1.0, 1.0},
  }};
}

int32_t quantize(double value, const FieldSpec& spec) {
  if (std::isnan(value)) value = spec.lo;  // saturate, never trap
  double v = std::clamp(value, spec.lo, spec.hi);
  auto code = int32_t(std::llround((v - spec.lo) / spec.step()));
  return std::clamp(code, int32_t(0), spec.levels() - 1);
}

double dequantize(int32_t code, const FieldSpec& spec) {
  if (code < 0 || code >= spec.levels())
    raise(errc::range_violation,
          std::string("code out of range for field ") + field_name(spec.field));
  return spec.lo + double(code) * spec.step();
}

int symbols_per_frame(Field field, const StreamConfig& cfg) {
  switch (field) {
    case Field::mean_pos: return 2;
    case Field::sup_kp: return 2 * cfg.n_sup;
    case Field::unsup_kp: return 2 * cfg.n_unsup;
    case Field::jacobian: return cfg.with_jacobians ? 4 * cfg.n_unsup : 0;
    case Field::expression: return cfg.expression_size;
  }
  return 0;
}

int64_t raw_bits_per_frame(const StreamConfig& cfg,
                           const FieldSpecTable& specs) {
  int64_t bits = 0;
  for (const auto& spec : specs)
    bits += int64_t(symbols_per_frame(spec.field, cfg)) * spec.bits;
  return bits;
}

}  // namespace fz::codec
