#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fz/error.hpp"

namespace fz::codec {

/// Immutable symbol distribution driving the range coder. Built from raw
/// counts; every symbol is guaranteed a nonzero frequency. Counts are
/// halved until the total fits the coder's precision budget.
class FrequencyTable {
 public:
  FrequencyTable() = default;

  // `counts` must be nonempty with every entry >= 1 (callers smooth
  // beforehand). `cap` limits the total; 0 selects the default
  // max(65536, 2 * alphabet).
  explicit FrequencyTable(std::vector<uint64_t> counts, uint64_t cap = 0);

  uint32_t size() const { return uint32_t(freq_.size()); }
  uint32_t total() const { return total_; }
  uint32_t freq(uint32_t symbol) const { return freq_[symbol]; }
  uint32_t cum(uint32_t symbol) const { return cum_[symbol]; }

  // Largest symbol s with cum(s) <= scaled.
  uint32_t find(uint32_t scaled) const;

  double entropy_bits() const;                 // H of the table, bits/symbol
  double cost_bits(uint32_t symbol) const;     // -log2 p(symbol)

  const std::vector<uint32_t>& frequencies() const { return freq_; }

 private:
  std::vector<uint32_t> freq_;
  std::vector<uint32_t> cum_;  // size + 1 entries, cum_[size] == total
  uint32_t total_ = 0;
};

/// Byte-oriented range encoder: 32-bit range register, 32(+carry)-bit low
/// register, carry-propagating renormalization. The paired decoder must
/// consume symbols with the same tables in the same order.
class RangeEncoder {
 public:
  void encode(const FrequencyTable& table, uint32_t symbol);
  std::vector<uint8_t> finish();

  size_t bytes_pending() const { return out_.size(); }

 private:
  void shift_low();

  uint64_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint8_t cache_ = 0;
  uint64_t cache_size_ = 1;
  std::vector<uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const uint8_t> bytes);

  uint32_t decode(const FrequencyTable& table);

  size_t bytes_consumed() const { return pos_; }

 private:
  uint8_t next_byte();

  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint32_t code_ = 0;
};

}  // namespace fz::codec
