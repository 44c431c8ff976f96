#include "fz/range_coder.hpp"

#include <algorithm>
#include <cmath>

namespace fz::codec {

namespace {
// Renormalization threshold. With totals capped at 2^18 the quotient
// range/total keeps at least 6 bits of headroom.
constexpr uint32_t kTop = 1u << 24;
}  // namespace

FrequencyTable::FrequencyTable(std::vector<uint64_t> counts, uint64_t cap) {
  if (counts.empty()) raise(errc::empty_input, "empty frequency table");
  if (cap == 0) cap = std::max<uint64_t>(65536, 2 * counts.size());
  if (cap > (1u << 18))
    raise(errc::range_violation, "frequency cap exceeds coder precision");

  uint64_t total = 0;
  for (uint64_t c : counts) {
    if (c == 0) raise(errc::range_violation, "zero-frequency symbol");
    total += c;
  }
  while (total > cap) {
    total = 0;
    for (auto& c : counts) {
      c = std::max<uint64_t>(1, c >> 1);
      total += c;
    }
  }
  if (total > cap)
    raise(errc::range_violation, "alphabet too large for frequency cap");

  freq_.resize(counts.size());
  cum_.resize(counts.size() + 1);
  uint32_t acc = 0;
  for (size_t i = 0; i < counts.size(); ++i) {
    freq_[i] = uint32_t(counts[i]);
    cum_[i] = acc;
    acc += freq_[i];
  }
  cum_[counts.size()] = acc;
  total_ = acc;
}

uint32_t FrequencyTable::find(uint32_t scaled) const {
  // upper_bound over cum_[1..size] gives the owning interval.
  auto it = std::upper_bound(cum_.begin() + 1, cum_.end(), scaled);
  return uint32_t(it - cum_.begin()) - 1;
}

double FrequencyTable::entropy_bits() const {
  double h = 0.0;
  const double t = double(total_);
  for (uint32_t f : freq_) {
    if (f == 0) continue;
    double p = double(f) / t;
    h -= p * std::log2(p);
  }
  return h;
}

double FrequencyTable::cost_bits(uint32_t symbol) const {
  return -std::log2(double(freq_[symbol]) / double(total_));
}

void RangeEncoder::shift_low() {
  if (uint32_t(low_ >> 32) != 0 || uint32_t(low_) < 0xFF000000u) {
    uint8_t carry = uint8_t(low_ >> 32);
    uint8_t byte = cache_;
    do {
      out_.push_back(uint8_t(byte + carry));
      byte = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = uint8_t(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ << 8) & 0xFFFFFFFFull;
}

void RangeEncoder::encode(const FrequencyTable& table, uint32_t symbol) {
  if (symbol >= table.size())
    raise(errc::unknown_symbol,
          "symbol " + std::to_string(symbol) + " outside alphabet of " +
              std::to_string(table.size()));
  const uint32_t lo = table.cum(symbol);
  const uint32_t f = table.freq(symbol);
  const uint32_t r = range_ / table.total();

  low_ += uint64_t(r) * lo;
  if (lo + f == table.total())
    range_ -= r * lo;  // top interval absorbs the quotient remainder
  else
    range_ = r * f;

  while (range_ < kTop) {
    shift_low();
    range_ <<= 8;
  }
}

std::vector<uint8_t> RangeEncoder::finish() {
  for (int i = 0; i < 5; ++i) shift_low();
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const uint8_t> bytes) : bytes_(bytes) {
  next_byte();  // encoder's initial cache byte, always zero
  for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
}

uint8_t RangeDecoder::next_byte() {
  if (pos_ >= bytes_.size())
    raise(errc::truncated_stream, "range-coded payload ends early");
  return bytes_[pos_++];
}

uint32_t RangeDecoder::decode(const FrequencyTable& table) {
  const uint32_t r = range_ / table.total();
  const uint32_t scaled = std::min(code_ / r, table.total() - 1);
  const uint32_t symbol = table.find(scaled);

  const uint32_t lo = table.cum(symbol);
  const uint32_t f = table.freq(symbol);
  code_ -= r * lo;
  if (lo + f == table.total())
    range_ -= r * lo;
  else
    range_ = r * f;

  while (range_ < kTop) {
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
  return symbol;
}

}  // namespace fz::codec
