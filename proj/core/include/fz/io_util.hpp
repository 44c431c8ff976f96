#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "fz/error.hpp"

namespace fz {

// Little-endian byte serialization shared by the track, prior, feature-map
// and wire formats.

class ByteWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(v); }
  void u16(uint16_t v) {
    buf_.push_back(uint8_t(v));
    buf_.push_back(uint8_t(v >> 8));
  }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(uint8_t(v >> (8 * i)));
  }
  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(uint8_t(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }
  void bytes(std::span<const uint8_t> b) {
    buf_.insert(buf_.end(), b.begin(), b.end());
  }
  void literal(const char* s) {
    while (*s) buf_.push_back(uint8_t(*s++));
  }

  const std::vector<uint8_t>& data() const { return buf_; }
  std::vector<uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

  uint8_t u8() { return take(1)[0]; }
  uint16_t u16() {
    auto b = take(2);
    return uint16_t(b[0]) | uint16_t(b[1]) << 8;
  }
  uint32_t u32() {
    auto b = take(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(b[i]) << (8 * i);
    return v;
  }
  uint64_t u64() {
    auto b = take(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }

  std::span<const uint8_t> take(size_t n) {
    if (pos_ + n > data_.size())
      raise(errc::truncated_stream, "unexpected end of data at byte " +
                                        std::to_string(pos_));
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  void expect_literal(const char* s, errc code) {
    size_t n = std::strlen(s);
    if (pos_ + n > data_.size())
      raise(errc::truncated_stream, "data shorter than magic");
    if (std::memcmp(data_.data() + pos_, s, n) != 0)
      raise(code, std::string("expected '") + s + "'");
    pos_ += n;
  }

  size_t remaining() const { return data_.size() - pos_; }
  size_t position() const { return pos_; }

 private:
  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

// FNV-1a, used to fingerprint prior models.
inline uint64_t fnv1a64(std::span<const uint8_t> data) {
  uint64_t h = 1469598103934665603ull;
  for (uint8_t b : data) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

// CRC-16/CCITT-FALSE over arbitrary bytes.
uint16_t crc16(std::span<const uint8_t> data);

}  // namespace fz
