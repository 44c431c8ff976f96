#include "fz/io_util.hpp"

#include <array>

namespace fz {

namespace {

// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection.
std::array<uint16_t, 256> make_crc_table() {
  std::array<uint16_t, 256> table{};
  for (uint32_t i = 0; i < 256; ++i) {
    uint16_t crc = uint16_t(i << 8);
    for (int bit = 0; bit < 8; ++bit)
      crc = (crc & 0x8000) ? uint16_t((crc << 1) ^ 0x1021)
                           : uint16_t(crc << 1);
    table[i] = crc;
  }
  return table;
}

}  // namespace

uint16_t crc16(std::span<const uint8_t> data) {
  static const std::array<uint16_t, 256> table = make_crc_table();
  uint16_t crc = 0xFFFF;
  for (uint8_t b : data)
    crc = uint16_t((crc << 8) ^ table[uint8_t(crc >> 8) ^ b]);
  return crc;
}

}  // namespace fz
