#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fz/prior.hpp"
#include "fz/quantize.hpp"
#include "fz/types.hpp"

namespace fz::codec {

/// Mirror state shared (by construction) between encoder and decoder:
/// the previous frame's absolute quantized codes and the frame counter.
struct CodecState {
  std::array<std::vector<int32_t>, kFieldCount> previous;
  int64_t frame_counter = 0;

  bool operator==(const CodecState&) const = default;
};

// Quantizes `payload` to absolute codes per field, in the canonical
// order mean_pos, sup coords, unsup coords, Jacobians, expression.
std::array<std::vector<int32_t>, kFieldCount> quantize_payload(
    const MotionPayload& payload, const StreamConfig& cfg,
    const FieldSpecTable& specs);

// Rebuilds a payload from absolute codes; frame_index is assigned by the
// caller (the codec numbers frames from the start of the stream).
MotionPayload dequantize_payload(
    const std::array<std::vector<int32_t>, kFieldCount>& codes,
    int64_t frame_index, const StreamConfig& cfg, const FieldSpecTable& specs);

// Quantize-then-delta: absolute codes on keyframes (every
// cfg.keyframe_interval frames), per-symbol code differences otherwise.
// Deltas of integer codes are exact, so decoding never drifts.
QuantizedPayload delta_step(CodecState& state, const MotionPayload& payload,
                            const StreamConfig& cfg,
                            const FieldSpecTable& specs);

// Decoder-side inverse of delta_step; returns the dequantized payload
// and advances the mirror state.
MotionPayload reconstruct_step(CodecState& state, const QuantizedPayload& qp,
                               const StreamConfig& cfg,
                               const FieldSpecTable& specs);

/// One entropy-coder symbol tagged with its coding context.
struct ContextSymbol {
  int context = 0;
  uint32_t symbol = 0;
};

std::vector<uint8_t> ac_encode(std::span<const ContextSymbol> symbols,
                               const PriorModel& prior);
// `contexts` lists, in order, the context of each expected symbol.
std::vector<uint32_t> ac_decode(std::span<const uint8_t> bytes,
                                std::span<const int> contexts,
                                const PriorModel& prior);

/// Frame record: u16 payload length, flags byte (bit 0 = keyframe),
/// range-coded payload, u16 CRC of the symbol stream. All little-endian.
struct EncodedFrame {
  std::vector<uint8_t> record;
  bool is_keyframe = false;
  // What the receiver will reconstruct; equals the sender-side
  // dequantization of the transmitted codes.
  MotionPayload local_reconstruction;
};

EncodedFrame encode_frame(CodecState& state, const MotionPayload& payload,
                          const PriorModel& prior, const StreamConfig& cfg,
                          const FieldSpecTable& specs);

MotionPayload decode_frame(CodecState& state, std::span<const uint8_t> record,
                           const PriorModel& prior, const StreamConfig& cfg,
                           const FieldSpecTable& specs);

// Frame records travel length-prefixed; helpers shared by wire and file
// paths.
inline constexpr size_t kRecordOverheadBytes = 5;  // len u16 + flags + crc u16

}  // namespace fz::codec
