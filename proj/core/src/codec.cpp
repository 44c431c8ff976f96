#include "fz/codec.hpp"

#include "fz/io_util.hpp"

namespace fz::codec {

namespace {

uint16_t symbol_crc(std::span<const ContextSymbol> symbols) {
  std::vector<uint8_t> bytes;
  bytes.reserve(symbols.size() * 4);
  for (const auto& s : symbols)
    for (int i = 0; i < 4; ++i) bytes.push_back(uint8_t(s.symbol >> (8 * i)));
  return crc16(bytes);
}

uint16_t symbol_crc(std::span<const uint32_t> symbols) {
  std::vector<uint8_t> bytes;
  bytes.reserve(symbols.size() * 4);
  for (uint32_t s : symbols)
    for (int i = 0; i < 4; ++i) bytes.push_back(uint8_t(s >> (8 * i)));
  return crc16(bytes);
}

}  // namespace

std::array<std::vector<int32_t>, kFieldCount> quantize_payload(
    const MotionPayload& payload, const StreamConfig& cfg,
    const FieldSpecTable& specs) {
  validate_payload(payload, cfg);

  std::array<std::vector<int32_t>, kFieldCount> codes;
  auto& mean = codes[int(Field::mean_pos)];
  mean.push_back(quantize(payload.mean_pos.x, specs[int(Field::mean_pos)]));
  mean.push_back(quantize(payload.mean_pos.y, specs[int(Field::mean_pos)]));

  auto& sup = codes[int(Field::sup_kp)];
  const auto& sup_spec = specs[int(Field::sup_kp)];
  for (int k = 0; k < cfg.n_sup; ++k) {
    sup.push_back(quantize(payload.offsets.coords[k].x, sup_spec));
    sup.push_back(quantize(payload.offsets.coords[k].y, sup_spec));
  }

  auto& unsup = codes[int(Field::unsup_kp)];
  const auto& unsup_spec = specs[int(Field::unsup_kp)];
  for (int k = 0; k < cfg.n_unsup; ++k) {
    const auto& c = payload.offsets.coords[cfg.n_sup + k];
    unsup.push_back(quantize(c.x, unsup_spec));
    unsup.push_back(quantize(c.y, unsup_spec));
  }

  if (cfg.with_jacobians) {
    auto& jac = codes[int(Field::jacobian)];
    const auto& jac_spec = specs[int(Field::jacobian)];
    for (const auto& j : *payload.offsets.jacobians)
      for (double e : {j.a, j.b, j.c, j.d})
        jac.push_back(quantize(e, jac_spec));
  }

  auto& expr = codes[int(Field::expression)];
  const auto& expr_spec = specs[int(Field::expression)];
  for (double e : payload.expression) expr.push_back(quantize(e, expr_spec));

  return codes;
}

MotionPayload dequantize_payload(
    const std::array<std::vector<int32_t>, kFieldCount>& codes,
    int64_t frame_index, const StreamConfig& cfg,
    const FieldSpecTable& specs) {
  MotionPayload p;
  p.frame_index = frame_index;

  const auto& mean = codes[int(Field::mean_pos)];
  const auto& mean_spec = specs[int(Field::mean_pos)];
  p.mean_pos.x = dequantize(mean.at(0), mean_spec);
  p.mean_pos.y = dequantize(mean.at(1), mean_spec);

  p.offsets.coords.resize(size_t(cfg.total_keypoints()));
  const auto& sup = codes[int(Field::sup_kp)];
  const auto& sup_spec = specs[int(Field::sup_kp)];
  for (int k = 0; k < cfg.n_sup; ++k) {
    p.offsets.coords[k].x = dequantize(sup.at(size_t(2 * k)), sup_spec);
    p.offsets.coords[k].y = dequantize(sup.at(size_t(2 * k + 1)), sup_spec);
  }
  const auto& unsup = codes[int(Field::unsup_kp)];
  const auto& unsup_spec = specs[int(Field::unsup_kp)];
  for (int k = 0; k < cfg.n_unsup; ++k) {
    auto& c = p.offsets.coords[size_t(cfg.n_sup + k)];
    c.x = dequantize(unsup.at(size_t(2 * k)), unsup_spec);
    c.y = dequantize(unsup.at(size_t(2 * k + 1)), unsup_spec);
  }

  if (cfg.with_jacobians) {
    const auto& jac = codes[int(Field::jacobian)];
    const auto& jac_spec = specs[int(Field::jacobian)];
    p.offsets.jacobians.emplace(size_t(cfg.n_unsup));
    for (int k = 0; k < cfg.n_unsup; ++k) {
      auto& j = (*p.offsets.jacobians)[k];
      j.a = dequantize(jac.at(size_t(4 * k)), jac_spec);
      j.b = dequantize(jac.at(size_t(4 * k + 1)), jac_spec);
      j.c = dequantize(jac.at(size_t(4 * k + 2)), jac_spec);
      j.d = dequantize(jac.at(size_t(4 * k + 3)), jac_spec);
    }
  }

  const auto& expr = codes[int(Field::expression)];
  const auto& expr_spec = specs[int(Field::expression)];
  p.expression.resize(size_t(cfg.expression_size));
  for (int k = 0; k < cfg.expression_size; ++k)
    p.expression[k] = dequantize(expr.at(size_t(k)), expr_spec);

  return p;
}

QuantizedPayload delta_step(CodecState& state, const MotionPayload& payload,
                            const StreamConfig& cfg,
                            const FieldSpecTable& specs) {
  auto absolute = quantize_payload(payload, cfg, specs);

  QuantizedPayload qp;
  qp.frame_index = state.frame_counter;
  qp.is_keyframe = state.frame_counter % cfg.keyframe_interval == 0;

  if (qp.is_keyframe) {
    qp.codes = absolute;
  } else {
    for (int f = 0; f < kFieldCount; ++f) {
      const auto& prev = state.previous[f];
      const auto& cur = absolute[f];
      if (prev.size() != cur.size())
        raise(errc::shape_mismatch, "codec state shape changed mid-stream");
      auto& out = qp.codes[f];
      out.resize(cur.size());
      for (size_t i = 0; i < cur.size(); ++i) out[i] = cur[i] - prev[i];
    }
  }

  state.previous = std::move(absolute);
  ++state.frame_counter;
  return qp;
}

MotionPayload reconstruct_step(CodecState& state, const QuantizedPayload& qp,
                               const StreamConfig& cfg,
                               const FieldSpecTable& specs) {
  std::array<std::vector<int32_t>, kFieldCount> absolute;
  if (qp.is_keyframe) {
    absolute = qp.codes;
  } else {
    for (int f = 0; f < kFieldCount; ++f) {
      const auto& prev = state.previous[f];
      const auto& delta = qp.codes[f];
      if (prev.size() != delta.size())
        raise(errc::shape_mismatch, "delta frame against mismatched state");
      auto& out = absolute[f];
      out.resize(delta.size());
      for (size_t i = 0; i < delta.size(); ++i) out[i] = prev[i] + delta[i];
    }
  }

  MotionPayload p =
      dequantize_payload(absolute, state.frame_counter, cfg, specs);
  state.previous = std::move(absolute);
  ++state.frame_counter;
  return p;
}

std::vector<uint8_t> ac_encode(std::span<const ContextSymbol> symbols,
                               const PriorModel& prior) {
  RangeEncoder enc;
  for (const auto& s : symbols) enc.encode(prior.table(s.context), s.symbol);
  return enc.finish();
}

std::vector<uint32_t> ac_decode(std::span<const uint8_t> bytes,
                                std::span<const int> contexts,
                                const PriorModel& prior) {
  RangeDecoder dec(bytes);
  std::vector<uint32_t> out;
  out.reserve(contexts.size());
  for (int ctx : contexts) out.push_back(dec.decode(prior.table(ctx)));
  return out;
}

EncodedFrame encode_frame(CodecState& state, const MotionPayload& payload,
                          const PriorModel& prior, const StreamConfig& cfg,
                          const FieldSpecTable& specs) {
  CodecState before = state;  // for the local reconstruction below
  QuantizedPayload qp = delta_step(state, payload, cfg, specs);

  std::vector<ContextSymbol> symbols;
  for (int f = 0; f < kFieldCount; ++f) {
    if (qp.codes[f].empty()) continue;
    const int ctx = context_index(Field(f), qp.is_keyframe);
    const auto& spec = specs[f];
    for (int32_t code : qp.codes[f])
      symbols.push_back(
          {ctx, qp.is_keyframe ? uint32_t(code) : delta_to_symbol(code, spec)});
  }

  auto coded = ac_encode(symbols, prior);
  if (coded.size() > 0xFFFF)
    raise(errc::range_violation, "frame record exceeds 64 KiB");

  ByteWriter w;
  w.u16(uint16_t(coded.size()));
  w.u8(qp.is_keyframe ? 1 : 0);
  w.bytes(coded);
  w.u16(symbol_crc(symbols));

  EncodedFrame out;
  out.record = w.take();
  out.is_keyframe = qp.is_keyframe;
  out.local_reconstruction = reconstruct_step(before, qp, cfg, specs);
  return out;
}

MotionPayload decode_frame(CodecState& state, std::span<const uint8_t> record,
                           const PriorModel& prior, const StreamConfig& cfg,
                           const FieldSpecTable& specs) {
  ByteReader r(record);
  const size_t payload_len = r.u16();
  const uint8_t flags = r.u8();
  const bool keyframe = (flags & 1) != 0;
  auto payload_bytes = r.take(payload_len);
  const uint16_t want_crc = r.u16();
  if (r.remaining() != 0)
    raise(errc::parse_error, "trailing bytes after frame record");

  std::vector<int> contexts;
  for (int f = 0; f < kFieldCount; ++f) {
    const int n = symbols_per_frame(Field(f), cfg);
    contexts.insert(contexts.end(), size_t(n), context_index(Field(f), keyframe));
  }

  // A corrupted record still occupies one frame slot; advancing the
  // counter here keeps the mirror state realignable at the next keyframe.
  std::vector<uint32_t> symbols;
  try {
    symbols = ac_decode(payload_bytes, contexts, prior);
  } catch (const Error& e) {
    if (e.code() == errc::truncated_stream) {
      ++state.frame_counter;
      raise(errc::prior_mismatch, "frame payload undecodable");
    }
    throw;
  }
  if (symbol_crc(symbols) != want_crc) {
    ++state.frame_counter;
    raise(errc::prior_mismatch,
          "frame checksum mismatch (wrong prior or corrupted stream)");
  }

  QuantizedPayload qp;
  qp.frame_index = state.frame_counter;
  qp.is_keyframe = keyframe;
  size_t pos = 0;
  for (int f = 0; f < kFieldCount; ++f) {
    const int n = symbols_per_frame(Field(f), cfg);
    auto& codes = qp.codes[f];
    codes.reserve(size_t(n));
    for (int i = 0; i < n; ++i) {
      uint32_t sym = symbols[pos++];
      codes.push_back(keyframe ? int32_t(sym)
                               : symbol_to_delta(sym, specs[f]));
    }
  }

  // a checksum collision on a corrupt frame could still step a code
  // outside its field range; reject it without losing the frame slot
  if (!keyframe) {
    for (int f = 0; f < kFieldCount; ++f) {
      const auto& prev = state.previous[f];
      const auto& delta = qp.codes[f];
      if (prev.size() != delta.size()) {
        ++state.frame_counter;
        raise(errc::prior_mismatch, "delta frame against mismatched state");
      }
      for (size_t i = 0; i < delta.size(); ++i) {
        const int32_t code = prev[i] + delta[i];
        if (code < 0 || code >= specs[f].levels()) {
          ++state.frame_counter;
          raise(errc::prior_mismatch, "delta walks outside the code range");
        }
      }
    }
  }

  return reconstruct_step(state, qp, cfg, specs);
}

}  // namespace fz::codec
