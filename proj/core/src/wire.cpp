#include "fz/wire.hpp"

#include <array>
#include <cstring>

#include "fz/io_util.hpp"

namespace fz::wire {

namespace {

void write_keypoint_set(ByteWriter& w, const KeypointSet& kps) {
  w.u16(uint16_t(kps.coords.size()));
  w.u8(kps.jacobians ? 1 : 0);
  for (const auto& c : kps.coords) {
    w.f64(c.x);
    w.f64(c.y);
  }
  if (kps.jacobians) {
    w.u16(uint16_t(kps.jacobians->size()));
    for (const auto& j : *kps.jacobians) {
      w.f64(j.a);
      w.f64(j.b);
      w.f64(j.c);
      w.f64(j.d);
    }
  }
}

}  // namespace

std::vector<uint8_t> StreamHeader::encode() const {
  ByteWriter w;
  w.bytes(std::span<const uint8_t>(
      reinterpret_cast<const uint8_t*>(kMagic), sizeof kMagic));
  w.u8(kVersion);
  w.u16(uint16_t(config.n_sup));
  w.u16(uint16_t(config.n_unsup));
  w.u16(config.with_jacobians ? 1 : 0);
  w.u16(uint16_t(config.expression_size));
  w.u16(uint16_t(config.grid_h));
  w.u16(uint16_t(config.grid_w));
  w.u16(uint16_t(config.keyframe_interval));
  w.u16(uint16_t(config.fps));
  w.u64(prior_hash);
  w.u8(codec::kFieldCount);
  for (const auto& s : specs) {
    w.u8(uint8_t(s.field));
    w.u8(uint8_t(s.bits));
    w.f64(s.lo);
    w.f64(s.hi);
  }
  w.u16(uint16_t(sources.size()));
  for (const auto& kps : sources) write_keypoint_set(w, kps);
  return w.take();
}

StreamHeader StreamHeader::decode(Channel& channel) {
  // Fixed-size prefix first, then the variable tail it describes.
  std::array<uint8_t, 4> magic;
  read_exact(channel, magic);
  if (std::memcmp(magic.data(), kMagic, sizeof kMagic) != 0)
    raise(errc::bad_magic, "not an FZWR stream");
  std::array<uint8_t, 1> version;
  read_exact(channel, version);
  if (version[0] != kVersion)
    raise(errc::version_mismatch,
          "stream version " + std::to_string(version[0]) + ", expected " +
              std::to_string(kVersion));

  std::array<uint8_t, 2 * 8 + 8 + 1> fixed;
  read_exact(channel, fixed);
  ByteReader r(fixed);

  StreamHeader h;
  h.config.n_sup = r.u16();
  h.config.n_unsup = r.u16();
  h.config.with_jacobians = r.u16() != 0;
  h.config.expression_size = r.u16();
  h.config.grid_h = r.u16();
  h.config.grid_w = r.u16();
  h.config.keyframe_interval = r.u16();
  h.config.fps = r.u16();
  h.prior_hash = r.u64();
  const int n_fields = r.u8();
  if (n_fields != codec::kFieldCount)
    raise(errc::version_mismatch, "unexpected field-spec count");
  h.config.validate();

  std::vector<uint8_t> spec_bytes(size_t(n_fields) * 18);
  read_exact(channel, spec_bytes);
  ByteReader rs(spec_bytes);
  for (auto& s : h.specs) {
    s.field = codec::Field(rs.u8());
    s.bits = rs.u8();
    s.lo = rs.f64();
    s.hi = rs.f64();
    s.validate();
  }

  std::array<uint8_t, 2> n_sources_bytes;
  read_exact(channel, n_sources_bytes);
  const size_t n_sources =
      size_t(n_sources_bytes[0]) | size_t(n_sources_bytes[1]) << 8;
  for (size_t i = 0; i < n_sources; ++i) {
    std::array<uint8_t, 3> head;
    read_exact(channel, head);
    KeypointSet kps;
    kps.coords.resize(size_t(head[0]) | size_t(head[1]) << 8);
    const bool has_jac = head[2] != 0;

    std::vector<uint8_t> body(kps.coords.size() * 16);
    read_exact(channel, body);
    ByteReader rb(body);
    for (auto& c : kps.coords) {
      c.x = rb.f64();
      c.y = rb.f64();
    }
    if (has_jac) {
      std::array<uint8_t, 2> jn;
      read_exact(channel, jn);
      kps.jacobians.emplace(size_t(jn[0]) | size_t(jn[1]) << 8);
      std::vector<uint8_t> jbody(kps.jacobians->size() * 32);
      read_exact(channel, jbody);
      ByteReader rj(jbody);
      for (auto& j : *kps.jacobians) {
        j.a = rj.f64();
        j.b = rj.f64();
        j.c = rj.f64();
        j.d = rj.f64();
      }
    }
    h.sources.push_back(std::move(kps));
  }
  return h;
}

Sender open_sender(std::shared_ptr<Channel> channel, const StreamConfig& cfg,
                   const codec::PriorModel& prior,
                   std::vector<KeypointSet> sources) {
  cfg.validate();
  if (!cfg.shape_equals(prior.config()))
    raise(errc::prior_mismatch,
          "session config incompatible with the prior's payload shape");
  // header fields travel as u16
  for (int v : {cfg.n_sup, cfg.n_unsup, cfg.expression_size, cfg.grid_h,
                cfg.grid_w, cfg.keyframe_interval, cfg.fps})
    if (v > 0xFFFF)
      raise(errc::range_violation, "config field exceeds the wire encoding");
  if (sources.size() > 0xFFFF)
    raise(errc::range_violation, "too many preamble sources");

  StreamHeader header;
  header.config = cfg;
  header.specs = prior.specs();
  header.prior_hash = prior.hash();
  header.sources = std::move(sources);

  Sender sender(std::move(channel), cfg, prior);
  auto bytes = header.encode();
  sender.channel_->write(bytes);
  sender.report_.header_bytes = bytes.size();
  return sender;
}

Receiver open_receiver(std::shared_ptr<Channel> channel,
                       const codec::PriorModel& prior) {
  StreamHeader header = StreamHeader::decode(*channel);
  if (header.prior_hash != prior.hash())
    raise(errc::prior_hash_mismatch,
          "sender trained against a different prior model");
  // the echoed contract must agree with the local prior, or decoded
  // symbols would be mapped through the wrong field ranges
  if (header.specs != prior.specs())
    raise(errc::prior_mismatch, "header field specs differ from the prior's");
  if (!header.config.shape_equals(prior.config()))
    raise(errc::prior_mismatch,
          "header config incompatible with the prior's payload shape");
  Receiver receiver(std::move(channel), prior, std::move(header));
  receiver.report_.header_bytes = receiver.header_.encode().size();
  return receiver;
}

size_t Sender::send_frame(const MotionPayload& payload) {
  auto frame =
      codec::encode_frame(state_, payload, *prior_, config_, prior_->specs());
  channel_->write(frame.record);
  last_recon_ = std::move(frame.local_reconstruction);

  report_.frames += 1;
  report_.total_bits += 8 * frame.record.size();
  if (frame.is_keyframe) report_.keyframe_bits += 8 * frame.record.size();
  return frame.record.size();
}

std::vector<uint8_t> Receiver::read_record(bool* keyframe) {
  std::array<uint8_t, 2> len_bytes;
  size_t got = channel_->read(len_bytes);
  if (got == 0) raise(errc::channel_closed, "end of stream");
  if (got < 2) read_exact(*channel_, std::span(len_bytes).subspan(got));

  const size_t payload_len = size_t(len_bytes[0]) | size_t(len_bytes[1]) << 8;
  std::vector<uint8_t> record(codec::kRecordOverheadBytes + payload_len);
  record[0] = len_bytes[0];
  record[1] = len_bytes[1];
  read_exact(*channel_, std::span(record).subspan(2));
  *keyframe = (record[2] & 1) != 0;
  return record;
}

MotionPayload Receiver::recv_frame() {
  for (;;) {
    bool keyframe = false;
    auto record = read_record(&keyframe);
    report_.frames += 1;
    report_.total_bits += 8 * record.size();
    if (keyframe) report_.keyframe_bits += 8 * record.size();

    if (desynced_ && !keyframe) {
      // Between a corrupted frame and the next keyframe, delta frames
      // decode against stale state; consume and discard them.
      try {
        (void)codec::decode_frame(state_, record, *prior_,
                                  header_.config, header_.specs);
      } catch (const Error&) {
        // still counted; resynchronization happens at the keyframe
      }
      continue;
    }

    try {
      MotionPayload payload = codec::decode_frame(
          state_, record, *prior_, header_.config, header_.specs);
      desynced_ = false;
      return payload;
    } catch (const Error& e) {
      if (e.code() == errc::prior_mismatch ||
          e.code() == errc::truncated_stream) {
        desynced_ = true;
        raise(errc::checksum_failure,
              "frame failed its checksum; awaiting next keyframe");
      }
      throw;
    }
  }
}

}  // namespace fz::wire
