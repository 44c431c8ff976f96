#pragma once

#include <memory>
#include <vector>

#include "fz/channel.hpp"
#include "fz/codec.hpp"
#include "fz/prior.hpp"
#include "fz/types.hpp"

namespace fz::wire {

inline constexpr char kMagic[4] = {'F', 'Z', 'W', 'R'};
inline constexpr uint8_t kVersion = 1;

/// Handshake header: magic "FZWR" (4 bytes), version u8, config fields
/// as little-endian u16s, prior hash (8 bytes), field-spec echo, then an
/// optional preamble of source keypoint sets (sent ahead of time, out of
/// band of the per-frame budget).
struct StreamHeader {
  StreamConfig config;
  codec::FieldSpecTable specs = codec::default_field_specs();
  uint64_t prior_hash = 0;
  std::vector<KeypointSet> sources;

  std::vector<uint8_t> encode() const;
  static StreamHeader decode(Channel& channel);
};

struct BandwidthReport {
  uint64_t frames = 0;
  uint64_t total_bits = 0;     // frame records only, header excluded
  uint64_t keyframe_bits = 0;
  uint64_t header_bytes = 0;   // handshake + source preamble, one-off cost
  int fps = 15;

  double bits_per_frame() const {
    if (frames == 0) raise(errc::empty_input, "no frames transferred");
    return double(total_bits) / double(frames);
  }
  double kbps() const { return bits_per_frame() * double(fps) / 1000.0; }
  double keyframe_share() const {
    if (frames == 0) raise(errc::empty_input, "no frames transferred");
    return total_bits ? double(keyframe_bits) / double(total_bits) : 0.0;
  }
};

/// Sending half of a session. Stateful and single-threaded; distinct
/// sessions are independent.
class Sender {
 public:
  // Returns bytes written to the channel for this frame.
  size_t send_frame(const MotionPayload& payload);

  // The receiver-side value of the last sent frame.
  const MotionPayload& last_reconstruction() const { return last_recon_; }

  BandwidthReport bandwidth_report() const { return report_; }
  const codec::CodecState& state() const { return state_; }
  const StreamConfig& config() const { return config_; }
  void finish() { channel_->close_write(); }

 private:
  friend Sender open_sender(std::shared_ptr<Channel>, const StreamConfig&,
                            const codec::PriorModel&,
                            std::vector<KeypointSet>);
  Sender(std::shared_ptr<Channel> channel, StreamConfig cfg,
         const codec::PriorModel& prior)
      : channel_(std::move(channel)), config_(cfg), prior_(&prior) {
    report_.fps = cfg.fps;
  }

  std::shared_ptr<Channel> channel_;
  StreamConfig config_;
  const codec::PriorModel* prior_;
  codec::CodecState state_;
  MotionPayload last_recon_;
  BandwidthReport report_;
};

/// Receiving half. After a checksum failure the session reports the
/// error once, then discards frames until the next keyframe restores an
/// exact mirror state.
class Receiver {
 public:
  MotionPayload recv_frame();

  const StreamHeader& header() const { return header_; }
  BandwidthReport bandwidth_report() const { return report_; }
  const codec::CodecState& state() const { return state_; }
  const StreamConfig& config() const { return header_.config; }

 private:
  friend Receiver open_receiver(std::shared_ptr<Channel>,
                                const codec::PriorModel&);
  Receiver(std::shared_ptr<Channel> channel, const codec::PriorModel& prior,
           StreamHeader header)
      : channel_(std::move(channel)),
        prior_(&prior),
        header_(std::move(header)) {
    report_.fps = header_.config.fps;
  }

  std::vector<uint8_t> read_record(bool* keyframe);

  std::shared_ptr<Channel> channel_;
  const codec::PriorModel* prior_;
  StreamHeader header_;
  codec::CodecState state_;
  BandwidthReport report_;
  bool desynced_ = false;
};

// Handshake. The sender writes the header; the receiver validates magic,
// version, and the prior fingerprint.
Sender open_sender(std::shared_ptr<Channel> channel, const StreamConfig& cfg,
                   const codec::PriorModel& prior,
                   std::vector<KeypointSet> sources = {});
Receiver open_receiver(std::shared_ptr<Channel> channel,
                       const codec::PriorModel& prior);

}  // namespace fz::wire
