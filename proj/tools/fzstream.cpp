// fzstream: prior training, stream encode/decode, end-to-end simulation,
// fusion demo, sampling utilities, and benchmarks for the landmark codec.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "fz/channel.hpp"
#include "fz/codec.hpp"
#include "fz/feature_io.hpp"
#include "fz/kernels.hpp"
#include "fz/metrics.hpp"
#include "fz/prior.hpp"
#include "fz/sampling.hpp"
#include "fz/synth.hpp"
#include "fz/track_io.hpp"
#include "fz/wire.hpp"

using nlohmann::json;
using namespace fz;

namespace {

struct ConfigFlags {
  std::string preset = "sup-unsup-expr";
  int keyframe_interval = 100;
  int fps = 15;
  int grid = 32;

  StreamConfig resolve() const {
    StreamConfig cfg;
    if (preset == "fom") {
      cfg.n_sup = 0;
      cfg.n_unsup = 10;
      cfg.with_jacobians = true;
      cfg.expression_size = 0;
    } else if (preset == "sup") {
      cfg.n_sup = 33;
      cfg.n_unsup = 0;
      cfg.with_jacobians = false;
      cfg.expression_size = 0;
    } else if (preset == "sup-unsup") {
      cfg.n_sup = 33;
      cfg.n_unsup = 10;
      cfg.with_jacobians = true;
      cfg.expression_size = 0;
    } else if (preset == "sup-unsup-expr") {
      cfg.n_sup = 33;
      cfg.n_unsup = 10;
      cfg.with_jacobians = true;
      cfg.expression_size = 16;
    } else {
      raise(errc::parse_error, "unknown config preset '" + preset + "'");
    }
    cfg.keyframe_interval = keyframe_interval;
    cfg.fps = fps;
    cfg.grid_h = grid;
    cfg.grid_w = grid;
    cfg.validate();
    return cfg;
  }
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
  cmd->add_option("--config", flags.preset,
                  "payload preset: fom | sup | sup-unsup | sup-unsup-expr")
      ->capture_default_str();
  cmd->add_option("--keyframe-interval", flags.keyframe_interval,
                  "frames between keyframes")
      ->capture_default_str();
  cmd->add_option("--fps", flags.fps, "nominal frame rate")
      ->capture_default_str();
  cmd->add_option("--grid", flags.grid, "kernel grid size")
      ->capture_default_str();
}

std::vector<codec::QuantizedPayload> quantize_track(
    const PoseTrack& track, const StreamConfig& cfg,
    const codec::FieldSpecTable& specs) {
  codec::CodecState state;
  std::vector<codec::QuantizedPayload> out;
  out.reserve(track.frames.size());
  for (const auto& f : track.frames)
    out.push_back(codec::delta_step(state, f.payload, cfg, specs));
  return out;
}

StreamConfig track_session_config(const PoseTrack& track,
                                  const ConfigFlags& flags) {
  StreamConfig cfg = track.config;
  cfg.keyframe_interval = flags.keyframe_interval;
  cfg.fps = flags.fps;
  cfg.grid_h = flags.grid;
  cfg.grid_w = flags.grid;
  cfg.validate();
  return cfg;
}

json entropy_json(const metrics::EntropyReport& report) {
  json contexts = json::array();
  for (const auto& c : report.contexts)
    contexts.push_back({{"context", c.name},
                        {"alphabet", c.alphabet},
                        {"entropy_bits", c.entropy_bits},
                        {"symbols_per_frame", c.symbols_per_frame}});
  return {{"contexts", contexts},
          {"keyframe_bits_per_frame", report.keyframe_bits_per_frame},
          {"delta_bits_per_frame", report.delta_bits_per_frame}};
}

void print_entropy(const metrics::EntropyReport& report, bool as_json) {
  if (as_json) {
    std::cout << entropy_json(report).dump(2) << "\n";
    return;
  }
  for (const auto& c : report.contexts) {
    std::printf(
        "context=%s alphabet=%u entropy_bits=%.4f symbols_per_frame=%d\n",
        c.name.c_str(), c.alphabet, c.entropy_bits, c.symbols_per_frame);
  }
  std::printf("keyframe_bits_per_frame=%.1f\n", report.keyframe_bits_per_frame);
  std::printf("delta_bits_per_frame=%.1f\n", report.delta_bits_per_frame);
}

json bandwidth_json(const wire::BandwidthReport& r) {
  return {{"frames", r.frames},
          {"total_bits", r.total_bits},
          {"bits_per_frame", r.bits_per_frame()},
          {"kbps", r.kbps()},
          {"keyframe_share", r.keyframe_share()},
          {"header_bytes", r.header_bytes},
          {"fps", r.fps}};
}

void print_bandwidth(const char* side, const wire::BandwidthReport& r,
                     bool as_json) {
  if (as_json) {
    json j = bandwidth_json(r);
    j["side"] = side;
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::printf(
      "side=%s frames=%llu bits_per_frame=%.1f kbps=%.2f keyframe_share=%.3f "
      "header_bytes=%llu\n",
      side, (unsigned long long)r.frames, r.bits_per_frame(), r.kbps(),
      r.keyframe_share(), (unsigned long long)r.header_bytes);
}

bool payload_equal(const MotionPayload& a, const MotionPayload& b) {
  if (a.frame_index != b.frame_index || a.mean_pos.x != b.mean_pos.x ||
      a.mean_pos.y != b.mean_pos.y || a.expression != b.expression)
    return false;
  if (a.offsets.coords.size() != b.offsets.coords.size()) return false;
  for (size_t i = 0; i < a.offsets.coords.size(); ++i)
    if (a.offsets.coords[i].x != b.offsets.coords[i].x ||
        a.offsets.coords[i].y != b.offsets.coords[i].y)
      return false;
  if (a.offsets.jacobians.has_value() != b.offsets.jacobians.has_value())
    return false;
  if (a.offsets.jacobians)
    for (size_t i = 0; i < a.offsets.jacobians->size(); ++i) {
      const Mat2& x = (*a.offsets.jacobians)[i];
      const Mat2& y = (*b.offsets.jacobians)[i];
      if (x.a != y.a || x.b != y.b || x.c != y.c || x.d != y.d) return false;
    }
  return true;
}

PoseTrack payloads_to_track(const std::vector<MotionPayload>& payloads,
                            const StreamConfig& cfg) {
  PoseTrack track;
  track.config = cfg;
  for (const auto& p : payloads) {
    TrackFrame f;
    f.frame_index = p.frame_index;
    f.yaw = 0.0;  // yaw is not transmitted
    f.eyes_open = true;
    f.payload = p;
    track.frames.push_back(std::move(f));
  }
  return track;
}

std::vector<KeypointSet> pick_sources(const PoseTrack& track, int count) {
  std::vector<KeypointSet> out;
  if (count <= 0) return out;
  auto indices = sampling::select_sources(track, count - 1);
  if (int(indices.size()) > count) indices.resize(size_t(count));
  for (size_t idx : indices)
    out.push_back(track.frames[idx].payload.absolute_keypoints());
  return out;
}

// ---- gen-track ----------------------------------------------------------

int cmd_gen_track(const std::string& out_path, const ConfigFlags& flags,
                  int frames, double amplitude, double noise, uint64_t seed) {
  synth::GenParams gp;
  gp.config = flags.resolve();
  gp.frames = frames;
  gp.yaw_amplitude = amplitude;
  gp.noise = noise;
  gp.seed = seed;
  auto track = synth::gen_track(gp);
  write_track_file(out_path, track);
  std::printf("wrote %s frames=%d preset=%s\n", out_path.c_str(), frames,
              flags.preset.c_str());
  return 0;
}

// ---- train-prior --------------------------------------------------------

int cmd_train_prior(const std::vector<std::string>& track_paths,
                    const std::string& out_path, const ConfigFlags& flags,
                    bool as_json) {
  if (track_paths.empty()) raise(errc::empty_input, "no track files given");

  auto first = read_track_file(track_paths[0]);
  StreamConfig cfg = track_session_config(first, flags);
  auto specs = codec::default_field_specs();

  std::vector<std::vector<codec::QuantizedPayload>> streams;
  streams.push_back(quantize_track(first, cfg, specs));
  for (size_t i = 1; i < track_paths.size(); ++i) {
    auto track = read_track_file(track_paths[i]);
    if (!track.config.shape_equals(cfg))
      raise(errc::shape_mismatch,
            "track '" + track_paths[i] + "' has a different payload shape");
    streams.push_back(quantize_track(track, cfg, specs));
  }

  auto prior = codec::PriorModel::build(streams, cfg, specs);
  prior.save(out_path);

  auto report = metrics::entropy_report(prior);
  if (as_json) {
    json j = entropy_json(report);
    j["prior"] = out_path;
    j["prior_hash"] = prior.hash();
    j["tracks"] = track_paths.size();
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("prior=%s hash=%016llx tracks=%zu\n", out_path.c_str(),
                (unsigned long long)prior.hash(), track_paths.size());
    print_entropy(report, false);
  }
  return 0;
}

// ---- encode / decode ----------------------------------------------------

int cmd_encode(const std::string& track_path, const std::string& prior_path,
               const std::string& out_path, int n_sources, bool as_json) {
  auto track = read_track_file(track_path);
  auto prior = codec::PriorModel::load(prior_path);
  if (!track.config.shape_equals(prior.config()))
    raise(errc::prior_mismatch, "track and prior payload shapes differ");

  auto channel = wire::open_file_writer(out_path);
  auto sender = wire::open_sender(channel, prior.config(), prior,
                                  pick_sources(track, n_sources));
  for (const auto& f : track.frames) sender.send_frame(f.payload);
  sender.finish();

  print_bandwidth("sender", sender.bandwidth_report(), as_json);
  return 0;
}

int cmd_decode(const std::string& stream_path, const std::string& prior_path,
               const std::string& out_path, bool as_json) {
  auto prior = codec::PriorModel::load(prior_path);
  auto channel = wire::open_file_reader(stream_path);
  auto receiver = wire::open_receiver(channel, prior);

  std::vector<MotionPayload> payloads;
  try {
    for (;;) payloads.push_back(receiver.recv_frame());
  } catch (const Error& e) {
    if (e.code() != errc::channel_closed) throw;
  }

  write_track_file(out_path, payloads_to_track(payloads, receiver.config()));
  print_bandwidth("receiver", receiver.bandwidth_report(), as_json);
  return 0;
}

// ---- simulate -----------------------------------------------------------

int cmd_simulate(const std::string& track_path, const std::string& prior_path,
                 const std::string& channel_spec, const std::string& out_path,
                 bool as_json) {
  auto track = read_track_file(track_path);
  auto prior = codec::PriorModel::load(prior_path);
  if (!track.config.shape_equals(prior.config()))
    raise(errc::prior_mismatch, "track and prior payload shapes differ");
  const StreamConfig cfg = prior.config();

  std::vector<MotionPayload> sent, received;
  wire::BandwidthReport sender_report, receiver_report;

  auto run_sender = [&](std::shared_ptr<wire::Channel> ch) {
    auto sender = wire::open_sender(ch, cfg, prior, pick_sources(track, 3));
    for (const auto& f : track.frames) {
      sender.send_frame(f.payload);
      sent.push_back(sender.last_reconstruction());
    }
    sender.finish();
    sender_report = sender.bandwidth_report();
  };
  auto run_receiver = [&](std::shared_ptr<wire::Channel> ch) {
    auto receiver = wire::open_receiver(ch, prior);
    try {
      for (;;) received.push_back(receiver.recv_frame());
    } catch (const Error& e) {
      if (e.code() != errc::channel_closed) throw;
    }
    receiver_report = receiver.bandwidth_report();
  };

  // exceptions from the worker thread surface after join
  std::exception_ptr thread_error;
  auto guarded = [&thread_error](auto fn) {
    return [&thread_error, fn](auto... args) {
      try {
        fn(args...);
      } catch (...) {
        thread_error = std::current_exception();
      }
    };
  };

  auto join_around = [](std::thread& t, auto fn) {
    try {
      fn();
    } catch (...) {
      t.join();
      throw;
    }
    t.join();
  };

  if (channel_spec == "mem") {
    auto [tx, rx] = wire::memory_pipe();
    std::thread producer(guarded(run_sender), tx);
    join_around(producer, [&] { run_receiver(rx); });
  } else if (channel_spec.rfind("file:", 0) == 0) {
    const std::string path = channel_spec.substr(5);
    run_sender(wire::open_file_writer(path));
    run_receiver(wire::open_file_reader(path));
  } else if (channel_spec.rfind("tcp:", 0) == 0) {
    const std::string address = channel_spec.substr(4);
    std::thread listener(
        guarded([&](const std::string& a) { run_receiver(wire::tcp_listen(a)); }),
        address);
    join_around(listener, [&] { run_sender(wire::tcp_connect(address)); });
  } else {
    raise(errc::parse_error, "channel must be mem, file:PATH or tcp:HOST:PORT");
  }
  if (thread_error) std::rethrow_exception(thread_error);

  bool mirror = sent.size() == received.size();
  if (mirror)
    for (size_t i = 0; i < sent.size(); ++i)
      mirror = mirror && payload_equal(sent[i], received[i]);

  if (!out_path.empty())
    write_track_file(out_path, payloads_to_track(received, cfg));

  if (as_json) {
    json j = {{"channel", channel_spec},
              {"frames", received.size()},
              {"mirror_exact", mirror},
              {"sender", bandwidth_json(sender_report)},
              {"receiver", bandwidth_json(receiver_report)}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("channel=%s frames=%zu mirror_exact=%d\n", channel_spec.c_str(),
                received.size(), mirror ? 1 : 0);
    print_bandwidth("sender", sender_report, false);
    print_bandwidth("receiver", receiver_report, false);
  }
  return mirror ? 0 : 3;
}

// ---- fuse-demo ----------------------------------------------------------

int cmd_fuse_demo(const std::string& track_path, const std::string& out_dir,
                  int64_t frame, const std::string& sources_spec, int grid,
                  bool as_json) {
  auto track = read_track_file(track_path);
  if (track.frames.empty()) raise(errc::empty_input, "empty track");
  StreamConfig cfg = track.config;
  cfg.grid_h = grid;
  cfg.grid_w = grid;

  if (frame < 0 || frame >= int64_t(track.frames.size()))
    raise(errc::range_violation, "frame index outside the track");

  std::vector<size_t> source_indices;
  if (sources_spec == "auto") {
    source_indices = sampling::select_sources(track, 2);
  } else {
    std::stringstream ss(sources_spec);
    std::string item;
    while (std::getline(ss, item, ','))
      source_indices.push_back(size_t(std::stoull(item)));
    for (size_t idx : source_indices)
      if (idx >= track.frames.size())
        raise(errc::range_violation, "source index outside the track");
  }
  // canonical order makes permuted --sources byte-identical
  std::sort(source_indices.begin(), source_indices.end());
  source_indices.erase(
      std::unique(source_indices.begin(), source_indices.end()),
      source_indices.end());
  if (source_indices.empty()) raise(errc::empty_input, "no source frames");

  ReferencePose reference{synth::front_face_layout(cfg)};
  frontal::EncoderProvider enc = [&](int64_t id) {
    return synth::stub_encoder(
        track.frames[size_t(id)].payload.absolute_keypoints(), cfg);
  };
  auto fr = synth::make_affine_flow_provider(cfg.grid_h, cfg.grid_w);
  auto dm = synth::make_affine_motion_provider(cfg.grid_h, cfg.grid_w);
  auto dec = synth::make_identity_decoder();

  std::vector<frontal::SourceFrame> sources;
  for (size_t idx : source_indices)
    sources.push_back(
        {int64_t(idx), track.frames[idx].payload.absolute_keypoints()});

  auto fused = frontal::frontalize(sources, reference, enc, fr);
  const auto& drv = track.frames[size_t(frame)];
  auto animated =
      frontal::animate(fused, reference, drv.payload.absolute_keypoints(), dm,
                       dec, drv.payload.expression);

  std::filesystem::create_directories(out_dir);
  const std::string fused_path = out_dir + "/fused.fzfm";
  const std::string animated_path = out_dir + "/animated.fzfm";
  save_bytes(fused_path, serialize_feature_map(fused));
  save_bytes(animated_path, serialize_feature_map(animated));

  if (as_json) {
    json j = {{"sources", source_indices}, {"frame", frame},
              {"fused", fused_path},       {"animated", animated_path},
              {"channels", fused.channels}, {"grid", grid}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("sources=");
    for (size_t i = 0; i < source_indices.size(); ++i)
      std::printf("%s%zu", i ? "," : "", source_indices[i]);
    std::printf(" frame=%lld fused=%s animated=%s\n", (long long)frame,
                fused_path.c_str(), animated_path.c_str());
  }
  return 0;
}

// ---- sample -------------------------------------------------------------

int cmd_sample(const std::vector<std::string>& track_paths,
               const std::string& mode, uint64_t seed, int count, bool relax,
               double min_span, double near_tol, double threshold) {
  if (track_paths.empty()) raise(errc::empty_input, "no track files given");

  if (mode == "filter") {
    std::vector<PoseTrack> tracks;
    for (const auto& p : track_paths) tracks.push_back(read_track_file(p));
    auto kept = sampling::filter_rotation_tracks(tracks, threshold);
    for (size_t idx : kept) std::printf("%s\n", track_paths[idx].c_str());
    return 0;
  }

  auto track = read_track_file(track_paths[0]);
  std::mt19937_64 rng(seed);

  if (mode == "sources") {
    auto s = sampling::select_sources(track, 2);
    for (size_t i = 0; i < s.size(); ++i)
      std::printf("%s%zu", i ? " " : "", s[i]);
    std::printf("\n");
    return 0;
  }

  for (int i = 0; i < count; ++i) {
    if (mode == "triplet") {
      sampling::Triplet t;
      try {
        t = sampling::sample_triplet(track, min_span, rng);
      } catch (const Error& e) {
        if (e.code() == errc::no_valid_sample && relax)
          t = sampling::max_span_triplet(track);
        else
          throw;
      }
      std::printf("%zu %zu %zu\n", t.a, t.b, t.c);
    } else if (mode == "quad") {
      auto q = sampling::sample_quad(track, min_span, near_tol, rng);
      std::printf("%zu %zu %zu %zu\n", q.a, q.b1, q.b2, q.c);
    } else {
      raise(errc::parse_error, "unknown sample mode '" + mode + "'");
    }
  }
  return 0;
}

// ---- entropy ------------------------------------------------------------

int cmd_entropy(const std::string& prior_path, bool as_json) {
  auto prior = codec::PriorModel::load(prior_path);
  print_entropy(metrics::entropy_report(prior), as_json);
  return 0;
}

// ---- bench --------------------------------------------------------------

int cmd_bench(int frames, bool as_json) {
  using clock = std::chrono::steady_clock;

  ConfigFlags flags;  // sup-unsup-expr
  StreamConfig cfg = flags.resolve();
  auto specs = codec::default_field_specs();

  synth::GenParams gp;
  gp.config = cfg;
  gp.frames = 2000;
  gp.seed = 77;
  auto track = synth::gen_track(gp);
  auto prior =
      codec::PriorModel::build({quantize_track(track, cfg, specs)}, cfg, specs);

  // single-thread encode+decode over in-memory records
  codec::CodecState enc_state, dec_state;
  size_t total_bytes = 0;
  auto t0 = clock::now();
  for (int t = 0; t < frames; ++t) {
    const auto& payload = track.frames[size_t(t) % track.frames.size()].payload;
    auto frame = codec::encode_frame(enc_state, payload, prior, cfg, specs);
    total_bytes += frame.record.size();
    (void)codec::decode_frame(dec_state, frame.record, prior, cfg, specs);
  }
  auto t1 = clock::now();
  const double seconds = std::chrono::duration<double>(t1 - t0).count();
  const double fps = double(frames) / seconds;

  // kernel throughput on the default 32x32x32 embedding
  auto kps = synth::front_face_layout(cfg);
  auto fm = synth::stub_encoder(kps, cfg);
  KeypointSet moved = kps;
  for (auto& c : moved.coords) c.x = c.x * 0.9 + 0.05;
  auto [flow, conf] = synth::affine_flow(moved, kps, cfg.grid_h, cfg.grid_w);

  const int warp_iters = 2000;
  auto k0 = clock::now();
  double sink = 0.0;
  for (int i = 0; i < warp_iters; ++i) {
    auto warped = frontal::grid_sample(fm, flow);
    sink += warped.data[0];
  }
  auto k1 = clock::now();
  const double warps_per_sec =
      double(warp_iters) / std::chrono::duration<double>(k1 - k0).count();
  const double mpix_per_sec =
      warps_per_sec * double(fm.channels * fm.height * fm.width) / 1e6;

  const int fuse_iters = 1000;
  std::vector<FeatureMap> maps{fm, fm, fm};
  std::vector<ScalarMap> confs{conf, conf, conf};
  auto f0 = clock::now();
  for (int i = 0; i < fuse_iters; ++i) {
    auto [fused, weights] = frontal::fuse(maps, confs);
    sink += fused.data[0];
  }
  auto f1 = clock::now();
  const double fuses_per_sec =
      double(fuse_iters) / std::chrono::duration<double>(f1 - f0).count();

  if (as_json) {
    json j = {{"codec_frames", frames},
              {"codec_frames_per_sec", fps},
              {"codec_bits_per_frame", 8.0 * double(total_bytes) / frames},
              {"grid_sample_per_sec", warps_per_sec},
              {"grid_sample_mpix_per_sec", mpix_per_sec},
              {"fuse3_per_sec", fuses_per_sec},
              {"checksum", sink}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf(
        "codec_frames=%d codec_frames_per_sec=%.0f bits_per_frame=%.1f\n",
        frames, fps, 8.0 * double(total_bytes) / frames);
    std::printf("grid_sample_per_sec=%.0f (%.1f Mpix/s) fuse3_per_sec=%.0f\n",
                warps_per_sec, mpix_per_sec, fuses_per_sec);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"landmark-stream codec and frontalized-embedding toolkit"};
  app.require_subcommand(1);

  // gen-track
  auto* gen = app.add_subcommand("gen-track", "write a synthetic FZTRACK file");
  ConfigFlags gen_flags;
  std::string gen_out = "track.fzt";
  int gen_frames = 500;
  double gen_amplitude = 0.41;
  double gen_noise = 0.0005;
  uint64_t gen_seed = 1;
  add_config_flags(gen, gen_flags);
  gen->add_option("-o,--out", gen_out, "output path")->capture_default_str();
  gen->add_option("--frames", gen_frames)->capture_default_str();
  gen->add_option("--amplitude", gen_amplitude, "yaw sinusoid peak (rad)")
      ->capture_default_str();
  gen->add_option("--noise", gen_noise)->capture_default_str();
  gen->add_option("--seed", gen_seed)->capture_default_str();

  // train-prior
  auto* train =
      app.add_subcommand("train-prior", "build a prior model from track files");
  ConfigFlags train_flags;
  std::vector<std::string> train_tracks;
  std::string train_out = "prior.fzp";
  bool train_json = false;
  add_config_flags(train, train_flags);
  train->add_option("tracks", train_tracks, "FZTRACK files")->required();
  train->add_option("-o,--out", train_out)->capture_default_str();
  train->add_flag("--json", train_json);

  // encode
  auto* enc = app.add_subcommand("encode", "compress a track into a stream");
  std::string enc_track, enc_prior, enc_out = "stream.fzw";
  int enc_sources = 3;
  bool enc_json = false;
  enc->add_option("track", enc_track)->required();
  enc->add_option("--prior", enc_prior)->required();
  enc->add_option("-o,--out", enc_out)->capture_default_str();
  enc->add_option("--sources", enc_sources,
                  "source keypoint sets in the preamble")
      ->capture_default_str();
  enc->add_flag("--json", enc_json);

  // decode
  auto* dec = app.add_subcommand("decode", "decompress a stream into a track");
  std::string dec_stream, dec_prior, dec_out = "decoded.fzt";
  bool dec_json = false;
  dec->add_option("stream", dec_stream)->required();
  dec->add_option("--prior", dec_prior)->required();
  dec->add_option("-o,--out", dec_out)->capture_default_str();
  dec->add_flag("--json", dec_json);

  // simulate
  auto* sim = app.add_subcommand("simulate",
                                 "run sender and receiver over a live channel");
  std::string sim_track, sim_prior, sim_channel = "mem", sim_out;
  bool sim_json = false;
  sim->add_option("track", sim_track)->required();
  sim->add_option("--prior", sim_prior)->required();
  sim->add_option("--channel", sim_channel, "mem | file:PATH | tcp:HOST:PORT")
      ->capture_default_str();
  sim->add_option("-o,--out", sim_out, "write the received track here");
  sim->add_flag("--json", sim_json);

  // fuse-demo
  auto* demo = app.add_subcommand(
      "fuse-demo", "frontalize sources and animate one driving frame");
  std::string demo_track, demo_dir = "fuse-out", demo_sources = "auto";
  int64_t demo_frame = 0;
  int demo_grid = 32;
  bool demo_json = false;
  demo->add_option("track", demo_track)->required();
  demo->add_option("--out-dir", demo_dir)->capture_default_str();
  demo->add_option("--frame", demo_frame, "driving frame index")
      ->capture_default_str();
  demo->add_option("--sources", demo_sources,
                   "auto or comma-separated indices")
      ->capture_default_str();
  demo->add_option("--grid", demo_grid)->capture_default_str();
  demo->add_flag("--json", demo_json);

  // sample
  auto* smp =
      app.add_subcommand("sample", "yaw-driven frame selection utilities");
  std::vector<std::string> smp_tracks;
  std::string smp_mode = "triplet";
  uint64_t smp_seed = 1;
  int smp_count = 1;
  bool smp_relax = false;
  double smp_span = sampling::kDefaultMinSpan;
  double smp_tol = sampling::kDefaultNearTol;
  double smp_threshold = sampling::kDefaultRotationThreshold;
  smp->add_option("tracks", smp_tracks)->required();
  smp->add_option("--mode", smp_mode, "triplet | quad | sources | filter")
      ->capture_default_str();
  smp->add_option("--seed", smp_seed)->capture_default_str();
  smp->add_option("--count", smp_count)->capture_default_str();
  smp->add_flag("--relax", smp_relax,
                "fall back to the widest-span triple when none qualify");
  smp->add_option("--min-span", smp_span)->capture_default_str();
  smp->add_option("--near-tol", smp_tol)->capture_default_str();
  smp->add_option("--threshold", smp_threshold)->capture_default_str();

  // entropy
  auto* ent = app.add_subcommand("entropy", "report a prior's entropies");
  std::string ent_prior;
  bool ent_json = false;
  ent->add_option("--prior", ent_prior)->required();
  ent->add_flag("--json", ent_json);

  // bench
  auto* bench = app.add_subcommand("bench", "codec and kernel throughput");
  int bench_frames = 30000;
  bool bench_json = false;
  bench->add_option("--frames", bench_frames)->capture_default_str();
  bench->add_flag("--json", bench_json);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed())
      return cmd_gen_track(gen_out, gen_flags, gen_frames, gen_amplitude,
                           gen_noise, gen_seed);
    if (train->parsed())
      return cmd_train_prior(train_tracks, train_out, train_flags, train_json);
    if (enc->parsed())
      return cmd_encode(enc_track, enc_prior, enc_out, enc_sources, enc_json);
    if (dec->parsed())
      return cmd_decode(dec_stream, dec_prior, dec_out, dec_json);
    if (sim->parsed())
      return cmd_simulate(sim_track, sim_prior, sim_channel, sim_out, sim_json);
    if (demo->parsed())
      return cmd_fuse_demo(demo_track, demo_dir, demo_frame, demo_sources,
                           demo_grid, demo_json);
    if (smp->parsed())
      return cmd_sample(smp_tracks, smp_mode, smp_seed, smp_count, smp_relax,
                        smp_span, smp_tol, smp_threshold);
    if (ent->parsed()) return cmd_entropy(ent_prior, ent_json);
    if (bench->parsed()) return cmd_bench(bench_frames, bench_json);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_protocol_error(e.code()) ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
