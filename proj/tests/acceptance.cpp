// Acceptance suite: one pass/fail line per criterion. Exits nonzero if
// any criterion fails. `--fzstream PATH` points at the CLI binary used
// by the throughput criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <tuple>
#include <string>
#include <vector>

#include <json.hpp>

#include "fz/codec.hpp"
#include "fz/kernels.hpp"
#include "fz/metrics.hpp"
#include "fz/sampling.hpp"
#include "fz/synth.hpp"
#include "fz/wire.hpp"

using namespace fz;

namespace {

std::string g_fzstream_path;

struct Failure {
  std::string detail;
};

void require(bool ok, const std::string& detail) {
  if (!ok) throw Failure{detail};
}

StreamConfig make_config(int n_sup, int n_unsup, bool jac, int m) {
  StreamConfig cfg;
  cfg.n_sup = n_sup;
  cfg.n_unsup = n_unsup;
  cfg.with_jacobians = jac;
  cfg.expression_size = m;
  cfg.keyframe_interval = 100;
  cfg.fps = 15;
  return cfg;
}

// The four transmitted-payload configurations.
std::vector<std::pair<std::string, StreamConfig>> table_configs() {
  return {{"fom", make_config(0, 10, true, 0)},
          {"sup", make_config(33, 0, false, 0)},
          {"sup-unsup", make_config(33, 10, true, 0)},
          {"sup-unsup-expr", make_config(33, 10, true, 16)}};
}

std::vector<codec::QuantizedPayload> quantize_track(
    const PoseTrack& track, const StreamConfig& cfg,
    const codec::FieldSpecTable& specs) {
  codec::CodecState state;
  std::vector<codec::QuantizedPayload> out;
  for (const auto& f : track.frames)
    out.push_back(codec::delta_step(state, f.payload, cfg, specs));
  return out;
}

codec::PriorModel train_prior(const StreamConfig& cfg,
                              std::vector<uint64_t> seeds, int frames) {
  auto specs = codec::default_field_specs();
  std::vector<std::vector<codec::QuantizedPayload>> streams;
  for (uint64_t seed : seeds) {
    synth::GenParams gp;
    gp.config = cfg;
    gp.frames = frames;
    gp.seed = seed;
    streams.push_back(quantize_track(synth::gen_track(gp), cfg, specs));
  }
  return codec::PriorModel::build(streams, cfg, specs);
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

double max_abs_diff(const FeatureMap& a, const FeatureMap& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i)
    m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

// 1. Lossless transport across all four configurations.
void criterion_lossless_transport() {
  auto configs = table_configs();
  auto specs = codec::default_field_specs();
  int stream_id = 0;
  for (int s = 0; s < 20; ++s) {
    const auto& [name, cfg] = configs[size_t(s % 4)];
    auto prior = train_prior(cfg, {uint64_t(300 + s)}, 400);

    synth::GenParams gp;
    gp.config = cfg;
    gp.frames = 500;
    gp.seed = uint64_t(1000 + s);
    auto track = synth::gen_track(gp);

    auto [tx, rx] = wire::memory_pipe();
    auto sender = wire::open_sender(tx, cfg, prior);
    auto receiver = wire::open_receiver(rx, prior);
    for (const auto& f : track.frames) {
      sender.send_frame(f.payload);
      auto got = receiver.recv_frame();
      require(payload_equal(got, sender.last_reconstruction()),
              "stream " + std::to_string(stream_id) + " (" + name +
                  "): payload mismatch at frame " +
                  std::to_string(got.frame_index));
      require(sender.state() == receiver.state(),
              "stream " + std::to_string(stream_id) + " (" + name +
                  "): mirror state diverged");
    }
    ++stream_id;
  }
}

// 2. Quantizer round-trip bound and endpoint codes.
void criterion_quantizer_bound() {
  auto specs = codec::default_field_specs();
  const int expected_bits[] = {12, 8, 12, 16, 10};
  for (int f = 0; f < codec::kFieldCount; ++f)
    require(specs[size_t(f)].bits == expected_bits[f],
            "unexpected default bit width");

  std::mt19937_64 rng(2024);
  for (const auto& spec : specs) {
    require(codec::quantize(spec.lo, spec) == 0, "lo endpoint code");
    require(codec::quantize(spec.hi, spec) == spec.levels() - 1,
            "hi endpoint code");
    std::uniform_real_distribution<double> v(spec.lo, spec.hi);
    const double bound = spec.step() / 2.0 * (1.0 + 1e-12);
    for (int i = 0; i < 10000; ++i) {
      const double x = v(rng);
      const double err =
          std::abs(x - codec::dequantize(codec::quantize(x, spec), spec));
      require(err <= bound, "round-trip error " + std::to_string(err) +
                                " exceeds step/2");
    }
  }
}

// 3. Arithmetic-coded size within 2% + 64 bits of the sample's
// information content, per context, on prior-drawn symbols.
void criterion_entropy_efficiency() {
  auto cfg = make_config(33, 10, true, 16);
  auto prior = train_prior(cfg, {1, 2}, 1000);
  std::mt19937_64 rng(77);

  for (int ctx = 0; ctx < codec::kContextCount; ++ctx) {
    if (!prior.context_active(ctx)) continue;
    const auto& table = prior.table(ctx);
    std::vector<double> w(table.size());
    for (uint32_t s = 0; s < table.size(); ++s) w[s] = double(table.freq(s));
    std::discrete_distribution<uint32_t> draw(w.begin(), w.end());

    codec::RangeEncoder enc;
    double info_bits = 0.0;
    for (int i = 0; i < 100000; ++i) {
      const uint32_t s = draw(rng);
      info_bits += table.cost_bits(s);
      enc.encode(table, s);
    }
    const double coded_bits = 8.0 * double(enc.finish().size());
    require(coded_bits <= 1.02 * info_bits + 64.0,
            codec::context_name(ctx) + ": coded " +
                std::to_string(coded_bits) + " bits vs bound " +
                std::to_string(1.02 * info_bits + 64.0));
  }
}

// 4. Bandwidth plausibility on DFDC-like synthetic motion.
void criterion_bandwidth() {
  auto specs = codec::default_field_specs();
  for (const auto& [name, cfg] : table_configs()) {
    auto prior = train_prior(cfg, {11, 12, 13, 14}, 1200);

    synth::GenParams gp;
    gp.config = cfg;
    gp.frames = 1000;
    gp.seed = 99;  // held out from training
    auto track = synth::gen_track(gp);

    auto [tx, rx] = wire::memory_pipe();
    auto sender = wire::open_sender(tx, cfg, prior);
    auto receiver = wire::open_receiver(rx, prior);
    for (const auto& f : track.frames) {
      sender.send_frame(f.payload);
      (void)receiver.recv_frame();
    }
    auto report = sender.bandwidth_report();
    const double raw = double(codec::raw_bits_per_frame(cfg, specs));
    require(report.bits_per_frame() <= 0.45 * raw,
            name + ": " + std::to_string(report.bits_per_frame()) +
                " bits/frame vs 45% budget " + std::to_string(0.45 * raw));
    if (name == "sup-unsup-expr")
      require(report.kbps() <= 7.0,
              name + ": " + std::to_string(report.kbps()) + " kbps > 7.0");
  }
}

// 5. grid_sample equals the brute-force bilinear oracle exactly.
void criterion_warp_oracle() {
  std::mt19937_64 rng(4040);
  std::uniform_real_distribution<double> value(-3.0, 3.0);
  std::uniform_real_distribution<double> loc(-3.0, 3.0);  // beyond [-1, 1]
  for (int iter = 0; iter < 100; ++iter) {
    const int h = 2 + int(rng() % 31);
    const int w = 2 + int(rng() % 31);
    const int c = 1 + int(rng() % 8);
    FeatureMap fm(c, h, w);
    for (auto& v : fm.data) v = value(rng);
    FlowField flow(h, w);
    for (auto& v : flow.data) v = loc(rng);

    auto fast = frontal::grid_sample(fm, flow);
    auto slow = synth::brute_force_bilinear(fm, flow);
    require(fast.data == slow.data,
            "warp mismatch at iteration " + std::to_string(iter));
  }
}

// 6. Fusion properties over random instances.
void criterion_fusion_properties() {
  std::mt19937_64 rng(5050);
  std::uniform_real_distribution<double> value(-2.0, 2.0);
  std::uniform_real_distribution<double> logit(-20.0, 20.0);

  for (int iter = 0; iter < 50; ++iter) {
    const int n = 2 + int(rng() % 4);
    const int h = 4 + int(rng() % 12);
    const int w = 4 + int(rng() % 12);
    std::vector<FeatureMap> maps;
    std::vector<ScalarMap> confs;
    for (int i = 0; i < n; ++i) {
      FeatureMap fm(3, h, w);
      for (auto& v : fm.data) v = value(rng);
      maps.push_back(std::move(fm));
      ScalarMap c(h, w);
      for (auto& v : c.data) v = logit(rng);
      confs.push_back(std::move(c));
    }

    auto [fused, weights] = frontal::fuse(maps, confs);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double sum = 0.0;
        for (const auto& wm : weights) sum += wm.at(y, x);
        require(std::abs(sum - 1.0) < 1e-6, "partition of unity violated");
      }

    std::vector<size_t> perm(static_cast<size_t>(n));
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<FeatureMap> pmaps;
    std::vector<ScalarMap> pconfs;
    for (size_t i : perm) {
      pmaps.push_back(maps[i]);
      pconfs.push_back(confs[i]);
    }
    auto [pfused, pweights] = frontal::fuse(pmaps, pconfs);
    require(max_abs_diff(fused, pfused) < 1e-12,
            "permutation invariance violated");

    auto [single, sweights] = frontal::fuse({maps[0]}, {confs[0]});
    require(single.data == maps[0].data, "N=1 fusion is not the identity");
    for (double v : sweights[0].data)
      require(v == 1.0, "N=1 weight map is not one");

    // dominance: a +40 boost must win everywhere, so the pre-boost
    // confidence span stays below the 40 - ln(1e-12/(n-1)) margin
    std::uniform_real_distribution<double> narrow(-5.0, 5.0);
    std::vector<ScalarMap> base_confs;
    for (int i = 0; i < n; ++i) {
      ScalarMap c(h, w);
      for (auto& v : c.data) v = narrow(rng);
      base_confs.push_back(std::move(c));
    }
    const size_t boosted = size_t(rng() % size_t(n));
    auto boosted_confs = base_confs;
    for (auto& v : boosted_confs[boosted].data) v += 40.0;
    auto [dfused, dweights] = frontal::fuse(maps, boosted_confs);
    for (double v : dweights[boosted].data)
      require(v > 1.0 - 1e-12, "dominant weight below 1 - 1e-12");
    require(max_abs_diff(dfused, maps[boosted]) < 1e-6,
            "dominant fusion not within 1e-6 of its source");
  }
}

// 7. Samplers match brute-force enumeration on 200 random tracks.
void criterion_sampler_correctness() {
  std::mt19937_64 rng(6060);
  std::uniform_real_distribution<double> yaw(-0.6, 0.6);

  for (int iter = 0; iter < 200; ++iter) {
    const size_t n = 3 + rng() % 18;  // lengths up to 20
    std::vector<double> yaws(n);
    for (auto& v : yaws) v = yaw(rng);
    PoseTrack track;
    for (size_t i = 0; i < n; ++i) {
      TrackFrame f;
      f.frame_index = int64_t(i);
      f.yaw = yaws[i];
      track.frames.push_back(std::move(f));
    }

    // triplets
    std::set<std::tuple<size_t, size_t, size_t>> valid3;
    for (size_t a = 0; a < n; ++a)
      for (size_t b = 0; b < n; ++b)
        for (size_t c = 0; c < n; ++c) {
          if (a == b || b == c || a == c) continue;
          if (yaws[a] > yaws[b] && yaws[b] > yaws[c] &&
              yaws[a] - yaws[c] > sampling::kDefaultMinSpan)
            valid3.insert({a, b, c});
        }
    try {
      auto t = sampling::sample_triplet(track, sampling::kDefaultMinSpan, rng);
      require(valid3.count({t.a, t.b, t.c}) == 1,
              "triplet outside the brute-force valid set");
      require(yaws[t.a] > yaws[t.b] && yaws[t.b] > yaws[t.c] &&
                  yaws[t.a] - yaws[t.c] > sampling::kDefaultMinSpan,
              "triplet constraints violated post hoc");
    } catch (const Error& e) {
      require(e.code() == errc::no_valid_sample, "unexpected triplet error");
      require(valid3.empty(), "sampler missed valid triplets");
    }

    // quads
    if (n >= 4) {
      std::set<std::tuple<size_t, size_t, size_t, size_t>> valid4;
      for (size_t a = 0; a < n; ++a)
        for (size_t b1 = 0; b1 < n; ++b1)
          for (size_t b2 = 0; b2 < n; ++b2)
            for (size_t c = 0; c < n; ++c) {
              if (a == b1 || a == b2 || a == c || b1 == b2 || b1 == c ||
                  b2 == c)
                continue;
              if (yaws[a] > yaws[b1] && yaws[b1] > yaws[c] &&
                  yaws[a] - yaws[c] > sampling::kDefaultMinSpan &&
                  std::abs(yaws[a] - yaws[b2]) < sampling::kDefaultNearTol)
                valid4.insert({a, b1, b2, c});
            }
      try {
        auto q = sampling::sample_quad(track, sampling::kDefaultMinSpan,
                                       sampling::kDefaultNearTol, rng);
        require(valid4.count({q.a, q.b1, q.b2, q.c}) == 1,
                "quad outside the brute-force valid set");
        require(yaws[q.a] > yaws[q.b1] && yaws[q.b1] > yaws[q.c],
                "quad ordering violated");
        require(yaws[q.a] - yaws[q.c] > sampling::kDefaultMinSpan,
                "quad span violated");
        require(std::abs(yaws[q.a] - yaws[q.b2]) < sampling::kDefaultNearTol,
                "quad nearness violated");
      } catch (const Error& e) {
        require(e.code() == errc::no_valid_sample, "unexpected quad error");
        require(valid4.empty(), "sampler missed valid quads");
      }
    }
  }
}

// 8. Transmitted pipeline equals the locally computed pipeline.
void criterion_end_to_end() {
  auto cfg = make_config(33, 10, true, 16);
  cfg.grid_h = cfg.grid_w = 32;
  auto prior = train_prior(cfg, {21, 22}, 600);

  synth::GenParams gp;
  gp.config = cfg;
  gp.frames = 60;
  gp.seed = 777;
  auto track = synth::gen_track(gp);

  std::vector<KeypointSet> sources;
  for (size_t idx : sampling::select_sources(track, 2))
    sources.push_back(track.frames[idx].payload.absolute_keypoints());

  auto [tx, rx] = wire::memory_pipe();
  auto sender = wire::open_sender(tx, cfg, prior, sources);
  auto receiver = wire::open_receiver(rx, prior);

  std::vector<MotionPayload> sent, got;
  for (const auto& f : track.frames) {
    sender.send_frame(f.payload);
    sent.push_back(sender.last_reconstruction());
    got.push_back(receiver.recv_frame());
  }

  auto pipeline = [&](const std::vector<KeypointSet>& srcs,
                      const std::vector<MotionPayload>& frames) {
    ReferencePose reference{synth::front_face_layout(cfg)};
    frontal::EncoderProvider enc = [&](int64_t id) {
      return synth::stub_encoder(srcs[size_t(id)], cfg);
    };
    auto fr = synth::make_affine_flow_provider(cfg.grid_h, cfg.grid_w);
    auto dm = synth::make_affine_motion_provider(cfg.grid_h, cfg.grid_w);
    auto dec = synth::make_identity_decoder();

    std::vector<frontal::SourceFrame> sf;
    for (size_t i = 0; i < srcs.size(); ++i)
      sf.push_back({int64_t(i), srcs[i]});
    auto fused = frontal::frontalize(sf, reference, enc, fr);

    std::vector<FeatureMap> outputs;
    for (int t = 0; t < 50; ++t)
      outputs.push_back(frontal::animate(
          fused, reference, frames[size_t(t)].absolute_keypoints(), dm, dec,
          frames[size_t(t)].expression));
    return outputs;
  };

  auto sender_side = pipeline(sources, sent);
  auto receiver_side = pipeline(receiver.header().sources, got);
  for (size_t t = 0; t < sender_side.size(); ++t)
    require(max_abs_diff(sender_side[t], receiver_side[t]) < 1e-6,
            "pipeline outputs differ at frame " + std::to_string(t));
}

// 9. Throughput, measured by the CLI's bench command.
void criterion_throughput() {
  require(!g_fzstream_path.empty(), "--fzstream PATH not provided");
  const std::string cmd = g_fzstream_path + " bench --frames 30000 --json";
  FILE* pipe = popen(cmd.c_str(), "r");
  require(pipe != nullptr, "failed to launch " + cmd);
  std::string output;
  char buf[4096];
  while (size_t n = fread(buf, 1, sizeof buf, pipe)) output.append(buf, n);
  const int status = pclose(pipe);
  require(status == 0, "bench exited with status " + std::to_string(status));

  auto j = nlohmann::json::parse(output);
  const double fps = j.at("codec_frames_per_sec").get<double>();
  std::printf("        cmd_bench: %.0f frames/s encode+decode\n", fps);
  require(fps >= 15000.0,
          "codec at " + std::to_string(fps) + " frames/s, need 15000");
}

// 10. NME sanity.
void criterion_nme() {
  std::mt19937_64 rng(7070);
  std::uniform_real_distribution<double> coord(-0.5, 0.5);
  std::normal_distribution<double> jitter(0.0, 0.05);

  for (int iter = 0; iter < 100; ++iter) {
    const size_t n = 4 + rng() % 40;
    KeypointSet gt;
    gt.coords.resize(n);
    for (auto& c : gt.coords) c = Vec2{coord(rng), coord(rng)};
    require(metrics::nme(gt, gt) == 0.0, "nme of identical sets nonzero");

    KeypointSet pred = gt;
    for (auto& c : pred.coords) {
      c.x += jitter(rng);
      c.y += jitter(rng);
    }

    // independent loop oracle
    double min_x = gt.coords[0].x, max_x = min_x;
    double min_y = gt.coords[0].y, max_y = min_y;
    for (const auto& c : gt.coords) {
      min_x = std::min(min_x, c.x);
      max_x = std::max(max_x, c.x);
      min_y = std::min(min_y, c.y);
      max_y = std::max(max_y, c.y);
    }
    const double diag = std::hypot(max_x - min_x, max_y - min_y);
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i)
      acc += std::hypot(pred.coords[i].x - gt.coords[i].x,
                        pred.coords[i].y - gt.coords[i].y);
    const double want = 100.0 * acc / (double(n) * diag);
    const double have = metrics::nme(pred, gt);
    require(std::abs(have - want) < 1e-12, "nme disagrees with loop oracle");

    const double lambda = 37.5;
    KeypointSet gt_s = gt, pred_s = pred;
    for (auto& c : gt_s.coords) c = Vec2{lambda * c.x, lambda * c.y};
    for (auto& c : pred_s.coords) c = Vec2{lambda * c.x, lambda * c.y};
    require(std::abs(metrics::nme(pred_s, gt_s) - have) <
                1e-12 * std::max(1.0, have),
            "nme not scale invariant");
  }
}

struct Criterion {
  int number;
  const char* description;
  std::function<void()> run;
  double time_limit_seconds;  // 0 = unlimited
};

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--fzstream") g_fzstream_path = argv[i + 1];

  const std::vector<Criterion> criteria = {
      {1, "lossless transport over 20 streams x 500 frames, 4 configs",
       criterion_lossless_transport, 30.0},
      {2, "quantizer bound and endpoint codes (12/8/16/10 bits)",
       criterion_quantizer_bound, 5.0},
      {3, "arithmetic coder within 1.02x entropy + 64 bits per context",
       criterion_entropy_efficiency, 10.0},
      {4, "bits/frame <= 45% of raw budget; sup-unsup-expr <= 7 kbps",
       criterion_bandwidth, 60.0},
      {5, "grid_sample exactly matches the brute-force bilinear oracle",
       criterion_warp_oracle, 5.0},
      {6, "fusion: partition of unity, permutation, N=1, +40 dominance",
       criterion_fusion_properties, 10.0},
      {7, "samplers match brute-force enumeration on 200 random tracks",
       criterion_sampler_correctness, 20.0},
      {8, "transmitted frontalize+animate equals the local pipeline",
       criterion_end_to_end, 20.0},
      {9, "encode+decode throughput >= 15000 frames/s (cmd_bench)",
       criterion_throughput, 0.0},
      {10, "NME: zero at identity, scale invariant, matches loop oracle",
       criterion_nme, 5.0},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
      c.run();
    } catch (const Failure& f) {
      ok = false;
      detail = f.detail;
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    auto t1 = std::chrono::steady_clock::now();
    const double seconds = std::chrono::duration<double>(t1 - t0).count();
    if (ok && c.time_limit_seconds > 0.0 && seconds >= c.time_limit_seconds) {
      ok = false;
      detail = "runtime " + std::to_string(seconds) + " s exceeds the " +
               std::to_string(c.time_limit_seconds) + " s budget";
    }
    std::printf("[%s] criterion %2d: %s (%.2f s)\n", ok ? "PASS" : "FAIL",
                c.number, c.description, seconds);
    if (!ok) {
      std::printf("        %s\n", detail.c_str());
      ++failures;
    }
  }

  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
