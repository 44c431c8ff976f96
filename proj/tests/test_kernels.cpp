#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fz/feature_io.hpp"
#include "fz/kernels.hpp"
#include "fz/synth.hpp"

using namespace fz;
using namespace fz::frontal;

namespace {

double max_abs_diff(const FeatureMap& a, const FeatureMap& b) {
  REQUIRE(a.same_shape(b));
  double m = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i)
    m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

FeatureMap random_map(int c, int h, int w, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> v(-2.0, 2.0);
  FeatureMap fm(c, h, w);
  for (auto& x : fm.data) x = v(rng);
  return fm;
}

FlowField random_flow(int h, int w, std::mt19937_64& rng, double span = 3.0) {
  std::uniform_real_distribution<double> v(-span, span);
  FlowField flow(h, w);
  for (auto& x : flow.data) x = v(rng);
  return flow;
}

KeypointSet single_point(double x, double y) {
  KeypointSet kps;
  kps.coords.push_back({x, y});
  return kps;
}

StreamConfig grid_config(int h, int w) {
  StreamConfig cfg;
  cfg.grid_h = h;
  cfg.grid_w = w;
  return cfg;
}

}  // namespace

TEST_CASE("heatmaps vanish when source equals destination") {
  std::mt19937_64 rng(50);
  StreamConfig cfg = grid_config(16, 16);
  auto kps = synth::front_face_layout(cfg);
  auto maps = keypoint_heatmaps(kps, kps, 16, 16);
  for (double v : maps.data) CHECK(v == 0.0);
}

TEST_CASE("heatmap channel matches a direct Gaussian evaluation") {
  auto maps =
      keypoint_heatmaps(single_point(0, 0), single_point(0.5, 0), 32, 32, 0.1);
  REQUIRE(maps.channels == 1);
  double worst = 0.0;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      const double gx = 2.0 * x / 31.0 - 1.0;
      const double gy = 2.0 * y / 31.0 - 1.0;
      const double want =
          std::exp(-((gx - 0.5) * (gx - 0.5) + gy * gy) / 0.02) -
          std::exp(-(gx * gx + gy * gy) / 0.02);
      worst = std::max(worst, std::abs(maps.at(0, y, x) - want));
    }
  CHECK(worst < 1e-12);
}

TEST_CASE("43 keypoints give a 43x32x32 tensor") {
  StreamConfig cfg;
  cfg.n_sup = 33;
  cfg.n_unsup = 10;
  auto kps = synth::front_face_layout(cfg);
  auto maps = keypoint_heatmaps(kps, kps, 32, 32);
  CHECK(maps.channels == 43);
  CHECK(maps.height == 32);
  CHECK(maps.width == 32);
}

TEST_CASE("heatmaps are antisymmetric in their endpoints") {
  StreamConfig cfg = grid_config(24, 24);
  cfg.n_sup = 7;
  cfg.n_unsup = 0;
  auto a = synth::front_face_layout(cfg);
  KeypointSet b = a;
  for (auto& c : b.coords) {
    c.x = -c.x * 0.7;
    c.y += 0.1;
  }
  auto ab = keypoint_heatmaps(a, b, 24, 24);
  auto ba = keypoint_heatmaps(b, a, 24, 24);
  double worst = 0.0;
  for (size_t i = 0; i < ab.data.size(); ++i)
    worst = std::max(worst, std::abs(ab.data[i] + ba.data[i]));
  CHECK(worst < 1e-12);
}

TEST_CASE("heatmaps validate their inputs") {
  CHECK_THROWS_AS(
      (void)keypoint_heatmaps(single_point(0, 0), KeypointSet{}, 8, 8), Error);
  CHECK_THROWS_AS((void)keypoint_heatmaps(single_point(0, 0),
                                          single_point(0, 0), 8, 8, 0.0),
                  Error);
}

TEST_CASE("identity flow reproduces the input exactly") {
  std::mt19937_64 rng(51);
  // sizes whose pixel centers have exact normalized preimages
  for (int n : {2, 4, 8, 33, 64}) {
    auto fm = random_map(3, n, n, rng);
    auto [flow, conf] = synth::identity_flow(n, n);
    auto out = grid_sample(fm, flow);
    CHECK(out.data == fm.data);
    for (double c : conf.data) CHECK(c == 1.0);
  }
}

TEST_CASE("midpoint sample interpolates two horizontal texels") {
  FeatureMap fm(1, 2, 2);
  fm.at(0, 0, 0) = 0.0;
  fm.at(0, 0, 1) = 1.0;
  fm.at(0, 1, 0) = 2.0;
  fm.at(0, 1, 1) = 3.0;

  FlowField flow(2, 2);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 2; ++x) {
      flow.x(y, x) = 0.0;   // halfway between columns
      flow.y(y, x) = -1.0;  // top row
    }
  auto out = grid_sample(fm, flow);
  auto oracle = synth::brute_force_bilinear(fm, flow);
  CHECK(max_abs_diff(out, oracle) == 0.0);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 2; ++x)
      CHECK(out.at(0, y, x) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("far out-of-range samples read zero") {
  std::mt19937_64 rng(52);
  auto fm = random_map(2, 4, 4, rng);
  FlowField flow(4, 4);
  for (auto& v : flow.data) v = -5.0;
  auto out = grid_sample(fm, flow);
  for (double v : out.data) CHECK(v == 0.0);
}

TEST_CASE("grid_sample is linear in the sampled map") {
  std::mt19937_64 rng(53);
  const int h = 12, w = 10;
  auto a = random_map(4, h, w, rng);
  auto b = random_map(4, h, w, rng);
  auto flow = random_flow(h, w, rng, 1.5);
  const double alpha = 0.7, beta = -1.3;

  FeatureMap mix(4, h, w);
  for (size_t i = 0; i < mix.data.size(); ++i)
    mix.data[i] = alpha * a.data[i] + beta * b.data[i];

  auto lhs = grid_sample(mix, flow);
  auto ga = grid_sample(a, flow);
  auto gb = grid_sample(b, flow);
  double worst = 0.0;
  for (size_t i = 0; i < lhs.data.size(); ++i)
    worst = std::max(worst, std::abs(lhs.data[i] - (alpha * ga.data[i] +
                                                    beta * gb.data[i])));
  CHECK(worst < 1e-9);
}

TEST_CASE("grid_sample agrees with the brute-force oracle exactly") {
  std::mt19937_64 rng(54);
  for (int iter = 0; iter < 120; ++iter) {
    const int h = 2 + int(rng() % 14);
    const int w = 2 + int(rng() % 14);
    const int c = 1 + int(rng() % 4);
    auto fm = random_map(c, h, w, rng);
    auto flow = random_flow(h, w, rng, 3.0);  // includes out-of-range
    auto fast = grid_sample(fm, flow);
    auto slow = synth::brute_force_bilinear(fm, flow);
    CHECK(fast.data == slow.data);
  }
}

TEST_CASE("grid_sample rejects mismatched shapes") {
  FeatureMap fm(1, 4, 4);
  FlowField flow(4, 5);
  CHECK_THROWS_AS((void)grid_sample(fm, flow), Error);
}

TEST_CASE("extreme finite sampling locations read zero and match the oracle") {
  std::mt19937_64 rng(154);
  auto fm = random_map(2, 8, 8, rng);
  FlowField flow(8, 8);
  const double extremes[] = {1e8,   -1e8,  1e11,  -1e11, 4e9,
                             -4e9,  1e300, -1e300, 2.5e9, -2.5e9};
  size_t k = 0;
  for (auto& v : flow.data) v = extremes[k++ % std::size(extremes)];

  auto out = grid_sample(fm, flow);
  auto oracle = synth::brute_force_bilinear(fm, flow);
  CHECK(out.data == oracle.data);
  for (double v : out.data) CHECK(v == 0.0);
}

TEST_CASE("frontalize rejects encoder output misaligned with the flow grid") {
  StreamConfig cfg;
  cfg.n_sup = 8;
  cfg.n_unsup = 0;
  cfg.grid_h = cfg.grid_w = 16;
  auto kps = synth::front_face_layout(cfg);
  EncoderProvider enc = [&](int64_t) {
    return synth::stub_encoder(kps, cfg, 4);  // 16x16 maps
  };
  auto fr = synth::make_affine_flow_provider(32, 32);  // 32x32 flows
  CHECK_THROWS_AS((void)frontalize({{0, kps}}, ReferencePose{kps}, enc, fr),
                  Error);
}

TEST_CASE("occlusion multiplies element-wise") {
  std::mt19937_64 rng(55);
  auto fm = random_map(3, 6, 5, rng);

  ScalarMap ones(6, 5, 1.0);
  CHECK(max_abs_diff(apply_occlusion(fm, ones), fm) == 0.0);

  ScalarMap zeros(6, 5, 0.0);
  for (double v : apply_occlusion(fm, zeros).data) CHECK(v == 0.0);

  ScalarMap mask(6, 5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& v : mask.data) v = u(rng);
  auto out = apply_occlusion(fm, mask);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 5; ++x)
        CHECK(out.at(c, y, x) == fm.at(c, y, x) * mask.at(y, x));
}

TEST_CASE("occlusion validates mask range and shape") {
  FeatureMap fm(1, 3, 3);
  ScalarMap bad(3, 3, 1.5);
  CHECK_THROWS_AS((void)apply_occlusion(fm, bad), Error);
  ScalarMap small(2, 3, 0.5);
  CHECK_THROWS_AS((void)apply_occlusion(fm, small), Error);
}

TEST_CASE("fusing a single source is the identity") {
  std::mt19937_64 rng(56);
  auto fm = random_map(4, 8, 8, rng);
  ScalarMap conf(8, 8);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (auto& v : conf.data) v = u(rng);

  auto [fused, weights] = fuse({fm}, {conf});
  CHECK(fused.data == fm.data);
  REQUIRE(weights.size() == 1);
  for (double w : weights[0].data) CHECK(w == 1.0);
}

TEST_CASE("equal confidences average the sources") {
  std::mt19937_64 rng(57);
  auto a = random_map(2, 6, 6, rng);
  auto b = random_map(2, 6, 6, rng);
  ScalarMap conf(6, 6, 3.7);

  auto [fused, weights] = fuse({a, b}, {conf, conf});
  for (size_t i = 0; i < fused.data.size(); ++i)
    CHECK(fused.data[i] ==
          doctest::Approx(0.5 * a.data[i] + 0.5 * b.data[i]).epsilon(1e-15));
  for (const auto& w : weights)
    for (double v : w.data) CHECK(v == 0.5);
}

TEST_CASE("unit confidence gap gives the logistic weight") {
  FeatureMap a(1, 1, 2);
  FeatureMap b(1, 1, 2);
  ScalarMap ca(1, 2);
  ScalarMap cb(1, 2);
  ca.at(0, 0) = 1.0;
  cb.at(0, 0) = 0.0;  // c1 - c2 = 1 at pixel 0
  ca.at(0, 1) = -2.0;
  cb.at(0, 1) = -2.0;

  auto [fused, weights] = fuse({a, b}, {ca, cb});
  const long double expected = 1.0L / (1.0L + std::exp(-1.0L));
  CHECK(std::abs(weights[0].at(0, 0) - double(expected)) < 1e-12);
  CHECK(weights[0].at(0, 0) == doctest::Approx(0.731058578630005).epsilon(1e-12));
}

TEST_CASE("fusion weights are a partition of unity") {
  std::mt19937_64 rng(58);
  for (int iter = 0; iter < 20; ++iter) {
    const int n = 1 + int(rng() % 5);
    std::vector<FeatureMap> maps;
    std::vector<ScalarMap> confs;
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int i = 0; i < n; ++i) {
      maps.push_back(random_map(2, 7, 7, rng));
      ScalarMap c(7, 7);
      for (auto& v : c.data) v = u(rng);
      confs.push_back(std::move(c));
    }
    auto [fused, weights] = fuse(maps, confs);
    for (int y = 0; y < 7; ++y)
      for (int x = 0; x < 7; ++x) {
        double sum = 0.0;
        for (const auto& w : weights) sum += w.at(y, x);
        CHECK(std::abs(sum - 1.0) < 1e-6);
      }
  }
}

TEST_CASE("a +40 confidence advantage dominates the fusion") {
  std::mt19937_64 rng(59);
  const int n = 4;
  std::vector<FeatureMap> maps;
  std::vector<ScalarMap> confs;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < n; ++i) {
    maps.push_back(random_map(2, 6, 6, rng));
    ScalarMap c(6, 6);
    for (auto& v : c.data) v = u(rng);
    confs.push_back(std::move(c));
  }
  const size_t boosted = 2;
  for (auto& v : confs[boosted].data) v += 41.0;  // at least +40 over peers

  auto [fused, weights] = fuse(maps, confs);
  for (double w : weights[boosted].data) CHECK(w > 1.0 - 1e-12);
  CHECK(max_abs_diff(fused, maps[boosted]) < 1e-6);
}

TEST_CASE("fusion order does not matter") {
  std::mt19937_64 rng(60);
  std::vector<FeatureMap> maps;
  std::vector<ScalarMap> confs;
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 3; ++i) {
    maps.push_back(random_map(2, 6, 6, rng));
    ScalarMap c(6, 6);
    for (auto& v : c.data) v = u(rng);
    confs.push_back(std::move(c));
  }
  auto [fused, w] = fuse(maps, confs);
  auto [permuted, w2] =
      fuse({maps[2], maps[0], maps[1]}, {confs[2], confs[0], confs[1]});
  CHECK(max_abs_diff(fused, permuted) < 1e-12);
}

TEST_CASE("fuse rejects empty input") {
  CHECK_THROWS_AS((void)fuse({}, {}), Error);
}

TEST_CASE("conditioning maps spatially repeat each expression value") {
  auto zero = conditioning_maps(std::vector<double>(4, 0.0), 8, 8);
  for (double v : zero.data) CHECK(v == 0.0);

  std::vector<double> e(16, 0.0);
  e[7] = 0.3;
  auto maps = conditioning_maps(e, 32, 32);
  CHECK(maps.channels == 16);
  CHECK(maps.height == 32);
  CHECK(maps.width == 32);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) CHECK(maps.at(7, y, x) == 0.3);
}

TEST_CASE("expression loss is a scaled l1 over both feature branches") {
  CHECK(expression_loss({0.1, 0.2}, {0.1, 0.2}, {1.0}, {1.0}, 40.0) == 0.0);
  CHECK(expression_loss({0.5, -0.5}, {0.0, 0.0}, {}, {}, 40.0) ==
        doctest::Approx(40.0).epsilon(1e-15));
  CHECK(expression_loss({9.0}, {-9.0}, {5.0}, {0.0}, 0.0) == 0.0);
  CHECK_THROWS_AS((void)expression_loss({1.0}, {1.0, 2.0}, {}, {}, 1.0), Error);
  CHECK_THROWS_AS((void)expression_loss({1.0}, {1.0}, {}, {}, -1.0), Error);
}

namespace {

struct PipelineFixture {
  StreamConfig cfg;
  PoseTrack track;
  ReferencePose reference;
  EncoderProvider enc;

  explicit PipelineFixture(uint64_t seed) {
    cfg.n_sup = 12;
    cfg.n_unsup = 0;
    cfg.with_jacobians = false;
    cfg.expression_size = 4;
    cfg.grid_h = 32;
    cfg.grid_w = 32;

    synth::GenParams gp;
    gp.config = cfg;
    gp.frames = 40;
    gp.seed = seed;
    track = synth::gen_track(gp);
    reference.keypoints = synth::front_face_layout(cfg);

    enc = [this](int64_t frame_id) {
      return synth::stub_encoder(
          track.frames[size_t(frame_id)].payload.absolute_keypoints(), cfg, 8);
    };
  }

  KeypointSet kps(size_t i) const {
    return track.frames[i].payload.absolute_keypoints();
  }
};

}  // namespace

TEST_CASE("frontalize with one identity-flow source equals the encoding") {
  PipelineFixture fx(61);
  auto identity = synth::make_identity_flow_provider(32, 32);
  auto out = frontalize({{0, fx.kps(0)}}, fx.reference, fx.enc, identity);
  CHECK(max_abs_diff(out, fx.enc(0)) < 1e-12);
}

TEST_CASE("frontalize equals the explicit sequential composition") {
  PipelineFixture fx(62);
  auto fr = synth::make_affine_flow_provider(32, 32);
  std::vector<SourceFrame> sources{{3, fx.kps(3)}, {17, fx.kps(17)}};

  auto out = frontalize(sources, fx.reference, fx.enc, fr);

  std::vector<FeatureMap> warped;
  std::vector<ScalarMap> confs;
  for (const auto& s : sources) {
    auto fm = fx.enc(s.frame_id);
    auto [flow, conf] = fr(s.keypoints, fx.reference.keypoints);
    warped.push_back(grid_sample(fm, flow));
    confs.push_back(std::move(conf));
  }
  auto manual = fuse(warped, confs).first;
  CHECK(max_abs_diff(out, manual) < 1e-9);
}

TEST_CASE("frontalize is invariant to source order") {
  PipelineFixture fx(63);
  auto fr = synth::make_affine_flow_provider(32, 32);
  std::vector<SourceFrame> abc{{2, fx.kps(2)}, {9, fx.kps(9)}, {30, fx.kps(30)}};
  std::vector<SourceFrame> cab{{30, fx.kps(30)}, {2, fx.kps(2)}, {9, fx.kps(9)}};
  auto a = frontalize(abc, fx.reference, fx.enc, fr);
  auto b = frontalize(cab, fx.reference, fx.enc, fr);
  CHECK(max_abs_diff(a, b) < 1e-12);
}

TEST_CASE("frontalize with identical sources returns their common warp") {
  PipelineFixture fx(64);
  auto fr = synth::make_affine_flow_provider(32, 32);
  std::vector<SourceFrame> sources(3, SourceFrame{5, fx.kps(5)});

  auto out = frontalize(sources, fx.reference, fx.enc, fr);
  auto [flow, conf] = fr(fx.kps(5), fx.reference.keypoints);
  auto expected = grid_sample(fx.enc(5), flow);
  CHECK(max_abs_diff(out, expected) < 1e-9);
}

TEST_CASE("animate at the reference pose with identities is a no-op") {
  PipelineFixture fx(65);
  auto fused = frontalize({{0, fx.kps(0)}}, fx.reference,
                          fx.enc, synth::make_affine_flow_provider(32, 32));
  auto out = animate(fused, fx.reference, fx.reference.keypoints,
                     synth::make_identity_flow_provider(32, 32),
                     synth::make_identity_decoder(), {0.1, 0.2, 0.3, 0.4});
  CHECK(max_abs_diff(out, fused) < 1e-12);
}

TEST_CASE("animate equals its sequential composition") {
  PipelineFixture fx(66);
  auto dm = synth::make_affine_motion_provider(32, 32);
  auto fused = frontalize({{0, fx.kps(0)}, {20, fx.kps(20)}}, fx.reference,
                          fx.enc, synth::make_affine_flow_provider(32, 32));
  const auto driving = fx.kps(11);
  const std::vector<double> e{0.5, -0.5, 0.0, 0.9};

  auto out = animate(fused, fx.reference, driving, dm,
                     synth::make_identity_decoder(), e);

  auto [flow, occ] = dm(fx.reference.keypoints, driving);
  auto manual = apply_occlusion(grid_sample(fused, flow), occ);
  CHECK(max_abs_diff(out, manual) < 1e-9);
}

TEST_CASE("animate works with an empty expression code") {
  PipelineFixture fx(67);
  auto fused = frontalize({{0, fx.kps(0)}}, fx.reference, fx.enc,
                          synth::make_affine_flow_provider(32, 32));
  int seen_channels = -1;
  DecoderProvider dec = [&](const FeatureMap& em, const FeatureMap& cond) {
    seen_channels = cond.channels;
    return em;
  };
  CHECK_NOTHROW((void)animate(fused, fx.reference, fx.kps(7),
                              synth::make_affine_motion_provider(32, 32), dec,
                              {}));
  CHECK(seen_channels == 0);
}

TEST_CASE("feature maps and flows round-trip through FZFM1") {
  std::mt19937_64 rng(68);
  auto fm = random_map(5, 9, 7, rng);
  auto fm2 = parse_feature_map(serialize_feature_map(fm));
  CHECK(fm2.same_shape(fm));
  for (size_t i = 0; i < fm.data.size(); ++i)
    CHECK(fm2.data[i] == double(float(fm.data[i])));

  auto flow = random_flow(6, 6, rng);
  auto flow2 = parse_flow_field(serialize_flow_field(flow));
  CHECK(flow2.height == 6);
  CHECK(flow2.width == 6);

  ScalarMap sm(4, 3, 0.25);
  auto sm2 = parse_scalar_map(serialize_scalar_map(sm));
  CHECK(sm2.data == sm.data);

  auto bytes = serialize_feature_map(fm);
  bytes[0] = 'Q';
  CHECK_THROWS_AS((void)parse_feature_map(bytes), Error);
}
