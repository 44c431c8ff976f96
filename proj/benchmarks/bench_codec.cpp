#include <benchmark/benchmark.h>

#include <random>

#include "fz/codec.hpp"
#include "fz/synth.hpp"

using namespace fz;

namespace {

StreamConfig full_config() {
  StreamConfig cfg;
  cfg.n_sup = 33;
  cfg.n_unsup = 10;
  cfg.with_jacobians = true;
  cfg.expression_size = 16;
  return cfg;
}

struct CodecFixture {
  StreamConfig cfg = full_config();
  codec::FieldSpecTable specs = codec::default_field_specs();
  PoseTrack track;
  codec::PriorModel prior;

  CodecFixture() {
    synth::GenParams gp;
    gp.config = cfg;
    gp.frames = 1000;
    gp.seed = 42;
    track = synth::gen_track(gp);

    codec::CodecState state;
    std::vector<codec::QuantizedPayload> stream;
    for (const auto& f : track.frames)
      stream.push_back(codec::delta_step(state, f.payload, cfg, specs));
    prior = codec::PriorModel::build({stream}, cfg, specs);
  }
};

const CodecFixture& fixture() {
  static CodecFixture fx;
  return fx;
}

}  // namespace

static void BM_EncodeFrame(benchmark::State& state) {
  const auto& fx = fixture();
  codec::CodecState cs;
  size_t t = 0;
  for (auto _ : state) {
    auto frame = codec::encode_frame(
        cs, fx.track.frames[t % fx.track.frames.size()].payload, fx.prior,
        fx.cfg, fx.specs);
    benchmark::DoNotOptimize(frame.record.data());
    ++t;
  }
  state.SetItemsProcessed(int64_t(state.iterations()));
}
BENCHMARK(BM_EncodeFrame);

static void BM_EncodeDecodeFrame(benchmark::State& state) {
  const auto& fx = fixture();
  codec::CodecState enc, dec;
  size_t t = 0;
  for (auto _ : state) {
    auto frame = codec::encode_frame(
        enc, fx.track.frames[t % fx.track.frames.size()].payload, fx.prior,
        fx.cfg, fx.specs);
    auto payload =
        codec::decode_frame(dec, frame.record, fx.prior, fx.cfg, fx.specs);
    benchmark::DoNotOptimize(payload.mean_pos.x);
    ++t;
  }
  state.SetItemsProcessed(int64_t(state.iterations()));
}
BENCHMARK(BM_EncodeDecodeFrame);

static void BM_QuantizePayload(benchmark::State& state) {
  const auto& fx = fixture();
  size_t t = 0;
  for (auto _ : state) {
    auto codes = codec::quantize_payload(
        fx.track.frames[t % fx.track.frames.size()].payload, fx.cfg, fx.specs);
    benchmark::DoNotOptimize(codes[0].data());
    ++t;
  }
  state.SetItemsProcessed(int64_t(state.iterations()));
}
BENCHMARK(BM_QuantizePayload);

static void BM_RangeCoderSymbols(benchmark::State& state) {
  const auto& fx = fixture();
  const int ctx = codec::context_index(codec::Field::sup_kp, false);
  const auto& table = fx.prior.table(ctx);
  std::mt19937_64 rng(7);
  std::vector<uint32_t> symbols(4096);
  std::vector<double> w(table.size());
  for (uint32_t s = 0; s < table.size(); ++s) w[s] = double(table.freq(s));
  std::discrete_distribution<uint32_t> draw(w.begin(), w.end());
  for (auto& s : symbols) s = draw(rng);

  for (auto _ : state) {
    codec::RangeEncoder enc;
    for (uint32_t s : symbols) enc.encode(table, s);
    auto bytes = enc.finish();
    benchmark::DoNotOptimize(bytes.data());
  }
  state.SetItemsProcessed(int64_t(state.iterations()) *
                          int64_t(symbols.size()));
}
BENCHMARK(BM_RangeCoderSymbols);

BENCHMARK_MAIN();
