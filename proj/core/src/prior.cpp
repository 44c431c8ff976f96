#include "fz/prior.hpp"

#include <fstream>

#include "fz/io_util.hpp"

namespace fz::codec {

namespace {
constexpr char kMagic[] = "FZPRI1";

bool field_active(Field field, const StreamConfig& cfg) {
  return symbols_per_frame(field, cfg) > 0;
}
}  // namespace

std::string context_name(int ctx) {
  return std::string(field_name(Field(ctx / 2))) +
         (ctx % 2 == 0 ? "/key" : "/delta");
}

const FrequencyTable& PriorModel::table(int ctx) const {
  if (ctx < 0 || ctx >= kContextCount || !context_active(ctx))
    raise(errc::unknown_symbol, "inactive coding context " +
                                    std::to_string(ctx));
  return tables_[ctx];
}

PriorModel PriorModel::build(
    const std::vector<std::vector<QuantizedPayload>>& streams,
    const StreamConfig& cfg, const FieldSpecTable& specs) {
  if (streams.empty()) raise(errc::empty_input, "no training streams");
  cfg.validate();
  for (const auto& s : specs) {
    s.validate();
    if (field_active(s.field, cfg) && s.bits > 16)
      raise(errc::range_violation,
            std::string(field_name(s.field)) +
                ": entropy-coded fields are limited to 16 bits");
  }

  std::array<std::vector<uint64_t>, kContextCount> counts;
  for (int f = 0; f < kFieldCount; ++f) {
    if (!field_active(Field(f), cfg)) continue;
    counts[context_index(Field(f), true)]
        .assign(keyframe_alphabet(specs[f]), 1);  // add-1 smoothing
    counts[context_index(Field(f), false)].assign(delta_alphabet(specs[f]), 1);
  }

  for (const auto& stream : streams)
    for (const auto& qp : stream)
      for (int f = 0; f < kFieldCount; ++f) {
        if (!field_active(Field(f), cfg)) continue;
        auto& table = counts[context_index(Field(f), qp.is_keyframe)];
        const auto& spec = specs[f];
        for (int32_t code : qp.codes[f]) {
          uint32_t sym = qp.is_keyframe ? uint32_t(code)
                                        : delta_to_symbol(code, spec);
          if (sym >= table.size())
            raise(errc::unknown_symbol, "training symbol outside alphabet");
          ++table[sym];
        }
      }

  return from_counts(cfg, specs, std::move(counts));
}

PriorModel PriorModel::from_counts(
    const StreamConfig& cfg, const FieldSpecTable& specs,
    std::array<std::vector<uint64_t>, kContextCount> counts) {
  PriorModel model;
  model.cfg_ = cfg;
  model.specs_ = specs;
  for (int ctx = 0; ctx < kContextCount; ++ctx)
    if (!counts[ctx].empty())
      model.tables_[ctx] = FrequencyTable(std::move(counts[ctx]));
  model.finalize();
  return model;
}

void PriorModel::finalize() { hash_ = fnv1a64(serialize()); }

std::vector<uint8_t> PriorModel::serialize() const {
  ByteWriter w;
  w.literal(kMagic);
  w.u16(uint16_t(cfg_.n_sup));
  w.u16(uint16_t(cfg_.n_unsup));
  w.u8(cfg_.with_jacobians ? 1 : 0);
  w.u16(uint16_t(cfg_.expression_size));
  w.u16(uint16_t(cfg_.grid_h));
  w.u16(uint16_t(cfg_.grid_w));
  w.u32(uint32_t(cfg_.keyframe_interval));
  w.u16(uint16_t(cfg_.fps));
  for (const auto& s : specs_) {
    w.u8(uint8_t(s.field));
    w.u8(uint8_t(s.bits));
    w.f64(s.lo);
    w.f64(s.hi);
  }
  w.u8(kContextCount);
  for (int ctx = 0; ctx < kContextCount; ++ctx) {
    const auto& t = tables_[ctx];
    w.u32(t.size());
    for (uint32_t i = 0; i < t.size(); ++i) w.u32(t.freq(i));
  }
  return w.take();
}

PriorModel PriorModel::deserialize(std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_literal(kMagic, errc::bad_magic);

  PriorModel model;
  model.cfg_.n_sup = r.u16();
  model.cfg_.n_unsup = r.u16();
  model.cfg_.with_jacobians = r.u8() != 0;
  model.cfg_.expression_size = r.u16();
  model.cfg_.grid_h = r.u16();
  model.cfg_.grid_w = r.u16();
  model.cfg_.keyframe_interval = int(r.u32());
  model.cfg_.fps = r.u16();
  model.cfg_.validate();
  for (auto& s : model.specs_) {
    s.field = Field(r.u8());
    s.bits = r.u8();
    s.lo = r.f64();
    s.hi = r.f64();
    s.validate();
  }
  if (r.u8() != kContextCount)
    raise(errc::parse_error, "unexpected context count in prior file");
  for (int ctx = 0; ctx < kContextCount; ++ctx) {
    uint32_t n = r.u32();
    if (n == 0) continue;
    if (n > (1u << 18))
      raise(errc::parse_error, "prior context alphabet too large");
    std::vector<uint64_t> counts(n);
    for (auto& c : counts) c = r.u32();
    model.tables_[ctx] = FrequencyTable(std::move(counts));
  }
  if (r.remaining() != 0)
    raise(errc::parse_error, "trailing bytes in prior file");
  model.finalize();
  return model;
}

void PriorModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(errc::io_error, "cannot open '" + path + "' for writing");
  auto bytes = serialize();
  out.write(reinterpret_cast<const char*>(bytes.data()),
            std::streamsize(bytes.size()));
  if (!out) raise(errc::io_error, "failed writing '" + path + "'");
}

PriorModel PriorModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(errc::io_error, "cannot open prior file '" + path + "'");
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace fz::codec
