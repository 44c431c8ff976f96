#include "fz/feature_io.hpp"

#include <fstream>

#include "fz/io_util.hpp"

namespace fz {

namespace {
constexpr char kMagic[] = "FZFM1";

void write_header(ByteWriter& w, std::initializer_list<uint32_t> dims) {
  w.literal(kMagic);
  w.u8(uint8_t(dims.size()));
  for (uint32_t d : dims) w.u32(d);
}

std::vector<uint32_t> read_header(ByteReader& r, int want_rank) {
  r.expect_literal(kMagic, errc::bad_magic);
  const int rank = r.u8();
  if (rank != want_rank)
    raise(errc::shape_mismatch, "FZFM1 rank " + std::to_string(rank) +
                                    ", expected " + std::to_string(want_rank));
  std::vector<uint32_t> dims(static_cast<size_t>(rank));
  for (auto& d : dims) d = r.u32();
  return dims;
}

void write_values(ByteWriter& w, const std::vector<double>& values) {
  for (double v : values) w.f32(float(v));
}

void read_values(ByteReader& r, std::vector<double>& out) {
  for (auto& v : out) v = double(r.f32());
}

}  // namespace

std::vector<uint8_t> serialize_feature_map(const FeatureMap& fm) {
  ByteWriter w;
  write_header(w, {uint32_t(fm.channels), uint32_t(fm.height),
                   uint32_t(fm.width)});
  write_values(w, fm.data);
  return w.take();
}

std::vector<uint8_t> serialize_flow_field(const FlowField& flow) {
  ByteWriter w;
  write_header(w, {uint32_t(flow.height), uint32_t(flow.width), 2u});
  write_values(w, flow.data);
  return w.take();
}

std::vector<uint8_t> serialize_scalar_map(const ScalarMap& map) {
  ByteWriter w;
  write_header(w, {uint32_t(map.height), uint32_t(map.width)});
  write_values(w, map.data);
  return w.take();
}

FeatureMap parse_feature_map(std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  auto dims = read_header(r, 3);
  FeatureMap fm{int(dims[0]), int(dims[1]), int(dims[2])};
  read_values(r, fm.data);
  return fm;
}

FlowField parse_flow_field(std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  auto dims = read_header(r, 3);
  if (dims[2] != 2)
    raise(errc::shape_mismatch, "flow field last dim must be 2");
  FlowField flow{int(dims[0]), int(dims[1])};
  read_values(r, flow.data);
  return flow;
}

ScalarMap parse_scalar_map(std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  auto dims = read_header(r, 2);
  ScalarMap map{int(dims[0]), int(dims[1])};
  read_values(r, map.data);
  return map;
}

void save_bytes(const std::string& path, std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(errc::io_error, "cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            std::streamsize(bytes.size()));
  if (!out) raise(errc::io_error, "failed writing '" + path + "'");
}

std::vector<uint8_t> load_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(errc::io_error, "cannot open '" + path + "'");
  return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
}

}  // namespace fz
