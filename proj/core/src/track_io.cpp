#include "fz/track_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fz {

namespace {

[[noreturn]] void parse_fail(size_t line, const std::string& what) {
  raise(errc::parse_error, "line " + std::to_string(line) + ": " + what);
}

double parse_real(const std::string& tok, size_t line) {
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    parse_fail(line, "bad real '" + tok + "'");
  return v;
}

long long parse_int(const std::string& tok, size_t line) {
  char* end = nullptr;
  long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0')
    parse_fail(line, "bad integer '" + tok + "'");
  return v;
}

int header_field(const std::string& header, const std::string& key,
                 size_t line) {
  auto pos = header.find(key + "=");
  if (pos == std::string::npos)
    parse_fail(line, "header missing '" + key + "='");
  return int(parse_int(header.substr(pos + key.size() + 1,
                                     header.find(' ', pos + key.size() + 1) -
                                         (pos + key.size() + 1)),
                       line));
}

void append_real(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += ' ';
  out += buf;
}

}  // namespace

PoseTrack read_track(std::istream& in, ClampStats* stats) {
  std::string line;
  size_t lineno = 0;

  if (!std::getline(in, line)) raise(errc::parse_error, "empty track file");
  ++lineno;
  if (line.rfind("#FZTRACK v1", 0) != 0)
    raise(errc::bad_magic, "missing '#FZTRACK v1' header");

  PoseTrack track;
  track.config.n_sup = header_field(line, "n_sup", lineno);
  track.config.n_unsup = header_field(line, "n_unsup", lineno);
  track.config.with_jacobians = header_field(line, "jac", lineno) != 0;
  track.config.expression_size = header_field(line, "M", lineno);
  track.config.validate();

  const StreamConfig& cfg = track.config;
  const size_t n_kp = size_t(cfg.total_keypoints());
  const size_t n_jac = cfg.with_jacobians ? size_t(cfg.n_unsup) : 0;
  const size_t want_tokens =
      3 + 2 * n_kp + 4 * n_jac + size_t(cfg.expression_size);

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;

    std::istringstream ss(line);
    std::vector<std::string> tok;
    std::string t;
    while (ss >> t) tok.push_back(t);
    if (tok.size() != want_tokens)
      parse_fail(lineno, "expected " + std::to_string(want_tokens) +
                             " fields, got " + std::to_string(tok.size()));

    size_t i = 0;
    TrackFrame frame;
    frame.frame_index = parse_int(tok[i++], lineno);
    frame.yaw = parse_real(tok[i++], lineno);
    frame.eyes_open = parse_int(tok[i++], lineno) != 0;

    KeypointSet abs;
    abs.coords.resize(n_kp);
    for (auto& c : abs.coords) {
      c.x = parse_real(tok[i++], lineno);
      c.y = parse_real(tok[i++], lineno);
    }
    if (cfg.with_jacobians) {
      abs.jacobians.emplace(n_jac);
      for (auto& j : *abs.jacobians) {
        j.a = parse_real(tok[i++], lineno);
        j.b = parse_real(tok[i++], lineno);
        j.c = parse_real(tok[i++], lineno);
        j.d = parse_real(tok[i++], lineno);
      }
    }
    std::vector<double> expr(size_t(cfg.expression_size));
    for (auto& e : expr) e = parse_real(tok[i++], lineno);

    frame.payload = MotionPayload::from_absolute(
        frame.frame_index, abs, std::move(expr), cfg, stats);
    track.frames.push_back(std::move(frame));
  }

  track.validate();
  return track;
}

PoseTrack read_track_file(const std::string& path, ClampStats* stats) {
  std::ifstream in(path);
  if (!in) raise(errc::io_error, "cannot open track file '" + path + "'");
  return read_track(in, stats);
}

void write_track(std::ostream& out, const PoseTrack& track) {
  const StreamConfig& cfg = track.config;
  out << "#FZTRACK v1 n_sup=" << cfg.n_sup << " n_unsup=" << cfg.n_unsup
      << " jac=" << (cfg.with_jacobians ? 1 : 0)
      << " M=" << cfg.expression_size << "\n";

  std::string line;
  for (const auto& f : track.frames) {
    line.clear();
    line += std::to_string(f.frame_index);
    line += ' ';
    {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", f.yaw);
      line += buf;
    }
    line += ' ';
    line += f.eyes_open ? '1' : '0';

    KeypointSet abs = f.payload.absolute_keypoints();
    for (const auto& c : abs.coords) {
      append_real(line, c.x);
      append_real(line, c.y);
    }
    if (abs.jacobians)
      for (const auto& j : *abs.jacobians) {
        append_real(line, j.a);
        append_real(line, j.b);
        append_real(line, j.c);
        append_real(line, j.d);
      }
    for (double e : f.payload.expression) append_real(line, e);
    out << line << "\n";
  }
}

void write_track_file(const std::string& path, const PoseTrack& track) {
  std::ofstream out(path);
  if (!out) raise(errc::io_error, "cannot open '" + path + "' for writing");
  write_track(out, track);
  if (!out) raise(errc::io_error, "failed writing '" + path + "'");
}

}  // namespace fz
