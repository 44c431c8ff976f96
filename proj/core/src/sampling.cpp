#include "fz/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fz::sampling {

namespace {

struct YawIndex {
  std::vector<double> yaws;
  std::vector<double> sorted;
  std::vector<size_t> less_of;  // per frame: # yaws strictly below its own
  std::vector<size_t> leq_of;   // per frame: # yaws at or below its own

  explicit YawIndex(const PoseTrack& track) {
    yaws.reserve(track.frames.size());
    for (const auto& f : track.frames) yaws.push_back(f.yaw);
    sorted = yaws;
    std::sort(sorted.begin(), sorted.end());
    less_of.resize(yaws.size());
    leq_of.resize(yaws.size());
    for (size_t i = 0; i < yaws.size(); ++i) {
      less_of[i] = less(yaws[i]);
      leq_of[i] = leq(yaws[i]);
    }
  }

  size_t less(double v) const {
    return size_t(std::lower_bound(sorted.begin(), sorted.end(), v) -
                  sorted.begin());
  }
  size_t leq(double v) const {
    return size_t(std::upper_bound(sorted.begin(), sorted.end(), v) -
                  sorted.begin());
  }
};

uint64_t draw(std::mt19937_64& rng, uint64_t total) {
  return std::uniform_int_distribution<uint64_t>(0, total - 1)(rng);
}

}  // namespace

Triplet sample_triplet(const PoseTrack& track, double min_span,
                       std::mt19937_64& rng) {
  const size_t n = track.frames.size();
  if (n < 3) raise(errc::no_valid_sample, "track shorter than 3 frames");
  YawIndex ix(track);

  auto pair_weight = [&](size_t a, size_t c) -> uint64_t {
    if (!(ix.yaws[a] - ix.yaws[c] > min_span)) return 0;
    return uint64_t(ix.less_of[a] - ix.leq_of[c]);
  };

  uint64_t total = 0;
  for (size_t a = 0; a < n; ++a)
    for (size_t c = 0; c < n; ++c) total += pair_weight(a, c);
  if (total == 0)
    raise(errc::no_valid_sample, "no triple satisfies the yaw span");

  uint64_t r = draw(rng, total);
  for (size_t a = 0; a < n; ++a)
    for (size_t c = 0; c < n; ++c) {
      const uint64_t w = pair_weight(a, c);
      if (r >= w) {
        r -= w;
        continue;
      }
      for (size_t b = 0; b < n; ++b) {
        if (!(ix.yaws[b] > ix.yaws[c] && ix.yaws[b] < ix.yaws[a])) continue;
        if (r-- == 0) return Triplet{a, b, c};
      }
    }
  raise(errc::no_valid_sample, "internal: selection walk exhausted");
}

Quad sample_quad(const PoseTrack& track, double min_span, double near_tol,
                 std::mt19937_64& rng) {
  const size_t n = track.frames.size();
  if (n < 4) raise(errc::no_valid_sample, "track shorter than 4 frames");
  YawIndex ix(track);

  auto near_a = [&](size_t a) -> uint64_t {
    // frames with |yaw - yaw[a]| < near_tol, excluding a itself
    return uint64_t(ix.less(ix.yaws[a] + near_tol) -
                    ix.leq(ix.yaws[a] - near_tol)) -
           1;
  };
  auto is_near = [&](size_t a, size_t b) {
    return std::abs(ix.yaws[a] - ix.yaws[b]) < near_tol;
  };

  auto pair_weight = [&](size_t a, size_t c) -> uint64_t {
    if (!(ix.yaws[a] - ix.yaws[c] > min_span)) return 0;
    const uint64_t n1 = uint64_t(ix.less_of[a] - ix.leq_of[c]);
    if (n1 == 0) return 0;
    const uint64_t n2 = near_a(a) - (is_near(a, c) ? 1 : 0);
    if (n2 == 0) return 0;
    // b1 == b2 pairs are invalid; o counts frames in both candidate sets
    const double lb = std::max(ix.yaws[c], ix.yaws[a] - near_tol);
    const uint64_t o = uint64_t(ix.less_of[a] - ix.leq(lb));
    return n1 * n2 - o;
  };

  uint64_t total = 0;
  for (size_t a = 0; a < n; ++a)
    for (size_t c = 0; c < n; ++c) total += pair_weight(a, c);
  if (total == 0)
    raise(errc::no_valid_sample, "no 4-tuple satisfies the yaw constraints");

  uint64_t r = draw(rng, total);
  for (size_t a = 0; a < n; ++a)
    for (size_t c = 0; c < n; ++c) {
      const uint64_t w = pair_weight(a, c);
      if (r >= w) {
        r -= w;
        continue;
      }
      const uint64_t n2 = near_a(a) - (is_near(a, c) ? 1 : 0);
      for (size_t b1 = 0; b1 < n; ++b1) {
        if (!(ix.yaws[b1] > ix.yaws[c] && ix.yaws[b1] < ix.yaws[a])) continue;
        const uint64_t here = n2 - (is_near(a, b1) ? 1 : 0);
        if (r >= here) {
          r -= here;
          continue;
        }
        for (size_t b2 = 0; b2 < n; ++b2) {
          if (b2 == a || b2 == c || b2 == b1 || !is_near(a, b2)) continue;
          if (r-- == 0) return Quad{a, b1, b2, c};
        }
      }
    }
  raise(errc::no_valid_sample, "internal: selection walk exhausted");
}

Triplet max_span_triplet(const PoseTrack& track) {
  const size_t n = track.frames.size();
  if (n < 3) raise(errc::no_valid_sample, "track shorter than 3 frames");
  YawIndex ix(track);

  size_t a = 0, c = 0;
  for (size_t i = 1; i < n; ++i) {
    if (ix.yaws[i] > ix.yaws[a]) a = i;
    if (ix.yaws[i] < ix.yaws[c]) c = i;
  }
  const double mid = 0.5 * (ix.yaws[a] + ix.yaws[c]);
  size_t b = n;
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < n; ++i) {
    if (!(ix.yaws[i] > ix.yaws[c] && ix.yaws[i] < ix.yaws[a])) continue;
    const double d = std::abs(ix.yaws[i] - mid);
    if (d < best) {
      best = d;
      b = i;
    }
  }
  if (b == n)
    raise(errc::no_valid_sample, "no frame strictly between yaw extrema");
  return Triplet{a, b, c};
}

std::vector<size_t> select_sources(const PoseTrack& track, int n_extra) {
  const size_t n = track.frames.size();
  if (n == 0) raise(errc::empty_input, "empty track");

  auto more_frontal = [&](size_t i, size_t best) {
    return std::abs(track.frames[i].yaw) < std::abs(track.frames[best].yaw);
  };

  size_t frontal = n;
  for (size_t i = 0; i < n; ++i)
    if (track.frames[i].eyes_open && (frontal == n || more_frontal(i, frontal)))
      frontal = i;
  if (frontal == n) {  // nobody has eyes open; fall back to global argmin
    frontal = 0;
    for (size_t i = 1; i < n; ++i)
      if (more_frontal(i, frontal)) frontal = i;
  }

  size_t max_i = 0, min_i = 0;
  for (size_t i = 1; i < n; ++i) {
    if (track.frames[i].yaw > track.frames[max_i].yaw) max_i = i;
    if (track.frames[i].yaw < track.frames[min_i].yaw) min_i = i;
  }

  std::vector<size_t> out{frontal};
  if (n_extra >= 1) out.push_back(max_i);
  if (n_extra >= 2) out.push_back(min_i);

  std::vector<size_t> dedup;
  for (size_t idx : out)
    if (std::find(dedup.begin(), dedup.end(), idx) == dedup.end())
      dedup.push_back(idx);
  return dedup;
}

std::vector<size_t> filter_rotation_tracks(std::span<const PoseTrack> tracks,
                                           double threshold) {
  std::vector<size_t> kept;
  for (size_t t = 0; t < tracks.size(); ++t) {
    if (tracks[t].frames.empty()) continue;
    double lo = tracks[t].frames[0].yaw, hi = lo;
    for (const auto& f : tracks[t].frames) {
      lo = std::min(lo, f.yaw);
      hi = std::max(hi, f.yaw);
    }
    if (hi - lo > threshold) kept.push_back(t);
  }
  return kept;
}

}  // namespace fz::sampling
