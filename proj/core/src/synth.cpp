#include "fz/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace fz::synth {

namespace {

constexpr double kGoldenAngle = 2.399963229728653;

double unnormalize(double t, int n) { return (t + 1.0) * 0.5 * double(n - 1); }

// Solves a 3x3 linear system by Gaussian elimination with partial
// pivoting; returns false when the system is singular.
bool solve3(double m[3][3], double rhs[3], double out[3]) {
  int perm[3] = {0, 1, 2};
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[perm[r]][col]) > std::abs(m[perm[pivot]][col])) pivot = r;
    std::swap(perm[col], perm[pivot]);
    const double p = m[perm[col]][col];
    if (std::abs(p) < 1e-12) return false;
    for (int r = col + 1; r < 3; ++r) {
      const double f = m[perm[r]][col] / p;
      for (int c = col; c < 3; ++c) m[perm[r]][c] -= f * m[perm[col]][c];
      rhs[perm[r]] -= f * rhs[perm[col]];
    }
  }
  for (int col = 2; col >= 0; --col) {
    double acc = rhs[perm[col]];
    for (int c = col + 1; c < 3; ++c) acc -= m[perm[col]][c] * out[c];
    out[col] = acc / m[perm[col]][col];
  }
  return true;
}

}  // namespace

KeypointSet front_face_layout(const StreamConfig& cfg) {
  const int n = cfg.total_keypoints();
  KeypointSet out;
  out.coords.resize(size_t(n));
  // Sunflower arrangement inside a face-shaped ellipse.
  for (int k = 0; k < n; ++k) {
    const double r = 0.62 * std::sqrt((double(k) + 0.5) / double(n));
    const double th = double(k) * kGoldenAngle;
    out.coords[k].x = 0.78 * r * std::cos(th);
    out.coords[k].y = r * std::sin(th);
  }
  if (cfg.with_jacobians) {
    out.jacobians.emplace(size_t(cfg.n_unsup));
    for (auto& j : *out.jacobians) j = Mat2{1.0, 0.0, 0.0, 1.0};
  }
  return out;
}

PoseTrack gen_track(const GenParams& params) {
  const StreamConfig& cfg = params.config;
  cfg.validate();
  if (params.frames < 1) raise(errc::range_violation, "frames must be >= 1");

  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const KeypointSet base = front_face_layout(cfg);
  const double cycles = 2.3;
  const double phase = unit(rng) * 2.0 * std::numbers::pi;
  const double bob_phase = unit(rng) * 2.0 * std::numbers::pi;

  std::vector<double> expr_freq(size_t(cfg.expression_size));
  std::vector<double> expr_phase(size_t(cfg.expression_size));
  for (size_t k = 0; k < expr_freq.size(); ++k) {
    expr_freq[k] = 0.8 + 1.7 * unit(rng);  // cycles per track
    expr_phase[k] = unit(rng) * 2.0 * std::numbers::pi;
  }

  // Blink cadence: a two-frame eye closure roughly every 90 frames.
  int next_blink = 40 + int(unit(rng) * 100.0);

  PoseTrack track;
  track.config = cfg;
  track.frames.reserve(size_t(params.frames));
  const double tau = 2.0 * std::numbers::pi;

  for (int t = 0; t < params.frames; ++t) {
    const double u = double(t) / double(params.frames);
    double yaw = params.yaw_amplitude * std::sin(tau * cycles * u + phase);
    yaw += params.noise * gauss(rng);

    const double cos_yaw = std::cos(yaw);
    const double shift = 0.25 * std::sin(yaw);
    const double bob = 0.05 * params.yaw_amplitude *
                       std::sin(tau * 0.7 * cycles * u + bob_phase);

    KeypointSet abs;
    abs.coords.resize(base.coords.size());
    for (size_t k = 0; k < base.coords.size(); ++k) {
      abs.coords[k].x =
          base.coords[k].x * cos_yaw + shift + params.noise * gauss(rng);
      abs.coords[k].y = base.coords[k].y + bob + params.noise * gauss(rng);
    }
    if (cfg.with_jacobians) {
      abs.jacobians.emplace(size_t(cfg.n_unsup));
      for (auto& j : *abs.jacobians) {
        j.a = cos_yaw + 0.1 * params.noise * gauss(rng);
        j.b = 0.1 * params.noise * gauss(rng);
        j.c = 0.1 * params.noise * gauss(rng);
        j.d = 1.0 + 0.1 * params.noise * gauss(rng);
      }
    }

    std::vector<double> expr(size_t(cfg.expression_size));
    for (size_t k = 0; k < expr.size(); ++k)
      expr[k] = 0.85 * std::sin(tau * expr_freq[k] * u + expr_phase[k]);

    TrackFrame frame;
    frame.frame_index = t;
    frame.yaw = yaw;
    frame.eyes_open = true;
    if (t == next_blink || t == next_blink + 1) frame.eyes_open = false;
    if (t > next_blink + 1) next_blink += 40 + int(unit(rng) * 100.0);

    frame.payload =
        MotionPayload::from_absolute(t, abs, std::move(expr), cfg, nullptr);
    track.frames.push_back(std::move(frame));
  }
  return track;
}

AffineFit fit_affine(const KeypointSet& from, const KeypointSet& to) {
  if (from.coords.size() != to.coords.size())
    raise(errc::shape_mismatch, "fit_affine: point counts differ");
  if (from.coords.size() < 3)
    raise(errc::degenerate_geometry, "fit_affine: need at least 3 points");

  // Normal equations over the basis (x, y, 1), one system per output axis.
  double m[3][3] = {};
  double rx[3] = {}, ry[3] = {};
  for (size_t k = 0; k < from.coords.size(); ++k) {
    const double b[3] = {from.coords[k].x, from.coords[k].y, 1.0};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) m[i][j] += b[i] * b[j];
      rx[i] += b[i] * to.coords[k].x;
      ry[i] += b[i] * to.coords[k].y;
    }
  }

  double sol_x[3], sol_y[3];
  double mx[3][3], my[3][3];
  std::copy(&m[0][0], &m[0][0] + 9, &mx[0][0]);
  std::copy(&m[0][0], &m[0][0] + 9, &my[0][0]);
  if (!solve3(mx, rx, sol_x) || !solve3(my, ry, sol_y))
    raise(errc::degenerate_geometry, "fit_affine: collinear points");

  AffineFit fit;
  fit.linear = Mat2{sol_x[0], sol_x[1], sol_y[0], sol_y[1]};
  fit.offset = Vec2{sol_x[2], sol_y[2]};

  double sq = 0.0;
  for (size_t k = 0; k < from.coords.size(); ++k) {
    const double px = fit.linear.a * from.coords[k].x +
                      fit.linear.b * from.coords[k].y + fit.offset.x;
    const double py = fit.linear.c * from.coords[k].x +
                      fit.linear.d * from.coords[k].y + fit.offset.y;
    const double ex = px - to.coords[k].x;
    const double ey = py - to.coords[k].y;
    sq += ex * ex + ey * ey;
  }
  fit.residual = std::sqrt(sq / double(from.coords.size()));
  return fit;
}

namespace {

FlowField rasterize_affine(const AffineFit& fit, int grid_h, int grid_w) {
  FlowField flow(grid_h, grid_w);
  for (int y = 0; y < grid_h; ++y) {
    const double gy = frontal::grid_coord(y, grid_h);
    for (int x = 0; x < grid_w; ++x) {
      const double gx = frontal::grid_coord(x, grid_w);
      flow.x(y, x) = fit.linear.a * gx + fit.linear.b * gy + fit.offset.x;
      flow.y(y, x) = fit.linear.c * gx + fit.linear.d * gy + fit.offset.y;
    }
  }
  return flow;
}

}  // namespace

std::pair<FlowField, ScalarMap> affine_flow(const KeypointSet& src,
                                            const KeypointSet& dst, int grid_h,
                                            int grid_w) {
  // Backward warp: for each destination-grid cell, where to sample in src.
  AffineFit fit = fit_affine(dst, src);
  return {rasterize_affine(fit, grid_h, grid_w),
          ScalarMap(grid_h, grid_w, -fit.residual)};
}

std::pair<FlowField, ScalarMap> affine_motion(const KeypointSet& src,
                                              const KeypointSet& dst,
                                              int grid_h, int grid_w) {
  AffineFit fit = fit_affine(dst, src);
  return {rasterize_affine(fit, grid_h, grid_w),
          ScalarMap(grid_h, grid_w, std::exp(-fit.residual))};
}

std::pair<FlowField, ScalarMap> identity_flow(int grid_h, int grid_w) {
  FlowField flow(grid_h, grid_w);
  auto center = [](int i, int n) {
    double t = frontal::grid_coord(i, n);
    // Walk a few ULPs toward the exact preimage of pixel center i.
    for (int step = 0; step < 8; ++step) {
      const double f = unnormalize(t, n);
      if (f == double(i)) break;
      t = std::nextafter(t, f < double(i) ? 2.0 : -2.0);
    }
    return t;
  };
  std::vector<double> cx(static_cast<size_t>(grid_w));
  std::vector<double> cy(static_cast<size_t>(grid_h));
  for (int x = 0; x < grid_w; ++x) cx[size_t(x)] = center(x, grid_w);
  for (int y = 0; y < grid_h; ++y) cy[size_t(y)] = center(y, grid_h);
  for (int y = 0; y < grid_h; ++y)
    for (int x = 0; x < grid_w; ++x) {
      flow.x(y, x) = cx[size_t(x)];
      flow.y(y, x) = cy[size_t(y)];
    }
  return {std::move(flow), ScalarMap(grid_h, grid_w, 1.0)};
}

frontal::FlowProvider make_affine_flow_provider(int grid_h, int grid_w) {
  return [grid_h, grid_w](const KeypointSet& src, const KeypointSet& dst) {
    return affine_flow(src, dst, grid_h, grid_w);
  };
}

frontal::FlowProvider make_affine_motion_provider(int grid_h, int grid_w) {
  return [grid_h, grid_w](const KeypointSet& src, const KeypointSet& dst) {
    return affine_motion(src, dst, grid_h, grid_w);
  };
}

frontal::FlowProvider make_identity_flow_provider(int grid_h, int grid_w) {
  return [grid_h, grid_w](const KeypointSet&, const KeypointSet&) {
    return identity_flow(grid_h, grid_w);
  };
}

frontal::DecoderProvider make_identity_decoder() {
  return [](const FeatureMap& embedding, const FeatureMap&) {
    return embedding;
  };
}

FeatureMap stub_encoder(const KeypointSet& keypoints, const StreamConfig& cfg,
                        int channels, double sigma) {
  const int n_kp = int(keypoints.coords.size());
  if (n_kp == 0) raise(errc::empty_input, "stub_encoder: no keypoints");
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);

  FeatureMap out(channels, cfg.grid_h, cfg.grid_w);
  for (int c = 0; c < channels; ++c) {
    const Vec2 kp = keypoints.coords[size_t(c % n_kp)];
    for (int y = 0; y < cfg.grid_h; ++y) {
      const double gy = frontal::grid_coord(y, cfg.grid_h);
      for (int x = 0; x < cfg.grid_w; ++x) {
        const double gx = frontal::grid_coord(x, cfg.grid_w);
        const double d2 = (gx - kp.x) * (gx - kp.x) + (gy - kp.y) * (gy - kp.y);
        out.at(c, y, x) = std::exp(-d2 * inv_two_sigma2);
      }
    }
  }
  return out;
}

FeatureMap brute_force_bilinear(const FeatureMap& fm, const FlowField& flow) {
  if (flow.height != fm.height || flow.width != fm.width)
    raise(errc::shape_mismatch, "brute_force_bilinear: dims differ");

  const int h = fm.height, w = fm.width;
  FeatureMap out(fm.channels, h, w);
  for (int c = 0; c < fm.channels; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double fx = (flow.x(y, x) + 1.0) * 0.5 * double(w - 1);
        const double fy = (flow.y(y, x) + 1.0) * 0.5 * double(h - 1);
        if (!(fx > -1e12 && fx < 1e12 && fy > -1e12 && fy < 1e12)) {
          out.at(c, y, x) = 0.0;
          continue;
        }
        const double fx0 = std::clamp(std::floor(fx), -2.0, double(w) + 1.0);
        const double fy0 = std::clamp(std::floor(fy), -2.0, double(h) + 1.0);
        const int x0 = int(fx0);
        const int y0 = int(fy0);
        const double wx = fx - fx0;
        const double wy = fy - fy0;

        double v00 = 0.0, v10 = 0.0, v01 = 0.0, v11 = 0.0;
        if (y0 >= 0 && y0 < h && x0 >= 0 && x0 < w) v00 = fm.at(c, y0, x0);
        if (y0 >= 0 && y0 < h && x0 + 1 >= 0 && x0 + 1 < w)
          v10 = fm.at(c, y0, x0 + 1);
        if (y0 + 1 >= 0 && y0 + 1 < h && x0 >= 0 && x0 < w)
          v01 = fm.at(c, y0 + 1, x0);
        if (y0 + 1 >= 0 && y0 + 1 < h && x0 + 1 >= 0 && x0 + 1 < w)
          v11 = fm.at(c, y0 + 1, x0 + 1);

        out.at(c, y, x) = v00 * (1.0 - wx) * (1.0 - wy) +
                          v10 * wx * (1.0 - wy) + v01 * (1.0 - wx) * wy +
                          v11 * wx * wy;
      }
  return out;
}

}  // namespace fz::synth
