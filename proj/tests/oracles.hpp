#pragma once

// Reference implementations used only by tests. Each one is written from the
// definition, as directly as possible, without sharing code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "crownkit/geometry.hpp"

namespace oracle {

/// Keeps pixel s of S when min over non-S pixels q of |s - q| exceeds
/// scale * sqrt(|S|). Candidates q range over the bounding box grown by one,
/// whose clamp of any farther q is at least as close.
inline std::vector<crownkit::Pixel> buffer(const crownkit::PixelMask& mask, double scale) {
  const auto px = mask.pixels();
  std::vector<crownkit::Pixel> out;
  if (px.empty()) return out;
  int r0 = px[0].row, r1 = px[0].row, c0 = px[0].col, c1 = px[0].col;
  for (const auto& p : px) {
    r0 = std::min(r0, p.row);
    r1 = std::max(r1, p.row);
    c0 = std::min(c0, p.col);
    c1 = std::max(c1, p.col);
  }
  std::vector<crownkit::Pixel> background;
  for (int r = r0 - 1; r <= r1 + 1; ++r)
    for (int c = c0 - 1; c <= c1 + 1; ++c)
      if (!mask.contains({r, c})) background.push_back({r, c});
  const double t = scale * std::sqrt(static_cast<double>(px.size()));
  for (const auto& s : px) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : background) {
      const double dr = s.row - q.row, dc = s.col - q.col;
      best = std::min(best, std::sqrt(dr * dr + dc * dc));
    }
    if (best > t) out.push_back(s);
  }
  return out;
}

/// Winding number of a closed ring around p; nonzero means inside for simple
/// polygons.
inline int winding_number(const crownkit::Ring& ring, crownkit::Point2 p) {
  int wn = 0;
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = ring[i];
    const auto& b = ring[(i + 1) % n];
    const double cross = (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
    if (a.y <= p.y) {
      if (b.y > p.y && cross > 0) ++wn;
    } else if (b.y <= p.y && cross < 0) {
      --wn;
    }
  }
  return wn;
}

struct Rect {
  double area = std::numeric_limits<double>::infinity();
  double length = 0.0;
  double width = 0.0;
};

/// Minimum-area rectangle by trying the direction of every point pair; the
/// optimum has a side collinear with some hull edge, hence with some pair.
inline Rect min_rect(const std::vector<std::pair<double, double>>& pts) {
  Rect best;
  if (pts.size() < 2) return Rect{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double dx = pts[j].first - pts[i].first, dy = pts[j].second - pts[i].second;
      const double len = std::hypot(dx, dy);
      if (len == 0.0) continue;
      const double ux = dx / len, uy = dy / len;
      double a0 = 1e300, a1 = -1e300, b0 = 1e300, b1 = -1e300;
      for (const auto& p : pts) {
        const double a = ux * p.first + uy * p.second;
        const double b = -uy * p.first + ux * p.second;
        a0 = std::min(a0, a);
        a1 = std::max(a1, a);
        b0 = std::min(b0, b);
        b1 = std::max(b1, b);
      }
      const double area = (a1 - a0) * (b1 - b0);
      if (area < best.area) best = {area, std::max(a1 - a0, b1 - b0), std::min(a1 - a0, b1 - b0)};
    }
  return best;
}

/// Sort, then interpolate between ranks floor(p (n-1) / 100) and the next.
inline double percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const long double rank = static_cast<long double>(p) / 100.0L * (v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const long double frac = rank - lo;
  return static_cast<double>(v[lo] + frac * (static_cast<long double>(v[hi]) - v[lo]));
}

struct Regression {
  double mae, rmse, msle, delta, msd;
};

/// Single pass in extended precision.
inline Regression regression(const std::vector<double>& p, const std::vector<double>& t,
                             double threshold = 1.25) {
  long double abs = 0, sq = 0, lg = 0, sd = 0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const long double d = static_cast<long double>(p[i]) - t[i];
    abs += std::fabs(d);
    sq += d * d;
    sd += d;
    const long double l = std::log1p(static_cast<long double>(p[i])) -
                          std::log1p(static_cast<long double>(t[i]));
    lg += l * l;
    if (p[i] > 0 && p[i] / t[i] < threshold && t[i] / p[i] < threshold) ++hit;
  }
  const long double n = p.size();
  return {static_cast<double>(abs / n), static_cast<double>(std::sqrt(sq / n)),
          static_cast<double>(lg / n), static_cast<double>(hit / n), static_cast<double>(sd / n)};
}

struct Classification {
  double macro_f1, macro_acc;
  std::vector<double> f1;
};

/// Per-class counts straight from the label lists.
inline Classification classification(const std::vector<int>& p, const std::vector<int>& t, int C) {
  Classification out{0, 0, {}};
  for (int k = 0; k < C; ++k) {
    long long tp = 0, fp = 0, fn = 0, support = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (t[i] == k) ++support;
      if (t[i] == k && p[i] == k) ++tp;
      if (t[i] != k && p[i] == k) ++fp;
      if (t[i] == k && p[i] != k) ++fn;
    }
    const double prec = tp + fp ? static_cast<double>(tp) / (tp + fp) : 0.0;
    const double rec = tp + fn ? static_cast<double>(tp) / (tp + fn) : 0.0;
    const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    out.f1.push_back(f1);
    out.macro_f1 += f1 / C;
    out.macro_acc += (support ? static_cast<double>(tp) / support : 0.0) / C;
  }
  return out;
}

/// Solves the 2x2 normal equations [n Sx; Sx Sxx] [b; a] = [Sy; Sxy] by
/// Cramer's rule in extended precision. Returns (slope, intercept).
inline std::pair<double, double> ols(const std::vector<double>& x, const std::vector<double>& y) {
  long double n = x.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  const long double det = n * sxx - sx * sx;
  const long double a = (n * sxy - sx * sy) / det;
  const long double b = (sxx * sy - sx * sxy) / det;
  return {static_cast<double>(a), static_cast<double>(b)};
}

/// lambda_k = 2 exp(w_k / T) / sum_j exp(w_j / T).
inline std::pair<double, double> dwa(double w_h, double w_s, double T) {
  const long double eh = std::exp(static_cast<long double>(w_h) / T);
  const long double es = std::exp(static_cast<long double>(w_s) / T);
  return {static_cast<double>(2 * eh / (eh + es)), static_cast<double>(2 * es / (eh + es))};
}

/// Random simply connected pixel blob inside a rows x cols window.
inline crownkit::PixelMask random_blob(std::mt19937_64& rng, int rows, int cols) {
  crownkit::PixelMask m({0, 0}, rows, cols, 1.0);
  std::uniform_int_distribution<int> rr(0, rows - 1), cc(0, cols - 1);
  const int shape = static_cast<int>(rng() % 3);
  if (shape == 0) {
    // filled ellipse
    const double cr = rr(rng), ccn = cc(rng);
    const double ar = 1 + rng() % std::max(1, rows / 2), ac = 1 + rng() % std::max(1, cols / 2);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        const double u = (r - cr) / ar, v = (c - ccn) / ac;
        if (u * u + v * v <= 1.0) m.set(r, c, true);
      }
  } else if (shape == 1) {
    // random walk of discs
    int r = rr(rng), c = cc(rng);
    const int steps = 1 + static_cast<int>(rng() % 60);
    for (int s = 0; s < steps; ++s) {
      const int rad = static_cast<int>(rng() % 4);
      for (int dr = -rad; dr <= rad; ++dr)
        for (int dc = -rad; dc <= rad; ++dc)
          if (dr * dr + dc * dc <= rad * rad && r + dr >= 0 && r + dr < rows && c + dc >= 0 &&
              c + dc < cols)
            m.set(r + dr, c + dc, true);
      r = std::clamp(r + static_cast<int>(rng() % 5) - 2, 0, rows - 1);
      c = std::clamp(c + static_cast<int>(rng() % 5) - 2, 0, cols - 1);
    }
  } else {
    // independent noise, including holes and isolated pixels
    const double density = 0.3 + 0.6 * (rng() % 1000) / 1000.0;
    std::bernoulli_distribution on(density);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) m.set(r, c, on(rng));
  }
  if (m.empty()) m.set(rr(rng), cc(rng), true);
  return m;
}

}  // namespace oracle
