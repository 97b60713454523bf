#include "crownkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "crownkit/error.hpp"

namespace crownkit {

Point2 GridRef::pixel_center(double row, double col) const {
  return {x_ll + (col + 0.5) * pixel_size, y_ll + (height - row - 0.5) * pixel_size};
}

std::pair<double, double> GridRef::to_pixel(Point2 p) const {
  return {height - 0.5 - (p.y - y_ll) / pixel_size, (p.x - x_ll) / pixel_size - 0.5};
}

// ---------------------------------------------------------------------------
// PixelMask

PixelMask::PixelMask(Pixel origin, int rows, int cols, double pixel_size)
    : origin_(origin),
      rows_(rows),
      cols_(cols),
      pixel_size_(pixel_size),
      bits_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0) {
  if (rows < 0 || cols < 0) throw Error(ErrorCode::InvalidArgument, "negative mask window");
  if (!(pixel_size > 0.0)) throw Error(ErrorCode::InvalidArgument, "pixel size must be > 0");
}

PixelMask PixelMask::from_pixels(std::span<const Pixel> pixels, double pixel_size, int padding) {
  if (pixels.empty()) return PixelMask({0, 0}, 0, 0, pixel_size);
  int r0 = pixels[0].row, r1 = r0, c0 = pixels[0].col, c1 = c0;
  for (const auto& p : pixels) {
    r0 = std::min(r0, p.row);
    r1 = std::max(r1, p.row);
    c0 = std::min(c0, p.col);
    c1 = std::max(c1, p.col);
  }
  PixelMask m({r0 - padding, c0 - padding}, r1 - r0 + 1 + 2 * padding, c1 - c0 + 1 + 2 * padding,
              pixel_size);
  for (const auto& p : pixels) m.set(p.row - m.origin_.row, p.col - m.origin_.col, true);
  return m;
}

bool PixelMask::contains(Pixel px) const {
  const int r = px.row - origin_.row;
  const int c = px.col - origin_.col;
  if (r < 0 || c < 0 || r >= rows_ || c >= cols_) return false;
  return at(r, c);
}

std::size_t PixelMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<Pixel> PixelMask::pixels() const {
  std::vector<Pixel> out;
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c)
      if (at(r, c)) out.push_back({origin_.row + r, origin_.col + c});
  return out;
}

PixelMask PixelMask::tightened() const {
  const auto px = pixels();
  return from_pixels(px, pixel_size_);
}

PixelMask PixelMask::translated(int d_row, int d_col) const {
  PixelMask m = *this;
  m.origin_.row += d_row;
  m.origin_.col += d_col;
  return m;
}

// ---------------------------------------------------------------------------
// Polygons

bool point_in_ring(const Ring& ring, Point2 p) {
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2& a = ring[i];
    const Point2& b = ring[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

double ring_area(const Ring& ring) {
  double twice = 0.0;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++)
    twice += ring[j].x * ring[i].y - ring[i].x * ring[j].y;
  return 0.5 * twice;
}

namespace {

Ring open_ring(const Ring& polygon) {
  Ring ring = polygon;
  if (ring.size() >= 2 && ring.front().x == ring.back().x && ring.front().y == ring.back().y)
    ring.pop_back();
  return ring;
}

}  // namespace

PixelMask rasterize_polygon(const Ring& polygon, const GridRef& grid) {
  if (!(grid.pixel_size > 0.0) || grid.width <= 0 || grid.height <= 0)
    throw Error(ErrorCode::InvalidArgument, "invalid raster georeference");
  const Ring ring = open_ring(polygon);
  if (ring.size() < 3) throw Error(ErrorCode::DegeneratePolygon, "fewer than 3 vertices");

  double xmin = ring[0].x, xmax = xmin, ymin = ring[0].y, ymax = ymin;
  for (const auto& p : ring) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw Error(ErrorCode::DegeneratePolygon, "non-finite vertex");
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const double extent = std::max(xmax - xmin, ymax - ymin);
  if (extent <= 0.0 || std::abs(ring_area(ring)) <= 1e-12 * extent * extent)
    throw Error(ErrorCode::DegeneratePolygon, "polygon has zero area");

  // Pixel-center index ranges covering the polygon bounding box.
  const double ps = grid.pixel_size;
  int c0 = static_cast<int>(std::ceil((xmin - grid.x_ll) / ps - 0.5));
  int c1 = static_cast<int>(std::floor((xmax - grid.x_ll) / ps - 0.5));
  int r0 = static_cast<int>(std::ceil(grid.height - 0.5 - (ymax - grid.y_ll) / ps));
  int r1 = static_cast<int>(std::floor(grid.height - 0.5 - (ymin - grid.y_ll) / ps));
  c0 = std::max(c0, 0);
  r0 = std::max(r0, 0);
  c1 = std::min(c1, grid.width - 1);
  r1 = std::min(r1, grid.height - 1);
  if (c0 > c1 || r0 > r1)
    throw Error(ErrorCode::OutsideRaster, "polygon covers no pixel center of the raster");

  std::vector<Pixel> inside;
  for (int r = r0; r <= r1; ++r)
    for (int c = c0; c <= c1; ++c)
      if (point_in_ring(ring, grid.pixel_center(r, c))) inside.push_back({r, c});
  if (inside.empty()) throw Error(ErrorCode::EmptyMask, "polygon contains no pixel center");
  return PixelMask::from_pixels(inside, ps);
}

// ---------------------------------------------------------------------------
// Characteristic length and buffering

double characteristic_length(const PixelMask& mask) {
  const std::size_t n = mask.count();
  if (n == 0) throw Error(ErrorCode::EmptyMask, "characteristic length of an empty mask");
  return std::sqrt(static_cast<double>(n));
}

namespace {

// Felzenszwalb-Huttenlocher 1-D squared distance transform of f, in place.
// Background pixels hold 0, foreground pixels kFar.
constexpr double kFar = 1e20;

void edt_1d(std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
            std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  auto intersect = [&](int q, int p) {
    return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
  };
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s = intersect(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
  f.swap(d);
}

}  // namespace

PixelMask buffer_mask(const PixelMask& mask, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw Error(ErrorCode::InvalidArgument, "buffer scale must be > 0");
  const PixelMask tight = mask.tightened();
  const double threshold = scale * characteristic_length(tight);

  // Padding makes every outside neighbour of a boundary pixel visible to the
  // transform, so window edges behave like an infinite background.
  const int pad = static_cast<int>(std::ceil(threshold)) + 1;
  const int rows = tight.rows() + 2 * pad;
  const int cols = tight.cols() + 2 * pad;
  std::vector<double> grid(static_cast<std::size_t>(rows) * cols, 0.0);
  for (int r = 0; r < tight.rows(); ++r)
    for (int c = 0; c < tight.cols(); ++c)
      if (tight.at(r, c)) grid[static_cast<std::size_t>(r + pad) * cols + (c + pad)] = kFar;

  const int longest = std::max(rows, cols);
  std::vector<double> f, d(longest);
  std::vector<int> v(longest);
  std::vector<double> z(longest + 1);

  f.resize(rows);
  d.resize(rows);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) f[r] = grid[static_cast<std::size_t>(r) * cols + c];
    edt_1d(f, d, v, z);
    for (int r = 0; r < rows; ++r) grid[static_cast<std::size_t>(r) * cols + c] = f[r];
  }
  f.resize(cols);
  d.resize(cols);
  for (int r = 0; r < rows; ++r) {
    std::copy_n(grid.begin() + static_cast<std::ptrdiff_t>(r) * cols, cols, f.begin());
    edt_1d(f, d, v, z);
    std::copy(f.begin(), f.end(), grid.begin() + static_cast<std::ptrdiff_t>(r) * cols);
  }

  std::vector<Pixel> kept;
  for (int r = 0; r < tight.rows(); ++r)
    for (int c = 0; c < tight.cols(); ++c) {
      if (!tight.at(r, c)) continue;
      const double dist = std::sqrt(grid[static_cast<std::size_t>(r + pad) * cols + (c + pad)]);
      if (dist > threshold) kept.push_back({tight.origin().row + r, tight.origin().col + c});
    }
  if (kept.empty()) return PixelMask(tight.origin(), 0, 0, tight.pixel_size());
  return PixelMask::from_pixels(kept, tight.pixel_size());
}

// ---------------------------------------------------------------------------
// Hull and minimum rotated rectangle. Points are (x = col, y = row).

namespace {

using Vec = std::pair<double, double>;

double cross(const Vec& o, const Vec& a, const Vec& b) {
  return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
}

}  // namespace

std::vector<Vec> convex_hull(std::vector<Vec> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() <= 2) return pts;
  std::vector<Vec> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

namespace {

double fold_angle(double a) {
  a = std::fmod(a, std::numbers::pi);
  if (a < 0) a += std::numbers::pi;
  if (a >= std::numbers::pi) a = 0.0;
  return a;
}

}  // namespace

RotatedRect min_rotated_rect(const PixelMask& mask) {
  const auto px = mask.pixels();
  if (px.empty()) throw Error(ErrorCode::EmptyMask, "rotated rectangle of an empty mask");
  std::vector<Vec> pts;
  pts.reserve(px.size());
  for (const auto& p : px) pts.emplace_back(p.col, p.row);
  const auto hull = convex_hull(std::move(pts));
  const double ps = mask.pixel_size();

  RotatedRect rect;
  if (hull.size() == 1) {
    rect.center_row = hull[0].second;
    rect.center_col = hull[0].first;
    return rect;
  }
  if (hull.size() == 2) {
    const double dx = hull[1].first - hull[0].first;
    const double dy = hull[1].second - hull[0].second;
    rect.length = std::hypot(dx, dy) * ps;
    rect.angle = fold_angle(std::atan2(dy, dx));
    rect.center_col = 0.5 * (hull[0].first + hull[1].first);
    rect.center_row = 0.5 * (hull[0].second + hull[1].second);
    return rect;
  }

  // Rotating calipers: for each hull edge keep the extreme points along the
  // edge direction (max, min) and along its inward normal; pointers only move
  // forward, so the sweep is linear in the hull size.
  const std::size_t n = hull.size();
  auto at = [&](std::size_t i) -> const Vec& { return hull[i % n]; };
  auto dot_u = [](const Vec& u, const Vec& o, const Vec& p) {
    return u.first * (p.first - o.first) + u.second * (p.second - o.second);
  };
  auto dot_n = [](const Vec& u, const Vec& o, const Vec& p) {
    return u.first * (p.second - o.second) - u.second * (p.first - o.first);
  };

  double best_area = std::numeric_limits<double>::infinity();
  std::size_t k = 1, j = 1, m = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec& o = at(i);
    const Vec& e1 = at(i + 1);
    const double len = std::hypot(e1.first - o.first, e1.second - o.second);
    const Vec u{(e1.first - o.first) / len, (e1.second - o.second) / len};

    if (k < i + 1) k = i + 1;
    while (dot_u(u, o, at(k + 1)) > dot_u(u, o, at(k))) ++k;
    if (j < k) j = k;
    while (dot_n(u, o, at(j + 1)) > dot_n(u, o, at(j))) ++j;
    if (i == 0) m = j;
    if (m < j) m = j;
    while (dot_u(u, o, at(m + 1)) < dot_u(u, o, at(m))) ++m;

    const double hi = dot_u(u, o, at(k));
    const double lo = dot_u(u, o, at(m));
    const double height = dot_n(u, o, at(j));
    const double area = (hi - lo) * height;
    if (area < best_area) {
      best_area = area;
      const double along = hi - lo;
      const double mid_u = 0.5 * (hi + lo);
      const double mid_n = 0.5 * height;
      // Inward normal is (-u.y, u.x) for a counter-clockwise hull.
      rect.center_col = o.first + u.first * mid_u - u.second * mid_n;
      rect.center_row = o.second + u.second * mid_u + u.first * mid_n;
      const double theta = std::atan2(u.second, u.first);
      if (along >= height) {
        rect.length = along * ps;
        rect.width = height * ps;
        rect.angle = fold_angle(theta);
      } else {
        rect.length = height * ps;
        rect.width = along * ps;
        rect.angle = fold_angle(theta + std::numbers::pi / 2);
      }
    }
  }
  return rect;
}

std::pair<double, double> centroid(const PixelMask& mask) {
  double sr = 0.0, sc = 0.0;
  std::size_t n = 0;
  for (int r = 0; r < mask.rows(); ++r)
    for (int c = 0; c < mask.cols(); ++c)
      if (mask.at(r, c)) {
        sr += r;
        sc += c;
        ++n;
      }
  if (n == 0) throw Error(ErrorCode::EmptyMask, "centroid of an empty mask");
  return {mask.origin().row + sr / static_cast<double>(n),
          mask.origin().col + sc / static_cast<double>(n)};
}

}  // namespace crownkit
