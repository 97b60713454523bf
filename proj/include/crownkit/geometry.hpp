#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace crownkit {

/// Integer pixel coordinate in a parent raster (row grows downwards).
struct Pixel {
  int row = 0;
  int col = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
  friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

/// A point in world coordinates (meters); y grows northwards.
struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

using Ring = std::vector<Point2>;

/// Georeference of a north-up raster grid. (x_ll, y_ll) is the lower-left
/// corner of the lower-left pixel, as in ESRI ASCII grids.
struct GridRef {
  int width = 0;
  int height = 0;
  double pixel_size = 1.0;
  double x_ll = 0.0;
  double y_ll = 0.0;

  /// World coordinate of the center of pixel (row, col).
  Point2 pixel_center(double row, double col) const;
  /// Fractional (row, col) of a world point, pixel centers at integers.
  std::pair<double, double> to_pixel(Point2 p) const;
  bool contains(Pixel px) const {
    return px.row >= 0 && px.col >= 0 && px.row < height && px.col < width;
  }
};

/// Set of crown pixels stored as a bitmap over a window of the parent raster.
class PixelMask {
 public:
  PixelMask() = default;
  PixelMask(Pixel origin, int rows, int cols, double pixel_size);

  /// Builds a mask whose window is the tight bounding box of `pixels`
  /// grown by `padding` on every side.
  static PixelMask from_pixels(std::span<const Pixel> pixels, double pixel_size,
                               int padding = 0);

  Pixel origin() const { return origin_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double pixel_size() const { return pixel_size_; }

  /// Window-local access.
  bool at(int r, int c) const { return bits_[static_cast<std::size_t>(r) * cols_ + c] != 0; }
  void set(int r, int c, bool v) { bits_[static_cast<std::size_t>(r) * cols_ + c] = v ? 1 : 0; }

  /// Membership in parent-raster coordinates; false outside the window.
  bool contains(Pixel px) const;

  std::size_t count() const;
  bool empty() const { return count() == 0; }

  /// True pixels in parent coordinates, row-major order.
  std::vector<Pixel> pixels() const;

  /// Same pixel set with the window shrunk to its tight bounding box.
  PixelMask tightened() const;

  PixelMask translated(int d_row, int d_col) const;

 private:
  Pixel origin_{};
  int rows_ = 0;
  int cols_ = 0;
  double pixel_size_ = 1.0;
  std::vector<std::uint8_t> bits_;
};

/// Minimum-area enclosing rectangle. Lengths in meters, center in
/// fractional parent pixel coordinates.
struct RotatedRect {
  double length = 0.0;
  double width = 0.0;
  double angle = 0.0;
  double center_row = 0.0;
  double center_col = 0.0;
};

/// Even-odd test of a point against a closed ring.
bool point_in_ring(const Ring& ring, Point2 p);

/// Signed shoelace area of a ring (positive when counter-clockwise).
double ring_area(const Ring& ring);

/// Pixels whose centers lie inside the polygon (even-odd rule), clipped to
/// the grid.
PixelMask rasterize_polygon(const Ring& polygon, const GridRef& grid);

/// L = sqrt(|S|), in pixels.
double characteristic_length(const PixelMask& mask);

/// Pixels of `mask` whose Euclidean distance (in pixel units) to the nearest
/// pixel outside the mask is strictly greater than scale * L. The result may
/// be empty.
PixelMask buffer_mask(const PixelMask& mask, double scale = 0.1);

/// Minimum-area rectangle enclosing the convex hull of the true-pixel centers.
RotatedRect min_rotated_rect(const PixelMask& mask);

/// r = (l + w) / 4.
inline double crown_radius(const RotatedRect& rect) { return (rect.length + rect.width) / 4.0; }

/// Mean (row, col) of the true pixels in parent coordinates.
std::pair<double, double> centroid(const PixelMask& mask);

/// Convex hull (counter-clockwise in (col, row) space, no collinear points).
std::vector<std::pair<double, double>> convex_hull(std::vector<std::pair<double, double>> pts);

}  // namespace crownkit
