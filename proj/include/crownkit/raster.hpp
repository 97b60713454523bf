#pragma once

#include <span>
#include <utility>
#include <vector>

#include "crownkit/geometry.hpp"

namespace crownkit {

/// Single-band north-up raster of f32 values, row-major, row 0 at the top.
class Raster {
 public:
  static constexpr float kDefaultNodata = -9999.0F;

  Raster() = default;
  Raster(GridRef grid, float nodata = kDefaultNodata);
  Raster(GridRef grid, std::vector<float> values, float nodata = kDefaultNodata);

  const GridRef& grid() const { return grid_; }
  int width() const { return grid_.width; }
  int height() const { return grid_.height; }
  double pixel_size() const { return grid_.pixel_size; }
  float nodata() const { return nodata_; }

  float at(int row, int col) const { return values_[index(row, col)]; }
  float& at(int row, int col) { return values_[index(row, col)]; }
  bool is_nodata(float v) const { return v == nodata_; }

  std::span<const float> values() const { return values_; }
  std::span<float> values() { return values_; }

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(grid_.width) +
           static_cast<std::size_t>(col);
  }

  GridRef grid_{};
  float nodata_ = kDefaultNodata;
  std::vector<float> values_;
};

/// Fixed-size crop around a crown centroid. Pixels are channel-major.
struct Tile {
  int size = 0;
  int channels = 1;
  Pixel center{};
  std::vector<float> pixels;
  bool pad_flag = false;

  float at(int channel, int row, int col) const {
    return pixels[(static_cast<std::size_t>(channel) * size + row) * size + col];
  }
};

/// Linear-interpolation percentile over (n - 1) ranks; p in [0, 100].
double percentile(std::span<const double> values, double p);

/// Raster values under the true pixels of `mask`, nodata removed, row-major.
std::vector<double> masked_values(const Raster& raster, const PixelMask& mask);

/// size x size crop covering rows/cols [center - size/2, center - size/2 + size).
/// Out-of-raster pixels are zero and set pad_flag.
Tile extract_tile(const Raster& raster, Pixel center, int size);

/// Multi-band variant; all bands must share the same grid.
Tile extract_tile(std::span<const Raster> bands, Pixel center, int size);

/// Rounds a fractional centroid to the nearest pixel (halves round up).
Pixel round_to_pixel(std::pair<double, double> rc);

}  // namespace crownkit
