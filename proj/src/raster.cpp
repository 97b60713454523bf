#include "crownkit/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crownkit/error.hpp"

namespace crownkit {

namespace {

void check_grid(const GridRef& g) {
  if (g.width <= 0 || g.height <= 0)
    throw Error(ErrorCode::InvalidArgument, "raster dimensions must be positive");
  if (!(g.pixel_size > 0.0) || !std::isfinite(g.pixel_size))
    throw Error(ErrorCode::InvalidArgument, "raster pixel size must be > 0");
}

}  // namespace

Raster::Raster(GridRef grid, float nodata)
    : grid_(grid),
      nodata_(nodata),
      values_(static_cast<std::size_t>(std::max(grid.width, 0)) *
                  static_cast<std::size_t>(std::max(grid.height, 0)),
              0.0F) {
  check_grid(grid_);
}

Raster::Raster(GridRef grid, std::vector<float> values, float nodata)
    : grid_(grid), nodata_(nodata), values_(std::move(values)) {
  check_grid(grid_);
  if (values_.size() != static_cast<std::size_t>(grid_.width) * grid_.height)
    throw Error(ErrorCode::ShapeMismatch, "raster holds " + std::to_string(values_.size()) +
                                              " values, expected width*height");
}

double percentile(std::span<const double> values, double p) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "percentile of an empty list");
  if (!(p >= 0.0 && p <= 100.0))
    throw Error(ErrorCode::InvalidArgument, "percentile p must lie in [0, 100]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  if (p == 100.0) return sorted.back();
  const double rank = static_cast<double>(sorted.size() - 1) * p / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<double> masked_values(const Raster& raster, const PixelMask& mask) {
  std::vector<double> out;
  bool overlap = false;
  const Pixel o = mask.origin();
  for (int r = 0; r < mask.rows(); ++r) {
    const int row = o.row + r;
    if (row < 0 || row >= raster.height()) continue;
    for (int c = 0; c < mask.cols(); ++c) {
      const int col = o.col + c;
      if (col < 0 || col >= raster.width() || !mask.at(r, c)) continue;
      overlap = true;
      const float v = raster.at(row, col);
      if (!raster.is_nodata(v) && !std::isnan(v)) out.push_back(v);
    }
  }
  if (!overlap) throw Error(ErrorCode::NoOverlap, "mask does not overlap the raster");
  if (out.empty()) throw Error(ErrorCode::AllNodata, "every masked pixel is nodata");
  return out;
}

Tile extract_tile(const Raster& raster, Pixel center, int size) {
  return extract_tile(std::span<const Raster>(&raster, 1), center, size);
}

Tile extract_tile(std::span<const Raster> bands, Pixel center, int size) {
  if (bands.empty()) throw Error(ErrorCode::InvalidArgument, "no raster bands given");
  if (size <= 0) throw Error(ErrorCode::InvalidArgument, "tile size must be > 0");
  const GridRef& g = bands[0].grid();
  for (const auto& b : bands)
    if (b.width() != g.width || b.height() != g.height)
      throw Error(ErrorCode::ShapeMismatch, "raster bands differ in shape");
  if (!g.contains(center))
    throw Error(ErrorCode::CenterOutOfBounds,
                "tile center (" + std::to_string(center.row) + ", " +
                    std::to_string(center.col) + ") outside raster");

  Tile tile;
  tile.size = size;
  tile.channels = static_cast<int>(bands.size());
  tile.center = center;
  tile.pixels.assign(static_cast<std::size_t>(tile.channels) * size * size, 0.0F);
  const int row0 = center.row - size / 2;
  const int col0 = center.col - size / 2;
  tile.pad_flag = row0 < 0 || col0 < 0 || row0 + size > g.height || col0 + size > g.width;

  const int r_begin = std::max(0, -row0), r_end = std::min(size, g.height - row0);
  const int c_begin = std::max(0, -col0), c_end = std::min(size, g.width - col0);
  for (int ch = 0; ch < tile.channels; ++ch) {
    const Raster& band = bands[static_cast<std::size_t>(ch)];
    for (int r = r_begin; r < r_end; ++r)
      for (int c = c_begin; c < c_end; ++c)
        tile.pixels[(static_cast<std::size_t>(ch) * size + r) * size + c] =
            band.at(row0 + r, col0 + c);
  }
  return tile;
}

Pixel round_to_pixel(std::pair<double, double> rc) {
  return {static_cast<int>(std::floor(rc.first + 0.5)),
          static_cast<int>(std::floor(rc.second + 0.5))};
}

}  // namespace crownkit
