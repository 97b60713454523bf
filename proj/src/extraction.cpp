#include "crownkit/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "crownkit/error.hpp"

namespace crownkit {

std::string to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "train";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  throw Error(ErrorCode::InvalidArgument, "unknown split '" + s + "' (expected train|val|test)");
}

void ExtractionConfig::validate() const {
  if (!(buffer_scale > 0.0) || !(fallback_scale > 0.0) || !(fallback_scale < buffer_scale))
    throw Error(ErrorCode::InvalidArgument, "require 0 < fallback_scale < buffer_scale");
  if (!(percentile_p > 0.0 && percentile_p <= 100.0))
    throw Error(ErrorCode::InvalidArgument, "percentile_p must lie in (0, 100]");
  if (tile_size <= 0) throw Error(ErrorCode::InvalidArgument, "tile_size must be > 0");
  if (linear_correction &&
      (!std::isfinite(linear_correction->slope) || !std::isfinite(linear_correction->intercept)))
    throw Error(ErrorCode::InvalidArgument, "linear correction must be finite");
}

HeightLabel extract_height(const Raster& chm, const PixelMask& mask, const ExtractionConfig& cfg) {
  cfg.validate();
  if (mask.empty()) throw Error(ErrorCode::EmptyMask, "crown mask is empty");

  HeightLabel label;
  PixelMask region = buffer_mask(mask, cfg.buffer_scale);
  if (region.empty()) {
    region = buffer_mask(mask, cfg.fallback_scale);
    label.buffer = BufferLevel::Reduced;
  }
  if (region.empty()) {
    region = mask;
    label.buffer = BufferLevel::Unbuffered;
  }

  const std::vector<double> values = masked_values(chm, region);
  double h = cfg.use_max ? *std::max_element(values.begin(), values.end())
                         : percentile(values, cfg.percentile_p);
  if (cfg.linear_correction) {
    h = cfg.linear_correction->slope * h + cfg.linear_correction->intercept;
    if (h < 0.0) return label;
  }
  label.height_m = h;
  return label;
}

std::vector<std::string> class_map(const std::vector<CrownAnnotation>& crowns) {
  std::set<std::string> names;
  for (const auto& c : crowns) names.insert(c.class_name);
  return {names.begin(), names.end()};
}

std::vector<std::string> tile_file_names(const std::string& crown_id, int channels) {
  std::string out = crown_id;
  for (char& ch : out) {
    const bool safe = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                      (ch >= '0' && ch <= '9') || ch == '_' || ch == '-' || ch == '.';
    if (!safe) ch = '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  if (channels <= 1) return {out + ".asc"};
  std::vector<std::string> names;
  for (int k = 1; k <= channels; ++k) names.push_back(out + "_b" + std::to_string(k) + ".asc");
  return names;
}

Benchmark build_benchmark(const Raster& chm, const std::vector<Raster>* image,
                          const std::vector<CrownAnnotation>& crowns, const ExtractionConfig& cfg,
                          const TileSink& sink) {
  if (crowns.empty()) throw Error(ErrorCode::EmptyCrownList, "no crowns to extract");
  cfg.validate();
  if (image) {
    if (image->empty()) throw Error(ErrorCode::InvalidArgument, "image has no bands");
    for (const auto& band : *image)
      if (band.width() != chm.width() || band.height() != chm.height())
        throw Error(ErrorCode::ShapeMismatch, "image bands must match the CHM grid");
  }

  Benchmark out;
  out.class_names = class_map(crowns);
  for (const auto& crown : crowns) {
    try {
      const PixelMask mask = rasterize_polygon(crown.polygon, chm.grid());
      const Pixel center = round_to_pixel(centroid(mask));
      const HeightLabel label = extract_height(chm, mask, cfg);
      const Tile tile = image ? extract_tile(*image, center, cfg.tile_size)
                              : extract_tile(chm, center, cfg.tile_size);

      BenchmarkRecord rec;
      rec.crown_id = crown.id;
      rec.class_name = crown.class_name;
      rec.class_index = static_cast<int>(
          std::lower_bound(out.class_names.begin(), out.class_names.end(), crown.class_name) -
          out.class_names.begin());
      rec.height_m = label.height_m;
      rec.split = crown.split;
      for (const auto& name : tile_file_names(crown.id, tile.channels))
        rec.tile_path += (rec.tile_path.empty() ? "" : ";") + name;
      rec.pad_flag = tile.pad_flag;
      rec.buffer_fallback_used = label.fallback_used();
      if (sink) sink(rec, tile);
      out.records.push_back(std::move(rec));
    } catch (const Error& e) {
      out.skipped.push_back({crown.id, e.what()});
    }
  }
  return out;
}

}  // namespace crownkit
