#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "crownkit/geometry.hpp"
#include "crownkit/raster.hpp"

namespace crownkit {

enum class Split { Train, Val, Test };

std::string to_string(Split s);
Split parse_split(const std::string& s);

/// Slope/intercept applied to extracted heights: h <- slope * h + intercept.
struct LinearCorrection {
  double slope = 1.0;
  double intercept = 0.0;
};

struct ExtractionConfig {
  double buffer_scale = 0.1;
  double fallback_scale = 0.05;
  double percentile_p = 99.0;
  /// Take the masked maximum instead of the percentile (plantation mode).
  bool use_max = false;
  std::optional<LinearCorrection> linear_correction;
  int tile_size = 512;

  void validate() const;
};

/// A manually annotated crown: outer ring in world coordinates.
struct CrownAnnotation {
  std::string id;
  std::string class_name;
  Split split = Split::Train;
  Ring polygon;
};

enum class BufferLevel { Primary, Reduced, Unbuffered };

struct HeightLabel {
  /// Absent when a linear correction drove the height negative.
  std::optional<double> height_m;
  BufferLevel buffer = BufferLevel::Primary;

  bool fallback_used() const { return buffer != BufferLevel::Primary; }
};

/// Height label for one crown: buffer the mask, retry with the reduced
/// scale, finally use the raw mask; then take the percentile (or max) of the
/// non-nodata CHM values and apply the optional linear correction.
HeightLabel extract_height(const Raster& chm, const PixelMask& mask, const ExtractionConfig& cfg);

struct BenchmarkRecord {
  std::string crown_id;
  int class_index = 0;
  std::string class_name;
  std::optional<double> height_m;
  Split split = Split::Train;
  std::string tile_path;
  bool pad_flag = false;
  bool buffer_fallback_used = false;
};

struct SkipReport {
  std::string crown_id;
  std::string reason;
};

struct Benchmark {
  /// Sorted class names; a record's class_index points into this list.
  std::vector<std::string> class_names;
  std::vector<BenchmarkRecord> records;
  std::vector<SkipReport> skipped;
};

/// Receives each record together with its tile, in input order.
using TileSink = std::function<void(const BenchmarkRecord&, const Tile&)>;

/// Runs rasterize -> centroid -> tile -> height for every crown. Per-crown
/// failures are collected in `skipped`; an empty crown list throws.
/// Tiles are cut from `image` bands when given, otherwise from the CHM.
Benchmark build_benchmark(const Raster& chm, const std::vector<Raster>* image,
                          const std::vector<CrownAnnotation>& crowns, const ExtractionConfig& cfg,
                          const TileSink& sink = {});

/// Class name -> index under the sorted-lexicographic convention.
std::vector<std::string> class_map(const std::vector<CrownAnnotation>& crowns);

/// Tile file names for a crown: `<id>.asc` for single-band tiles, one
/// `<id>_b<k>.asc` per band otherwise. Unsafe id characters become '_'.
std::vector<std::string> tile_file_names(const std::string& crown_id, int channels);

}  // namespace crownkit
