#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "crownkit/allometry.hpp"
#include "crownkit/extraction.hpp"
#include "crownkit/losses.hpp"
#include "crownkit/metrics.hpp"
#include "crownkit/raster.hpp"
#include "crownkit/synth.hpp"

namespace crownkit::io {

using Json = nlohmann::json;

// Text helpers ---------------------------------------------------------------

std::string read_text(const std::filesystem::path& path);
/// Writes atomically enough for our purposes: truncate + write + close.
void write_text(const std::filesystem::path& path, std::string_view text);

/// Shortest decimal form that parses back to the same value.
std::string format_number(double v);
std::string format_number(float v);

/// Parses JSON, turning syntax errors into ParseError with line:column.
Json parse_json(std::string_view text, std::string_view source);

// ESRI ASCII grid ------------------------------------------------------------

Raster parse_asc(std::string_view text, std::string_view source = "<asc>");
std::string format_asc(const Raster& raster);
std::string format_asc(const Tile& tile, int channel, const GridRef& grid);

// GeoJSON crowns -------------------------------------------------------------

std::vector<CrownAnnotation> parse_crowns(std::string_view text, std::string_view source = "<geojson>");
std::string format_crowns(const std::vector<CrownAnnotation>& crowns);

// CSV ------------------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based source line of each row, for diagnostics.
  std::vector<int> lines;
};

CsvTable parse_csv(std::string_view text, std::string_view source = "<csv>");
std::string format_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows);

std::vector<BenchmarkRecord> parse_records(std::string_view text, std::string_view source = "<records>");
std::string format_records(const std::vector<BenchmarkRecord>& records);

struct PredictionRow {
  std::string crown_id;
  double height_m = 0.0;
  int class_index = 0;
};

std::vector<PredictionRow> parse_predictions(std::string_view text,
                                             std::string_view source = "<predictions>");
std::string format_predictions(const std::vector<PredictionRow>& rows);

std::vector<AllometrySample> parse_samples(std::string_view text, std::string_view source = "<samples>");
std::string format_samples(const std::vector<AllometrySample>& samples);

LossHistory parse_losses(std::string_view text, std::string_view source = "<losses>");
std::string format_weight_schedule(const std::vector<TaskWeights>& schedule);

std::string format_truth(const std::vector<TruthRecord>& truth);

// JSON documents ---------------------------------------------------------------

Json to_json(const AllometryParams& params);
AllometryParams allometry_params_from_json(const Json& j);

Json to_json(const RegressionReport& r);
Json to_json(const ClassificationReport& r, const std::vector<std::string>& class_names = {});

SceneSpec scene_spec_from_json(const Json& j);
Json to_json(const SceneSpec& spec);

/// Rejects keys of `j` outside `allowed`; `where` names the object in errors.
void require_keys(const Json& j, std::initializer_list<std::string_view> allowed,
                  std::string_view where);

}  // namespace crownkit::io
