#include "crownkit/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "crownkit/error.hpp"

namespace crownkit::io {

namespace {

[[noreturn]] void parse_fail(std::string_view source, int line, const std::string& msg) {
  throw Error(ErrorCode::ParseError,
              std::string(source) + ":" + std::to_string(line) + ": " + msg);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

double field_double(const std::string& v, std::string_view source, int line,
                    std::string_view column) {
  double d = 0.0;
  if (!parse_number(v, d) || !std::isfinite(d))
    parse_fail(source, line, "column '" + std::string(column) + "': not a number: '" + v + "'");
  return d;
}

long long field_int(const std::string& v, std::string_view source, int line,
                    std::string_view column) {
  long long i = 0;
  if (!parse_number(v, i))
    parse_fail(source, line, "column '" + std::string(column) + "': not an integer: '" + v + "'");
  return i;
}

bool field_bool(const std::string& v, std::string_view source, int line, std::string_view column) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  parse_fail(source, line, "column '" + std::string(column) + "': not a boolean: '" + v + "'");
}

void expect_header(const CsvTable& t, const std::vector<std::string>& want, std::string_view source) {
  if (t.header != want) {
    std::string joined;
    for (const auto& w : want) joined += (joined.empty() ? "" : ",") + w;
    parse_fail(source, 1, "expected header '" + joined + "'");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Text

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "failed reading '" + path.string() + "'");
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

std::string format_number(float v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

Json parse_json(std::string_view text, std::string_view source) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    // Locate the byte offset reported by the parser.
    const std::size_t byte = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    int line = 1, col = 1;
    for (std::size_t i = 0; i < byte; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::ParseError, std::string(source) + ":" + std::to_string(line) + ":" +
                                           std::to_string(col) + ": invalid JSON");
  }
}

void require_keys(const Json& j, std::initializer_list<std::string_view> allowed,
                  std::string_view where) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, std::string(where) + ": expected an object");
  for (const auto& [key, _] : j.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw Error(ErrorCode::ParseError, std::string(where) + ": unknown key '" + key + "'");
}

// ---------------------------------------------------------------------------
// ESRI ASCII grid

Raster parse_asc(std::string_view text, std::string_view source) {
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  std::optional<long long> ncols, nrows;
  std::optional<double> xll, yll, cellsize;
  bool x_center = false, y_center = false;
  float nodata = Raster::kDefaultNodata;
  std::vector<float> values;
  bool in_body = false;

  while (std::getline(in, raw)) {
    ++line_no;
    std::istringstream ls(raw);
    std::string tok;
    if (!in_body) {
      if (!(ls >> tok)) continue;
      double probe = 0.0;
      if (!parse_number(tok, probe)) {
        std::string value;
        if (!(ls >> value)) parse_fail(source, line_no, "header '" + tok + "' has no value");
        const std::string key = lower(tok);
        if (key == "ncols") ncols = field_int(value, source, line_no, key);
        else if (key == "nrows") nrows = field_int(value, source, line_no, key);
        else if (key == "xllcorner" || key == "xllcenter") {
          xll = field_double(value, source, line_no, key);
          x_center = key == "xllcenter";
        } else if (key == "yllcorner" || key == "yllcenter") {
          yll = field_double(value, source, line_no, key);
          y_center = key == "yllcenter";
        } else if (key == "cellsize") cellsize = field_double(value, source, line_no, key);
        else if (key == "nodata_value") {
          if (!parse_number(value, nodata)) parse_fail(source, line_no, "bad NODATA_value");
        } else parse_fail(source, line_no, "unknown header key '" + tok + "'");
        continue;
      }
      in_body = true;
      if (!ncols || !nrows || !xll || !yll || !cellsize)
        parse_fail(source, line_no, "missing ncols/nrows/xllcorner/yllcorner/cellsize header");
      if (*ncols <= 0 || *nrows <= 0 || !(*cellsize > 0.0))
        parse_fail(source, line_no, "non-positive raster dimensions");
      values.reserve(static_cast<std::size_t>(*ncols * *nrows));
      ls.clear();
      ls.str(raw);
    }
    while (ls >> tok) {
      float v = 0.0F;
      if (!parse_number(tok, v)) parse_fail(source, line_no, "bad cell value '" + tok + "'");
      values.push_back(v);
    }
  }
  if (!in_body) parse_fail(source, line_no, "no raster values");
  const auto expected = static_cast<std::size_t>(*ncols * *nrows);
  if (values.size() != expected)
    parse_fail(source, line_no, "expected " + std::to_string(expected) + " values, found " +
                                    std::to_string(values.size()));
  GridRef g;
  g.width = static_cast<int>(*ncols);
  g.height = static_cast<int>(*nrows);
  g.pixel_size = *cellsize;
  g.x_ll = x_center ? *xll - 0.5 * *cellsize : *xll;
  g.y_ll = y_center ? *yll - 0.5 * *cellsize : *yll;
  return Raster(g, std::move(values), nodata);
}

namespace {

std::string asc_header(const GridRef& g, float nodata) {
  std::string s;
  s += "ncols " + std::to_string(g.width) + "\n";
  s += "nrows " + std::to_string(g.height) + "\n";
  s += "xllcorner " + format_number(g.x_ll) + "\n";
  s += "yllcorner " + format_number(g.y_ll) + "\n";
  s += "cellsize " + format_number(g.pixel_size) + "\n";
  s += "NODATA_value " + format_number(nodata) + "\n";
  return s;
}

}  // namespace

std::string format_asc(const Raster& raster) {
  std::string s = asc_header(raster.grid(), raster.nodata());
  for (int r = 0; r < raster.height(); ++r) {
    for (int c = 0; c < raster.width(); ++c) {
      if (c) s += ' ';
      s += format_number(raster.at(r, c));
    }
    s += '\n';
  }
  return s;
}

std::string format_asc(const Tile& tile, int channel, const GridRef& parent) {
  const int row0 = tile.center.row - tile.size / 2;
  const int col0 = tile.center.col - tile.size / 2;
  GridRef g;
  g.width = g.height = tile.size;
  g.pixel_size = parent.pixel_size;
  g.x_ll = parent.x_ll + col0 * parent.pixel_size;
  g.y_ll = parent.y_ll + (parent.height - (row0 + tile.size)) * parent.pixel_size;
  std::string s = asc_header(g, Raster::kDefaultNodata);
  for (int r = 0; r < tile.size; ++r) {
    for (int c = 0; c < tile.size; ++c) {
      if (c) s += ' ';
      s += format_number(tile.at(channel, r, c));
    }
    s += '\n';
  }
  return s;
}

// ---------------------------------------------------------------------------
// GeoJSON

namespace {

Ring ring_from_json(const Json& coords, std::string_view where) {
  if (!coords.is_array())
    throw Error(ErrorCode::ParseError, std::string(where) + ": ring must be an array");
  Ring ring;
  for (const auto& pt : coords) {
    if (!pt.is_array() || pt.size() < 2 || !pt[0].is_number() || !pt[1].is_number())
      throw Error(ErrorCode::ParseError, std::string(where) + ": bad coordinate");
    ring.push_back({pt[0].get<double>(), pt[1].get<double>()});
  }
  return ring;
}

std::string string_property(const Json& props, const char* key, std::string_view where) {
  if (!props.contains(key))
    throw Error(ErrorCode::ParseError, std::string(where) + ": missing property '" + key + "'");
  const Json& v = props[key];
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw Error(ErrorCode::ParseError, std::string(where) + ": property '" + key + "' must be a string");
}

}  // namespace

std::vector<CrownAnnotation> parse_crowns(std::string_view text, std::string_view source) {
  const Json doc = parse_json(text, source);
  const std::string src(source);
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array())
    throw Error(ErrorCode::ParseError, src + ": expected a GeoJSON FeatureCollection");
  std::vector<CrownAnnotation> crowns;
  std::size_t idx = 0;
  for (const auto& f : doc["features"]) {
    const std::string where = src + ": feature " + std::to_string(idx++);
    if (!f.is_object() || !f.contains("geometry") || !f["geometry"].is_object())
      throw Error(ErrorCode::ParseError, where + ": missing geometry");
    const Json& geom = f["geometry"];
    const std::string type = geom.value("type", "");
    if (!geom.contains("coordinates"))
      throw Error(ErrorCode::ParseError, where + ": geometry has no coordinates");
    const Json& coords = geom["coordinates"];
    CrownAnnotation crown;
    if (type == "Polygon") {
      if (!coords.is_array() || coords.empty())
        throw Error(ErrorCode::ParseError, where + ": empty polygon");
      crown.polygon = ring_from_json(coords[0], where);
    } else if (type == "MultiPolygon") {
      if (!coords.is_array() || coords.empty() || !coords[0].is_array() || coords[0].empty())
        throw Error(ErrorCode::ParseError, where + ": empty multipolygon");
      crown.polygon = ring_from_json(coords[0][0], where);
    } else {
      throw Error(ErrorCode::ParseError, where + ": unsupported geometry '" + type + "'");
    }
    const Json props = f.value("properties", Json::object());
    crown.id = string_property(props, "id", where);
    crown.class_name = string_property(props, "class", where);
    try {
      crown.split = parse_split(string_property(props, "split", where));
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, where + ": " + e.what());
    }
    crowns.push_back(std::move(crown));
  }
  return crowns;
}

std::string format_crowns(const std::vector<CrownAnnotation>& crowns) {
  Json features = Json::array();
  for (const auto& c : crowns) {
    Json ring = Json::array();
    for (const auto& p : c.polygon) ring.push_back({p.x, p.y});
    if (!c.polygon.empty() &&
        (c.polygon.front().x != c.polygon.back().x || c.polygon.front().y != c.polygon.back().y))
      ring.push_back({c.polygon.front().x, c.polygon.front().y});
    features.push_back({{"type", "Feature"},
                        {"properties", {{"id", c.id}, {"class", c.class_name}, {"split", to_string(c.split)}}},
                        {"geometry", {{"type", "Polygon"}, {"coordinates", Json::array({ring})}}}});
  }
  Json doc = {{"type", "FeatureCollection"}, {"features", features}};
  return doc.dump(1) + "\n";
}

// ---------------------------------------------------------------------------
// CSV

CsvTable parse_csv(std::string_view text, std::string_view source) {
  CsvTable table;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false, field_started = false;
  int line = 1, row_line = 1;

  auto end_row = [&] {
    if (any || !row.empty()) {
      row.push_back(std::move(field));
      if (table.header.empty() && table.rows.empty() && table.lines.empty()) {
        table.header = std::move(row);
      } else {
        if (row.size() != table.header.size())
          parse_fail(source, row_line, "expected " + std::to_string(table.header.size()) +
                                           " fields, found " + std::to_string(row.size()));
        table.rows.push_back(std::move(row));
        table.lines.push_back(row_line);
      }
    }
    row.clear();
    field.clear();
    any = false;
    field_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        field += ch;
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (field_started) parse_fail(source, line, "stray quote inside field");
        quoted = true;
        any = field_started = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        any = true;
        field_started = false;
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        ++line;
        row_line = line;
        break;
      default:
        field += ch;
        any = field_started = true;
    }
  }
  if (quoted) parse_fail(source, line, "unterminated quoted field");
  end_row();
  if (table.header.empty()) parse_fail(source, 1, "empty CSV");
  return table;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string format_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows) {
  std::string s;
  auto emit = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) s += ',';
      s += csv_field(r[i]);
    }
    s += '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  return s;
}

namespace {

const std::vector<std::string> kRecordColumns = {"crown_id", "class_index", "class_name",
                                                 "height_m", "split",       "tile_path",
                                                 "pad_flag", "buffer_fallback"};
const std::vector<std::string> kPredictionColumns = {"crown_id", "pred_height_m",
                                                     "pred_class_index"};
const std::vector<std::string> kSampleColumns = {"class", "radius_m", "height_m"};

}  // namespace

std::vector<BenchmarkRecord> parse_records(std::string_view text, std::string_view source) {
  const CsvTable t = parse_csv(text, source);
  expect_header(t, kRecordColumns, source);
  std::vector<BenchmarkRecord> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const int line = t.lines[i];
    BenchmarkRecord rec;
    rec.crown_id = r[0];
    const long long ci = field_int(r[1], source, line, "class_index");
    if (ci < 0) parse_fail(source, line, "class_index must be >= 0");
    rec.class_index = static_cast<int>(ci);
    rec.class_name = r[2];
    if (!r[3].empty()) {
      rec.height_m = field_double(r[3], source, line, "height_m");
      if (*rec.height_m < 0.0) parse_fail(source, line, "height_m must be >= 0");
    }
    try {
      rec.split = parse_split(r[4]);
    } catch (const Error& e) {
      parse_fail(source, line, e.what());
    }
    rec.tile_path = r[5];
    rec.pad_flag = field_bool(r[6], source, line, "pad_flag");
    rec.buffer_fallback_used = field_bool(r[7], source, line, "buffer_fallback");
    out.push_back(std::move(rec));
  }
  return out;
}

std::string format_records(const std::vector<BenchmarkRecord>& records) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : records)
    rows.push_back({r.crown_id, std::to_string(r.class_index), r.class_name,
                    r.height_m ? format_number(*r.height_m) : "", to_string(r.split), r.tile_path,
                    r.pad_flag ? "1" : "0", r.buffer_fallback_used ? "1" : "0"});
  return format_csv(kRecordColumns, rows);
}

std::vector<PredictionRow> parse_predictions(std::string_view text, std::string_view source) {
  const CsvTable t = parse_csv(text, source);
  expect_header(t, kPredictionColumns, source);
  std::vector<PredictionRow> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    PredictionRow p;
    p.crown_id = r[0];
    p.height_m = field_double(r[1], source, t.lines[i], "pred_height_m");
    const long long ci = field_int(r[2], source, t.lines[i], "pred_class_index");
    if (ci < 0) parse_fail(source, t.lines[i], "pred_class_index must be >= 0");
    p.class_index = static_cast<int>(ci);
    out.push_back(std::move(p));
  }
  return out;
}

std::string format_predictions(const std::vector<PredictionRow>& rows) {
  std::vector<std::vector<std::string>> out;
  for (const auto& p : rows)
    out.push_back({p.crown_id, format_number(p.height_m), std::to_string(p.class_index)});
  return format_csv(kPredictionColumns, out);
}

std::vector<AllometrySample> parse_samples(std::string_view text, std::string_view source) {
  const CsvTable t = parse_csv(text, source);
  expect_header(t, kSampleColumns, source);
  std::vector<AllometrySample> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    out.push_back({r[0], field_double(r[1], source, t.lines[i], "radius_m"),
                   field_double(r[2], source, t.lines[i], "height_m")});
  }
  return out;
}

std::string format_samples(const std::vector<AllometrySample>& samples) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& s : samples)
    rows.push_back({s.class_name, format_number(s.radius_m), format_number(s.height_m)});
  return format_csv(kSampleColumns, rows);
}

LossHistory parse_losses(std::string_view text, std::string_view source) {
  const CsvTable t = parse_csv(text, source);
  expect_header(t, {"epoch", "L_H", "L_S"}, source);
  LossHistory h;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const long long epoch = field_int(r[0], source, t.lines[i], "epoch");
    if (epoch != static_cast<long long>(i) + 1)
      parse_fail(source, t.lines[i], "epochs must be consecutive starting at 1");
    h.append(field_double(r[1], source, t.lines[i], "L_H"),
             field_double(r[2], source, t.lines[i], "L_S"));
  }
  return h;
}

std::string format_weight_schedule(const std::vector<TaskWeights>& schedule) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < schedule.size(); ++i)
    rows.push_back({std::to_string(i + 1), format_number(schedule[i].height),
                    format_number(schedule[i].species)});
  return format_csv({"epoch", "lambda_H", "lambda_S"}, rows);
}

std::string format_truth(const std::vector<TruthRecord>& truth) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& t : truth)
    rows.push_back({t.crown_id, t.class_name, format_number(t.height_m), format_number(t.radius_m),
                    format_number(t.center.x), format_number(t.center.y)});
  return format_csv({"crown_id", "class_name", "height_m", "radius_m", "x", "y"}, rows);
}

// ---------------------------------------------------------------------------
// JSON documents

Json to_json(const AllometryParams& params) {
  Json classes = Json::object();
  for (const auto& [name, c] : params.classes)
    classes[name] = {{"slope", c.slope}, {"intercept", c.intercept},
                     {"n_samples", c.n_samples}, {"pooled", c.pooled}};
  return {{"model", "ln_h = slope * ln_r + intercept"}, {"classes", classes}};
}

AllometryParams allometry_params_from_json(const Json& j) {
  require_keys(j, {"model", "classes"}, "allometry params");
  if (!j.contains("classes") || !j["classes"].is_object())
    throw Error(ErrorCode::ParseError, "allometry params: missing 'classes' object");
  AllometryParams p;
  for (const auto& [name, c] : j["classes"].items()) {
    const std::string where = "allometry params: class '" + name + "'";
    require_keys(c, {"slope", "intercept", "n_samples", "pooled"}, where);
    if (!c.contains("slope") || !c.contains("intercept") || !c["slope"].is_number() ||
        !c["intercept"].is_number())
      throw Error(ErrorCode::ParseError, where + ": needs numeric slope and intercept");
    ClassAllometry ca;
    ca.slope = c["slope"].get<double>();
    ca.intercept = c["intercept"].get<double>();
    ca.n_samples = c.value("n_samples", 0);
    ca.pooled = c.value("pooled", false);
    p.classes.emplace(name, ca);
  }
  return p;
}

Json to_json(const RegressionReport& r) {
  return {{"n", r.n},       {"mae", r.mae},   {"rmse", r.rmse},
          {"msle", r.msle}, {"delta", r.delta}, {"delta_threshold", r.delta_threshold},
          {"msd", r.msd}};
}

Json to_json(const ClassificationReport& r, const std::vector<std::string>& class_names) {
  Json per = Json::array();
  for (std::size_t k = 0; k < r.per_class.size(); ++k) {
    const auto& s = r.per_class[k];
    Json e = {{"class_index", k}, {"tp", s.tp},   {"fp", s.fp},   {"fn", s.fn},
              {"support", s.support}, {"f1", s.f1}, {"acc", s.acc}, {"acc_defined", s.acc_defined}};
    if (k < class_names.size()) e["class_name"] = class_names[k];
    per.push_back(std::move(e));
  }
  return {{"n", r.n},
          {"num_classes", r.per_class.size()},
          {"macro_f1", r.macro_f1},
          {"macro_acc", r.macro_acc},
          {"per_class", per},
          {"confusion", r.confusion}};
}

namespace {

CrownProfile parse_profile(const std::string& s) {
  if (s == "cone") return CrownProfile::Cone;
  if (s == "paraboloid") return CrownProfile::Paraboloid;
  throw Error(ErrorCode::ParseError, "scene spec: unknown profile '" + s + "'");
}

std::string profile_name(CrownProfile p) { return p == CrownProfile::Cone ? "cone" : "paraboloid"; }

template <typename T>
T get_as(const Json& j, const char* key, std::string_view where) {
  if (!j.contains(key)) throw Error(ErrorCode::ParseError, std::string(where) + ": missing '" + key + "'");
  try {
    return j[key].get<T>();
  } catch (const Json::exception&) {
    throw Error(ErrorCode::ParseError, std::string(where) + ": bad type for '" + key + "'");
  }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback, std::string_view where) {
  return j.contains(key) ? get_as<T>(j, key, where) : fallback;
}

}  // namespace

SceneSpec scene_spec_from_json(const Json& j) {
  require_keys(j,
               {"width", "height", "pixel_size", "x_ll", "y_ll", "trees", "random_trees",
                "allometry_truth", "snap_centers", "polygon_vertices"},
               "scene spec");
  SceneSpec s;
  s.grid.width = get_as<int>(j, "width", "scene spec");
  s.grid.height = get_as<int>(j, "height", "scene spec");
  s.grid.pixel_size = get_as<double>(j, "pixel_size", "scene spec");
  s.grid.x_ll = get_or<double>(j, "x_ll", 0.0, "scene spec");
  s.grid.y_ll = get_or<double>(j, "y_ll", 0.0, "scene spec");
  s.snap_centers = get_or<bool>(j, "snap_centers", true, "scene spec");
  s.polygon_vertices = get_or<int>(j, "polygon_vertices", 32, "scene spec");
  if (j.contains("trees")) {
    if (!j["trees"].is_array()) throw Error(ErrorCode::ParseError, "scene spec: 'trees' must be an array");
    for (const auto& t : j["trees"]) {
      require_keys(t, {"x", "y", "height", "radius", "class", "profile"}, "scene spec tree");
      TreeSpec ts;
      ts.center = {get_as<double>(t, "x", "tree"), get_as<double>(t, "y", "tree")};
      ts.height_m = get_or<double>(t, "height", 0.0, "tree");
      ts.radius_m = get_as<double>(t, "radius", "tree");
      ts.class_name = get_as<std::string>(t, "class", "tree");
      ts.profile = parse_profile(get_or<std::string>(t, "profile", "cone", "tree"));
      s.trees.push_back(std::move(ts));
    }
  }
  if (j.contains("random_trees")) {
    const Json& r = j["random_trees"];
    require_keys(r, {"count", "classes", "radius_range", "height_range", "profile", "min_gap"},
                 "scene spec random_trees");
    RandomTrees rt;
    rt.count = get_as<int>(r, "count", "random_trees");
    rt.classes = get_as<std::vector<std::string>>(r, "classes", "random_trees");
    const auto rr = get_or<std::vector<double>>(r, "radius_range", {1.0, 3.0}, "random_trees");
    const auto hr = get_or<std::vector<double>>(r, "height_range", {5.0, 30.0}, "random_trees");
    if (rr.size() != 2 || hr.size() != 2)
      throw Error(ErrorCode::ParseError, "random_trees: ranges must have two entries");
    rt.radius_min_m = rr[0];
    rt.radius_max_m = rr[1];
    rt.height_min_m = hr[0];
    rt.height_max_m = hr[1];
    rt.profile = parse_profile(get_or<std::string>(r, "profile", "cone", "random_trees"));
    rt.min_gap_m = get_or<double>(r, "min_gap", 0.0, "random_trees");
    s.random_trees = rt;
  }
  if (j.contains("allometry_truth")) {
    if (!j["allometry_truth"].is_object())
      throw Error(ErrorCode::ParseError, "scene spec: 'allometry_truth' must be an object");
    for (const auto& [name, c] : j["allometry_truth"].items()) {
      require_keys(c, {"a", "b"}, "allometry_truth");
      s.allometry_truth[name] = {get_as<double>(c, "a", "allometry_truth"),
                                 get_as<double>(c, "b", "allometry_truth")};
    }
  }
  return s;
}

Json to_json(const SceneSpec& s) {
  Json j = {{"width", s.grid.width},         {"height", s.grid.height},
            {"pixel_size", s.grid.pixel_size}, {"x_ll", s.grid.x_ll},
            {"y_ll", s.grid.y_ll},           {"snap_centers", s.snap_centers},
            {"polygon_vertices", s.polygon_vertices}};
  Json trees = Json::array();
  for (const auto& t : s.trees)
    trees.push_back({{"x", t.center.x}, {"y", t.center.y}, {"height", t.height_m},
                     {"radius", t.radius_m}, {"class", t.class_name},
                     {"profile", profile_name(t.profile)}});
  j["trees"] = trees;
  if (s.random_trees) {
    const auto& r = *s.random_trees;
    j["random_trees"] = {{"count", r.count},
                         {"classes", r.classes},
                         {"radius_range", {r.radius_min_m, r.radius_max_m}},
                         {"height_range", {r.height_min_m, r.height_max_m}},
                         {"profile", profile_name(r.profile)},
                         {"min_gap", r.min_gap_m}};
  }
  if (!s.allometry_truth.empty()) {
    Json a = Json::object();
    for (const auto& [name, t] : s.allometry_truth) a[name] = {{"a", t.slope}, {"b", t.intercept}};
    j["allometry_truth"] = a;
  }
  return j;
}

}  // namespace crownkit::io
