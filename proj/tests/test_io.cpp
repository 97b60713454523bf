#include <doctest.h>

#include <cmath>
#include <random>

#include "crownkit/error.hpp"
#include "crownkit/io.hpp"

using namespace crownkit;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("ESRI grids round trip at f32 precision") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(-100.0F, 100.0F);
  const GridRef g{7, 5, 0.3, 612345.125, 5012345.5};
  std::vector<float> v(35);
  for (auto& x : v) x = u(rng);
  v[3] = -9999.0F;
  const Raster r(g, v);
  const std::string text = io::format_asc(r);
  const Raster back = io::parse_asc(text);
  CHECK(back.width() == 7);
  CHECK(back.height() == 5);
  CHECK(back.pixel_size() == 0.3);
  CHECK(back.grid().x_ll == g.x_ll);
  CHECK(back.grid().y_ll == g.y_ll);
  CHECK(std::equal(v.begin(), v.end(), back.values().begin()));
  CHECK(io::format_asc(back) == text);
}

TEST_CASE("ESRI header variants") {
  const std::string text =
      "NCOLS 2\nNROWS 2\nXLLCENTER 0.5\nYLLCENTER 1.5\nCELLSIZE 1\nnodata_value -1\n1 2\n3 -1\n";
  const Raster r = io::parse_asc(text);
  CHECK(r.grid().x_ll == 0.0);
  CHECK(r.grid().y_ll == 1.0);
  CHECK(r.nodata() == -1.0F);
  CHECK(r.at(1, 0) == 3.0F);
  CHECK(r.is_nodata(r.at(1, 1)));
  CHECK(code_of([] { io::parse_asc("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2 3\n"); }) ==
        ErrorCode::ParseError);
  CHECK_THROWS_WITH(io::parse_asc("ncols 1\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\nabc\n", "g.asc"),
                    doctest::Contains("g.asc:6"));
}

TEST_CASE("GeoJSON crowns round trip") {
  const std::vector<CrownAnnotation> crowns{
      {"t1", "oak", Split::Train, {{0.1, 0.2}, {3.0000000001, 0.2}, {3.0, 4.0}}},
      {"t 2", "Pinus sylvestris", Split::Test, {{10, 10}, {12, 10}, {12, 12}, {10, 12}}},
  };
  const std::string text = io::format_crowns(crowns);
  const auto back = io::parse_crowns(text);
  REQUIRE(back.size() == 2);
  CHECK(back[0].id == "t1");
  CHECK(back[1].class_name == "Pinus sylvestris");
  CHECK(back[1].split == Split::Test);
  // The closing vertex is written and read back.
  REQUIRE(back[0].polygon.size() == 4);
  CHECK(back[0].polygon[1].x == 3.0000000001);
  CHECK(io::format_crowns(back) == text);
}

TEST_CASE("GeoJSON errors carry positions") {
  CHECK_THROWS_WITH(io::parse_crowns("{\n  \"type\": \"FeatureCollection\",\n  \"features\": [,]\n}", "c.geojson"),
                    doctest::Contains("c.geojson:3:"));
  const std::string no_split =
      R"({"type":"FeatureCollection","features":[{"type":"Feature","properties":{"id":"a","class":"x"},)"
      R"("geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1]]]}}]})";
  CHECK(code_of([&] { io::parse_crowns(no_split); }) == ErrorCode::ParseError);
  const std::string multi =
      R"({"type":"FeatureCollection","features":[{"type":"Feature","properties":{"id":7,"class":"x","split":"val"},)"
      R"("geometry":{"type":"MultiPolygon","coordinates":[[[[0,0],[1,0],[1,1]]]]}}]})";
  const auto m = io::parse_crowns(multi);
  CHECK(m[0].id == "7");
  CHECK(m[0].polygon.size() == 3);
}

TEST_CASE("CSV quoting") {
  const std::vector<std::vector<std::string>> rows{{"a,b", "say \"hi\""}, {"", "line\nbreak"}};
  const std::string text = io::format_csv({"x", "y"}, rows);
  const auto t = io::parse_csv(text);
  CHECK(t.header == std::vector<std::string>{"x", "y"});
  CHECK(t.rows == rows);
  CHECK(t.lines == std::vector<int>{2, 3});
  CHECK(code_of([] { io::parse_csv("a,b\n1\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { io::parse_csv("a\n\"open\n"); }) == ErrorCode::ParseError);
  CHECK(io::parse_csv("a,b\r\n1,2\r\n").rows[0][1] == "2");
}

TEST_CASE("records round trip, including undefined heights") {
  std::vector<BenchmarkRecord> recs(2);
  recs[0] = {"t1", 0, "oak", 12.345678901234567, Split::Val, "tiles/t1.asc", true, false};
  recs[1] = {"t2", 2, "pine", std::nullopt, Split::Test, "tiles/t2_b1.asc;tiles/t2_b2.asc", false, true};
  const std::string text = io::format_records(recs);
  CHECK(text.substr(0, text.find('\n')) ==
        "crown_id,class_index,class_name,height_m,split,tile_path,pad_flag,buffer_fallback");
  const auto back = io::parse_records(text);
  REQUIRE(back.size() == 2);
  CHECK(*back[0].height_m == 12.345678901234567);
  CHECK(back[0].pad_flag);
  CHECK_FALSE(back[1].height_m);
  CHECK(back[1].buffer_fallback_used);
  CHECK(io::format_records(back) == text);
  CHECK(code_of([] { io::parse_records("crown_id,height\n"); }) == ErrorCode::ParseError);
}

TEST_CASE("predictions, samples and losses") {
  const std::vector<io::PredictionRow> preds{{"a", 1.5, 0}, {"b", 0.1, 2}};
  const auto pb = io::parse_predictions(io::format_predictions(preds));
  CHECK(pb[1].height_m == 0.1);
  CHECK(pb[1].class_index == 2);

  const std::vector<AllometrySample> s{{"oak", 1.25, 7.5}};
  CHECK(io::parse_samples(io::format_samples(s))[0].height_m == 7.5);

  const LossHistory h = io::parse_losses("epoch,L_H,L_S\n1,2.0,1.0\n2,1.5,0.9\n");
  CHECK(h.height == std::vector<double>{2.0, 1.5});
  CHECK(code_of([] { io::parse_losses("epoch,L_H,L_S\n2,1,1\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { io::parse_losses("epoch,L_H,L_S\n1,x,1\n"); }) == ErrorCode::ParseError);
}

TEST_CASE("allometry parameters and scene specs through JSON") {
  AllometryParams p;
  p.classes["oak"] = {0.8123456789012345, 0.5, 10, false};
  const auto back = io::allometry_params_from_json(io::parse_json(io::to_json(p).dump(), "p"));
  CHECK(back.classes.at("oak").slope == 0.8123456789012345);
  CHECK(back.classes.at("oak").n_samples == 10);

  SceneSpec spec;
  spec.grid = {20, 30, 0.5, 1, 2};
  spec.trees = {{{3.25, 4.75}, 9.5, 2.0, "oak", CrownProfile::Paraboloid}};
  spec.random_trees = RandomTrees{4, {"a"}, 1, 2, 3, 4, CrownProfile::Cone, 0.5};
  spec.allometry_truth["a"] = {0.8, 0.5};
  const SceneSpec again = io::scene_spec_from_json(io::to_json(spec));
  CHECK(io::to_json(again) == io::to_json(spec));
  CHECK(code_of([] { io::scene_spec_from_json(io::Json{{"width", 1}, {"height", 1}, {"pixel_size", 1}, {"bogus", 1}}); }) ==
        ErrorCode::ParseError);
}

TEST_CASE("missing files are I/O errors") {
  CHECK(code_of([] { io::read_text("/nonexistent/dir/file.asc"); }) == ErrorCode::IoError);
  CHECK(code_of([] { io::write_text("/nonexistent/dir/file.asc", "x"); }) == ErrorCode::IoError);
}

TEST_CASE("numbers use the shortest round-trip form") {
  CHECK(io::format_number(0.1) == "0.1");
  CHECK(io::format_number(12.0) == "12");
  CHECK(io::format_number(0.1F) == "0.1");
  CHECK(std::stod(io::format_number(1.0 / 3.0)) == 1.0 / 3.0);
}
