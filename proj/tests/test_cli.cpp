#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "crownkit/cli.hpp"
#include "crownkit/io.hpp"

namespace fs = std::filesystem;
using namespace crownkit;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "crownkit");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("crownkit_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

void write(const std::string& path, const std::string& text) { io::write_text(path, text); }
std::string read(const std::string& path) { return io::read_text(path); }

const char* kSpec = R"({"width": 160, "height": 160, "pixel_size": 0.5,
  "random_trees": {"count": 12, "classes": ["oak", "pine", "birch"],
                   "radius_range": [1.5, 4.0], "height_range": [5, 30]}})";

}  // namespace

TEST_CASE("synth then extract with use_max reproduces the truth table") {
  TempDir d("extract");
  write(d / "spec.json", kSpec);
  REQUIRE(run({"synth", "--spec", d / "spec.json", "--seed", "4", "--out", d / "scene"}).code == 0);
  const Result r = run({"extract", "--chm", d / "scene/chm.asc", "--crowns", d / "scene/crowns.geojson",
                        "--use-max", "--tile-size", "16", "--out", d / "bench"});
  REQUIRE(r.code == 0);
  const auto records = io::parse_records(read(d / "bench/records.csv"));
  const auto truth = io::parse_csv(read(d / "scene/truth.csv"));
  REQUIRE(records.size() == truth.rows.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].crown_id == truth.rows[i][0]);
    CHECK(*records[i].height_m == std::stod(truth.rows[i][2]));
    CHECK(fs::exists(d.path / "bench" / records[i].tile_path));
  }
  CHECK(read(d / "bench/classes.json").find("\"birch\"") != std::string::npos);
}

TEST_CASE("eval on identical predictions is perfect") {
  TempDir d("eval");
  write(d / "labels.csv",
        "crown_id,class_index,class_name,height_m,split,tile_path,pad_flag,buffer_fallback\n"
        "a,0,oak,10,test,a.asc,0,0\nb,1,pine,20,test,b.asc,0,0\nc,1,pine,,val,c.asc,0,1\n");
  write(d / "preds.csv", "crown_id,pred_height_m,pred_class_index\na,10,0\nb,20,1\nc,3,1\n");
  const Result r = run({"eval", "--preds", d / "preds.csv", "--labels", d / "labels.csv", "--out", d / "report.json"});
  REQUIRE(r.code == 0);
  const auto j = io::parse_json(read(d / "report.json"), "report");
  CHECK(j["regression"]["delta"] == 1.0);
  CHECK(j["regression"]["n"] == 2);
  CHECK(j["classification"]["macro_f1"] == 1.0);
  CHECK(j["checkpoint_score"] == 1.0);

  const Result split = run({"eval", "--preds", d / "preds.csv", "--labels", d / "labels.csv", "--split", "val"});
  CHECK(split.code == 0);
  CHECK(split.out.find("\"regression\": null") != std::string::npos);

  write(d / "short.csv", "crown_id,pred_height_m,pred_class_index\na,10,0\n");
  const Result missing = run({"eval", "--preds", d / "short.csv", "--labels", d / "labels.csv"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("no prediction for crown 'b'") != std::string::npos);
}

TEST_CASE("exit codes separate validation from I/O failures") {
  TempDir d("codes");
  write(d / "bad.geojson", "{\"type\": \"FeatureCollection\",\n \"features\": [\n  {oops}\n]}");
  write(d / "spec.json", kSpec);
  REQUIRE(run({"synth", "--spec", d / "spec.json", "--out", d / "scene"}).code == 0);
  const Result bad = run({"extract", "--chm", d / "scene/chm.asc", "--crowns", d / "bad.geojson", "--out", d / "o"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("bad.geojson:3:") != std::string::npos);
  CHECK(run({"extract", "--chm", d / "nope.asc", "--crowns", d / "bad.geojson", "--out", d / "o"}).code == 2);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"eval", "--bogus"}).code == 1);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"extract", "--chm", d / "scene/chm.asc"}).code == 1);
}

TEST_CASE("config files are strict and flags override them") {
  TempDir d("config");
  write(d / "losses.csv", "epoch,L_H,L_S\n1,1.0,1.0\n2,2.0,1.0\n");
  write(d / "cfg.json", R"({"weighting": {"temperature": 1.0}, "paths": {"losses": ")" + d / "losses.csv" + "\"}}");
  const Result a = run({"dwa", "--config", d / "cfg.json"});
  REQUIRE(a.code == 0);
  const Result b = run({"dwa", "--config", d / "cfg.json", "--temperature", "2"});
  REQUIRE(b.code == 0);
  CHECK(a.out != b.out);
  CHECK(b.out.find("epoch,lambda_H,lambda_S\n1,1,1\n2,1,1\n3,") == 0);

  write(d / "typo.json", R"({"weighting": {"temprature": 1.0}})");
  const Result t = run({"dwa", "--config", d / "typo.json", "--losses", d / "losses.csv"});
  CHECK(t.code == 1);
  CHECK(t.err.find("temprature") != std::string::npos);
}

TEST_CASE("fit-allometry, baseline and stats") {
  TempDir d("baseline");
  write(d / "spec.json", R"({"width": 240, "height": 240, "pixel_size": 0.25,
    "random_trees": {"count": 15, "classes": ["oak", "pine"], "radius_range": [2, 5], "height_range": [5, 30]},
    "allometry_truth": {"oak": {"a": 0.8, "b": 0.5}, "pine": {"a": 0.6, "b": 1.1}}})");
  REQUIRE(run({"synth", "--spec", d / "spec.json", "--seed", "2", "--out", d / "scene"}).code == 0);
  REQUIRE(run({"fit-allometry", "--samples", d / "scene/samples.csv", "--out", d / "params.json"}).code == 0);
  const auto params = io::allometry_params_from_json(io::parse_json(read(d / "params.json"), "p"));
  CHECK(params.classes.at("oak").slope == doctest::Approx(0.8).epsilon(1e-9));
  REQUIRE(run({"extract", "--chm", d / "scene/chm.asc", "--crowns", d / "scene/crowns.geojson", "--use-max",
               "--tile-size", "8", "--out", d / "bench"}).code == 0);
  const Result b = run({"allometry-baseline", "--crowns", d / "scene/crowns.geojson", "--params", d / "params.json",
                        "--labels", d / "bench/records.csv", "--chm", d / "scene/chm.asc", "--out", d / "base.json"});
  REQUIRE(b.code == 0);
  const auto report = io::parse_json(read(d / "base.json"), "base");
  CHECK(report["regression"]["delta"].get<double>() >= 0.95);

  REQUIRE(run({"stats", "--labels", d / "bench/records.csv", "--out", d / "stats"}).code == 0);
  const auto classes = io::parse_csv(read(d / "stats/class_histogram.csv"));
  long long total = 0, prev = 1 << 30;
  for (const auto& row : classes.rows) {
    const long long n = std::stoll(row[1]);
    CHECK(n <= prev);
    prev = n;
    total += n;
  }
  CHECK(total == 15);
  const auto heights = io::parse_csv(read(d / "stats/height_histogram.csv"));
  CHECK(heights.header == std::vector<std::string>{"bin_start_m", "bin_end_m", "count"});
  CHECK(heights.rows[0][0] == "0");
}

TEST_CASE("gradcheck reports a verdict") {
  const Result r = run({"gradcheck", "--variant", "share_mlp", "--seed", "3"});
  CHECK(r.code == 0);
  CHECK(r.out.find("share_mlp") != std::string::npos);
  CHECK(r.out.find("gradcheck passed") != std::string::npos);
  CHECK(run({"gradcheck", "--variant", "nope"}).code == 1);
}
