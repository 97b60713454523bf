#include "crownkit/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "crownkit/allometry.hpp"
#include "crownkit/error.hpp"
#include "crownkit/extraction.hpp"
#include "crownkit/heads.hpp"
#include "crownkit/io.hpp"
#include "crownkit/losses.hpp"
#include "crownkit/metrics.hpp"
#include "crownkit/synth.hpp"
#include "sampler.hpp"

namespace fs = std::filesystem;

namespace crownkit::cli {

namespace {

using io::Json;

struct Paths {
  std::string chm, crowns, labels, preds, samples, params, losses, spec;
  std::vector<std::string> image;
};

struct RunConfig {
  ExtractionConfig extraction;
  WeightingConfig weighting;
  Paths paths;
  std::vector<std::string> classes;
};

template <typename T>
void read_key(const Json& j, const char* key, T& dst, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    dst = j[key].get<T>();
  } catch (const Json::exception&) {
    throw Error(ErrorCode::ParseError, where + ": bad type for '" + key + "'");
  }
}

RunConfig load_config(const std::string& path) {
  RunConfig cfg;
  if (path.empty()) return cfg;
  const Json j = io::parse_json(io::read_text(path), path);
  io::require_keys(j, {"extraction", "weighting", "paths", "classes"}, path);

  if (j.contains("extraction")) {
    const Json& e = j["extraction"];
    const std::string where = path + ": extraction";
    io::require_keys(e,
                     {"buffer_scale", "fallback_scale", "percentile", "use_max",
                      "linear_correction", "tile_size"},
                     where);
    read_key(e, "buffer_scale", cfg.extraction.buffer_scale, where);
    read_key(e, "fallback_scale", cfg.extraction.fallback_scale, where);
    read_key(e, "percentile", cfg.extraction.percentile_p, where);
    read_key(e, "use_max", cfg.extraction.use_max, where);
    read_key(e, "tile_size", cfg.extraction.tile_size, where);
    if (e.contains("linear_correction") && !e["linear_correction"].is_null()) {
      const Json& lc = e["linear_correction"];
      io::require_keys(lc, {"slope", "intercept"}, where + ".linear_correction");
      LinearCorrection c;
      read_key(lc, "slope", c.slope, where);
      read_key(lc, "intercept", c.intercept, where);
      cfg.extraction.linear_correction = c;
    }
  }
  if (j.contains("weighting")) {
    const Json& w = j["weighting"];
    const std::string where = path + ": weighting";
    io::require_keys(w, {"strategy", "temperature", "pcgrad", "focal_gamma", "cb_beta"}, where);
    if (w.contains("strategy")) {
      std::string s;
      read_key(w, "strategy", s, where);
      if (s == "equal") cfg.weighting.strategy = WeightingStrategy::Equal;
      else if (s == "uncertainty") cfg.weighting.strategy = WeightingStrategy::Uncertainty;
      else if (s == "dwa") cfg.weighting.strategy = WeightingStrategy::Dwa;
      else throw Error(ErrorCode::ParseError, where + ": unknown strategy '" + s + "'");
    }
    read_key(w, "temperature", cfg.weighting.temperature, where);
    read_key(w, "pcgrad", cfg.weighting.pcgrad, where);
    read_key(w, "focal_gamma", cfg.weighting.focal_gamma, where);
    read_key(w, "cb_beta", cfg.weighting.cb_beta, where);
  }
  if (j.contains("paths")) {
    const Json& p = j["paths"];
    const std::string where = path + ": paths";
    io::require_keys(p,
                     {"chm", "crowns", "image", "labels", "preds", "samples", "params", "losses",
                      "spec"},
                     where);
    read_key(p, "chm", cfg.paths.chm, where);
    read_key(p, "crowns", cfg.paths.crowns, where);
    read_key(p, "image", cfg.paths.image, where);
    read_key(p, "labels", cfg.paths.labels, where);
    read_key(p, "preds", cfg.paths.preds, where);
    read_key(p, "samples", cfg.paths.samples, where);
    read_key(p, "params", cfg.paths.params, where);
    read_key(p, "losses", cfg.paths.losses, where);
    read_key(p, "spec", cfg.paths.spec, where);
  }
  read_key(j, "classes", cfg.classes, path);
  return cfg;
}

std::string require_path(const std::string& value, const char* name) {
  if (value.empty())
    throw Error(ErrorCode::InvalidArgument, std::string("missing --") + name + " (flag or config)");
  return value;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create '" + dir.string() + "': " + ec.message());
}

void emit(const std::string& out_path, const std::string& text, std::ostream& out) {
  if (out_path.empty() || out_path == "-") {
    out << text;
    return;
  }
  const fs::path p(out_path);
  if (p.has_parent_path()) ensure_dir(p.parent_path());
  io::write_text(p, text);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::optional<Split> split_filter(const std::string& s) {
  if (s.empty() || s == "all") return std::nullopt;
  return parse_split(s);
}

// Options shared by every subcommand.
struct Common {
  std::uint64_t seed = 0;
  std::string config;
  std::string out;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Random seed");
  sub->add_option("--config", c.config, "JSON run configuration");
  sub->add_option("--out", c.out, "Output path");
}

// extract --------------------------------------------------------------------

struct ExtractArgs {
  std::string chm, crowns;
  std::vector<std::string> image;
  std::optional<double> percentile, buffer_scale, fallback_scale;
  std::optional<int> tile_size;
  bool use_max = false;
};

int cmd_extract(const Common& c, const ExtractArgs& a, std::ostream& out) {
  RunConfig cfg = load_config(c.config);
  if (a.use_max) cfg.extraction.use_max = true;
  if (a.percentile) cfg.extraction.percentile_p = *a.percentile;
  if (a.buffer_scale) cfg.extraction.buffer_scale = *a.buffer_scale;
  if (a.fallback_scale) cfg.extraction.fallback_scale = *a.fallback_scale;
  if (a.tile_size) cfg.extraction.tile_size = *a.tile_size;
  cfg.extraction.validate();

  const std::string chm_path = require_path(a.chm.empty() ? cfg.paths.chm : a.chm, "chm");
  const std::string crowns_path =
      require_path(a.crowns.empty() ? cfg.paths.crowns : a.crowns, "crowns");
  const fs::path out_dir = require_path(c.out, "out");
  const std::vector<std::string>& image_paths = a.image.empty() ? cfg.paths.image : a.image;

  const Raster chm = io::parse_asc(io::read_text(chm_path), chm_path);
  const auto crowns = io::parse_crowns(io::read_text(crowns_path), crowns_path);
  std::vector<Raster> image;
  for (const auto& p : image_paths) image.push_back(io::parse_asc(io::read_text(p), p));

  const fs::path tile_dir = out_dir / "tiles";
  ensure_dir(tile_dir);
  const GridRef& tile_grid = image.empty() ? chm.grid() : image.front().grid();
  Benchmark bench = build_benchmark(
      chm, image.empty() ? nullptr : &image, crowns, cfg.extraction,
      [&](const BenchmarkRecord& rec, const Tile& tile) {
        const auto names = tile_file_names(rec.crown_id, tile.channels);
        for (int ch = 0; ch < tile.channels; ++ch)
          io::write_text(tile_dir / names[ch], io::format_asc(tile, ch, tile_grid));
      });

  if (!cfg.classes.empty()) {
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < cfg.classes.size(); ++i)
      index.emplace(cfg.classes[i], static_cast<int>(i));
    for (auto& rec : bench.records) {
      const auto it = index.find(rec.class_name);
      if (it == index.end())
        throw Error(ErrorCode::UnknownClass, "class '" + rec.class_name + "' missing from config classes");
      rec.class_index = it->second;
    }
    bench.class_names = cfg.classes;
  }
  for (auto& rec : bench.records) {
    std::string joined;
    std::istringstream names(rec.tile_path);
    for (std::string name; std::getline(names, name, ';');)
      joined += (joined.empty() ? "tiles/" : ";tiles/") + name;
    rec.tile_path = joined;
  }

  io::write_text(out_dir / "records.csv", io::format_records(bench.records));
  io::write_text(out_dir / "classes.json", dump(Json{{"classes", bench.class_names}}));
  std::vector<std::vector<std::string>> skipped;
  for (const auto& s : bench.skipped) skipped.push_back({s.crown_id, s.reason});
  io::write_text(out_dir / "skipped.csv", io::format_csv({"crown_id", "reason"}, skipped));
  out << "extracted " << bench.records.size() << " crowns, skipped " << bench.skipped.size()
      << "\n";
  return 0;
}

// fit-allometry ----------------------------------------------------------------

int cmd_fit(const Common& c, const std::string& samples_flag, bool pool, int min_samples,
            std::ostream& out) {
  const RunConfig cfg = load_config(c.config);
  const std::string path =
      require_path(samples_flag.empty() ? cfg.paths.samples : samples_flag, "samples");
  AllometryFitOptions opt;
  opt.pool_fallback = pool;
  opt.min_samples = min_samples;
  const auto params = fit_allometry(io::parse_samples(io::read_text(path), path), opt);
  emit(c.out, dump(io::to_json(params)), out);
  return 0;
}

// allometry-baseline -----------------------------------------------------------

struct BaselineArgs {
  std::string crowns, params, labels, chm, split, radius = "rect";
  double threshold = 1.25;
};

int cmd_baseline(const Common& c, const BaselineArgs& a, std::ostream& out) {
  const RunConfig cfg = load_config(c.config);
  const std::string crowns_path =
      require_path(a.crowns.empty() ? cfg.paths.crowns : a.crowns, "crowns");
  const std::string params_path =
      require_path(a.params.empty() ? cfg.paths.params : a.params, "params");
  const std::string labels_path =
      require_path(a.labels.empty() ? cfg.paths.labels : a.labels, "labels");
  const std::string chm_path = require_path(a.chm.empty() ? cfg.paths.chm : a.chm, "chm");
  if (a.radius != "rect" && a.radius != "area")
    throw Error(ErrorCode::InvalidArgument, "--radius must be 'rect' or 'area'");
  const RadiusMethod method = a.radius == "rect" ? RadiusMethod::RotatedRect : RadiusMethod::Area;
  const auto filter = split_filter(a.split);

  const auto crowns = io::parse_crowns(io::read_text(crowns_path), crowns_path);
  const AllometryParams params =
      io::allometry_params_from_json(io::parse_json(io::read_text(params_path), params_path));
  const auto labels = io::parse_records(io::read_text(labels_path), labels_path);
  const Raster chm = io::parse_asc(io::read_text(chm_path), chm_path);

  std::map<std::string, double> truth;
  for (const auto& r : labels)
    if (r.height_m && (!filter || r.split == *filter)) truth.emplace(r.crown_id, *r.height_m);

  std::vector<BaselineInput> inputs;
  Json failures = Json::array();
  for (const auto& crown : crowns) {
    if (!truth.count(crown.id)) continue;
    try {
      inputs.push_back({crown.id, crown.class_name, rasterize_polygon(crown.polygon, chm.grid())});
    } catch (const Error& e) {
      failures.push_back({{"crown_id", crown.id}, {"error", e.what()}});
    }
  }
  std::vector<double> preds, truths;
  for (const auto& p : allometric_baseline(inputs, params, method)) {
    if (!p.height_m) {
      failures.push_back({{"crown_id", p.crown_id}, {"error", p.error}});
      continue;
    }
    preds.push_back(*p.height_m);
    truths.push_back(truth.at(p.crown_id));
  }
  if (preds.empty()) throw Error(ErrorCode::EmptyInput, "no crown received a baseline prediction");
  const Json report = {{"regression", io::to_json(regression_metrics(preds, truths, a.threshold))},
                       {"radius_method", a.radius},
                       {"n_labelled", truth.size()},
                       {"failures", failures}};
  emit(c.out, dump(report), out);
  return 0;
}

// eval -----------------------------------------------------------------------------

struct EvalArgs {
  std::string preds, labels, split;
  double threshold = 1.25;
};

int cmd_eval(const Common& c, const EvalArgs& a, std::ostream& out) {
  const RunConfig cfg = load_config(c.config);
  const std::string preds_path = require_path(a.preds.empty() ? cfg.paths.preds : a.preds, "preds");
  const std::string labels_path =
      require_path(a.labels.empty() ? cfg.paths.labels : a.labels, "labels");
  const auto filter = split_filter(a.split);
  const auto preds = io::parse_predictions(io::read_text(preds_path), preds_path);
  const auto labels = io::parse_records(io::read_text(labels_path), labels_path);

  std::map<std::string, const io::PredictionRow*> by_id;
  for (const auto& p : preds)
    if (!by_id.emplace(p.crown_id, &p).second)
      throw Error(ErrorCode::InvalidArgument, "duplicate prediction for '" + p.crown_id + "'");

  std::vector<double> ph, th;
  std::vector<int> pc, tc;
  int num_classes = static_cast<int>(cfg.classes.size());
  for (const auto& r : labels) {
    if (filter && r.split != *filter) continue;
    const auto it = by_id.find(r.crown_id);
    if (it == by_id.end())
      throw Error(ErrorCode::InvalidArgument, "no prediction for crown '" + r.crown_id + "'");
    const io::PredictionRow& p = *it->second;
    if (r.height_m) {
      ph.push_back(p.height_m);
      th.push_back(*r.height_m);
    }
    pc.push_back(p.class_index);
    tc.push_back(r.class_index);
    if (cfg.classes.empty())
      num_classes = std::max({num_classes, p.class_index + 1, r.class_index + 1});
  }
  if (tc.empty()) throw Error(ErrorCode::EmptyInput, "no labelled crowns to evaluate");

  Json report = Json::object();
  const auto cls = classification_metrics(pc, tc, num_classes);
  report["classification"] = io::to_json(cls, cfg.classes);
  if (!th.empty()) {
    const auto reg = regression_metrics(ph, th, a.threshold);
    report["regression"] = io::to_json(reg);
    report["checkpoint_score"] = checkpoint_score(cls.macro_f1, reg.delta);
  } else {
    report["regression"] = nullptr;
    report["checkpoint_score"] = nullptr;
  }
  report["split"] = a.split.empty() ? "all" : a.split;
  emit(c.out, dump(report), out);
  return 0;
}

// stats ------------------------------------------------------------------------------

int cmd_stats(const Common& c, const std::string& labels_flag, const std::string& split,
              std::ostream& out) {
  const RunConfig cfg = load_config(c.config);
  const std::string path =
      require_path(labels_flag.empty() ? cfg.paths.labels : labels_flag, "labels");
  const fs::path out_dir = require_path(c.out, "out");
  const auto filter = split_filter(split);
  const auto records = io::parse_records(io::read_text(path), path);

  std::map<std::string, long long> per_class;
  std::vector<long long> bins;
  for (const auto& r : records) {
    if (filter && r.split != *filter) continue;
    ++per_class[r.class_name];
    if (!r.height_m) continue;
    const auto b = static_cast<std::size_t>(std::floor(*r.height_m));
    if (bins.size() <= b) bins.resize(b + 1, 0);
    ++bins[b];
  }
  std::vector<std::pair<std::string, long long>> sorted(per_class.begin(), per_class.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& l, const auto& r) { return l.second > r.second; });

  std::vector<std::vector<std::string>> class_rows, height_rows;
  for (const auto& [name, n] : sorted) class_rows.push_back({name, std::to_string(n)});
  for (std::size_t b = 0; b < bins.size(); ++b)
    height_rows.push_back({std::to_string(b), std::to_string(b + 1), std::to_string(bins[b])});

  ensure_dir(out_dir);
  io::write_text(out_dir / "class_histogram.csv", io::format_csv({"class_name", "count"}, class_rows));
  io::write_text(out_dir / "height_histogram.csv",
                 io::format_csv({"bin_start_m", "bin_end_m", "count"}, height_rows));
  out << per_class.size() << " classes, " << bins.size() << " height bins\n";
  return 0;
}

// synth ----------------------------------------------------------------------------------

int cmd_synth(const Common& c, const std::string& spec_flag, std::ostream& out) {
  const RunConfig cfg = load_config(c.config);
  const std::string path = require_path(spec_flag.empty() ? cfg.paths.spec : spec_flag, "spec");
  const fs::path out_dir = require_path(c.out, "out");
  const SceneSpec spec = io::scene_spec_from_json(io::parse_json(io::read_text(path), path));
  const Scene scene = generate_scene(spec, c.seed);
  ensure_dir(out_dir);
  io::write_text(out_dir / "chm.asc", io::format_asc(scene.chm));
  io::write_text(out_dir / "crowns.geojson", io::format_crowns(scene.crowns));
  io::write_text(out_dir / "truth.csv", io::format_truth(scene.truth));
  io::write_text(out_dir / "samples.csv", io::format_samples(allometry_samples(scene.truth)));
  out << "generated " << scene.truth.size() << " trees\n";
  return 0;
}

// gradcheck -------------------------------------------------------------------------------

struct GradArgs {
  int dim = 16, grid = 4, classes = 3, n_heads = 8;
  std::string variant = "all";
};

// Moves every tensor off its structured initial value so that LayerNorm
// scales, biases and the output activation are all exercised.
void perturb(heads::DualHeads& model, std::uint64_t seed) {
  detail::Sampler rng(seed);
  for (heads::HeadParams* head : {&model.height, &model.species})
    heads::for_each_tensor(*head, [&](std::string_view, heads::Mat& m) {
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] += 0.1 * rng.normal();
    });
  model.height.b_out(0, 0) = 2.0;
}

int cmd_gradcheck(const Common& c, const GradArgs& a, std::ostream& out) {
  heads::HeadsConfig base;
  base.dim = a.dim;
  base.n_heads = a.n_heads;
  base.n_classes = a.classes;
  auto variants = heads::ablation_variants(base);
  for (auto& v : heads::sharing_variants(base)) variants.push_back(std::move(v));
  if (a.variant != "all") {
    std::erase_if(variants, [&](const auto& v) { return v.first != a.variant; });
    if (variants.empty()) throw Error(ErrorCode::InvalidArgument, "unknown variant '" + a.variant + "'");
  }

  const heads::TokenSet tokens = heads::mock_backbone(c.seed, a.grid, a.grid, a.dim, a.n_heads);
  heads::Targets targets;
  targets.class_index = static_cast<int>(c.seed % static_cast<std::uint64_t>(a.classes));

  Json report = Json::array();
  bool ok = true;
  std::ostringstream table;
  for (const auto& [name, config] : variants) {
    heads::DualHeads model = heads::init_heads(config, c.seed + 1);
    perturb(model, c.seed + 2);
    targets.height = heads::forward(model, tokens).height + 0.5;
    const auto r = heads::gradient_check(model, tokens, targets);
    ok = ok && r.passed;
    Json entries = Json::array();
    for (const auto& e : r.entries)
      entries.push_back({{"name", e.name},
                         {"size", e.size},
                         {"max_rel_error", e.max_rel_error},
                         {"max_abs_grad", e.max_abs_grad}});
    report.push_back({{"variant", name},
                      {"max_rel_error", r.max_rel_error},
                      {"tolerance", r.tolerance},
                      {"passed", r.passed},
                      {"tensors", entries}});
    table << name << " max_rel_error=" << io::format_number(r.max_rel_error) << " "
          << (r.passed ? "PASS" : "FAIL") << "\n";
  }
  if (!c.out.empty()) emit(c.out, dump(Json{{"passed", ok}, {"variants", report}}), out);
  out << table.str() << (ok ? "gradcheck passed\n" : "gradcheck FAILED\n");
  return ok ? 0 : 1;
}

// dwa -------------------------------------------------------------------------------------

int cmd_dwa(const Common& c, const std::string& losses_flag, std::optional<double> temperature,
            std::ostream& out) {
  RunConfig cfg = load_config(c.config);
  if (temperature) cfg.weighting.temperature = *temperature;
  cfg.weighting.validate();
  const std::string path =
      require_path(losses_flag.empty() ? cfg.paths.losses : losses_flag, "losses");
  const LossHistory history = io::parse_losses(io::read_text(path), path);
  emit(c.out, io::format_weight_schedule(dwa_schedule(history, cfg.weighting.temperature)), out);
  return 0;
}

int exit_code(ErrorCode code) { return code == ErrorCode::IoError ? 2 : 1; }

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tree crown height and species benchmark toolkit", "crownkit"};
  app.require_subcommand(1);
  std::function<int()> action;

  Common common;

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Build benchmark records and tiles from a CHM");
  add_common(extract, common);
  extract->add_option("--chm", ex.chm, "CHM raster (.asc)");
  extract->add_option("--crowns", ex.crowns, "Crown polygons (.geojson)");
  extract->add_option("--image", ex.image, "Image bands (.asc) for tiles");
  extract->add_option("--percentile", ex.percentile, "Height percentile");
  extract->add_option("--buffer-scale", ex.buffer_scale, "Primary buffer scale");
  extract->add_option("--fallback-scale", ex.fallback_scale, "Reduced buffer scale");
  extract->add_option("--tile-size", ex.tile_size, "Tile edge in pixels");
  extract->add_flag("--use-max", ex.use_max, "Use the masked maximum");
  extract->callback([&] { action = [&] { return cmd_extract(common, ex, out); }; });

  std::string samples;
  bool pool = false;
  int min_samples = 2;
  auto* fit = app.add_subcommand("fit-allometry", "Fit per-class log-log allometry");
  add_common(fit, common);
  fit->add_option("--samples", samples, "Samples CSV (class,radius_m,height_m)");
  fit->add_flag("--pool-fallback", pool, "Use the pooled fit for under-sampled classes");
  fit->add_option("--min-samples", min_samples, "Minimum samples per class");
  fit->callback([&] { action = [&] { return cmd_fit(common, samples, pool, min_samples, out); }; });

  BaselineArgs bl;
  auto* baseline = app.add_subcommand("allometry-baseline", "Evaluate the allometric baseline");
  add_common(baseline, common);
  baseline->add_option("--crowns", bl.crowns, "Crown polygons (.geojson)");
  baseline->add_option("--params", bl.params, "Allometry parameters (.json)");
  baseline->add_option("--labels", bl.labels, "Records CSV with reference heights");
  baseline->add_option("--chm", bl.chm, "Raster defining the pixel grid (.asc)");
  baseline->add_option("--split", bl.split, "train, val, test or all");
  baseline->add_option("--radius", bl.radius, "rect or area");
  baseline->add_option("--threshold", bl.threshold, "Threshold accuracy ratio");
  baseline->callback([&] { action = [&] { return cmd_baseline(common, bl, out); }; });

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Score predictions against records");
  add_common(eval, common);
  eval->add_option("--preds", ev.preds, "Predictions CSV");
  eval->add_option("--labels", ev.labels, "Records CSV");
  eval->add_option("--split", ev.split, "train, val, test or all");
  eval->add_option("--threshold", ev.threshold, "Threshold accuracy ratio");
  eval->callback([&] { action = [&] { return cmd_eval(common, ev, out); }; });

  std::string stats_labels, stats_split;
  auto* stats = app.add_subcommand("stats", "Class and height histograms");
  add_common(stats, common);
  stats->add_option("--labels", stats_labels, "Records CSV");
  stats->add_option("--split", stats_split, "train, val, test or all");
  stats->callback([&] { action = [&] { return cmd_stats(common, stats_labels, stats_split, out); }; });

  std::string spec;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene");
  add_common(synth, common);
  synth->add_option("--spec", spec, "Scene specification (.json)");
  synth->callback([&] { action = [&] { return cmd_synth(common, spec, out); }; });

  GradArgs ga;
  auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of the prediction heads");
  add_common(grad, common);
  grad->add_option("--dim", ga.dim, "Token width");
  grad->add_option("--grid", ga.grid, "Patch grid edge (N = grid^2)");
  grad->add_option("--classes", ga.classes, "Species classes");
  grad->add_option("--heads", ga.n_heads, "Attention heads");
  grad->add_option("--variant", ga.variant, "Variant name or all");
  grad->callback([&] { action = [&] { return cmd_gradcheck(common, ga, out); }; });

  std::string losses;
  std::optional<double> temperature;
  auto* dwa = app.add_subcommand("dwa", "Dynamic weight average schedule");
  add_common(dwa, common);
  dwa->add_option("--losses", losses, "Loss history CSV (epoch,L_H,L_S)");
  dwa->add_option("--temperature", temperature, "Softmax temperature");
  dwa->callback([&] { action = [&] { return cmd_dwa(common, losses, temperature, out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    return action();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  for (const auto& a : args) argv.push_back(a.c_str());
  argv.push_back(nullptr);
  return run(static_cast<int>(args.size()), argv.data(), out, err);
}

}  // namespace crownkit::cli
