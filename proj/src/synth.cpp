#include "crownkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "crownkit/error.hpp"
#include "sampler.hpp"

namespace crownkit {

namespace {

bool inside_extent(const GridRef& g, Point2 p) {
  return p.x >= g.x_ll && p.x <= g.x_ll + g.width * g.pixel_size && p.y >= g.y_ll &&
         p.y <= g.y_ll + g.height * g.pixel_size;
}

Point2 snap(const GridRef& g, Point2 p) {
  const auto [row, col] = g.to_pixel(p);
  return g.pixel_center(std::round(row), std::round(col));
}

std::string tree_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "tree_%04zu", i);
  return buf;
}

void place_random(const SceneSpec& spec, detail::Sampler& rng, std::vector<TreeSpec>& trees) {
  const RandomTrees& rt = *spec.random_trees;
  const GridRef& g = spec.grid;
  const double ps = g.pixel_size;
  const double w = g.width * ps, h = g.height * ps;
  const long max_attempts = 2000L * std::max(rt.count, 1);
  long attempts = 0;
  for (int placed = 0; placed < rt.count;) {
    if (++attempts > max_attempts)
      throw Error(ErrorCode::SpecInvalid, "could not place " + std::to_string(rt.count) +
                                              " non-overlapping trees");
    TreeSpec t;
    t.radius_m = rng.uniform(rt.radius_min_m, rt.radius_max_m);
    const double margin = t.radius_m + 2.0 * ps;
    if (2.0 * margin >= w || 2.0 * margin >= h) continue;
    t.center = {g.x_ll + rng.uniform(margin, w - margin), g.y_ll + rng.uniform(margin, h - margin)};
    if (spec.snap_centers) t.center = snap(g, t.center);
    t.class_name = rt.classes[rng.index(rt.classes.size())];
    t.profile = rt.profile;
    // f32-representable so the rasterized apex equals the truth exactly.
    t.height_m = static_cast<float>(rng.uniform(rt.height_min_m, rt.height_max_m));

    const bool clear = std::none_of(trees.begin(), trees.end(), [&](const TreeSpec& o) {
      const double d = std::hypot(o.center.x - t.center.x, o.center.y - t.center.y);
      return d <= o.radius_m + t.radius_m + rt.min_gap_m + 2.0 * ps;
    });
    if (!clear) continue;
    trees.push_back(std::move(t));
    ++placed;
  }
}

}  // namespace

double profile_value(CrownProfile profile, double apex_m, double radius_m, double dist_m) {
  const double u = dist_m / radius_m;
  if (profile == CrownProfile::Paraboloid) return apex_m * std::max(0.0, 1.0 - u * u);
  return apex_m * std::max(0.0, 1.0 - u);
}

void SceneSpec::validate() const {
  if (grid.width <= 0 || grid.height <= 0 || !(grid.pixel_size > 0.0))
    throw Error(ErrorCode::SpecInvalid, "raster size and pixel size must be positive");
  if (polygon_vertices < 3) throw Error(ErrorCode::SpecInvalid, "crown polygons need >= 3 vertices");
  for (const auto& t : trees) {
    if (!(t.height_m > 0.0) || !(t.radius_m > 0.0))
      throw Error(ErrorCode::SpecInvalid, "tree height and radius must be > 0");
    if (!inside_extent(grid, t.center))
      throw Error(ErrorCode::SpecInvalid, "tree center outside the raster");
  }
  if (random_trees) {
    const auto& r = *random_trees;
    if (r.count < 0) throw Error(ErrorCode::SpecInvalid, "random tree count must be >= 0");
    if (r.count > 0 && r.classes.empty())
      throw Error(ErrorCode::SpecInvalid, "random trees need at least one class");
    if (!(r.radius_min_m > 0.0) || r.radius_max_m < r.radius_min_m || !(r.height_min_m > 0.0) ||
        r.height_max_m < r.height_min_m || r.min_gap_m < 0.0)
      throw Error(ErrorCode::SpecInvalid, "invalid random tree ranges");
  }
}

Scene generate_scene(const SceneSpec& spec, std::uint64_t seed) {
  spec.validate();
  const GridRef& g = spec.grid;
  detail::Sampler rng(seed);

  std::vector<TreeSpec> trees = spec.trees;
  if (spec.snap_centers)
    for (auto& t : trees) t.center = snap(g, t.center);
  if (spec.random_trees) place_random(spec, rng, trees);
  for (auto& t : trees) {
    const auto it = spec.allometry_truth.find(t.class_name);
    if (it != spec.allometry_truth.end())
      t.height_m = std::exp(it->second.intercept) * std::pow(t.radius_m, it->second.slope);
  }

  Scene scene;
  scene.chm = Raster(g);
  const double ps = g.pixel_size;
  for (const auto& t : trees) {
    const auto [row, col] = g.to_pixel(t.center);
    const double rp = t.radius_m / ps;
    const int r0 = std::max(0, static_cast<int>(std::floor(row - rp)));
    const int r1 = std::min(g.height - 1, static_cast<int>(std::ceil(row + rp)));
    const int c0 = std::max(0, static_cast<int>(std::floor(col - rp)));
    const int c1 = std::min(g.width - 1, static_cast<int>(std::ceil(col + rp)));
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c) {
        const Point2 p = g.pixel_center(r, c);
        const double dist = std::hypot(p.x - t.center.x, p.y - t.center.y);
        const auto v = static_cast<float>(profile_value(t.profile, t.height_m, t.radius_m, dist));
        float& cell = scene.chm.at(r, c);
        cell = std::max(cell, v);
      }
  }

  detail::Sampler split_rng(seed ^ 0xC2B2AE3D27D4EB4FULL);
  for (std::size_t i = 0; i < trees.size(); ++i) {
    const TreeSpec& t = trees[i];
    CrownAnnotation crown;
    crown.id = tree_id(i);
    crown.class_name = t.class_name;
    const double u = split_rng.uniform();
    crown.split = u < 0.7 ? Split::Train : (u < 0.85 ? Split::Val : Split::Test);
    for (int k = 0; k < spec.polygon_vertices; ++k) {
      const double a = 2.0 * std::numbers::pi * k / spec.polygon_vertices;
      crown.polygon.push_back(
          {t.center.x + t.radius_m * std::cos(a), t.center.y + t.radius_m * std::sin(a)});
    }
    scene.truth.push_back({crown.id, t.class_name, t.height_m, t.radius_m, t.center});
    scene.crowns.push_back(std::move(crown));
  }
  return scene;
}

std::vector<AllometrySample> allometry_samples(const std::vector<TruthRecord>& truth) {
  std::vector<AllometrySample> out;
  out.reserve(truth.size());
  for (const auto& t : truth) out.push_back({t.class_name, t.radius_m, t.height_m});
  return out;
}

}  // namespace crownkit
