#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "crownkit/allometry.hpp"
#include "crownkit/error.hpp"
#include "crownkit/geometry.hpp"
#include "crownkit/synth.hpp"

using namespace crownkit;

TEST_CASE("single cone peaks at its snapped center") {
  SceneSpec spec;
  spec.grid = {41, 41, 0.5, 0, 0};
  spec.trees = {{{10.25, 10.25}, 10.0, 3.0, "oak", CrownProfile::Cone}};
  const Scene s = generate_scene(spec, 0);
  const auto vals = s.chm.values();
  CHECK(*std::max_element(vals.begin(), vals.end()) == 10.0F);
  CHECK(s.chm.at(20, 20) == 10.0F);
  CHECK(*std::min_element(vals.begin(), vals.end()) == 0.0F);
  REQUIRE(s.crowns.size() == 1);
  CHECK(s.crowns[0].polygon.size() == 32);
  CHECK(s.crowns[0].id == "tree_0000");
  CHECK(s.truth[0].height_m == 10.0);
}

TEST_CASE("overlapping trees compose by maximum, in any order") {
  SceneSpec spec;
  spec.grid = {60, 40, 0.5, 0, 0};
  const TreeSpec a{{8.25, 10.25}, 12.0, 4.0, "oak", CrownProfile::Cone};
  const TreeSpec b{{11.25, 10.25}, 9.0, 5.0, "pine", CrownProfile::Paraboloid};
  spec.trees = {a, b};
  const Scene ab = generate_scene(spec, 0);
  spec.trees = {b, a};
  const Scene ba = generate_scene(spec, 0);
  CHECK(std::equal(ab.chm.values().begin(), ab.chm.values().end(), ba.chm.values().begin()));
  for (int r = 0; r < 40; ++r)
    for (int c = 0; c < 60; ++c) {
      const Point2 p = spec.grid.pixel_center(r, c);
      const double va = profile_value(a.profile, a.height_m, a.radius_m,
                                      std::hypot(p.x - 8.25, p.y - 10.25));
      const double vb = profile_value(b.profile, b.height_m, b.radius_m,
                                      std::hypot(p.x - 11.25, p.y - 10.25));
      CHECK(ab.chm.at(r, c) == static_cast<float>(std::max(va, vb)));
    }
}

TEST_CASE("profiles") {
  CHECK(profile_value(CrownProfile::Cone, 10, 2, 1) == 5.0);
  CHECK(profile_value(CrownProfile::Paraboloid, 10, 2, 1) == 7.5);
  CHECK(profile_value(CrownProfile::Cone, 10, 2, 3) == 0.0);
}

TEST_CASE("allometric truth round trips through the fit") {
  SceneSpec spec;
  spec.grid = {400, 400, 0.25, 0, 0};
  spec.random_trees = RandomTrees{30, {"oak"}, 1.0, 4.0, 5.0, 30.0, CrownProfile::Cone, 0.0};
  spec.allometry_truth["oak"] = {0.8, 0.5};
  const Scene s = generate_scene(spec, 12);
  const auto p = fit_allometry(allometry_samples(s.truth)).classes.at("oak");
  CHECK(std::abs(p.slope - 0.8) < 1e-9);
  CHECK(std::abs(p.intercept - 0.5) < 1e-9);
}

TEST_CASE("random scenes are deterministic and non-overlapping") {
  SceneSpec spec;
  spec.grid = {300, 300, 0.5, 0, 0};
  spec.random_trees = RandomTrees{25, {"a", "b", "c"}, 1.0, 3.0, 5.0, 30.0, CrownProfile::Cone, 0.5};
  const Scene s1 = generate_scene(spec, 99), s2 = generate_scene(spec, 99);
  const Scene s3 = generate_scene(spec, 100);
  CHECK(std::equal(s1.chm.values().begin(), s1.chm.values().end(), s2.chm.values().begin()));
  CHECK_FALSE(std::equal(s1.chm.values().begin(), s1.chm.values().end(), s3.chm.values().begin()));
  for (std::size_t i = 0; i < s1.truth.size(); ++i) {
    const auto& a = s1.truth[i];
    CHECK(static_cast<double>(static_cast<float>(a.height_m)) == a.height_m);
    for (std::size_t j = i + 1; j < s1.truth.size(); ++j) {
      const auto& b = s1.truth[j];
      CHECK(std::hypot(a.center.x - b.center.x, a.center.y - b.center.y) > a.radius_m + b.radius_m + 0.5);
    }
  }
}

TEST_CASE("invalid specs") {
  SceneSpec spec;
  spec.grid = {10, 10, 1.0, 0, 0};
  spec.trees = {{{50.0, 5.0}, 10.0, 2.0, "oak", CrownProfile::Cone}};
  CHECK_THROWS_AS(generate_scene(spec, 0), Error);
  spec.trees = {{{5.0, 5.0}, 0.0, 2.0, "oak", CrownProfile::Cone}};
  CHECK_THROWS_AS(generate_scene(spec, 0), Error);
  spec.trees.clear();
  spec.random_trees = RandomTrees{500, {"a"}, 3.0, 4.0, 5.0, 10.0, CrownProfile::Cone, 0.0};
  CHECK_THROWS_AS(generate_scene(spec, 0), Error);
}
