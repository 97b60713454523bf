#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crownkit/allometry.hpp"
#include "crownkit/extraction.hpp"
#include "crownkit/raster.hpp"

namespace crownkit {

enum class CrownProfile { Cone, Paraboloid };

struct TreeSpec {
  Point2 center;
  double height_m = 0.0;
  double radius_m = 0.0;
  std::string class_name;
  CrownProfile profile = CrownProfile::Cone;
};

/// Random non-overlapping trees placed fully inside the raster.
struct RandomTrees {
  int count = 0;
  std::vector<std::string> classes;
  double radius_min_m = 1.0;
  double radius_max_m = 3.0;
  double height_min_m = 5.0;
  double height_max_m = 30.0;
  CrownProfile profile = CrownProfile::Cone;
  /// Extra clearance between crown disks.
  double min_gap_m = 0.0;
};

struct AllometryTruth {
  double slope = 0.0;
  double intercept = 0.0;
};

struct SceneSpec {
  GridRef grid{};
  std::vector<TreeSpec> trees;
  std::optional<RandomTrees> random_trees;
  /// When a class has an entry, its heights are set to e^b r^a.
  std::map<std::string, AllometryTruth> allometry_truth;
  bool snap_centers = true;
  int polygon_vertices = 32;

  void validate() const;
};

struct TruthRecord {
  std::string crown_id;
  std::string class_name;
  double height_m = 0.0;
  double radius_m = 0.0;
  Point2 center;
};

struct Scene {
  Raster chm;
  std::vector<CrownAnnotation> crowns;
  std::vector<TruthRecord> truth;
};

/// CHM = max over trees of the crown profile (background 0), one regular
/// polygon per crown, and exact truth heights. Randomly placed trees get
/// f32-representable heights so the CHM apex equals the truth exactly.
Scene generate_scene(const SceneSpec& spec, std::uint64_t seed);

/// (class, radius, height) triples of a truth table.
std::vector<AllometrySample> allometry_samples(const std::vector<TruthRecord>& truth);

double profile_value(CrownProfile profile, double apex_m, double radius_m, double dist_m);

}  // namespace crownkit
