#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crownkit/geometry.hpp"

namespace crownkit {

struct AllometrySample {
  std::string class_name;
  double radius_m = 0.0;
  double height_m = 0.0;
};

/// ln h = slope * ln r + intercept for one class.
struct ClassAllometry {
  double slope = 0.0;
  double intercept = 0.0;
  int n_samples = 0;
  /// Parameters come from the pooled fit over all classes.
  bool pooled = false;
};

struct AllometryParams {
  std::map<std::string, ClassAllometry> classes;
};

struct AllometryFitOptions {
  /// Classes with too few samples (or identical radii) get the pooled
  /// all-class fit instead of raising.
  bool pool_fallback = false;
  int min_samples = 2;
};

/// Per-class ordinary least squares of ln h on ln r.
AllometryParams fit_allometry(const std::vector<AllometrySample>& samples,
                              const AllometryFitOptions& options = {});

/// exp(slope * ln r + intercept); no back-transform bias correction.
double predict_height(const AllometryParams& params, const std::string& class_name,
                      double radius_m);

enum class RadiusMethod {
  /// (l + w) / 4 of the minimum rotated rectangle.
  RotatedRect,
  /// sqrt(area / pi), circular crown assumption.
  Area,
};

double crown_radius_m(const PixelMask& mask, RadiusMethod method = RadiusMethod::RotatedRect);

struct BaselineInput {
  std::string crown_id;
  std::string class_name;
  PixelMask mask;
};

struct BaselinePrediction {
  std::string crown_id;
  std::optional<double> radius_m;
  std::optional<double> height_m;
  /// Empty on success.
  std::string error;
};

/// Oracle-class allometric baseline: mask -> radius -> predicted height.
/// Failures are isolated per crown.
std::vector<BaselinePrediction> allometric_baseline(const std::vector<BaselineInput>& crowns,
                                                    const AllometryParams& params,
                                                    RadiusMethod method = RadiusMethod::RotatedRect);

}  // namespace crownkit
