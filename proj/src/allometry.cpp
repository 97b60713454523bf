#include "crownkit/allometry.hpp"

#include <cmath>
#include <numbers>

#include "crownkit/error.hpp"

namespace crownkit {

namespace {

struct LogLine {
  double slope = 0.0;
  double intercept = 0.0;
};

// Centered two-pass OLS; returns nullopt when var(ln r) is zero.
std::optional<LogLine> ols(const std::vector<const AllometrySample*>& pts) {
  const auto n = static_cast<double>(pts.size());
  double mx = 0.0, my = 0.0;
  for (const auto* s : pts) {
    mx += std::log(s->radius_m);
    my += std::log(s->height_m);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto* s : pts) {
    const double dx = std::log(s->radius_m) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(s->height_m) - my);
  }
  if (!(sxx > 0.0)) return std::nullopt;
  LogLine line;
  line.slope = sxy / sxx;
  line.intercept = my - line.slope * mx;
  return line;
}

}  // namespace

AllometryParams fit_allometry(const std::vector<AllometrySample>& samples,
                              const AllometryFitOptions& options) {
  if (samples.empty()) throw Error(ErrorCode::EmptyInput, "no allometry samples");
  std::map<std::string, std::vector<const AllometrySample*>> by_class;
  std::vector<const AllometrySample*> all;
  for (const auto& s : samples) {
    if (!(s.radius_m > 0.0) || !(s.height_m > 0.0) || !std::isfinite(s.radius_m) ||
        !std::isfinite(s.height_m))
      throw Error(ErrorCode::NonPositiveValue,
                  "class '" + s.class_name + "': radius and height must be finite and > 0");
    by_class[s.class_name].push_back(&s);
    all.push_back(&s);
  }

  std::optional<LogLine> pooled;
  bool pooled_done = false;
  auto pooled_fit = [&]() -> const LogLine& {
    if (!pooled_done) {
      pooled_done = true;
      if (static_cast<int>(all.size()) >= options.min_samples) pooled = ols(all);
    }
    if (!pooled)
      throw Error(ErrorCode::InsufficientSamples, "pooled fit impossible: too few distinct radii");
    return *pooled;
  };

  AllometryParams params;
  for (const auto& [name, pts] : by_class) {
    ClassAllometry ca;
    ca.n_samples = static_cast<int>(pts.size());
    std::optional<LogLine> line;
    if (ca.n_samples < options.min_samples) {
      if (!options.pool_fallback)
        throw Error(ErrorCode::InsufficientSamples,
                    "class '" + name + "' has " + std::to_string(ca.n_samples) + " sample(s)");
    } else {
      line = ols(pts);
      if (!line && !options.pool_fallback)
        throw Error(ErrorCode::ZeroVariance, "class '" + name + "': all radii are equal");
    }
    if (!line) {
      line = pooled_fit();
      ca.pooled = true;
    }
    ca.slope = line->slope;
    ca.intercept = line->intercept;
    params.classes.emplace(name, ca);
  }
  return params;
}

double predict_height(const AllometryParams& params, const std::string& class_name,
                      double radius_m) {
  const auto it = params.classes.find(class_name);
  if (it == params.classes.end())
    throw Error(ErrorCode::UnknownClass, "no allometry for class '" + class_name + "'");
  if (!(radius_m > 0.0) || !std::isfinite(radius_m))
    throw Error(ErrorCode::NonPositiveValue, "crown radius must be > 0");
  return std::exp(it->second.slope * std::log(radius_m) + it->second.intercept);
}

double crown_radius_m(const PixelMask& mask, RadiusMethod method) {
  if (method == RadiusMethod::Area) {
    const double area =
        static_cast<double>(mask.count()) * mask.pixel_size() * mask.pixel_size();
    if (area == 0.0) throw Error(ErrorCode::EmptyMask, "crown mask is empty");
    return std::sqrt(area / std::numbers::pi);
  }
  return crown_radius(min_rotated_rect(mask));
}

std::vector<BaselinePrediction> allometric_baseline(const std::vector<BaselineInput>& crowns,
                                                    const AllometryParams& params,
                                                    RadiusMethod method) {
  std::vector<BaselinePrediction> out;
  out.reserve(crowns.size());
  for (const auto& crown : crowns) {
    BaselinePrediction pred;
    pred.crown_id = crown.crown_id;
    try {
      pred.radius_m = crown_radius_m(crown.mask, method);
      pred.height_m = predict_height(params, crown.class_name, *pred.radius_m);
    } catch (const Error& e) {
      pred.error = e.what();
    }
    out.push_back(std::move(pred));
  }
  return out;
}

}  // namespace crownkit
