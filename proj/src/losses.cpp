#include "crownkit/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "crownkit/error.hpp"

namespace crownkit {

double smooth_l1(double pred, double truth) {
  if (!std::isfinite(pred) || !std::isfinite(truth))
    throw Error(ErrorCode::NonFinite, "smooth_l1 inputs must be finite");
  const double d = pred - truth;
  const double a = std::abs(d);
  return a < 1.0 ? 0.5 * d * d : a - 0.5;
}

double smooth_l1_grad(double pred, double truth) {
  if (!std::isfinite(pred) || !std::isfinite(truth))
    throw Error(ErrorCode::NonFinite, "smooth_l1 inputs must be finite");
  const double d = pred - truth;
  if (std::abs(d) < 1.0) return d;
  return d > 0.0 ? 1.0 : -1.0;
}

namespace {

void check_distribution(std::span<const double> probs, int c) {
  if (probs.empty()) throw Error(ErrorCode::InvalidDistribution, "empty distribution");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0))
      throw Error(ErrorCode::InvalidDistribution, "probabilities must lie in [0, 1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw Error(ErrorCode::InvalidDistribution, "probabilities sum to " + std::to_string(sum));
  if (c < 0 || static_cast<std::size_t>(c) >= probs.size())
    throw Error(ErrorCode::IndexOutOfRange, "class index " + std::to_string(c));
  if (probs[static_cast<std::size_t>(c)] == 0.0)
    throw Error(ErrorCode::InvalidDistribution, "target class has probability 0");
}

}  // namespace

double cross_entropy(std::span<const double> probs, int c) {
  check_distribution(probs, c);
  return -std::log(probs[static_cast<std::size_t>(c)]);
}

double focal_loss(std::span<const double> probs, int c, double gamma) {
  if (!(gamma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "focal gamma must be >= 0");
  const double ce = cross_entropy(probs, c);
  if (gamma == 0.0) return ce;
  return std::pow(1.0 - probs[static_cast<std::size_t>(c)], gamma) * ce;
}

std::vector<double> class_balanced_weights(std::span<const long long> counts, double beta) {
  if (!(beta >= 0.0 && beta < 1.0))
    throw Error(ErrorCode::InvalidBeta, "class-balanced beta must lie in [0, 1)");
  if (counts.empty()) throw Error(ErrorCode::EmptyInput, "no class counts");
  std::vector<double> w;
  w.reserve(counts.size());
  for (long long n : counts) {
    if (n < 1) throw Error(ErrorCode::ZeroCount, "class counts must be >= 1");
    // E = (1 - beta^n) / (1 - beta), evaluated without cancellation.
    const double effective =
        beta == 0.0 ? 1.0 : -std::expm1(static_cast<double>(n) * std::log(beta)) / (1.0 - beta);
    w.push_back(1.0 / effective);
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  const double scale = static_cast<double>(w.size()) / total;
  for (double& x : w) x *= scale;
  return w;
}

void WeightingConfig::validate() const {
  if (!(temperature > 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be > 0");
  if (!(focal_gamma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "focal_gamma must be >= 0");
  if (!(cb_beta >= 0.0 && cb_beta < 1.0))
    throw Error(ErrorCode::InvalidArgument, "cb_beta must lie in [0, 1)");
}

TaskWeights dwa_weights(const LossHistory& history, double temperature, int epoch) {
  if (!(temperature > 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be > 0");
  if (epoch < 1) throw Error(ErrorCode::InvalidArgument, "epochs are 1-based");
  if (epoch < 3) return {};
  const auto prev = static_cast<std::size_t>(epoch - 1);  // 1-based t-1
  if (history.height.size() < prev || history.species.size() < prev)
    throw Error(ErrorCode::MissingHistory,
                "epoch " + std::to_string(epoch) + " needs losses of epochs " +
                    std::to_string(epoch - 2) + " and " + std::to_string(epoch - 1));
  const double lh1 = history.height[prev - 1], lh2 = history.height[prev - 2];
  const double ls1 = history.species[prev - 1], ls2 = history.species[prev - 2];
  for (double l : {lh1, lh2, ls1, ls2})
    if (!(l > 0.0) || !std::isfinite(l))
      throw Error(ErrorCode::NonPositiveLoss, "DWA needs finite positive losses");

  return dwa_from_ratios(lh1 / lh2, ls1 / ls2, temperature);
}

TaskWeights dwa_from_ratios(double ratio_height, double ratio_species, double temperature) {
  if (!(temperature > 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be > 0");
  if (!std::isfinite(ratio_height) || !std::isfinite(ratio_species))
    throw Error(ErrorCode::NonFinite, "DWA loss ratios must be finite");
  const double zh = ratio_height / temperature;
  const double zs = ratio_species / temperature;
  const double zmax = std::max(zh, zs);
  const double eh = std::exp(zh - zmax);
  const double es = std::exp(zs - zmax);
  const double denom = eh + es;
  TaskWeights w;
  w.height = 2.0 * eh / denom;
  w.species = 2.0 - w.height;
  return w;
}

std::vector<TaskWeights> dwa_schedule(const LossHistory& history, double temperature) {
  if (history.height.size() != history.species.size())
    throw Error(ErrorCode::LengthMismatch, "loss histories differ in length");
  std::vector<TaskWeights> out;
  const int last = static_cast<int>(history.height.size()) + 1;
  for (int t = 1; t <= last; ++t) out.push_back(dwa_weights(history, temperature, t));
  return out;
}

double total_loss(TaskWeights w, double l_height, double l_species) {
  const double v = w.height * l_height + w.species * l_species;
  if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "total loss is not finite");
  return v;
}

double uncertainty_weighted_total(double l_height, double l_species, double s_height,
                                  double s_species) {
  const double v =
      std::exp(-s_height) * l_height + s_height + std::exp(-s_species) * l_species + s_species;
  if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "uncertainty-weighted loss");
  return v;
}

std::pair<std::vector<double>, std::vector<double>> pcgrad(std::span<const double> grad_a,
                                                           std::span<const double> grad_b) {
  if (grad_a.size() != grad_b.size())
    throw Error(ErrorCode::DimensionMismatch, "gradients differ in dimension");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < grad_a.size(); ++i) {
    ab += grad_a[i] * grad_b[i];
    aa += grad_a[i] * grad_a[i];
    bb += grad_b[i] * grad_b[i];
  }
  std::vector<double> a(grad_a.begin(), grad_a.end());
  std::vector<double> b(grad_b.begin(), grad_b.end());
  if (ab < 0.0) {
    if (aa == 0.0 || bb == 0.0)
      throw Error(ErrorCode::ZeroNormConflict, "conflict with a zero gradient");
    const double ca = ab / bb;
    const double cb = ab / aa;
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = grad_a[i] - ca * grad_b[i];
      b[i] = grad_b[i] - cb * grad_a[i];
    }
  }
  return {std::move(a), std::move(b)};
}

}  // namespace crownkit
