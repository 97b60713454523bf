#pragma once

#include <span>
#include <utility>
#include <vector>

namespace crownkit {

// Task losses ---------------------------------------------------------------

/// 0.5 d^2 for |d| < 1, |d| - 0.5 otherwise, with d = pred - truth.
double smooth_l1(double pred, double truth);
/// d smooth_l1 / d pred.
double smooth_l1_grad(double pred, double truth);

/// -ln p_c. `probs` must be a distribution (sum 1 within 1e-6, entries in
/// [0, 1]) with p_c > 0.
double cross_entropy(std::span<const double> probs, int c);

/// (1 - p_c)^gamma * (-ln p_c).
double focal_loss(std::span<const double> probs, int c, double gamma = 2.0);

/// Effective-number weights 1 / E_k with E_k = (1 - beta^n_k) / (1 - beta),
/// normalized so the weights sum to the class count.
std::vector<double> class_balanced_weights(std::span<const long long> counts, double beta = 0.999);

// Multi-task weighting ------------------------------------------------------

enum class WeightingStrategy { Equal, Uncertainty, Dwa };

struct WeightingConfig {
  WeightingStrategy strategy = WeightingStrategy::Dwa;
  double temperature = 2.0;
  bool pcgrad = false;
  double focal_gamma = 2.0;
  double cb_beta = 0.999;

  void validate() const;
};

/// Epoch-mean losses per task, index 0 holding epoch 1.
struct LossHistory {
  std::vector<double> height;
  std::vector<double> species;

  void append(double l_height, double l_species) {
    height.push_back(l_height);
    species.push_back(l_species);
  }
};

struct TaskWeights {
  double height = 1.0;
  double species = 1.0;
};

/// 2 softmax(w / T) over the two tasks' loss ratios w_k = L_k(t-1) / L_k(t-2).
TaskWeights dwa_from_ratios(double ratio_height, double ratio_species, double temperature);

/// Dynamic weight average for 1-based epoch t; (1, 1) for t < 3.
TaskWeights dwa_weights(const LossHistory& history, double temperature, int epoch);

/// Weights for epochs 1 .. history length + 1.
std::vector<TaskWeights> dwa_schedule(const LossHistory& history, double temperature);

double total_loss(TaskWeights w, double l_height, double l_species);

/// sum_k exp(-s_k) L_k + s_k with learnable log-variances s_k.
double uncertainty_weighted_total(double l_height, double l_species, double s_height,
                                  double s_species);

/// Projects each gradient off the other's original gradient when they
/// conflict (negative inner product).
std::pair<std::vector<double>, std::vector<double>> pcgrad(std::span<const double> grad_a,
                                                           std::span<const double> grad_b);

}  // namespace crownkit
