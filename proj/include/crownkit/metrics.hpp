#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace crownkit {

struct RegressionReport {
  double mae = 0.0;
  double rmse = 0.0;
  double msle = 0.0;
  /// Fraction of predictions with max(p/t, t/p) strictly below the threshold.
  double delta = 0.0;
  double delta_threshold = 1.25;
  /// Mean signed difference, prediction minus truth.
  double msd = 0.0;
  std::size_t n = 0;
};

struct ClassStats {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t support = 0;
  double f1 = 0.0;
  double acc = 0.0;
  /// False when the class has no true samples (acc reported as 0).
  bool acc_defined = true;
};

struct ClassificationReport {
  double macro_f1 = 0.0;
  double macro_acc = 0.0;
  std::vector<ClassStats> per_class;
  /// confusion[true][pred]
  std::vector<std::vector<std::int64_t>> confusion;
  std::size_t n = 0;
};

/// MAE, RMSE, MSLE, threshold accuracy and MSD. Pairs with undefined truth
/// must be removed by the caller.
RegressionReport regression_metrics(std::span<const double> preds, std::span<const double> truths,
                                    double threshold = 1.25);

ClassificationReport classification_metrics(std::span<const int> preds,
                                            std::span<const int> truths, int num_classes);

// Single metrics. Same validation as regression_metrics except that msle,
// mae, rmse and msd accept a zero truth.
double mae(std::span<const double> preds, std::span<const double> truths);
double rmse(std::span<const double> preds, std::span<const double> truths);
double msle(std::span<const double> preds, std::span<const double> truths);
double mean_signed_difference(std::span<const double> preds, std::span<const double> truths);
double threshold_accuracy(std::span<const double> preds, std::span<const double> truths,
                          double threshold = 1.25);

/// Mean of macro F1 and threshold accuracy, used for checkpoint selection.
double checkpoint_score(double macro_f1, double delta);

}  // namespace crownkit
