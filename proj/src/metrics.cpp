#include "crownkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crownkit/error.hpp"

namespace crownkit {

namespace {

// Neumaier compensated sum; fixed order keeps results reproducible.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void check_pairs(std::span<const double> preds, std::span<const double> truths,
                 bool positive_truth) {
  if (preds.size() != truths.size())
    throw Error(ErrorCode::LengthMismatch, std::to_string(preds.size()) + " predictions vs " +
                                               std::to_string(truths.size()) + " truths");
  if (preds.empty()) throw Error(ErrorCode::EmptyInput, "no prediction/truth pairs");
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double p = preds[i];
    const double t = truths[i];
    if (!std::isfinite(p) || !std::isfinite(t))
      throw Error(ErrorCode::DomainError, "non-finite value at index " + std::to_string(i));
    if (p < 0.0 || t < 0.0)
      throw Error(ErrorCode::DomainError, "negative height at index " + std::to_string(i));
    if (positive_truth && t == 0.0)
      throw Error(ErrorCode::DomainError, "zero truth at index " + std::to_string(i));
  }
}

template <typename F>
double mean_of(std::span<const double> preds, std::span<const double> truths, F term) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < preds.size(); ++i) acc.add(term(preds[i], truths[i]));
  return acc.value() / static_cast<double>(preds.size());
}

bool within_threshold(double p, double t, double threshold) {
  // p == 0 gives an infinite ratio, which counts as a miss.
  return p > 0.0 && std::max(p / t, t / p) < threshold;
}

}  // namespace

double mae(std::span<const double> preds, std::span<const double> truths) {
  check_pairs(preds, truths, false);
  return mean_of(preds, truths, [](double p, double t) { return std::abs(p - t); });
}

double rmse(std::span<const double> preds, std::span<const double> truths) {
  check_pairs(preds, truths, false);
  return std::sqrt(mean_of(preds, truths, [](double p, double t) { return (p - t) * (p - t); }));
}

double msle(std::span<const double> preds, std::span<const double> truths) {
  check_pairs(preds, truths, false);
  return mean_of(preds, truths, [](double p, double t) {
    const double d = std::log1p(p) - std::log1p(t);
    return d * d;
  });
}

double mean_signed_difference(std::span<const double> preds, std::span<const double> truths) {
  check_pairs(preds, truths, false);
  return mean_of(preds, truths, [](double p, double t) { return p - t; });
}

double threshold_accuracy(std::span<const double> preds, std::span<const double> truths,
                          double threshold) {
  if (!(threshold > 1.0)) throw Error(ErrorCode::DomainError, "threshold must be > 1");
  check_pairs(preds, truths, true);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (within_threshold(preds[i], truths[i], threshold)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

RegressionReport regression_metrics(std::span<const double> preds, std::span<const double> truths,
                                    double threshold) {
  if (!(threshold > 1.0)) throw Error(ErrorCode::DomainError, "threshold must be > 1");
  check_pairs(preds, truths, true);

  CompensatedSum abs_err, sq_err, sq_log, signed_err;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double p = preds[i];
    const double t = truths[i];
    const double d = p - t;
    abs_err.add(std::abs(d));
    sq_err.add(d * d);
    signed_err.add(d);
    const double dl = std::log1p(p) - std::log1p(t);
    sq_log.add(dl * dl);
    if (within_threshold(p, t, threshold)) ++hits;
  }
  const auto n = static_cast<double>(preds.size());
  RegressionReport r;
  r.n = preds.size();
  r.mae = abs_err.value() / n;
  r.rmse = std::sqrt(sq_err.value() / n);
  r.msle = sq_log.value() / n;
  r.msd = signed_err.value() / n;
  r.delta = static_cast<double>(hits) / n;
  r.delta_threshold = threshold;
  return r;
}

ClassificationReport classification_metrics(std::span<const int> preds,
                                            std::span<const int> truths, int num_classes) {
  if (preds.size() != truths.size())
    throw Error(ErrorCode::LengthMismatch, std::to_string(preds.size()) + " predictions vs " +
                                               std::to_string(truths.size()) + " truths");
  if (preds.empty()) throw Error(ErrorCode::EmptyInput, "no prediction/truth pairs");
  if (num_classes <= 0) throw Error(ErrorCode::InvalidArgument, "num_classes must be > 0");

  const auto C = static_cast<std::size_t>(num_classes);
  ClassificationReport rep;
  rep.n = preds.size();
  rep.confusion.assign(C, std::vector<std::int64_t>(C, 0));
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int p = preds[i], t = truths[i];
    if (p < 0 || p >= num_classes || t < 0 || t >= num_classes)
      throw Error(ErrorCode::IndexOutOfRange,
                  "class index out of [0, " + std::to_string(num_classes) + ") at " +
                      std::to_string(i));
    ++rep.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
  }

  rep.per_class.resize(C);
  double f1_sum = 0.0, acc_sum = 0.0;
  for (std::size_t k = 0; k < C; ++k) {
    ClassStats& s = rep.per_class[k];
    s.tp = rep.confusion[k][k];
    for (std::size_t j = 0; j < C; ++j) {
      s.support += rep.confusion[k][j];
      if (j != k) {
        s.fn += rep.confusion[k][j];
        s.fp += rep.confusion[j][k];
      }
    }
    const std::int64_t denom = 2 * s.tp + s.fp + s.fn;
    s.f1 = denom == 0 ? 0.0 : 2.0 * static_cast<double>(s.tp) / static_cast<double>(denom);
    s.acc_defined = s.support > 0;
    s.acc = s.acc_defined ? static_cast<double>(s.tp) / static_cast<double>(s.support) : 0.0;
    f1_sum += s.f1;
    acc_sum += s.acc;
  }
  rep.macro_f1 = f1_sum / static_cast<double>(C);
  rep.macro_acc = acc_sum / static_cast<double>(C);
  return rep;
}

double checkpoint_score(double macro_f1, double delta) {
  if (!(macro_f1 >= 0.0 && macro_f1 <= 1.0) || !(delta >= 0.0 && delta <= 1.0))
    throw Error(ErrorCode::DomainError, "scores must lie in [0, 1]");
  return (macro_f1 + delta) / 2.0;
}

}  // namespace crownkit
