#pragma once

// Confusion matrix and the summary metrics reported for every comparison:
// accuracy, macro F-1 and Cohen's kappa.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace enose {

/// Rows are actual classes, columns predicted.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<std::string> classes);
  /// Square count table; throws InvalidConfig when not square or mismatched.
  static ConfusionMatrix from_counts(std::vector<std::string> classes,
                                     const std::vector<std::vector<std::size_t>>& counts);

  const std::vector<std::string>& classes() const { return classes_; }
  std::size_t size() const { return classes_.size(); }
  std::size_t at(std::size_t actual, std::size_t predicted) const { return counts_[actual * size() + predicted]; }
  std::size_t total() const { return total_; }
  std::size_t row_sum(std::size_t actual) const;
  std::size_t col_sum(std::size_t predicted) const;
  std::size_t trace() const;

  void add(std::size_t actual, std::size_t predicted, std::size_t count = 1);
  /// Throws UnknownLabel for names outside the class list.
  void add(const std::string& actual, const std::string& predicted);
  /// Throws InvalidConfig when the class lists differ.
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  bool operator==(const ConfusionMatrix& other) const = default;

  std::size_t index_of(const std::string& label) const;
  /// The sub-matrix over classes with a nonzero row or column.
  ConfusionMatrix observed() const;

 private:
  std::vector<std::string> classes_;
  std::vector<std::size_t> counts_;
  std::size_t total_ = 0;
};

/// Throws LengthMismatch (including for empty input) and UnknownLabel.
ConfusionMatrix confusion(std::span<const std::string> actual, std::span<const std::string> predicted,
                          std::vector<std::string> classes);

/// trace / n; 0 for an empty matrix.
double accuracy(const ConfusionMatrix& cm);
/// 0/0 counts as 0 throughout.
double precision(const ConfusionMatrix& cm, std::size_t k);
double recall(const ConfusionMatrix& cm, std::size_t k);
double f1(const ConfusionMatrix& cm, std::size_t k);
/// Unweighted mean of per-class F-1 over every declared class.
double macro_f1(const ConfusionMatrix& cm);
/// (p_o - p_e) / (1 - p_e); when p_e = 1 it is 1 if p_o = 1, else 0.
double cohen_kappa(const ConfusionMatrix& cm);

struct MetricSummary {
  double accuracy = 0.0;
  double f1 = 0.0;
  double kappa = 0.0;
};

MetricSummary summarize(const ConfusionMatrix& cm);

}  // namespace enose
