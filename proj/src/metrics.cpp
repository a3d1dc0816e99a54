#include "enose/metrics.hpp"

#include <algorithm>

#include "enose/error.hpp"

namespace enose {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> classes)
    : classes_(std::move(classes)), counts_(classes_.size() * classes_.size(), 0) {}

ConfusionMatrix ConfusionMatrix::from_counts(std::vector<std::string> classes,
                                             const std::vector<std::vector<std::size_t>>& counts) {
  ConfusionMatrix cm(std::move(classes));
  if (counts.size() != cm.size()) throw InvalidConfig("count table does not match the class list");
  for (std::size_t a = 0; a < counts.size(); ++a) {
    if (counts[a].size() != cm.size()) throw InvalidConfig("count table is not square");
    for (std::size_t p = 0; p < counts[a].size(); ++p) cm.add(a, p, counts[a][p]);
  }
  return cm;
}

std::size_t ConfusionMatrix::row_sum(std::size_t actual) const {
  std::size_t s = 0;
  for (std::size_t p = 0; p < size(); ++p) s += at(actual, p);
  return s;
}

std::size_t ConfusionMatrix::col_sum(std::size_t predicted) const {
  std::size_t s = 0;
  for (std::size_t a = 0; a < size(); ++a) s += at(a, predicted);
  return s;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t s = 0;
  for (std::size_t k = 0; k < size(); ++k) s += at(k, k);
  return s;
}

void ConfusionMatrix::add(std::size_t actual, std::size_t predicted, std::size_t count) {
  if (actual >= size() || predicted >= size()) throw UnknownLabel("class index out of range");
  counts_[actual * size() + predicted] += count;
  total_ += count;
}

std::size_t ConfusionMatrix::index_of(const std::string& label) const {
  auto it = std::find(classes_.begin(), classes_.end(), label);
  if (it == classes_.end()) throw UnknownLabel("'" + label + "' is not in the declared class list");
  return static_cast<std::size_t>(it - classes_.begin());
}

void ConfusionMatrix::add(const std::string& actual, const std::string& predicted) {
  add(index_of(actual), index_of(predicted));
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (classes_ != other.classes_) throw InvalidConfig("cannot add confusion matrices over different classes");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  total_ += other.total_;
  return *this;
}

ConfusionMatrix confusion(std::span<const std::string> actual, std::span<const std::string> predicted,
                          std::vector<std::string> classes) {
  if (actual.size() != predicted.size()) {
    throw LengthMismatch("actual has " + std::to_string(actual.size()) + " entries, predicted has " +
                         std::to_string(predicted.size()));
  }
  if (actual.empty()) throw LengthMismatch("confusion matrix needs at least one pair");
  ConfusionMatrix cm(std::move(classes));
  for (std::size_t i = 0; i < actual.size(); ++i) cm.add(actual[i], predicted[i]);
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) return 0.0;
  return static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
}

double precision(const ConfusionMatrix& cm, std::size_t k) {
  const std::size_t col = cm.col_sum(k);
  return col == 0 ? 0.0 : static_cast<double>(cm.at(k, k)) / static_cast<double>(col);
}

double recall(const ConfusionMatrix& cm, std::size_t k) {
  const std::size_t row = cm.row_sum(k);
  return row == 0 ? 0.0 : static_cast<double>(cm.at(k, k)) / static_cast<double>(row);
}

double f1(const ConfusionMatrix& cm, std::size_t k) {
  const double p = precision(cm, k), r = recall(cm, k);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

ConfusionMatrix ConfusionMatrix::observed() const {
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < size(); ++k) {
    if (row_sum(k) > 0 || col_sum(k) > 0) keep.push_back(k);
  }
  std::vector<std::string> names;
  for (auto k : keep) names.push_back(classes_[k]);
  ConfusionMatrix out(std::move(names));
  for (std::size_t a = 0; a < keep.size(); ++a) {
    for (std::size_t p = 0; p < keep.size(); ++p) out.add(a, p, at(keep[a], keep[p]));
  }
  return out;
}

double macro_f1(const ConfusionMatrix& cm) {
  if (cm.size() == 0) return 0.0;
  double s = 0.0;
  for (std::size_t k = 0; k < cm.size(); ++k) s += f1(cm, k);
  return s / static_cast<double>(cm.size());
}

double cohen_kappa(const ConfusionMatrix& cm) {
  if (cm.total() == 0) return 0.0;
  const double n = static_cast<double>(cm.total());
  const double po = static_cast<double>(cm.trace()) / n;
  double pe = 0.0;
  for (std::size_t k = 0; k < cm.size(); ++k) {
    pe += static_cast<double>(cm.row_sum(k)) * static_cast<double>(cm.col_sum(k));
  }
  pe /= n * n;
  if (pe == 1.0) return po == 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1.0 - pe);
}

MetricSummary summarize(const ConfusionMatrix& cm) { return {accuracy(cm), macro_f1(cm), cohen_kappa(cm)}; }

}  // namespace enose
