#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <span>
#include <vector>

#include "enose/session.hpp"

namespace enose {

/// Statistics of a single data point used by the zero-centring rule.
struct NormalizationRecord {
  double mean = 0.0;
  double max = 0.0;
  double min = 0.0;
};

NormalizationRecord normalization_record(std::span<const double> values);

/// x'_i = (x_i - mean(x)) / (max(x) - min(x)), computed over the entries of
/// one vector. A constant vector maps to all zeros.
std::vector<double> normalize(std::span<const double> values);
FeatureVector normalize(const FeatureVector& v);

enum class NormalizationMode {
  PerVector,  // statistics of each data point (default)
  PerColumn,  // statistics of each predictor over the training rows
};

class Normalizer {
 public:
  static Normalizer per_vector();
  static Normalizer fit_per_column(const Eigen::MatrixXd& rows);

  NormalizationMode mode() const { return mode_; }
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& rows) const;

  nlohmann::json to_json() const;
  static Normalizer from_json(const nlohmann::json& j);

 private:
  NormalizationMode mode_ = NormalizationMode::PerVector;
  Eigen::VectorXd column_mean_;
  Eigen::VectorXd column_range_;
};

}  // namespace enose
