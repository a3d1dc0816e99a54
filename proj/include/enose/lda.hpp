#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <span>

namespace enose {

struct LdaModel {
  Eigen::VectorXd mean;          // overall mean of the fitted rows
  Eigen::MatrixXd directions;    // output_dim x input_dim
  Eigen::MatrixXd class_means;   // class_count x output_dim, in projected space

  std::size_t input_dim() const { return static_cast<std::size_t>(mean.size()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(directions.rows()); }
  Eigen::VectorXd project(const Eigen::VectorXd& x) const;

  nlohmann::json to_json() const;
  static LdaModel from_json(const nlohmann::json& j);
};

/// Fisher discriminant directions for `class_count` classes (targets in
/// [0, class_count)). Output dimension is min(class_count - 1, input dim).
/// Directions are scaled to unit pooled within-class variance.
///
/// The within-class scatter is whitened; if its condition number exceeds
/// 1e12 a ridge of 1e-6 * trace / d is added first.
/// Throws DegenerateData (a class with < 2 rows), SingularScatter (zero
/// within-class scatter) or BetweenScatterZero (identical class means).
LdaModel fit_lda(const Eigen::MatrixXd& rows, std::span<const int> targets, std::size_t class_count);

}  // namespace enose
