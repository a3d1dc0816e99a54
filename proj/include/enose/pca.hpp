#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <json.hpp>
#include <variant>

namespace enose {

struct VarianceFraction {
  double value = 0.95;
};
struct ComponentCount {
  std::size_t value = 0;
};
/// How many principal components to keep.
using Retention = std::variant<VarianceFraction, ComponentCount>;

struct PcaModel {
  Eigen::VectorXd mean;
  /// All d components as rows, ordered by decreasing eigenvalue. The first
  /// non-negligible coordinate of each row is positive.
  Eigen::MatrixXd components;
  Eigen::VectorXd eigenvalues;  // sample-covariance variances, nonincreasing, >= 0
  std::size_t retained_count = 0;

  std::size_t input_dim() const { return static_cast<std::size_t>(mean.size()); }
  /// Coordinates on the retained components.
  Eigen::VectorXd project(const Eigen::VectorXd& x) const;
  /// Inverse of project on the retained subspace.
  Eigen::VectorXd reconstruct(const Eigen::VectorXd& coords) const;
  /// Fraction of total variance covered by the first `count` components.
  double cumulative_variance_ratio(std::size_t count) const;
  /// Number of components with eigenvalue above a relative tolerance.
  std::size_t rank() const;

  nlohmann::json to_json() const;
  static PcaModel from_json(const nlohmann::json& j);
};

/// Eigendecomposition of the sample covariance of `rows` (n x d).
/// Throws InvalidConfig for n < 2 or a bad retention, DegenerateData when
/// every row is identical.
PcaModel fit_pca(const Eigen::MatrixXd& rows, Retention retention = VarianceFraction{});

/// Flips `v` so its first coordinate with |v_i| > 1e-12 is positive.
void canonicalize_sign(Eigen::Ref<Eigen::VectorXd> v);

}  // namespace enose
