#include "enose/pca.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "enose/error.hpp"
#include "json_eigen.hpp"

namespace enose {

void canonicalize_sign(Eigen::Ref<Eigen::VectorXd> v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

Eigen::VectorXd PcaModel::project(const Eigen::VectorXd& x) const {
  const auto k = static_cast<Eigen::Index>(retained_count);
  return components.topRows(k) * (x - mean);
}

Eigen::VectorXd PcaModel::reconstruct(const Eigen::VectorXd& coords) const {
  const auto k = static_cast<Eigen::Index>(retained_count);
  return mean + components.topRows(k).transpose() * coords;
}

double PcaModel::cumulative_variance_ratio(std::size_t count) const {
  const double total = eigenvalues.sum();
  if (total <= 0.0) return 1.0;
  count = std::min<std::size_t>(count, static_cast<std::size_t>(eigenvalues.size()));
  return eigenvalues.head(static_cast<Eigen::Index>(count)).sum() / total;
}

std::size_t PcaModel::rank() const {
  if (eigenvalues.size() == 0 || eigenvalues(0) <= 0.0) return 0;
  const double cutoff = eigenvalues(0) * 1e-10;
  std::size_t r = 0;
  while (r < static_cast<std::size_t>(eigenvalues.size()) &&
         eigenvalues(static_cast<Eigen::Index>(r)) > cutoff) {
    ++r;
  }
  return r;
}

nlohmann::json PcaModel::to_json() const {
  return {{"mean", detail::to_json(mean)},
          {"components", detail::to_json(components)},
          {"eigenvalues", detail::to_json(eigenvalues)},
          {"retained", retained_count}};
}

PcaModel PcaModel::from_json(const nlohmann::json& j) {
  PcaModel m;
  m.mean = detail::vector_from_json(j.at("mean"));
  m.components = detail::matrix_from_json(j.at("components"));
  m.eigenvalues = detail::vector_from_json(j.at("eigenvalues"));
  m.retained_count = j.at("retained").get<std::size_t>();
  if (m.components.cols() != m.mean.size() ||
      m.retained_count > static_cast<std::size_t>(m.components.rows())) {
    throw CorruptModel("PCA model shape is inconsistent");
  }
  return m;
}

PcaModel fit_pca(const Eigen::MatrixXd& rows, Retention retention) {
  const Eigen::Index n = rows.rows();
  const Eigen::Index d = rows.cols();
  if (n < 2) throw InvalidConfig("PCA needs at least 2 rows");
  if (d < 1) throw InvalidConfig("PCA needs at least one column");

  PcaModel model;
  model.mean = rows.colwise().mean().transpose();
  const Eigen::MatrixXd centered = rows.rowwise() - model.mean.transpose();
  if (centered.cwiseAbs().maxCoeff() == 0.0) {
    throw DegenerateData("all rows are identical; covariance is zero");
  }
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw DegenerateData("covariance eigensolver failed");

  // Eigen returns ascending order.
  model.eigenvalues = solver.eigenvalues().reverse().cwiseMax(0.0);
  model.components.resize(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    Eigen::VectorXd v = solver.eigenvectors().col(d - 1 - k);
    canonicalize_sign(v);
    model.components.row(k) = v.transpose();
  }

  if (const auto* fraction = std::get_if<VarianceFraction>(&retention)) {
    if (!(fraction->value > 0.0 && fraction->value <= 1.0)) {
      throw InvalidConfig("retained variance fraction must be in (0, 1]");
    }
    std::size_t k = 1;
    while (k < static_cast<std::size_t>(d) &&
           model.cumulative_variance_ratio(k) < fraction->value - 1e-12) {
      ++k;
    }
    model.retained_count = k;
  } else {
    const std::size_t count = std::get<ComponentCount>(retention).value;
    if (count < 1 || count > static_cast<std::size_t>(d)) {
      throw InvalidConfig("retained component count must be in [1, " + std::to_string(d) + "]");
    }
    model.retained_count = count;
  }
  return model;
}

}  // namespace enose
