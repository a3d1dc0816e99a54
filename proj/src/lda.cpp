#include "enose/lda.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "enose/error.hpp"
#include "enose/pca.hpp"
#include "json_eigen.hpp"

namespace enose {

Eigen::VectorXd LdaModel::project(const Eigen::VectorXd& x) const { return directions * (x - mean); }

nlohmann::json LdaModel::to_json() const {
  return {{"mean", detail::to_json(mean)},
          {"directions", detail::to_json(directions)},
          {"class_means", detail::to_json(class_means)}};
}

LdaModel LdaModel::from_json(const nlohmann::json& j) {
  LdaModel m;
  m.mean = detail::vector_from_json(j.at("mean"));
  m.directions = detail::matrix_from_json(j.at("directions"));
  m.class_means = detail::matrix_from_json(j.at("class_means"));
  if (m.directions.cols() != m.mean.size() || m.class_means.cols() != m.directions.rows()) {
    throw CorruptModel("LDA model shape is inconsistent");
  }
  return m;
}

LdaModel fit_lda(const Eigen::MatrixXd& rows, std::span<const int> targets, std::size_t class_count) {
  const Eigen::Index n = rows.rows();
  const Eigen::Index d = rows.cols();
  const auto c = static_cast<Eigen::Index>(class_count);
  if (static_cast<std::size_t>(n) != targets.size()) {
    throw DimensionMismatch("LDA: row count and target count differ");
  }
  if (class_count < 2) throw InsufficientClasses("LDA needs at least 2 classes");

  std::vector<Eigen::Index> counts(class_count, 0);
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(c, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int t = targets[static_cast<std::size_t>(i)];
    if (t < 0 || t >= c) throw DimensionMismatch("LDA: target out of range");
    means.row(t) += rows.row(i);
    ++counts[static_cast<std::size_t>(t)];
  }
  for (Eigen::Index k = 0; k < c; ++k) {
    if (counts[static_cast<std::size_t>(k)] < 2) {
      throw DegenerateData("LDA: class " + std::to_string(k) + " has fewer than 2 rows");
    }
    means.row(k) /= static_cast<double>(counts[static_cast<std::size_t>(k)]);
  }
  const Eigen::VectorXd overall = rows.colwise().mean().transpose();

  Eigen::MatrixXd within = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd r = rows.row(i).transpose() - means.row(targets[static_cast<std::size_t>(i)]).transpose();
    within.noalias() += r * r.transpose();
  }
  Eigen::MatrixXd between = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index k = 0; k < c; ++k) {
    const Eigen::VectorXd diff = means.row(k).transpose() - overall;
    between.noalias() += static_cast<double>(counts[static_cast<std::size_t>(k)]) * diff * diff.transpose();
  }

  const double within_trace = within.trace();
  const double between_trace = between.trace();
  if (!(within_trace > 0.0)) throw SingularScatter("within-class scatter is zero");
  if (between_trace <= 1e-12 * (within_trace + between_trace)) {
    throw BetweenScatterZero("class means coincide; no separating direction exists");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ws(within);
  double lo = ws.eigenvalues()(0);
  const double hi = ws.eigenvalues()(d - 1);
  if (lo <= 0.0 || hi / lo > 1e12) {
    within.diagonal().array() += 1e-6 * within_trace / static_cast<double>(d);
    ws.compute(within);
    lo = ws.eigenvalues()(0);
    if (!(lo > 0.0)) throw SingularScatter("within-class scatter is singular even with ridge");
  }
  const Eigen::MatrixXd whiten =
      ws.eigenvectors() * ws.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
      ws.eigenvectors().transpose();

  const Eigen::MatrixXd symmetric = whiten * between * whiten;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> bs(0.5 * (symmetric + symmetric.transpose()));

  const Eigen::Index out_dim = std::min<Eigen::Index>(c - 1, d);
  const double scale = n > c ? std::sqrt(static_cast<double>(n - c)) : 1.0;
  LdaModel model;
  model.mean = overall;
  model.directions.resize(out_dim, d);
  for (Eigen::Index k = 0; k < out_dim; ++k) {
    Eigen::VectorXd w = whiten * bs.eigenvectors().col(d - 1 - k) * scale;
    canonicalize_sign(w);
    model.directions.row(k) = w.transpose();
  }
  model.class_means.resize(c, out_dim);
  for (Eigen::Index k = 0; k < c; ++k) {
    model.class_means.row(k) = model.project(means.row(k).transpose()).transpose();
  }
  return model;
}

}  // namespace enose
