#include "enose/logistic.hpp"

#include "enose/error.hpp"
#include "enose/neural_net.hpp"
#include "json_eigen.hpp"

namespace enose {

LogisticModel::LogisticModel(Standardizer standardizer, Eigen::MatrixXd weights, Eigen::VectorXd bias)
    : standardizer_(std::move(standardizer)), weights_(std::move(weights)), bias_(std::move(bias)) {}

Eigen::VectorXd LogisticModel::predict_proba(const Eigen::VectorXd& x) const {
  return softmax(weights_ * standardizer_.apply(x) + bias_);
}

nlohmann::json LogisticModel::to_json() const {
  return {{"standardizer", standardizer_.to_json()},
          {"weights", detail::to_json(weights_)},
          {"bias", detail::to_json(bias_)}};
}

std::unique_ptr<Model> LogisticModel::from_json(const nlohmann::json& j) {
  auto s = Standardizer::from_json(j.at("standardizer"));
  Eigen::MatrixXd w = detail::matrix_from_json(j.at("weights"));
  Eigen::VectorXd b = detail::vector_from_json(j.at("bias"));
  if (w.cols() != s.mean.size() || w.rows() != b.size()) throw CorruptModel("logistic model shape mismatch");
  return std::make_unique<LogisticModel>(std::move(s), std::move(w), std::move(b));
}

std::unique_ptr<LogisticModel> fit_logistic(const Eigen::MatrixXd& x, std::span<const int> y, std::size_t classes,
                                            const LogisticParams& params) {
  const Eigen::Index n = x.rows();
  const auto c = static_cast<Eigen::Index>(classes);
  if (static_cast<std::size_t>(n) != y.size() || n == 0) throw DimensionMismatch("logistic: bad training shape");

  Standardizer s = Standardizer::fit(x);
  const Eigen::MatrixXd z = s.apply_rows(x);  // n x d
  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(n, c);
  for (Eigen::Index i = 0; i < n; ++i) onehot(i, y[static_cast<std::size_t>(i)]) = 1.0;

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(c, x.cols());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(c);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int it = 0; it < params.iterations; ++it) {
    Eigen::MatrixXd scores = (z * w.transpose()).rowwise() + b.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = scores.row(i).maxCoeff();
      scores.row(i) = (scores.row(i).array() - m).exp();
      scores.row(i) /= scores.row(i).sum();
    }
    const Eigen::MatrixXd residual = scores - onehot;
    const Eigen::MatrixXd gw = inv_n * residual.transpose() * z + params.l2 * w;
    const Eigen::VectorXd gb = inv_n * residual.colwise().sum().transpose();
    w -= params.learning_rate * gw;
    b -= params.learning_rate * gb;
  }
  return std::make_unique<LogisticModel>(std::move(s), std::move(w), std::move(b));
}

}  // namespace enose
