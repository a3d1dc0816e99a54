#pragma once

#include <cstdint>
#include <memory>
#include <span>

#include "enose/algorithm.hpp"
#include "enose/model.hpp"

namespace enose {

/// Multinomial logistic regression on z-scored inputs.
class LogisticModel final : public Model {
 public:
  LogisticModel(Standardizer standardizer, Eigen::MatrixXd weights, Eigen::VectorXd bias);
  std::string_view kind() const override { return "logistic"; }
  std::size_t input_dim() const override { return static_cast<std::size_t>(weights_.cols()); }
  std::size_t class_count() const override { return static_cast<std::size_t>(weights_.rows()); }
  Eigen::VectorXd predict_proba(const Eigen::VectorXd& x) const override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<Model> from_json(const nlohmann::json& j);

 private:
  Standardizer standardizer_;
  Eigen::MatrixXd weights_;  // classes x inputs
  Eigen::VectorXd bias_;
};

/// Full-batch gradient descent on mean cross-entropy + l2/2 |W|^2.
std::unique_ptr<LogisticModel> fit_logistic(const Eigen::MatrixXd& x, std::span<const int> y, std::size_t classes,
                                            const LogisticParams& params);

}  // namespace enose
