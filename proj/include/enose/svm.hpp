#pragma once

// One-vs-rest C-SVM trained with SMO (maximal violating pair selection).

#include <cstdint>
#include <memory>
#include <span>

#include "enose/algorithm.hpp"
#include "enose/model.hpp"

namespace enose {

class SvmModel final : public Model {
 public:
  /// `coefficients` is support x classes holding alpha_i * y_i for each
  /// binary problem; `rho` holds one offset per class.
  SvmModel(SvmKernel kernel, double gamma, Eigen::MatrixXd support, Eigen::MatrixXd coefficients,
           Eigen::VectorXd rho);
  std::string_view kind() const override { return "svm"; }
  std::size_t input_dim() const override { return static_cast<std::size_t>(support_.cols()); }
  std::size_t class_count() const override { return static_cast<std::size_t>(rho_.size()); }
  /// Softmax over decision values; not calibrated.
  Eigen::VectorXd predict_proba(const Eigen::VectorXd& x) const override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<Model> from_json(const nlohmann::json& j);

  /// f_k(x) = sum_i coef_ik K(s_i, x) - rho_k.
  Eigen::VectorXd decision_values(const Eigen::VectorXd& x) const;
  double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

  double gamma() const { return gamma_; }
  const Eigen::MatrixXd& support_vectors() const { return support_; }
  const Eigen::MatrixXd& coefficients() const { return coef_; }
  const Eigen::VectorXd& rho() const { return rho_; }

 private:
  SvmKernel kernel_;
  double gamma_;
  Eigen::MatrixXd support_;  // support x inputs
  Eigen::MatrixXd coef_;
  Eigen::VectorXd rho_;
};

/// Resolves gamma <= 0 to 1 / (d * var(x)) over all entries of `x`.
double svm_auto_gamma(const Eigen::MatrixXd& x);

/// A class without rows gets a constant decision value of -1.
std::unique_ptr<SvmModel> fit_svm(const Eigen::MatrixXd& x, std::span<const int> y, std::size_t classes,
                                  const SvmParams& params);

}  // namespace enose
