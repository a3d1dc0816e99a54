#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "enose/algorithm.hpp"
#include "enose/decision_tree.hpp"

namespace enose {

/// Bagged trees with per-split feature subsampling; probabilities are the
/// mean of the trees' leaf distributions.
class RandomForestModel final : public Model {
 public:
  RandomForestModel(std::size_t input_dim, std::size_t classes, std::vector<DecisionTreeModel> trees);
  std::string_view kind() const override { return "forest"; }
  std::size_t input_dim() const override { return input_dim_; }
  std::size_t class_count() const override { return classes_; }
  Eigen::VectorXd predict_proba(const Eigen::VectorXd& x) const override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<Model> from_json(const nlohmann::json& j);

  const std::vector<DecisionTreeModel>& trees() const { return trees_; }

 private:
  std::size_t input_dim_;
  std::size_t classes_;
  std::vector<DecisionTreeModel> trees_;
};

/// Tree t is grown from derive_seed(seed, t).
std::unique_ptr<RandomForestModel> fit_forest(const Eigen::MatrixXd& x, std::span<const int> y, std::size_t classes,
                                              const ForestParams& params, std::uint64_t seed);

/// SAMME boosting over weighted depth-1 stumps.
class AdaBoostModel final : public Model {
 public:
  AdaBoostModel(std::size_t input_dim, std::size_t classes, std::vector<DecisionTreeModel> stumps,
                std::vector<double> alphas);
  std::string_view kind() const override { return "adaboost"; }
  std::size_t input_dim() const override { return input_dim_; }
  std::size_t class_count() const override { return classes_; }
  Eigen::VectorXd predict_proba(const Eigen::VectorXd& x) const override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<Model> from_json(const nlohmann::json& j);

  std::size_t rounds() const { return stumps_.size(); }
  const std::vector<double>& alphas() const { return alphas_; }
  /// Vote scores using only the first `rounds` stumps.
  Eigen::VectorXd staged_scores(const Eigen::VectorXd& x, std::size_t rounds) const;
  /// Training-set error of the ensemble truncated after 1, 2, ... rounds.
  std::vector<double> staged_error(const Eigen::MatrixXd& x, std::span<const int> y) const;

 private:
  std::size_t input_dim_;
  std::size_t classes_;
  std::vector<DecisionTreeModel> stumps_;
  std::vector<double> alphas_;
};

/// Stops early on a perfect stump or one no better than chance.
std::unique_ptr<AdaBoostModel> fit_adaboost(const Eigen::MatrixXd& x, std::span<const int> y, std::size_t classes,
                                            const AdaBoostParams& params);

}  // namespace enose
