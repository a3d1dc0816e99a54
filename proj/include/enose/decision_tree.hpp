#pragma once

// CART classification tree with weighted Gini impurity.

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "enose/algorithm.hpp"
#include "enose/model.hpp"
#include "enose/random.hpp"

namespace enose {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;   // x[feature] <= threshold
  int right = -1;
  std::vector<double> distribution;  // leaves only
};

class DecisionTreeModel final : public Model {
 public:
  DecisionTreeModel(std::size_t input_dim, std::size_t classes, std::vector<TreeNode> nodes);
  std::string_view kind() const override { return "tree"; }
  std::size_t input_dim() const override { return input_dim_; }
  std::size_t class_count() const override { return classes_; }
  Eigen::VectorXd predict_proba(const Eigen::VectorXd& x) const override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<DecisionTreeModel> from_json(const nlohmann::json& j);

  /// Leaf class distribution reached by `x`.
  const std::vector<double>& leaf(const Eigen::VectorXd& x) const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t depth() const;

 private:
  std::size_t input_dim_;
  std::size_t classes_;
  std::vector<TreeNode> nodes_;
};

struct TreeFitOptions {
  int max_depth = -1;
  int min_samples_split = 2;
  /// Features examined per split; 0 means all. When fewer than all, a fresh
  /// random subset is drawn at each node from `rng`.
  std::size_t max_features = 0;
};

/// `weights` may be empty (uniform). Rows with zero weight still count
/// toward min_samples_split but do not affect impurity.
DecisionTreeModel fit_tree(const Eigen::MatrixXd& x, std::span<const int> y, std::span<const double> weights,
                           std::size_t classes, const TreeFitOptions& options, Rng* rng = nullptr);

}  // namespace enose
