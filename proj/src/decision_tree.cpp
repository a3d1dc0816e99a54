#include "enose/decision_tree.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

#include "enose/error.hpp"

namespace enose {

DecisionTreeModel::DecisionTreeModel(std::size_t input_dim, std::size_t classes, std::vector<TreeNode> nodes)
    : input_dim_(input_dim), classes_(classes), nodes_(std::move(nodes)) {}

const std::vector<double>& DecisionTreeModel::leaf(const Eigen::VectorXd& x) const {
  std::size_t i = 0;
  while (nodes_[i].feature >= 0) {
    const TreeNode& n = nodes_[i];
    i = static_cast<std::size_t>(x(n.feature) <= n.threshold ? n.left : n.right);
  }
  return nodes_[i].distribution;
}

Eigen::VectorXd DecisionTreeModel::predict_proba(const Eigen::VectorXd& x) const {
  const auto& d = leaf(x);
  return Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size()));
}

std::size_t DecisionTreeModel::depth() const {
  std::vector<std::size_t> level(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (nodes_[i].feature >= 0) {
      level[static_cast<std::size_t>(nodes_[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes_[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

nlohmann::json DecisionTreeModel::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : nodes_) {
    if (n.feature < 0) {
      nodes.push_back({{"leaf", n.distribution}});
    } else {
      nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
    }
  }
  return {{"input_dim", input_dim_}, {"classes", classes_}, {"nodes", std::move(nodes)}};
}

std::unique_ptr<DecisionTreeModel> DecisionTreeModel::from_json(const nlohmann::json& j) {
  const auto dim = j.at("input_dim").get<std::size_t>();
  const auto classes = j.at("classes").get<std::size_t>();
  std::vector<TreeNode> nodes;
  const auto& arr = j.at("nodes");
  const int count = static_cast<int>(arr.size());
  for (const auto& nj : arr) {
    TreeNode n;
    if (nj.contains("leaf")) {
      n.distribution = nj.at("leaf").get<std::vector<double>>();
      if (n.distribution.size() != classes) throw CorruptModel("tree leaf has wrong class count");
    } else {
      n.feature = nj.at("feature").get<int>();
      n.threshold = nj.at("threshold").get<double>();
      n.left = nj.at("left").get<int>();
      n.right = nj.at("right").get<int>();
      // Children always follow their parent, so this also rules out cycles.
      const int self = static_cast<int>(nodes.size());
      if (n.feature >= static_cast<int>(dim) || n.left <= self || n.right <= self || n.left >= count ||
          n.right >= count) {
        throw CorruptModel("tree node references are invalid");
      }
    }
    nodes.push_back(std::move(n));
  }
  if (nodes.empty()) throw CorruptModel("tree has no nodes");
  return std::make_unique<DecisionTreeModel>(dim, classes, std::move(nodes));
}

namespace {

double gini_mass(const std::vector<double>& totals, double mass) {
  if (mass <= 0.0) return 0.0;
  double sq = 0.0;
  for (double t : totals) sq += t * t;
  return mass - sq / mass;  // mass * (1 - sum p^2)
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, std::span<const int> y, std::span<const double> w, std::size_t classes,
              const TreeFitOptions& options, Rng* rng)
      : x_(x), y_(y), w_(w), classes_(classes), options_(options), rng_(rng) {}

  std::vector<TreeNode> build() {
    std::vector<std::size_t> all(static_cast<std::size_t>(x_.rows()));
    std::iota(all.begin(), all.end(), 0);
    struct Task {
      std::vector<std::size_t> rows;
      int depth;
      int node;
    };
    nodes_.emplace_back();
    std::vector<Task> stack;
    stack.push_back({std::move(all), 0, 0});
    // Depth-first with the left child popped first keeps node ids in preorder.
    while (!stack.empty()) {
      Task t = std::move(stack.back());
      stack.pop_back();
      std::vector<double> totals = class_totals(t.rows);
      const double mass = std::accumulate(totals.begin(), totals.end(), 0.0);
      std::size_t nonzero = 0;
      for (double v : totals) nonzero += v > 0.0 ? 1 : 0;

      const bool depth_ok = options_.max_depth < 0 || t.depth < options_.max_depth;
      const bool size_ok = t.rows.size() >= static_cast<std::size_t>(std::max(2, options_.min_samples_split));
      std::optional<Split> split;
      if (depth_ok && size_ok && nonzero > 1) split = best_split(t.rows, totals, mass);
      if (!split) {
        make_leaf(t.node, totals, mass);
        continue;
      }
      std::vector<std::size_t> left, right;
      for (std::size_t r : t.rows) {
        (x_(static_cast<Eigen::Index>(r), split->feature) <= split->threshold ? left : right).push_back(r);
      }
      const int l = static_cast<int>(nodes_.size());
      nodes_.emplace_back();
      const int rn = static_cast<int>(nodes_.size());
      nodes_.emplace_back();
      TreeNode& node = nodes_[static_cast<std::size_t>(t.node)];
      node.feature = split->feature;
      node.threshold = split->threshold;
      node.left = l;
      node.right = rn;
      stack.push_back({std::move(right), t.depth + 1, rn});
      stack.push_back({std::move(left), t.depth + 1, l});
    }
    return std::move(nodes_);
  }

 private:
  double weight(std::size_t r) const { return w_.empty() ? 1.0 : w_[r]; }

  std::vector<double> class_totals(const std::vector<std::size_t>& rows) const {
    std::vector<double> totals(classes_, 0.0);
    for (std::size_t r : rows) totals[static_cast<std::size_t>(y_[r])] += weight(r);
    return totals;
  }

  void make_leaf(int id, std::vector<double> totals, double mass) {
    if (mass > 0.0) {
      for (double& v : totals) v /= mass;
    } else {
      std::fill(totals.begin(), totals.end(), 1.0 / static_cast<double>(classes_));
    }
    nodes_[static_cast<std::size_t>(id)].distribution = std::move(totals);
  }

  std::vector<int> feature_order() {
    const auto d = static_cast<int>(x_.cols());
    std::vector<int> f(static_cast<std::size_t>(d));
    std::iota(f.begin(), f.end(), 0);
    if (options_.max_features > 0 && options_.max_features < f.size() && rng_ != nullptr) {
      std::shuffle(f.begin(), f.end(), *rng_);
      // Sorted within the sampled prefix so ties still favour the lowest feature.
      std::sort(f.begin(), f.begin() + static_cast<std::ptrdiff_t>(options_.max_features));
    }
    return f;
  }

  std::optional<Split> best_split(const std::vector<std::size_t>& rows, const std::vector<double>& totals,
                                  double mass) {
    const std::vector<int> order = feature_order();
    const std::size_t budget =
        options_.max_features > 0 ? std::min(options_.max_features, order.size()) : order.size();
    std::optional<Split> best;
    std::vector<std::size_t> sorted = rows;
    std::vector<double> left(classes_), right(classes_);
    for (std::size_t k = 0; k < order.size(); ++k) {
      // Past the sampled budget, keep looking only until some valid split exists.
      if (k >= budget && best) break;
      const int f = order[k];
      std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        return x_(static_cast<Eigen::Index>(a), f) < x_(static_cast<Eigen::Index>(b), f);
      });
      std::fill(left.begin(), left.end(), 0.0);
      right = totals;
      double lmass = 0.0;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        const std::size_t r = sorted[i];
        const double wr = weight(r);
        left[static_cast<std::size_t>(y_[r])] += wr;
        right[static_cast<std::size_t>(y_[r])] -= wr;
        lmass += wr;
        const double a = x_(static_cast<Eigen::Index>(r), f);
        const double b = x_(static_cast<Eigen::Index>(sorted[i + 1]), f);
        if (!(a < b)) continue;
        const double impurity = gini_mass(left, lmass) + gini_mass(right, mass - lmass);
        if (!best || impurity < best->impurity - 1e-12 * std::max(1.0, mass)) {
          double threshold = a + (b - a) / 2.0;
          if (!(threshold < b)) threshold = a;
          best = Split{f, threshold, impurity};
        }
      }
    }
    return best;
  }

  const Eigen::MatrixXd& x_;
  std::span<const int> y_;
  std::span<const double> w_;
  std::size_t classes_;
  TreeFitOptions options_;
  Rng* rng_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

DecisionTreeModel fit_tree(const Eigen::MatrixXd& x, std::span<const int> y, std::span<const double> weights,
                           std::size_t classes, const TreeFitOptions& options, Rng* rng) {
  if (static_cast<std::size_t>(x.rows()) != y.size() || (!weights.empty() && weights.size() != y.size())) {
    throw DimensionMismatch("tree: rows, targets and weights differ in length");
  }
  if (x.rows() == 0) throw DegenerateData("tree: no training rows");
  TreeBuilder builder(x, y, weights, classes, options, rng);
  return DecisionTreeModel(static_cast<std::size_t>(x.cols()), classes, builder.build());
}

}  // namespace enose
