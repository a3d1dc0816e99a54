#include "enose/ensembles.hpp"

#include <cmath>

#include "enose/error.hpp"
#include "enose/random.hpp"

namespace enose {
namespace {

std::size_t argmax(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

std::vector<DecisionTreeModel> trees_from_json(const nlohmann::json& arr, std::size_t dim, std::size_t classes) {
  std::vector<DecisionTreeModel> trees;
  for (const auto& tj : arr) {
    auto t = DecisionTreeModel::from_json(tj);
    if (t->input_dim() != dim || t->class_count() != classes) throw CorruptModel("ensemble member shape mismatch");
    trees.push_back(std::move(*t));
  }
  if (trees.empty()) throw CorruptModel("ensemble has no members");
  return trees;
}

}  // namespace

RandomForestModel::RandomForestModel(std::size_t input_dim, std::size_t classes, std::vector<DecisionTreeModel> trees)
    : input_dim_(input_dim), classes_(classes), trees_(std::move(trees)) {}

Eigen::VectorXd RandomForestModel::predict_proba(const Eigen::VectorXd& x) const {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(classes_));
  for (const auto& t : trees_) p += t.predict_proba(x);
  return p / static_cast<double>(trees_.size());
}

nlohmann::json RandomForestModel::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : trees_) trees.push_back(t.to_json());
  return {{"input_dim", input_dim_}, {"classes", classes_}, {"trees", std::move(trees)}};
}

std::unique_ptr<Model> RandomForestModel::from_json(const nlohmann::json& j) {
  const auto dim = j.at("input_dim").get<std::size_t>();
  const auto classes = j.at("classes").get<std::size_t>();
  return std::make_unique<RandomForestModel>(dim, classes, trees_from_json(j.at("trees"), dim, classes));
}

std::unique_ptr<RandomForestModel> fit_forest(const Eigen::MatrixXd& x, std::span<const int> y, std::size_t classes,
                                              const ForestParams& params, std::uint64_t seed) {
  const Eigen::Index n = x.rows();
  if (n == 0 || static_cast<std::size_t>(n) != y.size()) throw DimensionMismatch("forest: bad training shape");
  TreeFitOptions options;
  options.max_depth = params.max_depth;
  options.min_samples_split = params.min_samples_split;
  options.max_features =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(x.cols()))));

  std::vector<DecisionTreeModel> trees;
  trees.reserve(static_cast<std::size_t>(params.trees));
  Eigen::MatrixXd bx(n, x.cols());
  std::vector<int> by(static_cast<std::size_t>(n));
  for (int t = 0; t < params.trees; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index r = pick(rng);
      bx.row(i) = x.row(r);
      by[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(r)];
    }
    trees.push_back(fit_tree(bx, by, {}, classes, options, &rng));
  }
  return std::make_unique<RandomForestModel>(static_cast<std::size_t>(x.cols()), classes, std::move(trees));
}

AdaBoostModel::AdaBoostModel(std::size_t input_dim, std::size_t classes, std::vector<DecisionTreeModel> stumps,
                             std::vector<double> alphas)
    : input_dim_(input_dim), classes_(classes), stumps_(std::move(stumps)), alphas_(std::move(alphas)) {}

Eigen::VectorXd AdaBoostModel::staged_scores(const Eigen::VectorXd& x, std::size_t rounds) const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(classes_));
  for (std::size_t m = 0; m < std::min(rounds, stumps_.size()); ++m) {
    s(static_cast<Eigen::Index>(argmax(stumps_[m].leaf(x)))) += alphas_[m];
  }
  return s;
}

Eigen::VectorXd AdaBoostModel::predict_proba(const Eigen::VectorXd& x) const {
  double total = 0.0;
  for (double a : alphas_) total += a;
  Eigen::VectorXd s = staged_scores(x, stumps_.size()) / total;
  if (classes_ > 1) s /= static_cast<double>(classes_ - 1);
  s = (s.array() - s.maxCoeff()).exp();
  return s / s.sum();
}

std::vector<double> AdaBoostModel::staged_error(const Eigen::MatrixXd& x, std::span<const int> y) const {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(classes_));
  std::vector<double> errors;
  for (std::size_t m = 0; m < stumps_.size(); ++m) {
    std::size_t wrong = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd row = x.row(i).transpose();
      scores(i, static_cast<Eigen::Index>(argmax(stumps_[m].leaf(row)))) += alphas_[m];
      Eigen::Index best = 0;
      for (Eigen::Index k = 1; k < scores.cols(); ++k) {
        if (scores(i, k) > scores(i, best)) best = k;
      }
      if (best != y[static_cast<std::size_t>(i)]) ++wrong;
    }
    errors.push_back(static_cast<double>(wrong) / static_cast<double>(n));
  }
  return errors;
}

nlohmann::json AdaBoostModel::to_json() const {
  nlohmann::json stumps = nlohmann::json::array();
  for (const auto& t : stumps_) stumps.push_back(t.to_json());
  return {{"input_dim", input_dim_}, {"classes", classes_}, {"alphas", alphas_}, {"stumps", std::move(stumps)}};
}

std::unique_ptr<Model> AdaBoostModel::from_json(const nlohmann::json& j) {
  const auto dim = j.at("input_dim").get<std::size_t>();
  const auto classes = j.at("classes").get<std::size_t>();
  auto stumps = trees_from_json(j.at("stumps"), dim, classes);
  auto alphas = j.at("alphas").get<std::vector<double>>();
  if (alphas.size() != stumps.size()) throw CorruptModel("adaboost alpha count mismatch");
  return std::make_unique<AdaBoostModel>(dim, classes, std::move(stumps), std::move(alphas));
}

std::unique_ptr<AdaBoostModel> fit_adaboost(const Eigen::MatrixXd& x, std::span<const int> y, std::size_t classes,
                                            const AdaBoostParams& params) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (n == 0 || n != y.size()) throw DimensionMismatch("adaboost: bad training shape");
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  const TreeFitOptions stump{1, 2, 0};
  const double chance = 1.0 - 1.0 / static_cast<double>(classes);

  std::vector<DecisionTreeModel> stumps;
  std::vector<double> alphas;
  std::vector<char> miss(n);
  for (int round = 0; round < params.rounds; ++round) {
    DecisionTreeModel h = fit_tree(x, y, w, classes, stump);
    double err = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::VectorXd row = x.row(static_cast<Eigen::Index>(i)).transpose();
      miss[i] = static_cast<int>(argmax(h.leaf(row))) != y[i];
      total += w[i];
      if (miss[i]) err += w[i];
    }
    err /= total;
    if (err <= 0.0) {
      stumps.push_back(std::move(h));
      alphas.push_back(1.0);
      break;
    }
    if (err >= chance) {
      if (stumps.empty()) {
        stumps.push_back(std::move(h));
        alphas.push_back(1.0);
      }
      break;
    }
    const double alpha = std::log((1.0 - err) / err) + std::log(static_cast<double>(classes) - 1.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (miss[i]) w[i] *= std::exp(alpha);
      sum += w[i];
    }
    for (double& wi : w) wi /= sum;
    stumps.push_back(std::move(h));
    alphas.push_back(alpha);
  }
  return std::make_unique<AdaBoostModel>(static_cast<std::size_t>(x.cols()), classes, std::move(stumps),
                                         std::move(alphas));
}

}  // namespace enose
