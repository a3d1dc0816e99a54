#include "enose/model.hpp"

#include "enose/decision_tree.hpp"
#include "enose/ensembles.hpp"
#include "enose/error.hpp"
#include "enose/logistic.hpp"
#include "enose/network_model.hpp"
#include "enose/svm.hpp"
#include "json_eigen.hpp"

namespace enose {

ConstantModel::ConstantModel(std::size_t input_dim, std::size_t classes, std::size_t index)
    : input_dim_(input_dim), classes_(classes), index_(index) {
  if (index >= classes) throw InvalidConfig("constant model index out of range");
}

Eigen::VectorXd ConstantModel::predict_proba(const Eigen::VectorXd& /*x*/) const {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(classes_));
  p(static_cast<Eigen::Index>(index_)) = 1.0;
  return p;
}

nlohmann::json ConstantModel::to_json() const {
  return {{"input_dim", input_dim_}, {"classes", classes_}, {"index", index_}};
}

std::unique_ptr<Model> ConstantModel::from_json(const nlohmann::json& j) {
  const auto classes = j.at("classes").get<std::size_t>();
  const auto index = j.at("index").get<std::size_t>();
  if (index >= classes) throw CorruptModel("constant model index out of range");
  return std::make_unique<ConstantModel>(j.at("input_dim").get<std::size_t>(), classes, index);
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
  Standardizer s;
  s.mean = x.colwise().mean().transpose();
  s.scale = Eigen::VectorXd::Ones(x.cols());
  if (x.rows() > 1) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double var = (x.col(c).array() - s.mean(c)).square().sum() / static_cast<double>(x.rows() - 1);
      if (var > 0.0) s.scale(c) = std::sqrt(var);
    }
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply_rows(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd out = x.rowwise() - mean.transpose();
  return out.array().rowwise() / scale.transpose().array();
}

nlohmann::json Standardizer::to_json() const {
  return {{"mean", detail::to_json(mean)}, {"scale", detail::to_json(scale)}};
}

Standardizer Standardizer::from_json(const nlohmann::json& j) {
  Standardizer s;
  s.mean = detail::vector_from_json(j.at("mean"));
  s.scale = detail::vector_from_json(j.at("scale"));
  if (s.mean.size() != s.scale.size()) throw CorruptModel("standardizer shape mismatch");
  return s;
}

nlohmann::json model_to_json(const Model& model) {
  return {{"kind", model.kind()}, {"params", model.to_json()}};
}

std::unique_ptr<Model> model_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const auto& p = j.at("params");
  if (kind == "constant") return ConstantModel::from_json(p);
  if (kind == "logistic") return LogisticModel::from_json(p);
  if (kind == "network") return NetworkModel::from_json(p);
  if (kind == "tree") return DecisionTreeModel::from_json(p);
  if (kind == "forest") return RandomForestModel::from_json(p);
  if (kind == "adaboost") return AdaBoostModel::from_json(p);
  if (kind == "svm") return SvmModel::from_json(p);
  throw CorruptModel("unknown model kind '" + kind + "'");
}

}  // namespace enose
