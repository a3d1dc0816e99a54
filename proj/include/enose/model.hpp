#pragma once

// Common interface of the fitted classifiers. Inputs are already in the
// space the model was trained on (projected or raw).

#include <Eigen/Dense>
#include <json.hpp>
#include <memory>
#include <string_view>

namespace enose {

class Model {
 public:
  virtual ~Model() = default;
  /// Stable tag stored in model files, e.g. "forest".
  virtual std::string_view kind() const = 0;
  virtual std::size_t input_dim() const = 0;
  virtual std::size_t class_count() const = 0;
  /// A probability vector of length class_count().
  virtual Eigen::VectorXd predict_proba(const Eigen::VectorXd& x) const = 0;
  /// Parameters only; the kind tag is added by the caller.
  virtual nlohmann::json to_json() const = 0;
};

/// Rebuilds a model from {"kind": ..., "params": ...}. Throws CorruptModel.
std::unique_ptr<Model> model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const Model& model);

/// Always predicts one class with probability 1. Used for degenerate branches.
class ConstantModel final : public Model {
 public:
  ConstantModel(std::size_t input_dim, std::size_t classes, std::size_t index);
  std::string_view kind() const override { return "constant"; }
  std::size_t input_dim() const override { return input_dim_; }
  std::size_t class_count() const override { return classes_; }
  std::size_t index() const { return index_; }
  Eigen::VectorXd predict_proba(const Eigen::VectorXd& x) const override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<Model> from_json(const nlohmann::json& j);

 private:
  std::size_t input_dim_;
  std::size_t classes_;
  std::size_t index_;
};

/// Column z-scoring with training statistics; zero-variance columns get scale 1.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& x);
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const { return (v - mean).cwiseQuotient(scale); }
  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& x) const;
  nlohmann::json to_json() const;
  static Standardizer from_json(const nlohmann::json& j);
};

}  // namespace enose
