#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>

#include "enose/algorithm.hpp"
#include "enose/model.hpp"
#include "enose/neural_net.hpp"

namespace enose {

/// A trained MLP or CNN, optionally behind a column standardizer.
class NetworkModel final : public Model {
 public:
  NetworkModel(NeuralNet net, std::optional<Standardizer> standardizer);
  std::string_view kind() const override { return "network"; }
  std::size_t input_dim() const override { return net_.input_size(); }
  std::size_t class_count() const override { return net_.output_size(); }
  Eigen::VectorXd predict_proba(const Eigen::VectorXd& x) const override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<Model> from_json(const nlohmann::json& j);

  const NeuralNet& net() const { return net_; }

 private:
  NeuralNet net_;
  std::optional<Standardizer> standardizer_;
};

std::unique_ptr<NetworkModel> fit_mlp(const Eigen::MatrixXd& x, std::span<const int> y, std::size_t classes,
                                      const MlpParams& params, std::uint64_t seed);
/// `x` must hold raw 40-column rows.
std::unique_ptr<NetworkModel> fit_cnn(const Eigen::MatrixXd& x, std::span<const int> y, std::size_t classes,
                                      const CnnParams& params, std::uint64_t seed);

}  // namespace enose
