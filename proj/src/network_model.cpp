#include "enose/network_model.hpp"

#include "enose/error.hpp"
#include "enose/session.hpp"

namespace enose {

NetworkModel::NetworkModel(NeuralNet net, std::optional<Standardizer> standardizer)
    : net_(std::move(net)), standardizer_(std::move(standardizer)) {}

Eigen::VectorXd NetworkModel::predict_proba(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd in = standardizer_ ? standardizer_->apply(x) : x;
  return softmax(net_.logits(in).col(0));
}

nlohmann::json NetworkModel::to_json() const {
  nlohmann::json j{{"layers", net_.to_json()}};
  j["standardizer"] = standardizer_ ? standardizer_->to_json() : nlohmann::json(nullptr);
  return j;
}

std::unique_ptr<Model> NetworkModel::from_json(const nlohmann::json& j) {
  NeuralNet net = NeuralNet::from_json(j.at("layers"));
  std::optional<Standardizer> s;
  if (!j.at("standardizer").is_null()) {
    s = Standardizer::from_json(j.at("standardizer"));
    if (static_cast<std::size_t>(s->mean.size()) != net.input_size()) {
      throw CorruptModel("network standardizer size mismatch");
    }
  }
  return std::make_unique<NetworkModel>(std::move(net), std::move(s));
}

std::unique_ptr<NetworkModel> fit_mlp(const Eigen::MatrixXd& x, std::span<const int> y, std::size_t classes,
                                      const MlpParams& params, std::uint64_t seed) {
  std::optional<Standardizer> s;
  if (params.standardize_inputs) s = Standardizer::fit(x);
  NeuralNet net = build_mlp(static_cast<std::size_t>(x.cols()), classes, params);
  Rng rng(seed);
  net.initialize(rng);
  if (s) {
    train_sgd(net, s->apply_rows(x), y, params.sgd, rng);
  } else {
    train_sgd(net, x, y, params.sgd, rng);
  }
  return std::make_unique<NetworkModel>(std::move(net), std::move(s));
}

std::unique_ptr<NetworkModel> fit_cnn(const Eigen::MatrixXd& x, std::span<const int> y, std::size_t classes,
                                      const CnnParams& params, std::uint64_t seed) {
  if (static_cast<std::size_t>(x.cols()) != kPredictorCount) {
    throw DimensionMismatch("CNN expects the 40 raw predictors");
  }
  NeuralNet net = build_cnn(classes, params);
  Rng rng(seed);
  net.initialize(rng);
  train_sgd(net, x, y, params.sgd, rng);
  return std::make_unique<NetworkModel>(std::move(net), std::nullopt);
}

}  // namespace enose
