#pragma once

// Algorithm families and their hyperparameters.

#include <json.hpp>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "enose/projection.hpp"

namespace enose {

enum class Algorithm { LogisticRegression, Mlp, Cnn, DecisionTree, RandomForest, AdaBoost, Svm };

enum class Preprocessing {
  WithProjection,  // normalize -> PCA -> LDA, fitted on the training rows
  Raw,             // the 40 raw predictors, no normalization at all
};

/// Mini-batch gradient descent with classical momentum.
struct SgdParams {
  int epochs = 50;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  double gradient_clip = 5.0;  // global L2 norm; <= 0 disables clipping
};

struct LogisticParams {
  double l2 = 1e-4;
  double learning_rate = 0.1;
  int iterations = 500;
};

/// Fully connected net: [Dense(h) -> ReLU] per hidden width, with a dropout
/// layer after the first hidden block, then a linear layer to class logits.
struct MlpParams {
  std::vector<int> hidden{64, 64};
  double dropout = 0.5;
  bool standardize_inputs = false;  // z-score inputs with training-row statistics
  SgdParams sgd{};
};

/// 1x4x10 grid -> conv 2x2 -> ReLU -> max-pool 1x3 -> conv 2x2 -> ReLU ->
/// flatten -> dropout -> Dense(dense_units) -> ReLU -> logits (valid padding).
struct CnnParams {
  int conv1_filters = 4;
  int conv2_filters = 16;
  int dense_units = 16;
  double dropout = 0.5;
  SgdParams sgd{};
};

struct TreeParams {
  int max_depth = -1;  // < 0: unlimited; 0: a single leaf
  int min_samples_split = 2;
};

struct ForestParams {
  int trees = 100;
  int max_depth = -1;
  int min_samples_split = 2;
};

struct AdaBoostParams {
  int rounds = 50;
};

enum class SvmKernel { Rbf, Linear };

struct SvmParams {
  double c = 1.0;
  SvmKernel kernel = SvmKernel::Rbf;
  double gamma = 0.0;  // <= 0: 1 / (d * var(X))
  double tolerance = 1e-3;
  int max_iterations = 200000;
};

// Alternative order follows the Algorithm enum.
using Hyperparameters = std::variant<LogisticParams, MlpParams, CnnParams, TreeParams, ForestParams,
                                     AdaBoostParams, SvmParams>;

struct AlgorithmSpec {
  Hyperparameters params;
  Preprocessing preprocessing = Preprocessing::WithProjection;
  ProjectionOptions projection{};

  Algorithm algorithm() const { return static_cast<Algorithm>(params.index()); }

  /// Defaults for `algorithm`. CNNs are always Raw.
  static AlgorithmSpec make(Algorithm algorithm, Preprocessing preprocessing = Preprocessing::WithProjection);

  /// Throws InvalidHyperparameter.
  void validate() const;

  /// Short CLI key such as "rf" or "mlp-raw".
  std::string key() const;
  /// Report row name such as "Random Forest" or "MLP (no preprocessing)".
  std::string display_name() const;

  nlohmann::json to_json() const;
  static AlgorithmSpec from_json(const nlohmann::json& j);
};

/// Keys: lr, mlp, cnn, dt, rf, ada, svm, optionally suffixed "-raw".
/// Throws InvalidConfig for anything else.
AlgorithmSpec parse_algorithm_spec(std::string_view key);

/// The seven comparison rows: MLP (raw), CNN (raw), MLP, Random Forest, SVM,
/// AdaBoost and logistic regression.
std::vector<AlgorithmSpec> paper_candidates();
/// paper_candidates() plus the single decision tree.
std::vector<AlgorithmSpec> all_candidates();
/// "all", "paper", or a comma-separated list of keys.
std::vector<AlgorithmSpec> parse_candidates(std::string_view list);

/// Stage-3 freshness network: two hidden layers of 16, no dropout, with
/// input standardization.
MlpParams freshness_net_params();

std::string_view algorithm_key(Algorithm algorithm);

}  // namespace enose
