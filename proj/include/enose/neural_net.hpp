#pragma once

// Minimal double-precision feed-forward network: dense, ReLU, dropout,
// valid 2-D convolution and max-pooling layers. Activations are stored
// column-per-sample; image tensors are flattened channel-major.

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <json.hpp>
#include <memory>
#include <span>
#include <vector>

#include "enose/algorithm.hpp"
#include "enose/random.hpp"

namespace enose {

/// A contiguous parameter block and its gradient accumulator.
struct ParamBlock {
  double* values;
  double* grads;
  std::size_t size;
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::unique_ptr<Layer> clone() const = 0;
  virtual std::size_t input_size() const = 0;
  virtual std::size_t output_size() const = 0;

  /// Inference; no state is touched.
  virtual Eigen::MatrixXd infer(const Eigen::MatrixXd& x) const = 0;
  /// Training pass: caches what backward needs. A null `rng` disables dropout.
  virtual Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Rng* rng) = 0;
  /// Accumulates parameter gradients and returns dLoss/dInput.
  virtual Eigen::MatrixXd backward(const Eigen::MatrixXd& grad) = 0;

  virtual void collect(std::vector<ParamBlock>& /*out*/) {}
  /// Glorot-uniform weights, zero biases.
  virtual void initialize(Rng& /*rng*/) {}
  virtual nlohmann::json to_json() const = 0;
};

class DenseLayer final : public Layer {
 public:
  DenseLayer(std::size_t in, std::size_t out);
  std::unique_ptr<Layer> clone() const override { return std::make_unique<DenseLayer>(*this); }
  std::size_t input_size() const override { return static_cast<std::size_t>(weights_.cols()); }
  std::size_t output_size() const override { return static_cast<std::size_t>(weights_.rows()); }
  Eigen::MatrixXd infer(const Eigen::MatrixXd& x) const override;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Rng* rng) override;
  Eigen::MatrixXd backward(const Eigen::MatrixXd& grad) override;
  void collect(std::vector<ParamBlock>& out) override;
  void initialize(Rng& rng) override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<Layer> from_json(const nlohmann::json& j);

  Eigen::MatrixXd& weights() { return weights_; }
  Eigen::VectorXd& bias() { return bias_; }
  const Eigen::VectorXd& bias_gradient() const { return bias_grad_; }

 private:
  Eigen::MatrixXd weights_;  // out x in
  Eigen::VectorXd bias_;
  Eigen::MatrixXd weights_grad_;
  Eigen::VectorXd bias_grad_;
  Eigen::MatrixXd input_;
};

class ReluLayer final : public Layer {
 public:
  explicit ReluLayer(std::size_t size) : size_(size) {}
  std::unique_ptr<Layer> clone() const override { return std::make_unique<ReluLayer>(*this); }
  std::size_t input_size() const override { return size_; }
  std::size_t output_size() const override { return size_; }
  Eigen::MatrixXd infer(const Eigen::MatrixXd& x) const override;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Rng* rng) override;
  Eigen::MatrixXd backward(const Eigen::MatrixXd& grad) override;
  nlohmann::json to_json() const override;

 private:
  std::size_t size_;
  Eigen::MatrixXd input_;
};

/// Inverted dropout: active only in training passes with an rng.
class DropoutLayer final : public Layer {
 public:
  DropoutLayer(std::size_t size, double rate) : size_(size), rate_(rate) {}
  std::unique_ptr<Layer> clone() const override { return std::make_unique<DropoutLayer>(*this); }
  std::size_t input_size() const override { return size_; }
  std::size_t output_size() const override { return size_; }
  Eigen::MatrixXd infer(const Eigen::MatrixXd& x) const override { return x; }
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Rng* rng) override;
  Eigen::MatrixXd backward(const Eigen::MatrixXd& grad) override;
  nlohmann::json to_json() const override;

 private:
  std::size_t size_;
  double rate_;
  Eigen::MatrixXd mask_;
};

struct Shape3 {
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t size() const { return channels * height * width; }
};

/// Valid (no padding) 2-D convolution with stride 1.
class Conv2dLayer final : public Layer {
 public:
  Conv2dLayer(Shape3 input, std::size_t filters, std::size_t kernel_h, std::size_t kernel_w);
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv2dLayer>(*this); }
  std::size_t input_size() const override { return in_.size(); }
  std::size_t output_size() const override { return out_.size(); }
  Shape3 output_shape() const { return out_; }
  Eigen::MatrixXd infer(const Eigen::MatrixXd& x) const override;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Rng* rng) override;
  Eigen::MatrixXd backward(const Eigen::MatrixXd& grad) override;
  void collect(std::vector<ParamBlock>& out) override;
  void initialize(Rng& rng) override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<Layer> from_json(const nlohmann::json& j);

 private:
  std::size_t weight_index(std::size_t f, std::size_t c, std::size_t i, std::size_t j) const {
    return ((f * in_.channels + c) * kh_ + i) * kw_ + j;
  }
  Shape3 in_;
  Shape3 out_;
  std::size_t kh_;
  std::size_t kw_;
  Eigen::VectorXd weights_;  // [filter][channel][kh][kw]
  Eigen::VectorXd bias_;
  Eigen::VectorXd weights_grad_;
  Eigen::VectorXd bias_grad_;
  Eigen::MatrixXd input_;
};

/// Non-overlapping max pooling (stride = window); trailing rows/columns that
/// do not fill a window are dropped.
class MaxPoolLayer final : public Layer {
 public:
  MaxPoolLayer(Shape3 input, std::size_t pool_h, std::size_t pool_w);
  std::unique_ptr<Layer> clone() const override { return std::make_unique<MaxPoolLayer>(*this); }
  std::size_t input_size() const override { return in_.size(); }
  std::size_t output_size() const override { return out_.size(); }
  Shape3 output_shape() const { return out_; }
  Eigen::MatrixXd infer(const Eigen::MatrixXd& x) const override;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Rng* rng) override;
  Eigen::MatrixXd backward(const Eigen::MatrixXd& grad) override;
  nlohmann::json to_json() const override;

 private:
  Eigen::MatrixXd pool(const Eigen::MatrixXd& x, std::vector<std::size_t>* argmax) const;
  Shape3 in_;
  Shape3 out_;
  std::size_t ph_;
  std::size_t pw_;
  std::vector<std::size_t> argmax_;
  Eigen::Index batch_ = 0;
};

class NeuralNet {
 public:
  NeuralNet() = default;
  NeuralNet(const NeuralNet& other);
  NeuralNet& operator=(const NeuralNet& other);
  NeuralNet(NeuralNet&&) noexcept = default;
  NeuralNet& operator=(NeuralNet&&) noexcept = default;

  void add(std::unique_ptr<Layer> layer);
  const std::vector<std::unique_ptr<Layer>>& layers() const { return layers_; }
  std::size_t input_size() const;
  std::size_t output_size() const;

  /// Logits for each input column.
  Eigen::MatrixXd logits(const Eigen::MatrixXd& x) const;

  /// Mean softmax cross-entropy over the columns of `x`; gradients of every
  /// parameter are overwritten. A null `dropout_rng` disables dropout.
  double loss_and_gradient(const Eigen::MatrixXd& x, std::span<const int> targets, Rng* dropout_rng);
  /// Loss only, dropout disabled.
  double loss(const Eigen::MatrixXd& x, std::span<const int> targets) const;

  std::vector<ParamBlock> parameters();
  std::size_t parameter_count();
  void initialize(Rng& rng);

  nlohmann::json to_json() const;
  static NeuralNet from_json(const nlohmann::json& j);

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

/// Numerically stable softmax of one logit vector.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

NeuralNet build_mlp(std::size_t input_dim, std::size_t classes, const MlpParams& params);
/// Expects the 1x4x10 grid flattened channel-major (i.e. a raw feature vector).
NeuralNet build_cnn(std::size_t classes, const CnnParams& params);

/// Mini-batch SGD with momentum over the rows of `x` (n x d).
void train_sgd(NeuralNet& net, const Eigen::MatrixXd& x, std::span<const int> targets,
               const SgdParams& params, Rng& rng);

/// Compares backpropagated gradients against central differences for every
/// parameter; returns max |g_bp - g_fd| / max(1e-8, |g_bp| + |g_fd|).
/// Dropout is disabled.
double gradient_check(NeuralNet& net, const Eigen::VectorXd& input, int target, double step = 1e-5);

enum class NetworkPreset { Table2Mlp, Table2Cnn, FreshnessNet };

/// Freshly initialized preset network on 40 inputs.
NeuralNet build_preset(NetworkPreset preset, std::size_t classes, std::uint64_t seed);

/// gradient_check on a preset initialized from `seed`.
double network_gradient_check(NetworkPreset preset, std::size_t classes, std::span<const double> input,
                              int target, std::uint64_t seed);

/// Grid view of a channel-major feature vector: grid[c][s] = v[10 c + s].
using SensorGrid = std::array<std::array<double, 10>, 4>;
SensorGrid reshape_to_grid(std::span<const double> v);
std::array<double, 40> flatten_grid(const SensorGrid& grid);

}  // namespace enose
