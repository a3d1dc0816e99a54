#include "enose/neural_net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "enose/error.hpp"
#include "json_eigen.hpp"

namespace enose {
namespace {

using nlohmann::json;

void glorot(double* values, std::size_t count, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (std::size_t i = 0; i < count; ++i) values[i] = dist(rng);
}

json shape_json(const Shape3& s) { return json::array({s.channels, s.height, s.width}); }

Shape3 shape_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw CorruptModel("bad tensor shape");
  return {j[0].get<std::size_t>(), j[1].get<std::size_t>(), j[2].get<std::size_t>()};
}

}  // namespace

// ---------------------------------------------------------------- Dense

DenseLayer::DenseLayer(std::size_t in, std::size_t out)
    : weights_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in))),
      bias_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out))),
      weights_grad_(Eigen::MatrixXd::Zero(weights_.rows(), weights_.cols())),
      bias_grad_(Eigen::VectorXd::Zero(bias_.size())) {}

Eigen::MatrixXd DenseLayer::infer(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd y = weights_ * x;
  y.colwise() += bias_;
  return y;
}

Eigen::MatrixXd DenseLayer::forward(const Eigen::MatrixXd& x, Rng* /*rng*/) {
  input_ = x;
  return infer(x);
}

Eigen::MatrixXd DenseLayer::backward(const Eigen::MatrixXd& grad) {
  weights_grad_.noalias() += grad * input_.transpose();
  bias_grad_ += grad.rowwise().sum();
  return weights_.transpose() * grad;
}

void DenseLayer::collect(std::vector<ParamBlock>& out) {
  out.push_back({weights_.data(), weights_grad_.data(), static_cast<std::size_t>(weights_.size())});
  out.push_back({bias_.data(), bias_grad_.data(), static_cast<std::size_t>(bias_.size())});
}

void DenseLayer::initialize(Rng& rng) {
  // Row-major draw order keeps initialization independent of Eigen's storage order.
  const double limit = std::sqrt(6.0 / static_cast<double>(weights_.rows() + weights_.cols()));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Eigen::Index r = 0; r < weights_.rows(); ++r) {
    for (Eigen::Index c = 0; c < weights_.cols(); ++c) weights_(r, c) = dist(rng);
  }
  bias_.setZero();
}

json DenseLayer::to_json() const {
  return {{"type", "dense"}, {"weights", detail::to_json(weights_)}, {"bias", detail::to_json(bias_)}};
}

std::unique_ptr<Layer> DenseLayer::from_json(const json& j) {
  Eigen::MatrixXd w = detail::matrix_from_json(j.at("weights"));
  Eigen::VectorXd b = detail::vector_from_json(j.at("bias"));
  if (b.size() != w.rows()) throw CorruptModel("dense layer bias size mismatch");
  auto layer = std::make_unique<DenseLayer>(static_cast<std::size_t>(w.cols()),
                                            static_cast<std::size_t>(w.rows()));
  layer->weights_ = std::move(w);
  layer->bias_ = std::move(b);
  return layer;
}

// ---------------------------------------------------------------- ReLU

Eigen::MatrixXd ReluLayer::infer(const Eigen::MatrixXd& x) const { return x.cwiseMax(0.0); }

Eigen::MatrixXd ReluLayer::forward(const Eigen::MatrixXd& x, Rng* /*rng*/) {
  input_ = x;
  return infer(x);
}

Eigen::MatrixXd ReluLayer::backward(const Eigen::MatrixXd& grad) {
  return (input_.array() > 0.0).select(grad, 0.0);
}

json ReluLayer::to_json() const { return {{"type", "relu"}, {"size", size_}}; }

// ---------------------------------------------------------------- Dropout

Eigen::MatrixXd DropoutLayer::forward(const Eigen::MatrixXd& x, Rng* rng) {
  if (rng == nullptr || rate_ <= 0.0) {
    mask_.resize(0, 0);
    return x;
  }
  const double keep = 1.0 - rate_;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  mask_.resize(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) mask_(r, c) = unit(*rng) < keep ? 1.0 / keep : 0.0;
  }
  return x.cwiseProduct(mask_);
}

Eigen::MatrixXd DropoutLayer::backward(const Eigen::MatrixXd& grad) {
  if (mask_.size() == 0) return grad;
  return grad.cwiseProduct(mask_);
}

json DropoutLayer::to_json() const { return {{"type", "dropout"}, {"size", size_}, {"rate", rate_}}; }

// ---------------------------------------------------------------- Conv2d

Conv2dLayer::Conv2dLayer(Shape3 input, std::size_t filters, std::size_t kernel_h, std::size_t kernel_w)
    : in_(input), kh_(kernel_h), kw_(kernel_w) {
  if (kernel_h == 0 || kernel_w == 0 || kernel_h > input.height || kernel_w > input.width) {
    throw InvalidHyperparameter("convolution kernel does not fit its input");
  }
  out_ = {filters, input.height - kernel_h + 1, input.width - kernel_w + 1};
  const auto wsize = static_cast<Eigen::Index>(filters * in_.channels * kh_ * kw_);
  weights_ = Eigen::VectorXd::Zero(wsize);
  weights_grad_ = Eigen::VectorXd::Zero(wsize);
  bias_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(filters));
  bias_grad_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(filters));
}

Eigen::MatrixXd Conv2dLayer::infer(const Eigen::MatrixXd& x) const {
  const std::size_t H = in_.height, W = in_.width;
  const std::size_t OH = out_.height, OW = out_.width;
  Eigen::MatrixXd y(static_cast<Eigen::Index>(out_.size()), x.cols());
  for (Eigen::Index n = 0; n < x.cols(); ++n) {
    const double* in = x.col(n).data();
    double* out = y.col(n).data();
    for (std::size_t f = 0; f < out_.channels; ++f) {
      for (std::size_t oi = 0; oi < OH; ++oi) {
        for (std::size_t oj = 0; oj < OW; ++oj) {
          double acc = bias_(static_cast<Eigen::Index>(f));
          for (std::size_t c = 0; c < in_.channels; ++c) {
            for (std::size_t i = 0; i < kh_; ++i) {
              for (std::size_t j = 0; j < kw_; ++j) {
                acc += weights_(static_cast<Eigen::Index>(weight_index(f, c, i, j))) *
                       in[(c * H + oi + i) * W + oj + j];
              }
            }
          }
          out[(f * OH + oi) * OW + oj] = acc;
        }
      }
    }
  }
  return y;
}

Eigen::MatrixXd Conv2dLayer::forward(const Eigen::MatrixXd& x, Rng* /*rng*/) {
  input_ = x;
  return infer(x);
}

Eigen::MatrixXd Conv2dLayer::backward(const Eigen::MatrixXd& grad) {
  const std::size_t H = in_.height, W = in_.width;
  const std::size_t OH = out_.height, OW = out_.width;
  Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(input_.rows(), input_.cols());
  for (Eigen::Index n = 0; n < grad.cols(); ++n) {
    const double* in = input_.col(n).data();
    const double* g = grad.col(n).data();
    double* din = dx.col(n).data();
    for (std::size_t f = 0; f < out_.channels; ++f) {
      for (std::size_t oi = 0; oi < OH; ++oi) {
        for (std::size_t oj = 0; oj < OW; ++oj) {
          const double go = g[(f * OH + oi) * OW + oj];
          bias_grad_(static_cast<Eigen::Index>(f)) += go;
          for (std::size_t c = 0; c < in_.channels; ++c) {
            for (std::size_t i = 0; i < kh_; ++i) {
              for (std::size_t j = 0; j < kw_; ++j) {
                const auto w = static_cast<Eigen::Index>(weight_index(f, c, i, j));
                const std::size_t p = (c * H + oi + i) * W + oj + j;
                weights_grad_(w) += go * in[p];
                din[p] += go * weights_(w);
              }
            }
          }
        }
      }
    }
  }
  return dx;
}

void Conv2dLayer::collect(std::vector<ParamBlock>& out) {
  out.push_back({weights_.data(), weights_grad_.data(), static_cast<std::size_t>(weights_.size())});
  out.push_back({bias_.data(), bias_grad_.data(), static_cast<std::size_t>(bias_.size())});
}

void Conv2dLayer::initialize(Rng& rng) {
  glorot(weights_.data(), static_cast<std::size_t>(weights_.size()), in_.channels * kh_ * kw_,
         out_.channels * kh_ * kw_, rng);
  bias_.setZero();
}

json Conv2dLayer::to_json() const {
  return {{"type", "conv2d"},
          {"input", shape_json(in_)},
          {"filters", out_.channels},
          {"kernel", json::array({kh_, kw_})},
          {"weights", detail::to_json(weights_)},
          {"bias", detail::to_json(bias_)}};
}

std::unique_ptr<Layer> Conv2dLayer::from_json(const json& j) {
  const auto& kernel = j.at("kernel");
  auto layer = std::make_unique<Conv2dLayer>(shape_from(j.at("input")), j.at("filters").get<std::size_t>(),
                                             kernel.at(0).get<std::size_t>(), kernel.at(1).get<std::size_t>());
  Eigen::VectorXd w = detail::vector_from_json(j.at("weights"));
  Eigen::VectorXd b = detail::vector_from_json(j.at("bias"));
  if (w.size() != layer->weights_.size() || b.size() != layer->bias_.size()) {
    throw CorruptModel("conv2d parameter size mismatch");
  }
  layer->weights_ = std::move(w);
  layer->bias_ = std::move(b);
  return layer;
}

// ---------------------------------------------------------------- MaxPool

MaxPoolLayer::MaxPoolLayer(Shape3 input, std::size_t pool_h, std::size_t pool_w)
    : in_(input), ph_(pool_h), pw_(pool_w) {
  if (pool_h == 0 || pool_w == 0 || pool_h > input.height || pool_w > input.width) {
    throw InvalidHyperparameter("pooling window does not fit its input");
  }
  out_ = {input.channels, input.height / pool_h, input.width / pool_w};
}

Eigen::MatrixXd MaxPoolLayer::pool(const Eigen::MatrixXd& x, std::vector<std::size_t>* argmax) const {
  const std::size_t H = in_.height, W = in_.width;
  const std::size_t OH = out_.height, OW = out_.width;
  Eigen::MatrixXd y(static_cast<Eigen::Index>(out_.size()), x.cols());
  if (argmax) argmax->assign(out_.size() * static_cast<std::size_t>(x.cols()), 0);
  for (Eigen::Index n = 0; n < x.cols(); ++n) {
    const double* in = x.col(n).data();
    double* out = y.col(n).data();
    for (std::size_t c = 0; c < in_.channels; ++c) {
      for (std::size_t oi = 0; oi < OH; ++oi) {
        for (std::size_t oj = 0; oj < OW; ++oj) {
          std::size_t best = (c * H + oi * ph_) * W + oj * pw_;
          for (std::size_t i = 0; i < ph_; ++i) {
            for (std::size_t j = 0; j < pw_; ++j) {
              const std::size_t p = (c * H + oi * ph_ + i) * W + oj * pw_ + j;
              if (in[p] > in[best]) best = p;
            }
          }
          const std::size_t o = (c * OH + oi) * OW + oj;
          out[o] = in[best];
          if (argmax) (*argmax)[static_cast<std::size_t>(n) * out_.size() + o] = best;
        }
      }
    }
  }
  return y;
}

Eigen::MatrixXd MaxPoolLayer::infer(const Eigen::MatrixXd& x) const { return pool(x, nullptr); }

Eigen::MatrixXd MaxPoolLayer::forward(const Eigen::MatrixXd& x, Rng* /*rng*/) {
  batch_ = x.cols();
  return pool(x, &argmax_);
}

Eigen::MatrixXd MaxPoolLayer::backward(const Eigen::MatrixXd& grad) {
  Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(in_.size()), batch_);
  for (Eigen::Index n = 0; n < batch_; ++n) {
    for (std::size_t o = 0; o < out_.size(); ++o) {
      const std::size_t p = argmax_[static_cast<std::size_t>(n) * out_.size() + o];
      dx(static_cast<Eigen::Index>(p), n) += grad(static_cast<Eigen::Index>(o), n);
    }
  }
  return dx;
}

json MaxPoolLayer::to_json() const {
  return {{"type", "maxpool2d"}, {"input", shape_json(in_)}, {"window", json::array({ph_, pw_})}};
}

// ---------------------------------------------------------------- NeuralNet

NeuralNet::NeuralNet(const NeuralNet& other) {
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

NeuralNet& NeuralNet::operator=(const NeuralNet& other) {
  if (this != &other) {
    NeuralNet copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void NeuralNet::add(std::unique_ptr<Layer> layer) {
  if (!layers_.empty() && layers_.back()->output_size() != layer->input_size()) {
    throw InvalidHyperparameter("layer input size " + std::to_string(layer->input_size()) +
                                " does not match previous output " +
                                std::to_string(layers_.back()->output_size()));
  }
  layers_.push_back(std::move(layer));
}

std::size_t NeuralNet::input_size() const { return layers_.empty() ? 0 : layers_.front()->input_size(); }
std::size_t NeuralNet::output_size() const { return layers_.empty() ? 0 : layers_.back()->output_size(); }

Eigen::MatrixXd NeuralNet::logits(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd a = x;
  for (const auto& l : layers_) a = l->infer(a);
  return a;
}

namespace {

// Mean cross-entropy and its gradient w.r.t. the logits.
double softmax_cross_entropy(const Eigen::MatrixXd& logits, std::span<const int> targets,
                             Eigen::MatrixXd* grad) {
  const Eigen::Index batch = logits.cols();
  double total = 0.0;
  if (grad) grad->resize(logits.rows(), batch);
  for (Eigen::Index n = 0; n < batch; ++n) {
    const Eigen::VectorXd z = logits.col(n);
    const double m = z.maxCoeff();
    const double lse = m + std::log((z.array() - m).exp().sum());
    const int t = targets[static_cast<std::size_t>(n)];
    total += lse - z(t);
    if (grad) {
      grad->col(n) = (z.array() - lse).exp().matrix() / static_cast<double>(batch);
      (*grad)(t, n) -= 1.0 / static_cast<double>(batch);
    }
  }
  return total / static_cast<double>(batch);
}

}  // namespace

double NeuralNet::loss_and_gradient(const Eigen::MatrixXd& x, std::span<const int> targets,
                                    Rng* dropout_rng) {
  for (auto& block : parameters()) std::fill(block.grads, block.grads + block.size, 0.0);
  Eigen::MatrixXd a = x;
  for (auto& l : layers_) a = l->forward(a, dropout_rng);
  Eigen::MatrixXd grad;
  const double value = softmax_cross_entropy(a, targets, &grad);
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) grad = (*it)->backward(grad);
  return value;
}

double NeuralNet::loss(const Eigen::MatrixXd& x, std::span<const int> targets) const {
  return softmax_cross_entropy(logits(x), targets, nullptr);
}

std::vector<ParamBlock> NeuralNet::parameters() {
  std::vector<ParamBlock> out;
  for (auto& l : layers_) l->collect(out);
  return out;
}

std::size_t NeuralNet::parameter_count() {
  std::size_t n = 0;
  for (const auto& b : parameters()) n += b.size;
  return n;
}

void NeuralNet::initialize(Rng& rng) {
  for (auto& l : layers_) l->initialize(rng);
}

json NeuralNet::to_json() const {
  json layers = json::array();
  for (const auto& l : layers_) layers.push_back(l->to_json());
  return layers;
}

NeuralNet NeuralNet::from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw CorruptModel("network has no layers");
  NeuralNet net;
  for (const auto& lj : j) {
    const std::string type = lj.at("type").get<std::string>();
    if (type == "dense") {
      net.add(DenseLayer::from_json(lj));
    } else if (type == "relu") {
      net.add(std::make_unique<ReluLayer>(lj.at("size").get<std::size_t>()));
    } else if (type == "dropout") {
      net.add(std::make_unique<DropoutLayer>(lj.at("size").get<std::size_t>(), lj.at("rate").get<double>()));
    } else if (type == "conv2d") {
      net.add(Conv2dLayer::from_json(lj));
    } else if (type == "maxpool2d") {
      const auto& w = lj.at("window");
      net.add(std::make_unique<MaxPoolLayer>(shape_from(lj.at("input")), w.at(0).get<std::size_t>(),
                                             w.at(1).get<std::size_t>()));
    } else {
      throw CorruptModel("unknown layer type '" + type + "'");
    }
  }
  return net;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - m).exp();
  return e / e.sum();
}

NeuralNet build_mlp(std::size_t input_dim, std::size_t classes, const MlpParams& params) {
  NeuralNet net;
  std::size_t width = input_dim;
  for (std::size_t i = 0; i < params.hidden.size(); ++i) {
    const auto h = static_cast<std::size_t>(params.hidden[i]);
    net.add(std::make_unique<DenseLayer>(width, h));
    net.add(std::make_unique<ReluLayer>(h));
    if (i == 0 && params.dropout > 0.0) net.add(std::make_unique<DropoutLayer>(h, params.dropout));
    width = h;
  }
  net.add(std::make_unique<DenseLayer>(width, classes));
  return net;
}

NeuralNet build_cnn(std::size_t classes, const CnnParams& params) {
  NeuralNet net;
  auto conv1 = std::make_unique<Conv2dLayer>(Shape3{1, 4, 10}, static_cast<std::size_t>(params.conv1_filters), 2, 2);
  const Shape3 s1 = conv1->output_shape();  // c1 x 3 x 9
  net.add(std::move(conv1));
  net.add(std::make_unique<ReluLayer>(s1.size()));
  auto pool = std::make_unique<MaxPoolLayer>(s1, 1, 3);
  const Shape3 s2 = pool->output_shape();  // c1 x 3 x 3
  net.add(std::move(pool));
  auto conv2 = std::make_unique<Conv2dLayer>(s2, static_cast<std::size_t>(params.conv2_filters), 2, 2);
  const Shape3 s3 = conv2->output_shape();  // c2 x 2 x 2
  net.add(std::move(conv2));
  net.add(std::make_unique<ReluLayer>(s3.size()));
  if (params.dropout > 0.0) net.add(std::make_unique<DropoutLayer>(s3.size(), params.dropout));
  const auto dense = static_cast<std::size_t>(params.dense_units);
  net.add(std::make_unique<DenseLayer>(s3.size(), dense));
  net.add(std::make_unique<ReluLayer>(dense));
  net.add(std::make_unique<DenseLayer>(dense, classes));
  return net;
}

void train_sgd(NeuralNet& net, const Eigen::MatrixXd& x, std::span<const int> targets,
               const SgdParams& params, Rng& rng) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (n == 0) return;
  auto blocks = net.parameters();
  std::vector<Eigen::VectorXd> velocity;
  for (const auto& b : blocks) velocity.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(b.size)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto batch_size = static_cast<std::size_t>(params.batch_size);
  Eigen::MatrixXd batch;
  std::vector<int> batch_targets;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t count = std::min(batch_size, n - start);
      batch.resize(x.cols(), static_cast<Eigen::Index>(count));
      batch_targets.resize(count);
      for (std::size_t k = 0; k < count; ++k) {
        batch.col(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(order[start + k])).transpose();
        batch_targets[k] = targets[order[start + k]];
      }
      net.loss_and_gradient(batch, batch_targets, &rng);

      double scale = 1.0;
      if (params.gradient_clip > 0.0) {
        double sq = 0.0;
        for (const auto& b : blocks) {
          for (std::size_t i = 0; i < b.size; ++i) sq += b.grads[i] * b.grads[i];
        }
        const double norm = std::sqrt(sq);
        if (norm > params.gradient_clip) scale = params.gradient_clip / norm;
      }
      for (std::size_t k = 0; k < blocks.size(); ++k) {
        auto& v = velocity[k];
        const auto& b = blocks[k];
        for (std::size_t i = 0; i < b.size; ++i) {
          const auto ii = static_cast<Eigen::Index>(i);
          v(ii) = params.momentum * v(ii) - params.learning_rate * scale * b.grads[i];
          b.values[i] += v(ii);
        }
      }
    }
  }
}

double gradient_check(NeuralNet& net, const Eigen::VectorXd& input, int target, double step) {
  const Eigen::MatrixXd x = input;
  const int targets[] = {target};
  net.loss_and_gradient(x, targets, nullptr);
  auto blocks = net.parameters();
  std::vector<std::vector<double>> analytic;
  for (const auto& b : blocks) analytic.emplace_back(b.grads, b.grads + b.size);

  double worst = 0.0;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    for (std::size_t i = 0; i < blocks[k].size; ++i) {
      double& p = blocks[k].values[i];
      const double saved = p;
      p = saved + step;
      const double up = net.loss(x, targets);
      p = saved - step;
      const double down = net.loss(x, targets);
      p = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double bp = analytic[k][i];
      const double rel = std::abs(bp - numeric) / std::max(1e-8, std::abs(bp) + std::abs(numeric));
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

NeuralNet build_preset(NetworkPreset preset, std::size_t classes, std::uint64_t seed) {
  NeuralNet net;
  switch (preset) {
    case NetworkPreset::Table2Mlp:
      net = build_mlp(40, classes, MlpParams{});
      break;
    case NetworkPreset::Table2Cnn:
      net = build_cnn(classes, CnnParams{});
      break;
    case NetworkPreset::FreshnessNet:
      net = build_mlp(40, classes, freshness_net_params());
      break;
  }
  Rng rng(seed);
  net.initialize(rng);
  return net;
}

double network_gradient_check(NetworkPreset preset, std::size_t classes, std::span<const double> input,
                              int target, std::uint64_t seed) {
  if (input.size() != 40) throw DimensionMismatch("gradient check expects 40 inputs");
  NeuralNet net = build_preset(preset, classes, seed);
  const Eigen::Map<const Eigen::VectorXd> x(input.data(), 40);
  return gradient_check(net, x, target);
}

SensorGrid reshape_to_grid(std::span<const double> v) {
  if (v.size() != 40) {
    throw DimensionMismatch("grid reshape expects 40 values, got " + std::to_string(v.size()));
  }
  SensorGrid grid{};
  for (std::size_t c = 0; c < 4; ++c) {
    for (std::size_t s = 0; s < 10; ++s) grid[c][s] = v[10 * c + s];
  }
  return grid;
}

std::array<double, 40> flatten_grid(const SensorGrid& grid) {
  std::array<double, 40> out{};
  for (std::size_t c = 0; c < 4; ++c) {
    for (std::size_t s = 0; s < 10; ++s) out[10 * c + s] = grid[c][s];
  }
  return out;
}

}  // namespace enose
