#include "enose/classifier.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "enose/decision_tree.hpp"
#include "enose/ensembles.hpp"
#include "enose/error.hpp"
#include "enose/logistic.hpp"
#include "enose/network_model.hpp"
#include "enose/session.hpp"
#include "enose/svm.hpp"

namespace enose {

TrainedClassifier::TrainedClassifier(AlgorithmSpec spec, std::vector<std::string> classes, std::uint64_t seed,
                                     std::optional<ProjectionModel> projection, std::shared_ptr<const Model> model)
    : spec_(std::move(spec)), classes_(std::move(classes)), seed_(seed), projection_(std::move(projection)),
      model_(std::move(model)) {
  if (!model_ || model_->class_count() != classes_.size()) {
    throw InvalidConfig("classifier model and class list disagree");
  }
}

TrainedClassifier TrainedClassifier::constant(std::vector<std::string> classes, std::size_t index) {
  auto model = std::make_shared<ConstantModel>(kPredictorCount, classes.size(), index);
  AlgorithmSpec spec = AlgorithmSpec::make(Algorithm::LogisticRegression, Preprocessing::Raw);
  return TrainedClassifier(std::move(spec), std::move(classes), 0, std::nullopt, std::move(model));
}

std::string TrainedClassifier::algorithm_name() const { return is_stub() ? "constant" : spec_.key(); }

Eigen::VectorXd TrainedClassifier::predict_proba(std::span<const double> v) const {
  if (v.size() != kPredictorCount) {
    throw DimensionMismatch("expected " + std::to_string(kPredictorCount) + " predictors, got " +
                            std::to_string(v.size()));
  }
  if (projection_) return model_->predict_proba(projection_->apply(v));
  return model_->predict_proba(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
}

std::size_t argmax_lowest(const Eigen::VectorXd& p) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < p.size(); ++i) {
    if (p(i) > p(best)) best = i;
  }
  return static_cast<std::size_t>(best);
}

Prediction TrainedClassifier::predict(std::span<const double> v) const {
  Prediction p;
  p.probabilities = predict_proba(v);
  p.class_index = argmax_lowest(p.probabilities);
  p.label = classes_[p.class_index];
  return p;
}

nlohmann::json TrainedClassifier::to_json() const {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["algorithm"] = algorithm_name();
  j["seed"] = seed_;
  j["classes"] = classes_;
  j["projection_present"] = projection_.has_value();
  j["spec"] = is_stub() ? nlohmann::json(nullptr) : spec_.to_json();
  j["projection"] = projection_ ? projection_->to_json() : nlohmann::json(nullptr);
  j["model"] = model_to_json(*model_);
  return j;
}

TrainedClassifier TrainedClassifier::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("format_version")) throw CorruptModel("model file has no format_version");
  if (!j.at("format_version").is_number_integer()) throw CorruptModel("format_version is not an integer");
  const int version = j.at("format_version").get<int>();
  if (version != kModelFormatVersion) {
    throw VersionMismatch("model format version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kModelFormatVersion) + ")");
  }
  try {
    auto classes = j.at("classes").get<std::vector<std::string>>();
    const auto seed = j.at("seed").get<std::uint64_t>();
    std::shared_ptr<const Model> model = model_from_json(j.at("model"));
    std::optional<ProjectionModel> projection;
    if (j.at("projection_present").get<bool>()) projection = ProjectionModel::from_json(j.at("projection"));
    AlgorithmSpec spec = model->kind() == "constant"
                             ? AlgorithmSpec::make(Algorithm::LogisticRegression, Preprocessing::Raw)
                             : AlgorithmSpec::from_json(j.at("spec"));
    const std::size_t expected_in = projection ? projection->output_dim() : kPredictorCount;
    if (model->input_dim() != expected_in) throw CorruptModel("model input size does not match its preprocessing");
    if (projection && projection->input_dim() != kPredictorCount) {
      throw CorruptModel("projection input size is not " + std::to_string(kPredictorCount));
    }
    return TrainedClassifier(std::move(spec), std::move(classes), seed, std::move(projection), std::move(model));
  } catch (const ModelError&) {
    throw;
  } catch (const std::exception& e) {
    throw CorruptModel(std::string("malformed model file: ") + e.what());
  }
}

namespace {

std::unique_ptr<Model> fit_model(const AlgorithmSpec& spec, const Eigen::MatrixXd& x, std::span<const int> y,
                                 std::size_t classes, std::uint64_t seed) {
  return std::visit(
      [&](const auto& p) -> std::unique_ptr<Model> {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, LogisticParams>) {
          return fit_logistic(x, y, classes, p);
        } else if constexpr (std::is_same_v<P, MlpParams>) {
          return fit_mlp(x, y, classes, p, seed);
        } else if constexpr (std::is_same_v<P, CnnParams>) {
          return fit_cnn(x, y, classes, p, seed);
        } else if constexpr (std::is_same_v<P, TreeParams>) {
          return std::make_unique<DecisionTreeModel>(
              fit_tree(x, y, {}, classes, TreeFitOptions{p.max_depth, p.min_samples_split, 0}));
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          return fit_forest(x, y, classes, p, seed);
        } else if constexpr (std::is_same_v<P, AdaBoostParams>) {
          return fit_adaboost(x, y, classes, p);
        } else {
          return fit_svm(x, y, classes, p);
        }
      },
      spec.params);
}

}  // namespace

TrainedClassifier train_classifier(const AlgorithmSpec& spec, const Eigen::MatrixXd& rows,
                                   std::span<const std::string> targets, std::uint64_t seed,
                                   std::span<const std::string> class_order) {
  spec.validate();
  if (static_cast<std::size_t>(rows.rows()) != targets.size()) {
    throw LengthMismatch("training rows (" + std::to_string(rows.rows()) + ") and targets (" +
                         std::to_string(targets.size()) + ") differ");
  }
  if (static_cast<std::size_t>(rows.cols()) != kPredictorCount) {
    throw DimensionMismatch("training rows must have " + std::to_string(kPredictorCount) + " columns");
  }

  const std::set<std::string> seen(targets.begin(), targets.end());
  std::vector<std::string> classes;
  for (const auto& c : class_order) {
    if (seen.count(c) && std::find(classes.begin(), classes.end(), c) == classes.end()) classes.push_back(c);
  }
  for (const auto& c : seen) {
    if (std::find(classes.begin(), classes.end(), c) == classes.end()) classes.push_back(c);
  }
  if (classes.size() < 2) {
    throw SingleClassData("training data contains " + std::to_string(classes.size()) +
                          " class(es); at least 2 are required");
  }
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < classes.size(); ++i) index[classes[i]] = static_cast<int>(i);
  std::vector<int> y(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) y[i] = index.at(targets[i]);

  std::optional<ProjectionModel> projection;
  Eigen::MatrixXd x;
  if (spec.preprocessing == Preprocessing::WithProjection) {
    projection = fit_projection(rows, y, classes.size(), spec.projection);
    x.resize(rows.rows(), static_cast<Eigen::Index>(projection->output_dim()));
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      const Eigen::VectorXd r = rows.row(i).transpose();
      x.row(i) = projection->apply(std::span<const double>(r.data(), static_cast<std::size_t>(r.size()))).transpose();
    }
  } else {
    x = rows;
  }
  std::shared_ptr<const Model> model = fit_model(spec, x, y, classes.size(), seed);
  return TrainedClassifier(spec, std::move(classes), seed, std::move(projection), std::move(model));
}

std::string save_model(const TrainedClassifier& model) { return model.to_json().dump() + "\n"; }

TrainedClassifier load_model(std::string_view bytes) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw CorruptModel(std::string("model file is not valid JSON: ") + e.what());
  }
  return TrainedClassifier::from_json(j);
}

}  // namespace enose
