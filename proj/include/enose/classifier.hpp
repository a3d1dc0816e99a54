#pragma once

// Train/predict contract shared by every algorithm family, plus the
// versioned model file.

#include <Eigen/Dense>
#include <cstdint>
#include <json.hpp>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "enose/algorithm.hpp"
#include "enose/model.hpp"
#include "enose/projection.hpp"

namespace enose {

inline constexpr int kModelFormatVersion = 1;

struct Prediction {
  std::size_t class_index = 0;
  std::string label;
  Eigen::VectorXd probabilities;
};

class TrainedClassifier {
 public:
  TrainedClassifier(AlgorithmSpec spec, std::vector<std::string> classes, std::uint64_t seed,
                    std::optional<ProjectionModel> projection, std::shared_ptr<const Model> model);

  /// Stub that always answers classes[index] with probability 1.
  static TrainedClassifier constant(std::vector<std::string> classes, std::size_t index);

  bool is_stub() const { return model_->kind() == "constant"; }
  const AlgorithmSpec& spec() const { return spec_; }
  const std::vector<std::string>& classes() const { return classes_; }
  std::uint64_t seed() const { return seed_; }
  const std::optional<ProjectionModel>& projection() const { return projection_; }
  const Model& model() const { return *model_; }
  /// "constant" for stubs, otherwise the spec key.
  std::string algorithm_name() const;

  /// Throws DimensionMismatch unless v has 40 entries.
  Eigen::VectorXd predict_proba(std::span<const double> v) const;
  /// argmax of predict_proba; ties go to the lowest class index.
  Prediction predict(std::span<const double> v) const;

  nlohmann::json to_json() const;
  static TrainedClassifier from_json(const nlohmann::json& j);

 private:
  AlgorithmSpec spec_;
  std::vector<std::string> classes_;
  std::uint64_t seed_;
  std::optional<ProjectionModel> projection_;
  std::shared_ptr<const Model> model_;
};

/// Fits `spec` on raw 40-column rows. The class list is the distinct targets
/// ordered as in `class_order` (targets missing from it are appended in
/// sorted order). Throws SingleClassData when fewer than two classes occur.
TrainedClassifier train_classifier(const AlgorithmSpec& spec, const Eigen::MatrixXd& rows,
                                   std::span<const std::string> targets, std::uint64_t seed,
                                   std::span<const std::string> class_order = {});

/// Index of the largest entry; the lowest index wins ties.
std::size_t argmax_lowest(const Eigen::VectorXd& p);

/// JSON text, one trailing newline. Deterministic for a given model.
std::string save_model(const TrainedClassifier& model);
/// Throws CorruptModel for unreadable content and VersionMismatch for an
/// unknown format_version.
TrainedClassifier load_model(std::string_view bytes);

}  // namespace enose
