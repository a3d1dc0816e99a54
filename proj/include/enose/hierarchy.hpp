#pragma once

// Three-stage detector: general class -> specific label -> freshness, with
// hard routing between stages, plus the flat joint-target baseline.

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "enose/algorithm.hpp"
#include "enose/classifier.hpp"
#include "enose/session.hpp"
#include "enose/taxonomy.hpp"

namespace enose {

struct StageAssignment {
  AlgorithmSpec stage1;
  std::map<GeneralClass, AlgorithmSpec> stage2;
  MlpParams stage3 = freshness_net_params();

  /// RF for stage 1; SVM, MLP, RF and logistic regression for vegetable,
  /// fruit, drink and meat respectively.
  static StageAssignment paper_default();
  /// `spec` at stage 1 and for every class at stage 2.
  static StageAssignment uniform(const AlgorithmSpec& spec);

  AlgorithmSpec stage3_spec() const;
};

/// Row ids a stage model was fitted on. Kept in memory only.
struct StageAudit {
  int stage = 0;
  std::string branch;  // "" for stage 1, else the class or label name
  std::vector<std::size_t> row_ids;
};

struct HierarchicalModel {
  TrainedClassifier stage1;
  std::map<GeneralClass, TrainedClassifier> stage2;
  std::map<SpecificLabel, TrainedClassifier> stage3;
  std::uint64_t seed = 0;
  std::vector<StageAudit> audit;
};

struct Verdict {
  Annotation annotation;
  // Over the classes of the stage model that decided, in its class order.
  Eigen::VectorXd class_probabilities;
  Eigen::VectorXd label_probabilities;
  Eigen::VectorXd freshness_probabilities;
  /// Session verdicts only: the per-cycle votes at each stage.
  std::vector<Annotation> cycle_votes;
};

/// Throws InsufficientClasses when fewer than two general classes occur.
HierarchicalModel train_multistep(const StageAssignment& assignment, const Dataset& data, std::uint64_t seed);

/// Throws DimensionMismatch and MissingBranch.
Verdict predict_multistep(const HierarchicalModel& model, std::span<const double> v);

/// Cascaded majority vote over the session's cycles.
Verdict predict_session(const HierarchicalModel& model, const MeasurementSession& session);
Verdict predict_session(const HierarchicalModel& model, std::span<const FeatureVector> cycles);

/// Winner among per-cycle probability vectors: most argmax votes, then the
/// highest mean probability, then the lowest index.
std::size_t majority_vote(std::span<const Eigen::VectorXd> probabilities);

/// One classifier over joint "Label/Freshness" targets.
TrainedClassifier train_flat(const AlgorithmSpec& spec, const Dataset& data, std::uint64_t seed);

/// Every joint target in taxonomy order.
std::vector<std::string> joint_class_order();
std::vector<std::string> general_class_names();

/// Directory bundle: manifest.json, stage1.json, stage2/<Class>.json,
/// stage3/<Label>.json. Written to a sibling temp directory, then renamed.
void save_bundle(const HierarchicalModel& model, const std::filesystem::path& dir);
/// Throws CorruptModel, VersionMismatch or ModelError for a missing bundle.
HierarchicalModel load_bundle(const std::filesystem::path& dir);

}  // namespace enose
