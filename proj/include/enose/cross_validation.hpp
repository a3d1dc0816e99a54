#pragma once

// Leave-one-session-out cross-validation.

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "enose/algorithm.hpp"
#include "enose/hierarchy.hpp"
#include "enose/metrics.hpp"
#include "enose/session.hpp"

namespace enose {

struct Fold {
  std::string session_id;
  std::vector<std::size_t> train;       // positions in the dataset
  std::vector<std::size_t> validation;  // exactly the held-out session's rows
};

struct FoldPlan {
  std::vector<Fold> folds;
  /// Canonical text form; two plans are identical iff these are byte-equal.
  std::string serialize() const;
};

/// One fold per distinct session, in order of first appearance.
/// Throws TooFewSessions for fewer than 2 sessions.
FoldPlan plan_loso(const Dataset& data);

/// Throws InvariantViolation if a fold's training rows share a row id or a
/// session with its validation rows, or if validation rows stray outside
/// the held-out session.
void audit_fold_plan(const Dataset& data, const FoldPlan& plan);

/// Same check for an arbitrary set of row ids used in fitting.
void audit_disjoint(std::span<const std::size_t> fit_row_ids, std::span<const std::size_t> validation_row_ids,
                    const std::string& context);

std::uint64_t fold_seed(std::uint64_t master, std::size_t fold_index);

enum class Target { GeneralClass, Label, Freshness, Joint };
std::string target_of(const Annotation& a, Target t);
/// Targets present in `data`, in taxonomy order.
std::vector<std::string> target_classes(const Dataset& data, Target t);

struct FoldResult {
  std::string session_id;
  ConfusionMatrix confusion;
  MetricSummary metrics;
};

struct MetricsReport {
  ConfusionMatrix pooled{{}};
  MetricSummary metrics;      // from the pooled matrix
  MetricSummary fold_mean;    // unweighted mean over folds
  std::vector<double> class_precision;
  std::vector<double> class_recall;
  std::vector<FoldResult> folds;
  std::size_t fold_count() const { return folds.size(); }
};

/// Builds a report from per-fold matrices (all over the same classes).
MetricsReport make_report(std::vector<FoldResult> folds, std::vector<std::string> classes);

/// Predicts one target string per validation row. Must only fit on `train`.
using FoldPredictor =
    std::function<std::vector<std::string>(const Dataset& train, const Dataset& validation, std::uint64_t seed)>;

struct CvOptions {
  std::uint64_t seed = 1;
  int jobs = 1;  // folds evaluated concurrently
};

/// Runs `predictor` over every fold of `plan`. Rows handed to the predictor
/// are audited against the validation rows before each fold runs.
MetricsReport cross_validate(const Dataset& data, const FoldPlan& plan, Target target,
                             const std::vector<std::string>& classes, const FoldPredictor& predictor,
                             const CvOptions& options);

/// train_classifier per fold on `target`.
MetricsReport cross_validate(const AlgorithmSpec& spec, const Dataset& data, Target target, const CvOptions& options);
MetricsReport cross_validate(const AlgorithmSpec& spec, const Dataset& data, const FoldPlan& plan, Target target,
                             const CvOptions& options);

struct MultistepReport {
  MetricsReport end_to_end;                          // joint label/freshness, both must be right
  MetricsReport stage1;                              // general class
  std::map<GeneralClass, MetricsReport> stage2;      // label given the true class
  std::map<SpecificLabel, MetricsReport> stage3;     // freshness given the true label
  MetricsReport routed_label;                        // label after stage-1 routing
};

/// Trains the detector per fold. Each fold also checks the model's training
/// audit against its validation rows.
MultistepReport cross_validate_multistep(const StageAssignment& assignment, const Dataset& data,
                                         const FoldPlan& plan, const CvOptions& options);

/// Runs fn(i) for i in [0, count) on up to `jobs` threads.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace enose
