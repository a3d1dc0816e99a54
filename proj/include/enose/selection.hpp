#pragma once

// Per-stage model selection and the multi-step vs one-step comparison.

#include <cstdint>
#include <string>
#include <vector>

#include "enose/cross_validation.hpp"

namespace enose {

struct CandidateResult {
  AlgorithmSpec spec;
  MetricsReport report;
};

struct StageComparison {
  std::string stage;  // "stage1" or "stage2:<Class>"
  std::string title;
  std::vector<CandidateResult> rows;
  std::size_t winner = 0;
};

struct SelectionResult {
  std::vector<StageComparison> stages;
  /// Winners; classes with a single label keep `fallback`'s entry.
  StageAssignment assignment;
};

/// Highest pooled accuracy, then F-1, then kappa, then list order.
std::size_t pick_winner(const std::vector<CandidateResult>& rows);

/// Stage 1 on class targets over all rows; stage 2 per class on label
/// targets over that class's rows, each under its own LOSO plan.
SelectionResult select_stage_models(const std::vector<AlgorithmSpec>& candidates, const Dataset& data,
                                    const CvOptions& options,
                                    const StageAssignment& fallback = StageAssignment::paper_default());

struct AblationRow {
  std::string name;
  MetricsReport report;
};

struct AblationReport {
  FoldPlan plan;
  AblationRow multistep;
  std::vector<AblationRow> flat;
  MultistepReport multistep_detail;
  const AblationRow& best_flat() const;
};

/// Both arms share one fold plan and the same per-fold seeds; every row is
/// scored on joint label/freshness correctness.
AblationReport run_ablation(const StageAssignment& assignment, const std::vector<AlgorithmSpec>& flat_candidates,
                            const Dataset& data, const CvOptions& options);

}  // namespace enose
