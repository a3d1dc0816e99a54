#include "enose/selection.hpp"

#include "enose/error.hpp"

namespace enose {

std::size_t pick_winner(const std::vector<CandidateResult>& rows) {
  if (rows.empty()) throw InvalidConfig("no candidates to choose from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const MetricSummary& a = rows[i].report.metrics;
    const MetricSummary& b = rows[best].report.metrics;
    if (a.accuracy != b.accuracy) {
      if (a.accuracy > b.accuracy) best = i;
    } else if (a.f1 != b.f1) {
      if (a.f1 > b.f1) best = i;
    } else if (a.kappa > b.kappa) {
      best = i;
    }
  }
  return best;
}

SelectionResult select_stage_models(const std::vector<AlgorithmSpec>& candidates, const Dataset& data,
                                    const CvOptions& options, const StageAssignment& fallback) {
  if (candidates.empty()) throw InvalidConfig("select_stage_models needs at least one candidate");
  SelectionResult out;
  out.assignment = fallback;

  auto compare = [&](const std::string& stage, const std::string& title, const Dataset& subset, Target target) {
    StageComparison cmp;
    cmp.stage = stage;
    cmp.title = title;
    const FoldPlan plan = plan_loso(subset);
    for (const auto& spec : candidates) cmp.rows.push_back({spec, cross_validate(spec, subset, plan, target, options)});
    cmp.winner = pick_winner(cmp.rows);
    return cmp;
  };

  out.stages.push_back(compare("stage1", "Stage 1: general class", data, Target::GeneralClass));
  out.assignment.stage1 = out.stages.back().rows[out.stages.back().winner].spec;

  for (auto c : kGeneralClasses) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.row(i).annotation.general_class == c) idx.push_back(i);
    }
    if (idx.empty()) continue;
    const Dataset subset = data.subset(idx);
    if (target_classes(subset, Target::Label).size() < 2) continue;  // stage 2 is a stub
    const std::string cname(name(c));
    out.stages.push_back(compare("stage2:" + cname, "Stage 2: " + cname + " labels", subset, Target::Label));
    out.assignment.stage2[c] = out.stages.back().rows[out.stages.back().winner].spec;
  }
  return out;
}

const AblationRow& AblationReport::best_flat() const {
  if (flat.empty()) throw InvalidConfig("ablation has no one-step rows");
  std::size_t best = 0;
  for (std::size_t i = 1; i < flat.size(); ++i) {
    if (flat[i].report.metrics.accuracy > flat[best].report.metrics.accuracy) best = i;
  }
  return flat[best];
}

AblationReport run_ablation(const StageAssignment& assignment, const std::vector<AlgorithmSpec>& flat_candidates,
                            const Dataset& data, const CvOptions& options) {
  AblationReport out;
  out.plan = plan_loso(data);
  out.multistep_detail = cross_validate_multistep(assignment, data, out.plan, options);
  out.multistep = {"Multi-step detection", out.multistep_detail.end_to_end};
  for (const auto& spec : flat_candidates) {
    out.flat.push_back({spec.display_name(), cross_validate(spec, data, out.plan, Target::Joint, options)});
  }
  return out;
}

}  // namespace enose
