#pragma once

// Text tables and JSON for comparison and ablation reports.

#include <string>

#include "enose/selection.hpp"

namespace enose {

struct ReportOptions {
  bool timestamp = true;
  /// Overrides the clock, mostly for tests; empty means now (UTC).
  std::string generated_at;
};

std::string selection_text(const SelectionResult& result, const ReportOptions& options = {});
std::string selection_json(const SelectionResult& result, const ReportOptions& options = {});

std::string ablation_text(const AblationReport& report, const ReportOptions& options = {});
std::string ablation_json(const AblationReport& report, const ReportOptions& options = {});

std::string multistep_text(const MultistepReport& report, const ReportOptions& options = {});
std::string multistep_json(const MultistepReport& report, const ReportOptions& options = {});

}  // namespace enose
