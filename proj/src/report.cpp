#include "enose/report.hpp"

#include <chrono>
#include <ctime>
#include <iomanip>
#include <json.hpp>
#include <sstream>

namespace enose {
namespace {

using nlohmann::ordered_json;

std::string now_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

std::string stamp(const ReportOptions& o) { return o.generated_at.empty() ? now_utc() : o.generated_at; }

void header(std::ostringstream& out, const ReportOptions& o) {
  if (o.timestamp) out << "# generated " << stamp(o) << "\n";
}

std::string fixed4(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

constexpr int kNameWidth = 36;

void table_head(std::ostringstream& out) {
  out << std::left << std::setw(kNameWidth) << "Algorithm" << std::right << std::setw(10) << "Accuracy"
      << std::setw(11) << "F-1 score" << std::setw(19) << "Kappa coefficient" << "\n";
}

void table_row(std::ostringstream& out, const std::string& name, const MetricSummary& m) {
  out << std::left << std::setw(kNameWidth) << name << std::right << std::setw(10) << fixed4(m.accuracy)
      << std::setw(11) << fixed4(m.f1) << std::setw(19) << fixed4(m.kappa) << "\n";
}

ordered_json summary_json(const MetricSummary& m) {
  return {{"accuracy", m.accuracy}, {"f1", m.f1}, {"kappa", m.kappa}};
}

ordered_json report_row(const std::string& algorithm, const std::string& key, const std::string& stage,
                        const MetricsReport& r) {
  ordered_json row;
  row["algorithm"] = algorithm;
  if (!key.empty()) row["key"] = key;
  row["stage"] = stage;
  row["accuracy"] = r.metrics.accuracy;
  row["f1"] = r.metrics.f1;
  row["kappa"] = r.metrics.kappa;
  row["folds"] = r.fold_count();
  row["fold_mean"] = summary_json(r.fold_mean);
  ordered_json folds = ordered_json::array();
  for (const auto& f : r.folds) {
    folds.push_back({{"session", f.session_id},
                     {"accuracy", f.metrics.accuracy},
                     {"f1", f.metrics.f1},
                     {"kappa", f.metrics.kappa}});
  }
  row["per_fold"] = std::move(folds);
  return row;
}

std::string wrap_json(ordered_json body, const ReportOptions& o) {
  ordered_json doc;
  if (o.timestamp) doc["generated"] = stamp(o);
  for (auto& [k, v] : body.items()) doc[k] = v;
  return doc.dump(2) + "\n";
}

}  // namespace

std::string selection_text(const SelectionResult& result, const ReportOptions& options) {
  std::ostringstream out;
  header(out, options);
  for (std::size_t s = 0; s < result.stages.size(); ++s) {
    const StageComparison& cmp = result.stages[s];
    if (s > 0) out << "\n";
    const std::size_t folds = cmp.rows.empty() ? 0 : cmp.rows.front().report.fold_count();
    out << cmp.title << " (leave-one-session-out, " << folds << " folds, pooled)\n";
    table_head(out);
    for (const auto& row : cmp.rows) table_row(out, row.spec.display_name(), row.report.metrics);
    out << "Mean over folds\n";
    table_head(out);
    for (const auto& row : cmp.rows) table_row(out, row.spec.display_name(), row.report.fold_mean);
    out << "Selected: " << cmp.rows[cmp.winner].spec.display_name() << "\n";
  }
  return out.str();
}

std::string selection_json(const SelectionResult& result, const ReportOptions& options) {
  ordered_json rows = ordered_json::array();
  ordered_json winners = ordered_json::object();
  for (const auto& cmp : result.stages) {
    for (const auto& row : cmp.rows) rows.push_back(report_row(row.spec.display_name(), row.spec.key(), cmp.stage, row.report));
    winners[cmp.stage] = cmp.rows[cmp.winner].spec.key();
  }
  ordered_json body;
  body["rows"] = std::move(rows);
  body["selected"] = std::move(winners);
  return wrap_json(std::move(body), options);
}

std::string ablation_text(const AblationReport& report, const ReportOptions& options) {
  std::ostringstream out;
  header(out, options);
  out << "Multi-step vs one-step detection (leave-one-session-out, " << report.plan.folds.size()
      << " folds, pooled)\n";
  out << "A prediction is correct only when both label and freshness are correct.\n";
  table_head(out);
  table_row(out, report.multistep.name, report.multistep.report.metrics);
  for (const auto& row : report.flat) table_row(out, "One-step " + row.name, row.report.metrics);
  out << "Mean over folds\n";
  table_head(out);
  table_row(out, report.multistep.name, report.multistep.report.fold_mean);
  for (const auto& row : report.flat) table_row(out, "One-step " + row.name, row.report.fold_mean);
  out << "\n" << multistep_text(report.multistep_detail, ReportOptions{false, {}});
  return out.str();
}

std::string ablation_json(const AblationReport& report, const ReportOptions& options) {
  ordered_json rows = ordered_json::array();
  rows.push_back(report_row(report.multistep.name, "", "multistep", report.multistep.report));
  for (const auto& row : report.flat) rows.push_back(report_row(row.name, "", "onestep", row.report));
  ordered_json body;
  body["rows"] = std::move(rows);
  return wrap_json(std::move(body), options);
}

std::string multistep_text(const MultistepReport& report, const ReportOptions& options) {
  std::ostringstream out;
  header(out, options);
  out << "Multi-step detector by stage (pooled)\n";
  out << std::left << std::setw(kNameWidth) << "Stage" << std::right << std::setw(10) << "Accuracy"
      << std::setw(11) << "F-1 score" << std::setw(19) << "Kappa coefficient" << "\n";
  table_row(out, "Class", report.stage1.metrics);
  table_row(out, "Label (routed)", report.routed_label.metrics);
  for (const auto& [c, r] : report.stage2) table_row(out, "Label | " + std::string(name(c)), r.metrics);
  for (const auto& [l, r] : report.stage3) table_row(out, "Freshness | " + std::string(name(l)), r.metrics);
  table_row(out, "End to end", report.end_to_end.metrics);
  return out.str();
}

std::string multistep_json(const MultistepReport& report, const ReportOptions& options) {
  ordered_json rows = ordered_json::array();
  rows.push_back(report_row("Multi-step detection", "", "end_to_end", report.end_to_end));
  rows.push_back(report_row("Multi-step detection", "", "stage1", report.stage1));
  rows.push_back(report_row("Multi-step detection", "", "stage2:routed", report.routed_label));
  for (const auto& [c, r] : report.stage2) {
    rows.push_back(report_row("Multi-step detection", "", "stage2:" + std::string(name(c)), r));
  }
  for (const auto& [l, r] : report.stage3) {
    rows.push_back(report_row("Multi-step detection", "", "stage3:" + std::string(name(l)), r));
  }
  ordered_json body;
  body["rows"] = std::move(rows);
  return wrap_json(std::move(body), options);
}

}  // namespace enose
