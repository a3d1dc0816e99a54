// Command-line front end: synth, ingest, train, evaluate, ablate, predict, project.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "enose/corpus_io.hpp"
#include "enose/error.hpp"
#include "enose/hierarchy.hpp"
#include "enose/projection.hpp"
#include "enose/report.hpp"
#include "enose/selection.hpp"
#include "enose/synth.hpp"

namespace fs = std::filesystem;
using namespace enose;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kInput = 2, kModel = 3, kInvariant = 4 };

struct Options {
  std::string corpus;
  std::string input;
  std::string mapping;
  std::string bundle;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string preset = "hier";
  int sessions_per_cell = 0;
  int cycles = 0;
  std::string stage1;
  std::vector<std::string> stage2;
  std::string candidates;
  std::string stage = "1";
  std::string format = "text";
  int jobs = 1;
  bool no_timestamp = false;
};

void require_file(const std::string& path) {
  if (path.empty()) throw InvalidConfig("--corpus is required");
  if (!fs::is_regular_file(path)) throw InputError("file not found: " + path);
}

// Fails before any work when the output's parent directory does not exist.
void require_out_parent(const std::string& out) {
  if (out.empty()) return;
  const fs::path parent = fs::absolute(fs::path(out)).parent_path();
  if (!fs::is_directory(parent)) throw InputError("output directory not found: " + parent.string());
}

std::uint64_t require_seed(const Options& o) {
  if (!o.seed) throw InvalidConfig("--seed is required for this subcommand");
  return *o.seed;
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_text_file_atomic(o.out, text);
  }
}

Dataset load_dataset(const Options& o) {
  require_file(o.corpus);
  return build_dataset(load_corpus(o.corpus));
}

StageAssignment assignment_from(const Options& o) {
  StageAssignment a = StageAssignment::paper_default();
  if (!o.stage1.empty()) a.stage1 = parse_algorithm_spec(o.stage1);
  for (const auto& item : o.stage2) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InvalidConfig("--stage2 expects <Class>=<alg>, got '" + item + "'");
    const auto cls = parse_general_class(item.substr(0, eq));
    if (!cls) throw InvalidConfig("unknown general class '" + item.substr(0, eq) + "'");
    a.stage2[*cls] = parse_algorithm_spec(item.substr(eq + 1));
  }
  return a;
}

ReportOptions report_options(const Options& o) { return ReportOptions{!o.no_timestamp, {}}; }

void check_format(const Options& o) {
  if (o.format != "text" && o.format != "json") throw InvalidConfig("--format must be text or json");
}

int cmd_synth(const Options& o) {
  const std::uint64_t seed = require_seed(o);
  require_out_parent(o.out);
  SynthConfig c = synth_preset(o.preset, seed);
  if (o.sessions_per_cell > 0) c.sessions_per_cell = o.sessions_per_cell;
  if (o.cycles > 0) c.cycles_per_session = o.cycles;
  const auto sessions = generate_corpus(c);
  emit(o, serialize_corpus(sessions));
  if (!o.out.empty()) std::cerr << "wrote " << sessions.size() << " sessions to " << o.out << "\n";
  return kOk;
}

int cmd_ingest(const Options& o) {
  if (o.input.empty()) throw InvalidConfig("--input is required");
  if (!fs::is_regular_file(o.input)) throw InputError("file not found: " + o.input);
  if (!o.mapping.empty() && !fs::is_regular_file(o.mapping)) throw InputError("file not found: " + o.mapping);
  require_out_parent(o.out);
  RawImportOptions options;
  if (!o.mapping.empty()) options = parse_import_mapping(read_text_file(o.mapping));
  const ImportResult r = import_raw_export(read_text_file(o.input), options);
  emit(o, serialize_corpus(r.sessions));
  std::cerr << "sessions: " << r.sessions.size() << "\ncycles: " << r.cycle_count << "\nwarnings: " << r.warnings.size()
            << "\n";
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  return kOk;
}

int cmd_train(const Options& o) {
  const std::uint64_t seed = require_seed(o);
  if (o.out.empty()) throw InvalidConfig("--out (bundle directory) is required");
  require_out_parent(o.out);
  const StageAssignment a = assignment_from(o);
  const Dataset data = load_dataset(o);
  const HierarchicalModel model = train_multistep(a, data, seed);
  save_bundle(model, o.out);
  std::cerr << "trained on " << data.size() << " rows; bundle written to " << o.out << "\n";
  return kOk;
}

int cmd_evaluate(const Options& o) {
  const std::uint64_t seed = require_seed(o);
  check_format(o);
  require_out_parent(o.out);
  const auto candidates = parse_candidates(o.candidates.empty() ? "all" : o.candidates);
  const Dataset data = load_dataset(o);
  const SelectionResult r = select_stage_models(candidates, data, CvOptions{seed, o.jobs});
  emit(o, o.format == "json" ? selection_json(r, report_options(o)) : selection_text(r, report_options(o)));
  return kOk;
}

int cmd_ablate(const Options& o) {
  const std::uint64_t seed = require_seed(o);
  check_format(o);
  require_out_parent(o.out);
  const StageAssignment a = assignment_from(o);
  const auto candidates = parse_candidates(o.candidates.empty() ? "paper" : o.candidates);
  const Dataset data = load_dataset(o);
  const AblationReport r = run_ablation(a, candidates, data, CvOptions{seed, o.jobs});
  emit(o, o.format == "json" ? ablation_json(r, report_options(o)) : ablation_text(r, report_options(o)));
  return kOk;
}

double max_of(const Eigen::VectorXd& p) { return p.size() ? p.maxCoeff() : 0.0; }

nlohmann::ordered_json probabilities(const Eigen::VectorXd& p, const std::vector<std::string>& names) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (Eigen::Index i = 0; i < p.size(); ++i) out[names.at(static_cast<std::size_t>(i))] = p(i);
  return out;
}

int cmd_predict(const Options& o) {
  check_format(o);
  if (o.bundle.empty()) throw InvalidConfig("--bundle is required");
  require_file(o.corpus);
  require_out_parent(o.out);
  const HierarchicalModel model = load_bundle(o.bundle);
  const auto sessions = load_corpus(o.corpus);
  std::string text;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& s : sessions) {
    const Verdict v = predict_session(model, s);
    const Annotation& a = v.annotation;
    if (o.format == "json") {
      nlohmann::ordered_json row;
      row["session_id"] = s.session_id();
      row["class"] = std::string(name(a.general_class));
      row["label"] = std::string(name(a.label));
      row["freshness"] = std::string(name(a.freshness));
      row["class_probabilities"] = probabilities(v.class_probabilities, model.stage1.classes());
      row["label_probabilities"] =
          probabilities(v.label_probabilities, model.stage2.at(a.general_class).classes());
      row["freshness_probabilities"] =
          probabilities(v.freshness_probabilities, model.stage3.at(a.label).classes());
      row["cycles"] = v.cycle_votes.size();
      rows.push_back(std::move(row));
    } else {
      char line[512];
      std::snprintf(line, sizeof line, "%s\t%s\t%s\t%s\tp=%.4f/%.4f/%.4f\n", s.session_id().c_str(),
                    std::string(name(a.general_class)).c_str(), std::string(name(a.label)).c_str(),
                    std::string(name(a.freshness)).c_str(), max_of(v.class_probabilities),
                    max_of(v.label_probabilities), max_of(v.freshness_probabilities));
      text += line;
    }
  }
  emit(o, o.format == "json" ? rows.dump(2) + "\n" : text);
  return kOk;
}

int cmd_project(const Options& o) {
  require_out_parent(o.out);
  const Dataset data = load_dataset(o);
  std::vector<std::size_t> keep;
  std::vector<std::string> targets;
  std::vector<std::string> order;
  if (o.stage == "1") {
    order = general_class_names();
    for (std::size_t i = 0; i < data.size(); ++i) {
      keep.push_back(i);
      targets.emplace_back(name(data.row(i).annotation.general_class));
    }
  } else if (o.stage.rfind("2:", 0) == 0) {
    const auto cls = parse_general_class(o.stage.substr(2));
    if (!cls) throw InvalidConfig("unknown general class in --stage '" + o.stage + "'");
    for (auto l : labels_of(*cls)) order.emplace_back(name(l));
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.row(i).annotation.general_class != *cls) continue;
      keep.push_back(i);
      targets.emplace_back(name(data.row(i).annotation.label));
    }
  } else {
    throw InvalidConfig("--stage must be 1 or 2:<Class>");
  }
  const Dataset rows = data.subset(keep);
  // Only classes that occur take part in the fit.
  std::vector<std::string> classes;
  for (const auto& c : order) {
    if (std::find(targets.begin(), targets.end(), c) != targets.end()) classes.push_back(c);
  }
  if (classes.size() < 2) throw InsufficientClasses("projection needs at least two classes");
  std::vector<int> y;
  for (const auto& t : targets) {
    y.push_back(static_cast<int>(std::find(classes.begin(), classes.end(), t) - classes.begin()));
  }
  const Eigen::MatrixXd x = rows.matrix();
  const ProjectionModel model = fit_projection(x, y, classes.size());
  emit(o, export_projection_scatter(model, x, targets).to_csv());
  return kOk;
}

int run_guarded(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kInvariant;
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return kModel;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const FitError& e) {
    std::cerr << "fit error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Electronic-nose food classification: class, label and freshness"};
  app.require_subcommand(1);
  Options o;

  auto add_corpus = [&](CLI::App* c) { c->add_option("--corpus", o.corpus, "Canonical corpus JSON file"); };
  auto add_seed = [&](CLI::App* c) { c->add_option("--seed", o.seed, "Master seed"); };
  auto add_out = [&](CLI::App* c, const std::string& what) { c->add_option("--out", o.out, what); };
  auto add_report = [&](CLI::App* c) {
    c->add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}));
    c->add_flag("--no-timestamp", o.no_timestamp, "Omit the generated-at header");
    c->add_option("--jobs", o.jobs, "Folds evaluated in parallel")->check(CLI::PositiveNumber);
  };
  auto add_stages = [&](CLI::App* c) {
    c->add_option("--stage1", o.stage1, "Stage-1 algorithm key, e.g. rf");
    c->add_option("--stage2", o.stage2, "Stage-2 override <Class>=<alg>; repeatable");
  };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("--preset", o.preset, "easy, hier, flat or hard")
      ->check(CLI::IsMember({"easy", "hier", "flat", "hard"}));
  add_seed(synth);
  synth->add_option("--sessions-per-cell", o.sessions_per_cell, "Override sessions per (label, freshness)");
  synth->add_option("--cycles", o.cycles, "Override cycles per session");
  add_out(synth, "Corpus file (default stdout)");

  auto* ingest = app.add_subcommand("ingest", "Convert a raw sensor export to the canonical corpus");
  ingest->add_option("--input", o.input, "Raw export JSON");
  ingest->add_option("--mapping", o.mapping, "Column mapping JSON");
  add_out(ingest, "Corpus file (default stdout)");

  auto* train = app.add_subcommand("train", "Train the three-stage detector and write a bundle");
  add_corpus(train);
  add_seed(train);
  add_stages(train);
  add_out(train, "Bundle directory");

  auto* evaluate = app.add_subcommand("evaluate", "Compare candidates per stage under leave-one-session-out");
  add_corpus(evaluate);
  add_seed(evaluate);
  evaluate->add_option("--candidates", o.candidates, "all, paper or a comma-separated key list");
  add_report(evaluate);
  add_out(evaluate, "Report file (default stdout)");

  auto* ablate = app.add_subcommand("ablate", "Multi-step detector vs flat one-step classifiers");
  add_corpus(ablate);
  add_seed(ablate);
  add_stages(ablate);
  ablate->add_option("--candidates", o.candidates, "Flat candidates: all, paper or a key list");
  add_report(ablate);
  add_out(ablate, "Report file (default stdout)");

  auto* predict = app.add_subcommand("predict", "Per-session verdicts from a trained bundle");
  predict->add_option("--bundle", o.bundle, "Bundle directory");
  add_corpus(predict);
  predict->add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}));
  add_out(predict, "Output file (default stdout)");

  auto* project = app.add_subcommand("project", "Export the PCA/LDA projection as scatter CSV");
  add_corpus(project);
  project->add_option("--stage", o.stage, "1 or 2:<Class>");
  add_out(project, "CSV file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  if (synth->parsed()) return run_guarded([&] { return cmd_synth(o); });
  if (ingest->parsed()) return run_guarded([&] { return cmd_ingest(o); });
  if (train->parsed()) return run_guarded([&] { return cmd_train(o); });
  if (evaluate->parsed()) return run_guarded([&] { return cmd_evaluate(o); });
  if (ablate->parsed()) return run_guarded([&] { return cmd_ablate(o); });
  if (predict->parsed()) return run_guarded([&] { return cmd_predict(o); });
  return run_guarded([&] { return cmd_project(o); });
}
