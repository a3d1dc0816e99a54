#include "enose/hierarchy.hpp"

#include <algorithm>

#include "enose/error.hpp"
#include "enose/random.hpp"

namespace enose {
namespace {

std::vector<std::string> names_of(std::span<const SpecificLabel> labels) {
  std::vector<std::string> out;
  for (auto l : labels) out.emplace_back(name(l));
  return out;
}

std::vector<std::string> freshness_names() {
  std::vector<std::string> out;
  for (auto f : kFreshnessLevels) out.emplace_back(name(f));
  return out;
}

Eigen::MatrixXd rows_matrix(const Dataset& data, std::span<const std::size_t> idx) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(kPredictorCount));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& v = data.row(idx[i]).features.values;
    for (std::size_t c = 0; c < kPredictorCount; ++c) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = v[c];
    }
  }
  return m;
}

// Trains on the selected rows, or returns a stub when only one target occurs.
TrainedClassifier fit_or_stub(const AlgorithmSpec& spec, const Dataset& data, std::span<const std::size_t> idx,
                              const std::vector<std::string>& targets, const std::vector<std::string>& order,
                              std::uint64_t seed) {
  std::vector<std::string> distinct;
  for (const auto& c : order) {
    if (std::find(targets.begin(), targets.end(), c) != targets.end()) distinct.push_back(c);
  }
  if (distinct.size() == 1) return TrainedClassifier::constant(distinct, 0);
  return train_classifier(spec, rows_matrix(data, idx), targets, seed, order);
}

std::vector<std::size_t> row_ids(const Dataset& data, std::span<const std::size_t> idx) {
  std::vector<std::size_t> ids;
  for (auto i : idx) ids.push_back(data.row(i).row_id);
  return ids;
}

template <typename Key>
const TrainedClassifier& branch(const std::map<Key, TrainedClassifier>& m, Key k, const char* stage) {
  auto it = m.find(k);
  if (it == m.end()) {
    throw MissingBranch(std::string(stage) + " has no model for '" + std::string(name(k)) +
                        "'; it was absent from training");
  }
  return it->second;
}

GeneralClass class_from(const std::string& s) {
  auto c = parse_general_class(s);
  if (!c) throw CorruptModel("unknown general class '" + s + "' in stage-1 model");
  return *c;
}

SpecificLabel label_from(const std::string& s) {
  auto l = parse_specific_label(s);
  if (!l) throw CorruptModel("unknown label '" + s + "' in stage-2 model");
  return *l;
}

FreshnessLevel freshness_from(const std::string& s) {
  auto f = parse_freshness(s);
  if (!f) throw CorruptModel("unknown freshness level '" + s + "' in stage-3 model");
  return *f;
}

}  // namespace

StageAssignment StageAssignment::paper_default() {
  StageAssignment a;
  a.stage1 = AlgorithmSpec::make(Algorithm::RandomForest);
  a.stage2[GeneralClass::Vegetable] = AlgorithmSpec::make(Algorithm::Svm);
  a.stage2[GeneralClass::Fruit] = AlgorithmSpec::make(Algorithm::Mlp);
  a.stage2[GeneralClass::Drink] = AlgorithmSpec::make(Algorithm::RandomForest);
  a.stage2[GeneralClass::Meat] = AlgorithmSpec::make(Algorithm::LogisticRegression);
  return a;
}

StageAssignment StageAssignment::uniform(const AlgorithmSpec& spec) {
  StageAssignment a;
  a.stage1 = spec;
  for (auto c : kGeneralClasses) a.stage2[c] = spec;
  return a;
}

AlgorithmSpec StageAssignment::stage3_spec() const {
  AlgorithmSpec s;
  s.params = stage3;
  s.preprocessing = Preprocessing::Raw;
  return s;
}

std::vector<std::string> general_class_names() {
  std::vector<std::string> out;
  for (auto c : kGeneralClasses) out.emplace_back(name(c));
  return out;
}

std::vector<std::string> joint_class_order() {
  std::vector<std::string> out;
  for (auto l : kSpecificLabels) {
    for (auto f : kFreshnessLevels) out.push_back(encode_joint(l, f));
  }
  return out;
}

HierarchicalModel train_multistep(const StageAssignment& assignment, const Dataset& data, std::uint64_t seed) {
  if (data.empty()) throw EmptyCorpus("cannot train on an empty dataset");
  std::vector<std::size_t> all(data.size());
  std::vector<std::string> class_targets;
  for (std::size_t i = 0; i < data.size(); ++i) {
    all[i] = i;
    class_targets.emplace_back(name(data.row(i).annotation.general_class));
  }
  const auto class_order = general_class_names();
  std::size_t distinct = 0;
  for (const auto& c : class_order) {
    distinct += std::count(class_targets.begin(), class_targets.end(), c) > 0 ? 1 : 0;
  }
  if (distinct < 2) {
    throw InsufficientClasses("the multi-step detector needs at least 2 general classes, found " +
                              std::to_string(distinct));
  }

  HierarchicalModel m{train_classifier(assignment.stage1, rows_matrix(data, all), class_targets,
                                       derive_seed(seed, 1), class_order),
                      {}, {}, seed, {}};
  m.audit.push_back({1, "", row_ids(data, all)});

  for (auto c : kGeneralClasses) {
    std::vector<std::size_t> idx;
    std::vector<std::string> targets;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.row(i).annotation.general_class != c) continue;
      idx.push_back(i);
      targets.emplace_back(name(data.row(i).annotation.label));
    }
    if (idx.empty()) continue;
    auto spec = assignment.stage2.find(c);
    if (spec == assignment.stage2.end()) {
      throw InvalidConfig("no stage-2 algorithm assigned for class " + std::string(name(c)));
    }
    m.stage2.emplace(c, fit_or_stub(spec->second, data, idx, targets, names_of(labels_of(c)),
                                    derive_seed(seed, 100 + index_of(c))));
    m.audit.push_back({2, std::string(name(c)), row_ids(data, idx)});
  }

  const AlgorithmSpec fresh = assignment.stage3_spec();
  const auto fresh_order = freshness_names();
  for (auto l : kSpecificLabels) {
    std::vector<std::size_t> idx;
    std::vector<std::string> targets;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.row(i).annotation.label != l) continue;
      idx.push_back(i);
      targets.emplace_back(name(data.row(i).annotation.freshness));
    }
    if (idx.empty()) continue;
    m.stage3.emplace(l, fit_or_stub(fresh, data, idx, targets, fresh_order, derive_seed(seed, 200 + index_of(l))));
    m.audit.push_back({3, std::string(name(l)), row_ids(data, idx)});
  }
  return m;
}

Verdict predict_multistep(const HierarchicalModel& model, std::span<const double> v) {
  Verdict out;
  const Prediction p1 = model.stage1.predict(v);
  out.annotation.general_class = class_from(p1.label);
  out.class_probabilities = p1.probabilities;

  const Prediction p2 = branch(model.stage2, out.annotation.general_class, "stage 2").predict(v);
  out.annotation.label = label_from(p2.label);
  out.label_probabilities = p2.probabilities;
  if (class_of(out.annotation.label) != out.annotation.general_class) {
    throw InvariantViolation("stage 2 returned a label outside the routed class");
  }

  const Prediction p3 = branch(model.stage3, out.annotation.label, "stage 3").predict(v);
  out.annotation.freshness = freshness_from(p3.label);
  out.freshness_probabilities = p3.probabilities;
  return out;
}

std::size_t majority_vote(std::span<const Eigen::VectorXd> probabilities) {
  if (probabilities.empty()) throw InvalidConfig("majority vote over zero cycles");
  const Eigen::Index k = probabilities.front().size();
  std::vector<std::size_t> votes(static_cast<std::size_t>(k), 0);
  std::vector<std::vector<double>> columns(static_cast<std::size_t>(k));
  for (const auto& p : probabilities) {
    ++votes[argmax_lowest(p)];
    for (Eigen::Index c = 0; c < k; ++c) columns[static_cast<std::size_t>(c)].push_back(p(c));
  }
  // Summing sorted values keeps the mean independent of cycle order.
  std::vector<double> mean(static_cast<std::size_t>(k));
  for (std::size_t c = 0; c < mean.size(); ++c) {
    std::sort(columns[c].begin(), columns[c].end());
    double s = 0.0;
    for (double x : columns[c]) s += x;
    mean[c] = s / static_cast<double>(probabilities.size());
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < votes.size(); ++c) {
    if (votes[c] > votes[best] || (votes[c] == votes[best] && mean[c] > mean[best])) best = c;
  }
  return best;
}

namespace {

Eigen::VectorXd mean_of(const std::vector<Eigen::VectorXd>& ps) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(ps.front().size());
  for (const auto& p : ps) m += p;
  return m / static_cast<double>(ps.size());
}

}  // namespace

Verdict predict_session(const HierarchicalModel& model, std::span<const FeatureVector> cycles) {
  if (cycles.empty()) throw InvalidConfig("session has no cycles");
  Verdict out;
  out.cycle_votes.resize(cycles.size());

  std::vector<Eigen::VectorXd> p1;
  for (std::size_t i = 0; i < cycles.size(); ++i) {
    p1.push_back(model.stage1.predict_proba(cycles[i].span()));
    out.cycle_votes[i].general_class = class_from(model.stage1.classes()[argmax_lowest(p1.back())]);
  }
  out.annotation.general_class = class_from(model.stage1.classes()[majority_vote(p1)]);
  out.class_probabilities = mean_of(p1);

  const TrainedClassifier& s2 = branch(model.stage2, out.annotation.general_class, "stage 2");
  std::vector<Eigen::VectorXd> p2;
  for (std::size_t i = 0; i < cycles.size(); ++i) {
    p2.push_back(s2.predict_proba(cycles[i].span()));
    out.cycle_votes[i].label = label_from(s2.classes()[argmax_lowest(p2.back())]);
  }
  out.annotation.label = label_from(s2.classes()[majority_vote(p2)]);
  out.label_probabilities = mean_of(p2);

  const TrainedClassifier& s3 = branch(model.stage3, out.annotation.label, "stage 3");
  std::vector<Eigen::VectorXd> p3;
  for (std::size_t i = 0; i < cycles.size(); ++i) {
    p3.push_back(s3.predict_proba(cycles[i].span()));
    out.cycle_votes[i].freshness = freshness_from(s3.classes()[argmax_lowest(p3.back())]);
  }
  out.annotation.freshness = freshness_from(s3.classes()[majority_vote(p3)]);
  out.freshness_probabilities = mean_of(p3);
  return out;
}

Verdict predict_session(const HierarchicalModel& model, const MeasurementSession& session) {
  std::vector<FeatureVector> cycles;
  for (const auto& c : session.cycles()) cycles.push_back(extract_features(c, session.session_id()));
  return predict_session(model, cycles);
}

TrainedClassifier train_flat(const AlgorithmSpec& spec, const Dataset& data, std::uint64_t seed) {
  if (data.empty()) throw EmptyCorpus("cannot train on an empty dataset");
  std::vector<std::string> targets;
  for (const auto& r : data.rows()) targets.push_back(encode_joint(r.annotation.label, r.annotation.freshness));
  const auto order = joint_class_order();
  return train_classifier(spec, data.matrix(), targets, seed, order);
}

}  // namespace enose
