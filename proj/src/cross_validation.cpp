#include "enose/cross_validation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "enose/classifier.hpp"
#include "enose/error.hpp"
#include "enose/random.hpp"

namespace enose {

std::string FoldPlan::serialize() const {
  std::ostringstream out;
  for (const auto& f : folds) {
    out << f.session_id << "\ttrain";
    for (auto i : f.train) out << ' ' << i;
    out << "\tvalidation";
    for (auto i : f.validation) out << ' ' << i;
    out << '\n';
  }
  return out.str();
}

FoldPlan plan_loso(const Dataset& data) {
  const auto sessions = data.sessions();
  if (sessions.size() < 2) {
    throw TooFewSessions("leave-one-session-out needs at least 2 sessions, found " +
                         std::to_string(sessions.size()));
  }
  FoldPlan plan;
  for (const auto& s : sessions) {
    Fold f;
    f.session_id = s;
    for (std::size_t i = 0; i < data.size(); ++i) {
      (data.row(i).session_id == s ? f.validation : f.train).push_back(i);
    }
    plan.folds.push_back(std::move(f));
  }
  return plan;
}

void audit_disjoint(std::span<const std::size_t> fit_row_ids, std::span<const std::size_t> validation_row_ids,
                    const std::string& context) {
  const std::set<std::size_t> held(validation_row_ids.begin(), validation_row_ids.end());
  for (auto id : fit_row_ids) {
    if (held.count(id)) {
      throw InvariantViolation(context + ": row " + std::to_string(id) + " is used for fitting and validation");
    }
  }
}

void audit_fold_plan(const Dataset& data, const FoldPlan& plan) {
  for (const auto& f : plan.folds) {
    std::vector<std::size_t> train_ids, val_ids;
    for (auto i : f.validation) {
      if (data.row(i).session_id != f.session_id) {
        throw InvariantViolation("fold '" + f.session_id + "' validates on a row of session '" +
                                 data.row(i).session_id + "'");
      }
      val_ids.push_back(data.row(i).row_id);
    }
    for (auto i : f.train) {
      if (data.row(i).session_id == f.session_id) {
        throw InvariantViolation("fold '" + f.session_id + "' trains on its own held-out session");
      }
      train_ids.push_back(data.row(i).row_id);
    }
    audit_disjoint(train_ids, val_ids, "fold '" + f.session_id + "'");
  }
}

std::uint64_t fold_seed(std::uint64_t master, std::size_t fold_index) {
  return derive_seed(master, static_cast<std::uint64_t>(fold_index));
}

std::string target_of(const Annotation& a, Target t) {
  switch (t) {
    case Target::GeneralClass:
      return std::string(name(a.general_class));
    case Target::Label:
      return std::string(name(a.label));
    case Target::Freshness:
      return std::string(name(a.freshness));
    case Target::Joint:
      break;
  }
  return encode_joint(a.label, a.freshness);
}

std::vector<std::string> target_classes(const Dataset& data, Target t) {
  std::set<std::string> present;
  for (const auto& r : data.rows()) present.insert(target_of(r.annotation, t));
  std::vector<std::string> order;
  switch (t) {
    case Target::GeneralClass:
      order = general_class_names();
      break;
    case Target::Label:
      for (auto l : kSpecificLabels) order.emplace_back(name(l));
      break;
    case Target::Freshness:
      for (auto f : kFreshnessLevels) order.emplace_back(name(f));
      break;
    case Target::Joint:
      order = joint_class_order();
      break;
  }
  std::vector<std::string> out;
  for (auto& c : order) {
    if (present.count(c)) out.push_back(std::move(c));
  }
  return out;
}

MetricsReport make_report(std::vector<FoldResult> folds, std::vector<std::string> classes) {
  MetricsReport r;
  r.pooled = ConfusionMatrix(std::move(classes));
  for (auto& f : folds) {
    // A single held-out session touches few classes; score the fold on those.
    f.metrics = summarize(f.confusion.observed());
    r.pooled += f.confusion;
    r.fold_mean.accuracy += f.metrics.accuracy;
    r.fold_mean.f1 += f.metrics.f1;
    r.fold_mean.kappa += f.metrics.kappa;
  }
  if (!folds.empty()) {
    const double k = static_cast<double>(folds.size());
    r.fold_mean.accuracy /= k;
    r.fold_mean.f1 /= k;
    r.fold_mean.kappa /= k;
  }
  r.metrics = summarize(r.pooled);
  for (std::size_t c = 0; c < r.pooled.size(); ++c) {
    r.class_precision.push_back(precision(r.pooled, c));
    r.class_recall.push_back(recall(r.pooled, c));
  }
  r.folds = std::move(folds);
  return r;
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) threads.emplace_back(work);
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

std::vector<std::size_t> ids_of(const Dataset& d) {
  std::vector<std::size_t> ids;
  for (const auto& r : d.rows()) ids.push_back(r.row_id);
  return ids;
}

}  // namespace

MetricsReport cross_validate(const Dataset& data, const FoldPlan& plan, Target target,
                             const std::vector<std::string>& classes, const FoldPredictor& predictor,
                             const CvOptions& options) {
  audit_fold_plan(data, plan);
  std::vector<FoldResult> results(plan.folds.size(), FoldResult{{}, ConfusionMatrix(classes), {}});
  parallel_for(plan.folds.size(), options.jobs, [&](std::size_t k) {
    const Fold& f = plan.folds[k];
    const Dataset train = data.subset(f.train);
    const Dataset validation = data.subset(f.validation);
    audit_disjoint(ids_of(train), ids_of(validation), "fold '" + f.session_id + "'");
    const auto predicted = predictor(train, validation, fold_seed(options.seed, k));
    if (predicted.size() != validation.size()) {
      throw InvariantViolation("fold '" + f.session_id + "': predictor returned " +
                               std::to_string(predicted.size()) + " predictions for " +
                               std::to_string(validation.size()) + " rows");
    }
    results[k].session_id = f.session_id;
    for (std::size_t i = 0; i < validation.size(); ++i) {
      results[k].confusion.add(target_of(validation.row(i).annotation, target), predicted[i]);
    }
  });
  return make_report(std::move(results), classes);
}

MetricsReport cross_validate(const AlgorithmSpec& spec, const Dataset& data, const FoldPlan& plan, Target target,
                             const CvOptions& options) {
  spec.validate();
  const auto classes = target_classes(data, target);
  auto predictor = [&](const Dataset& train, const Dataset& validation, std::uint64_t seed) {
    std::vector<std::string> targets;
    for (const auto& r : train.rows()) targets.push_back(target_of(r.annotation, target));
    const TrainedClassifier model = train_classifier(spec, train.matrix(), targets, seed, classes);
    std::vector<std::string> out;
    for (const auto& r : validation.rows()) out.push_back(model.predict(r.features.span()).label);
    return out;
  };
  return cross_validate(data, plan, target, classes, predictor, options);
}

MetricsReport cross_validate(const AlgorithmSpec& spec, const Dataset& data, Target target, const CvOptions& options) {
  return cross_validate(spec, data, plan_loso(data), target, options);
}

namespace {

struct MultistepFold {
  ConfusionMatrix e2e{{}};
  ConfusionMatrix s1{{}};
  ConfusionMatrix routed{{}};
  std::map<GeneralClass, ConfusionMatrix> s2;
  std::map<SpecificLabel, ConfusionMatrix> s3;
};

Dataset rows_where(const Dataset& data, const std::function<bool(const Annotation&)>& keep) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (keep(data.row(i).annotation)) idx.push_back(i);
  }
  return data.subset(idx);
}

}  // namespace

MultistepReport cross_validate_multistep(const StageAssignment& assignment, const Dataset& data,
                                         const FoldPlan& plan, const CvOptions& options) {
  audit_fold_plan(data, plan);
  const auto joint = target_classes(data, Target::Joint);
  const auto general = target_classes(data, Target::GeneralClass);
  const auto labels = target_classes(data, Target::Label);
  std::map<GeneralClass, std::vector<std::string>> s2_classes;
  std::map<SpecificLabel, std::vector<std::string>> s3_classes;
  for (auto c : kGeneralClasses) {
    auto sub = rows_where(data, [c](const Annotation& a) { return a.general_class == c; });
    if (!sub.empty()) s2_classes[c] = target_classes(sub, Target::Label);
  }
  for (auto l : kSpecificLabels) {
    auto sub = rows_where(data, [l](const Annotation& a) { return a.label == l; });
    if (!sub.empty()) s3_classes[l] = target_classes(sub, Target::Freshness);
  }

  std::vector<MultistepFold> results(plan.folds.size());
  parallel_for(plan.folds.size(), options.jobs, [&](std::size_t k) {
    const Fold& f = plan.folds[k];
    const Dataset train = data.subset(f.train);
    const Dataset validation = data.subset(f.validation);
    const auto held = ids_of(validation);
    const HierarchicalModel model = train_multistep(assignment, train, fold_seed(options.seed, k));
    for (const auto& a : model.audit) {
      audit_disjoint(a.row_ids, held, "fold '" + f.session_id + "' stage " + std::to_string(a.stage));
    }

    MultistepFold& r = results[k];
    r.e2e = ConfusionMatrix(joint);
    r.s1 = ConfusionMatrix(general);
    r.routed = ConfusionMatrix(labels);
    for (const auto& row : validation.rows()) {
      const Annotation& truth = row.annotation;
      const Verdict v = predict_multistep(model, row.features.span());
      r.e2e.add(target_of(truth, Target::Joint), target_of(v.annotation, Target::Joint));
      r.s1.add(target_of(truth, Target::GeneralClass), target_of(v.annotation, Target::GeneralClass));
      r.routed.add(target_of(truth, Target::Label), target_of(v.annotation, Target::Label));

      auto s2 = model.stage2.find(truth.general_class);
      if (s2 != model.stage2.end()) {
        auto [it, _] = r.s2.try_emplace(truth.general_class, s2_classes.at(truth.general_class));
        it->second.add(target_of(truth, Target::Label), s2->second.predict(row.features.span()).label);
      }
      auto s3 = model.stage3.find(truth.label);
      if (s3 != model.stage3.end()) {
        auto [it, _] = r.s3.try_emplace(truth.label, s3_classes.at(truth.label));
        it->second.add(target_of(truth, Target::Freshness), s3->second.predict(row.features.span()).label);
      }
    }
  });

  MultistepReport out;
  std::vector<FoldResult> e2e, s1, routed;
  std::map<GeneralClass, std::vector<FoldResult>> s2;
  std::map<SpecificLabel, std::vector<FoldResult>> s3;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const std::string& id = plan.folds[k].session_id;
    e2e.push_back({id, results[k].e2e, {}});
    s1.push_back({id, results[k].s1, {}});
    routed.push_back({id, results[k].routed, {}});
    for (auto& [c, cm] : results[k].s2) s2[c].push_back({id, cm, {}});
    for (auto& [l, cm] : results[k].s3) s3[l].push_back({id, cm, {}});
  }
  out.end_to_end = make_report(std::move(e2e), joint);
  out.stage1 = make_report(std::move(s1), general);
  out.routed_label = make_report(std::move(routed), labels);
  for (auto& [c, folds] : s2) out.stage2.emplace(c, make_report(std::move(folds), s2_classes.at(c)));
  for (auto& [l, folds] : s3) out.stage3.emplace(l, make_report(std::move(folds), s3_classes.at(l)));
  return out;
}

}  // namespace enose
