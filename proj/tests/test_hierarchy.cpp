#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "enose/error.hpp"
#include "enose/hierarchy.hpp"
#include "support.hpp"

using namespace enose;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::path(testing::TempDir()) / ("enose_hier_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::pair<SpecificLabel, FreshnessLevel>> all_cells() {
  std::vector<std::pair<SpecificLabel, FreshnessLevel>> cells;
  for (SpecificLabel l : kSpecificLabels) {
    for (FreshnessLevel f : kFreshnessLevels) cells.emplace_back(l, f);
  }
  return cells;
}

// Trained once: every cell of the easy preset, two sessions of three cycles.
class FullCorpus : public testing::Test {
 protected:
  static void SetUpTestSuite() {
    sessions_ = new std::vector<MeasurementSession>(test::small_corpus(all_cells(), 2, 3, 5));
    data_ = new Dataset(build_dataset(*sessions_));
    model_ = new HierarchicalModel(train_multistep(StageAssignment::paper_default(), *data_, 9));
  }
  static void TearDownTestSuite() {
    delete model_;
    delete data_;
    delete sessions_;
  }
  static std::vector<MeasurementSession>* sessions_;
  static Dataset* data_;
  static HierarchicalModel* model_;
};

std::vector<MeasurementSession>* FullCorpus::sessions_ = nullptr;
Dataset* FullCorpus::data_ = nullptr;
HierarchicalModel* FullCorpus::model_ = nullptr;

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_F(FullCorpus, CoversEveryClassAndLabel) {
  EXPECT_EQ(model_->stage2.size(), 4u);
  EXPECT_EQ(model_->stage3.size(), 14u);
  EXPECT_EQ(model_->stage1.classes().size(), 4u);
  for (const auto& [c, m] : model_->stage2) {
    EXPECT_FALSE(m.is_stub());
    EXPECT_EQ(m.classes().size(), labels_of(c).size());
  }
  for (const auto& [l, m] : model_->stage3) EXPECT_EQ(m.classes().size(), 4u);
}

TEST_F(FullCorpus, RoutesAClusterCentreToItsCell) {
  const auto table = signature_table(synth_preset("easy", 5));
  const auto& sig = table.at(SpecificLabel::Banana, FreshnessLevel::Rotten);
  const Verdict v = predict_multistep(*model_, sig);
  EXPECT_EQ(v.annotation.general_class, GeneralClass::Fruit);
  EXPECT_EQ(v.annotation.label, SpecificLabel::Banana);
  EXPECT_EQ(v.annotation.freshness, FreshnessLevel::Rotten);
  EXPECT_NEAR(v.class_probabilities.sum(), 1.0, 1e-9);
  EXPECT_NEAR(v.freshness_probabilities.sum(), 1.0, 1e-9);
}

TEST_F(FullCorpus, LabelAlwaysBelongsToPredictedClass) {
  std::mt19937_64 rng(12);
  const Eigen::MatrixXd x = data_->matrix();
  const Eigen::VectorXd lo = x.colwise().minCoeff();
  const Eigen::VectorXd hi = x.colwise().maxCoeff();
  std::uniform_real_distribution<double> u(-0.25, 1.25);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> v(40);
    for (std::size_t j = 0; j < 40; ++j) {
      const auto k = static_cast<Eigen::Index>(j);
      v[j] = lo(k) + u(rng) * (hi(k) - lo(k));
    }
    const Verdict verdict = predict_multistep(*model_, v);
    EXPECT_EQ(class_of(verdict.annotation.label), verdict.annotation.general_class);
  }
}

TEST_F(FullCorpus, StageModelsSeeOnlyTheirBranch) {
  ASSERT_FALSE(model_->audit.empty());
  std::size_t checked = 0;
  for (const auto& a : model_->audit) {
    for (std::size_t id : a.row_ids) {
      const Annotation& ann = data_->row(id).annotation;
      ASSERT_EQ(data_->row(id).row_id, id);
      if (a.stage == 2) EXPECT_EQ(name(ann.general_class), a.branch);
      if (a.stage == 3) EXPECT_EQ(name(ann.label), a.branch);
      ++checked;
    }
    if (a.stage == 1) EXPECT_EQ(a.row_ids.size(), data_->size());
  }
  EXPECT_EQ(checked, 3 * data_->size());
}

TEST_F(FullCorpus, MissingBranchIsReported) {
  const auto table = signature_table(synth_preset("easy", 5));
  HierarchicalModel pruned = *model_;
  pruned.stage3.erase(SpecificLabel::Banana);
  EXPECT_THROW(predict_multistep(pruned, table.at(SpecificLabel::Banana, FreshnessLevel::Rotten)), MissingBranch);
  pruned = *model_;
  pruned.stage2.erase(GeneralClass::Fruit);
  EXPECT_THROW(predict_multistep(pruned, table.at(SpecificLabel::Banana, FreshnessLevel::Rotten)), MissingBranch);
  EXPECT_THROW(predict_multistep(*model_, std::vector<double>(39, 1.0)), DimensionMismatch);
}

TEST_F(FullCorpus, SessionVoteIgnoresCycleOrder) {
  const auto& s = sessions_->front();
  const Verdict a = predict_session(*model_, s);
  auto cycles = s.cycles();
  std::reverse(cycles.begin(), cycles.end());
  const MeasurementSession reversed(s.session_id(), s.annotation(), cycles);
  const Verdict b = predict_session(*model_, reversed);
  EXPECT_EQ(a.annotation, b.annotation);
  EXPECT_TRUE(a.class_probabilities.isApprox(b.class_probabilities, 1e-12));
  EXPECT_EQ(a.cycle_votes.size(), 3u);
}

TEST_F(FullCorpus, SingleCycleSessionMatchesCyclePrediction) {
  const auto& s = (*sessions_)[7];
  const MeasurementSession one(s.session_id(), s.annotation(), {s.cycles().front()});
  const Verdict a = predict_session(*model_, one);
  const Verdict b = predict_multistep(*model_, extract_features(s.cycles().front()).values);
  EXPECT_EQ(a.annotation, b.annotation);
  EXPECT_EQ(a.class_probabilities, b.class_probabilities);
  EXPECT_EQ(a.freshness_probabilities, b.freshness_probabilities);
}

TEST_F(FullCorpus, BundleRoundTrip) {
  const fs::path dir = scratch_dir("roundtrip");
  save_bundle(*model_, dir);
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
  EXPECT_TRUE(fs::exists(dir / "stage2" / "Fruit.json"));
  EXPECT_TRUE(fs::exists(dir / "stage3" / "Banana.json"));
  const HierarchicalModel back = load_bundle(dir);
  for (std::size_t i = 0; i < data_->size(); i += 17) {
    const auto v = data_->row(i).features.span();
    const Verdict a = predict_multistep(*model_, v);
    const Verdict b = predict_multistep(back, v);
    EXPECT_EQ(a.annotation, b.annotation);
    EXPECT_EQ(a.freshness_probabilities, b.freshness_probabilities);
  }
  fs::remove_all(dir);
}

TEST_F(FullCorpus, CorruptBundleRejected) {
  const fs::path dir = scratch_dir("corrupt");
  save_bundle(*model_, dir);
  const std::string text = slurp(dir / "stage1.json");
  std::ofstream(dir / "stage1.json", std::ios::trunc) << text.substr(0, text.size() / 3);
  EXPECT_THROW(load_bundle(dir), CorruptModel);
  fs::remove_all(dir);
  EXPECT_THROW(load_bundle(dir), ModelError);
}

TEST(Hierarchy, TrainingIsDeterministic) {
  const auto sessions = test::small_corpus({{SpecificLabel::Apple, FreshnessLevel::Fresh},
                                            {SpecificLabel::Apple, FreshnessLevel::Rotten},
                                            {SpecificLabel::Pear, FreshnessLevel::Fresh},
                                            {SpecificLabel::Milk, FreshnessLevel::Fresh},
                                            {SpecificLabel::Coffee, FreshnessLevel::Fresh},
                                            {SpecificLabel::Coffee, FreshnessLevel::Rotten}},
                                           2, 3, 3);
  const Dataset data = build_dataset(sessions);
  const fs::path a = scratch_dir("det_a");
  const fs::path b = scratch_dir("det_b");
  save_bundle(train_multistep(StageAssignment::paper_default(), data, 4), a);
  save_bundle(train_multistep(StageAssignment::paper_default(), data, 4), b);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a);
    EXPECT_EQ(slurp(e.path()), slurp(b / rel)) << rel;
    ++files;
  }
  EXPECT_EQ(files, 1u + 1u + 2u + 4u);  // manifest, stage 1, two classes, four labels
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Hierarchy, DegenerateBranchesBecomeStubs) {
  // Fruit has only Banana; Pork has only one freshness level.
  const auto sessions = test::small_corpus({{SpecificLabel::Banana, FreshnessLevel::Fresh},
                                            {SpecificLabel::Banana, FreshnessLevel::Rotten},
                                            {SpecificLabel::Pork, FreshnessLevel::PartiallyRotten},
                                            {SpecificLabel::Steak, FreshnessLevel::Fresh},
                                            {SpecificLabel::Steak, FreshnessLevel::Rotten}},
                                           2, 3, 8);
  const Dataset data = build_dataset(sessions);
  const HierarchicalModel m = train_multistep(StageAssignment::paper_default(), data, 1);
  ASSERT_TRUE(m.stage2.at(GeneralClass::Fruit).is_stub());
  ASSERT_TRUE(m.stage3.at(SpecificLabel::Pork).is_stub());
  EXPECT_FALSE(m.stage2.at(GeneralClass::Meat).is_stub());

  const auto table = signature_table(synth_preset("easy", 8));
  const Verdict fruit = predict_multistep(m, table.at(SpecificLabel::Banana, FreshnessLevel::Fresh));
  EXPECT_EQ(fruit.annotation.label, SpecificLabel::Banana);
  EXPECT_DOUBLE_EQ(fruit.label_probabilities.maxCoeff(), 1.0);
  const Verdict pork = predict_multistep(m, table.at(SpecificLabel::Pork, FreshnessLevel::PartiallyRotten));
  if (pork.annotation.label == SpecificLabel::Pork) {
    EXPECT_EQ(pork.annotation.freshness, FreshnessLevel::PartiallyRotten);
    EXPECT_DOUBLE_EQ(pork.freshness_probabilities.maxCoeff(), 1.0);
  }
}

TEST(Hierarchy, NeedsTwoGeneralClasses) {
  const auto sessions = test::small_corpus({{SpecificLabel::Apple, FreshnessLevel::Fresh},
                                            {SpecificLabel::Pear, FreshnessLevel::Fresh}},
                                           2, 2, 1);
  EXPECT_THROW(train_multistep(StageAssignment::paper_default(), build_dataset(sessions), 1), InsufficientClasses);
}

TEST(Hierarchy, PaperDefaultAssignment) {
  const auto a = StageAssignment::paper_default();
  EXPECT_EQ(a.stage1.algorithm(), Algorithm::RandomForest);
  EXPECT_EQ(a.stage2.at(GeneralClass::Vegetable).algorithm(), Algorithm::Svm);
  EXPECT_EQ(a.stage2.at(GeneralClass::Fruit).algorithm(), Algorithm::Mlp);
  EXPECT_EQ(a.stage2.at(GeneralClass::Drink).algorithm(), Algorithm::RandomForest);
  EXPECT_EQ(a.stage2.at(GeneralClass::Meat).algorithm(), Algorithm::LogisticRegression);
  EXPECT_EQ(a.stage3.hidden, (std::vector<int>{16, 16}));
}

TEST(MajorityVote, MostVotesWin) {
  const std::vector<Eigen::VectorXd> p{vec({0.2, 0.7, 0.1}), vec({0.1, 0.8, 0.1}), vec({0.1, 0.1, 0.8})};
  EXPECT_EQ(majority_vote(p), 1u);
}

TEST(MajorityVote, TieGoesToHigherMeanProbability) {
  const std::vector<Eigen::VectorXd> p{vec({0.2, 0.8}), vec({0.2, 0.8}), vec({0.6, 0.4}), vec({0.6, 0.4})};
  EXPECT_EQ(majority_vote(p), 1u);
  const std::vector<Eigen::VectorXd> q{vec({0.7, 0.3}), vec({0.3, 0.7})};
  EXPECT_EQ(majority_vote(q), 0u);
  const std::vector<Eigen::VectorXd> r{vec({0.2, 0.3, 0.5})};
  EXPECT_EQ(majority_vote(r), 2u);
}

TEST(MajorityVote, PermutationInvariant) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Eigen::VectorXd> p;
    for (int i = 0; i < 5; ++i) {
      Eigen::VectorXd v(3);
      for (Eigen::Index k = 0; k < 3; ++k) v(k) = u(rng);
      p.push_back(v / v.sum());
    }
    const auto want = majority_vote(p);
    std::shuffle(p.begin(), p.end(), rng);
    EXPECT_EQ(majority_vote(p), want);
  }
}

TEST(Flat, OneClassPerJointCellPresent) {
  const std::vector<std::pair<SpecificLabel, FreshnessLevel>> cells{{SpecificLabel::Apple, FreshnessLevel::Fresh},
                                                                    {SpecificLabel::Apple, FreshnessLevel::Rotten},
                                                                    {SpecificLabel::Pear, FreshnessLevel::Fresh},
                                                                    {SpecificLabel::Milk, FreshnessLevel::PartiallyRotten}};
  const Dataset data = build_dataset(test::small_corpus(cells, 2, 2, 6));
  const auto spec = AlgorithmSpec::make(Algorithm::RandomForest);
  const auto m = train_flat(spec, data, 3);
  EXPECT_EQ(m.classes().size(), 4u);
  for (const auto& c : m.classes()) {
    const auto [l, f] = decode_joint(c);
    EXPECT_EQ(encode_joint(l, f), c);
  }
  EXPECT_EQ(save_model(m), save_model(train_flat(spec, data, 3)));
  EXPECT_EQ(joint_class_order().size(), 56u);
}
