#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "enose/corpus_io.hpp"
#include "enose/error.hpp"
#include "enose/synth.hpp"
#include "support.hpp"

using namespace enose;

namespace {

SynthConfig quiet(SynthConfig c) {
  c.noise = SynthNoise{1e-12, 1e-12, 1e-12, 1e-12, 1e-12};
  c.session_spread = 0.0;
  c.environment_spread = 0.0;
  return c;
}

std::vector<int> class_targets(const Dataset& d) {
  std::vector<int> y;
  for (const auto& r : d.rows()) y.push_back(static_cast<int>(index_of(r.annotation.general_class)));
  return y;
}

}  // namespace

TEST(Synth, CountsPerCell) {
  SynthConfig c;
  c.sessions_per_cell = 3;
  c.cycles_per_session = 5;
  const auto sessions = generate_corpus(c);
  EXPECT_EQ(sessions.size(), 168u);
  EXPECT_EQ(build_dataset(sessions).size(), 840u);
  std::map<std::pair<SpecificLabel, FreshnessLevel>, int> per_cell;
  for (const auto& s : sessions) {
    ++per_cell[{s.annotation().label, s.annotation().freshness}];
    EXPECT_EQ(s.cycle_count(), 5u);
  }
  EXPECT_EQ(per_cell.size(), 56u);
  for (const auto& [cell, n] : per_cell) EXPECT_EQ(n, 3);
  EXPECT_EQ(sessions.front().session_id(), "pork-fresh-01");
}

TEST(Synth, NoiselessCyclesEqualTheirSignature) {
  const SynthConfig c = quiet(synth_preset("hier", 4));
  const auto table = signature_table(c);
  EXPECT_EQ(table.cells.size(), 56u);
  for (const auto& s : generate_corpus(c)) {
    const auto& sig = table.at(s.annotation().label, s.annotation().freshness);
    for (const auto& cycle : s.cycles()) {
      const auto v = extract_features(cycle).values;
      for (std::size_t j = 0; j < kPredictorCount; ++j) {
        ASSERT_NEAR(v[j], sig[j], 1e-9 * std::max(1.0, std::abs(sig[j]))) << s.session_id() << " column " << j;
      }
    }
  }
}

TEST(Synth, SameSeedSameCorpus) {
  const auto a = serialize_corpus(generate_corpus(synth_preset("hier", 11)));
  EXPECT_EQ(a, serialize_corpus(generate_corpus(synth_preset("hier", 11))));
  EXPECT_NE(a, serialize_corpus(generate_corpus(synth_preset("hier", 12))));
}

TEST(Synth, CorpusRoundTripsThroughTheFileFormat) {
  SynthConfig c = synth_preset("flat", 2);
  c.sessions_per_cell = 1;
  const auto sessions = generate_corpus(c);
  const std::string text = serialize_corpus(sessions);
  const auto back = parse_session_log(text);
  ASSERT_EQ(back.size(), sessions.size());
  EXPECT_EQ(serialize_corpus(back), text);
  for (std::size_t i = 0; i < back.size(); i += 11) {
    EXPECT_EQ(extract_features(back[i].cycles()[2]).values, extract_features(sessions[i].cycles()[2]).values);
  }
}

TEST(Synth, ReadingsStayInPhysicalRange) {
  SynthConfig c = synth_preset("hard", 3);
  c.humidity_pct = {1.0, 99.0};
  c.noise.humidity_pct = 8.0;
  c.environment_spread = 3.0;
  for (const auto& s : generate_corpus(c)) {
    for (const auto& cycle : s.cycles()) {
      for (const auto& r : cycle.steps()) {
        ASSERT_GE(r.humidity_pct, 0.0);
        ASSERT_LE(r.humidity_pct, 100.0);
        ASSERT_GT(r.resistance_ohm, 0.0);
        ASSERT_GT(r.pressure_hpa, 0.0);
      }
    }
  }
}

TEST(Synth, CyclesOfASessionClusterTogether) {
  SynthConfig c = synth_preset("hier", 6);
  c.sessions_per_cell = 8;
  c.cycles_per_session = 6;
  // Session means scatter by spread^2 + 1/cycles in noise units; 2 keeps that well above 1.
  c.session_spread = 2.0;
  const auto sessions = generate_corpus(c);
  // Resistance columns, pooled over cells.
  double within = 0.0, between = 0.0;
  std::map<std::pair<SpecificLabel, FreshnessLevel>, std::vector<Eigen::VectorXd>> means;
  for (const auto& s : sessions) {
    const auto d = build_dataset(std::span(&s, 1));
    const Eigen::MatrixXd r = d.matrix().rightCols(10);
    const Eigen::RowVectorXd mu = r.colwise().mean();
    within += (r.rowwise() - mu).squaredNorm() / static_cast<double>(r.rows() - 1);
    means[{s.annotation().label, s.annotation().freshness}].push_back(mu.transpose());
  }
  within /= static_cast<double>(sessions.size());
  for (const auto& [cell, mus] : means) {
    Eigen::VectorXd grand = Eigen::VectorXd::Zero(10);
    for (const auto& m : mus) grand += m;
    grand /= static_cast<double>(mus.size());
    double v = 0.0;
    for (const auto& m : mus) v += (m - grand).squaredNorm();
    between += v / static_cast<double>(mus.size() - 1);
  }
  between /= static_cast<double>(means.size());
  EXPECT_LT(within, between);
}

TEST(Synth, SeparabilityTracksTheConfig) {
  const Dataset high = build_dataset(generate_corpus(synth_preset("hier", 1)));
  EXPECT_GT(separability_report(high).stage1, 10.0);

  SynthConfig flat;
  flat.class_separation = 0.0;
  flat.label_separation = 0.0;
  flat.freshness_drift = 0.0;
  const Dataset none = build_dataset(generate_corpus(flat));
  const auto report = separability_report(none);
  EXPECT_LT(report.stage1, 0.2);
  EXPECT_EQ(report.stage2.size(), 4u);
  EXPECT_EQ(report.stage3.size(), 14u);
}

TEST(Synth, FisherRatioIgnoresTranslation) {
  const Dataset d = build_dataset(generate_corpus(synth_preset("flat", 5)));
  const auto y = class_targets(d);
  const Eigen::MatrixXd x = d.matrix();
  // Shift in standardized units so the ratio stays in a well-conditioned range.
  const Eigen::RowVectorXd scale = ((x.rowwise() - x.colwise().mean()).colwise().norm()).array() + 1.0;
  const Eigen::MatrixXd z = x.array().rowwise() / scale.array();
  const double base = fisher_ratio(z, y, 4);
  Eigen::RowVectorXd shift(40);
  for (Eigen::Index j = 0; j < 40; ++j) shift(j) = 3.0 + 0.5 * static_cast<double>(j);
  const Eigen::MatrixXd moved = z.rowwise() + shift;
  EXPECT_NEAR(fisher_ratio(moved, y, 4), base, 1e-6 * base);
}

TEST(Synth, InvalidConfigsRejected) {
  SynthConfig c;
  c.label_separation = c.class_separation + 0.1;
  EXPECT_THROW(c.validate(), InvalidConfig);
  c = SynthConfig{};
  c.noise.humidity_pct = 0.0;
  EXPECT_THROW(generate_corpus(c), InvalidConfig);
  c = SynthConfig{};
  c.sessions_per_cell = 0;
  EXPECT_THROW(c.validate(), InvalidConfig);
  c = SynthConfig{};
  c.humidity_pct = {-5.0, 50.0};
  EXPECT_THROW(c.validate(), InvalidConfig);
  EXPECT_THROW(synth_preset("medium", 1), InvalidConfig);
  for (const char* p : {"easy", "hier", "flat", "hard"}) EXPECT_NO_THROW(synth_preset(p, 1).validate()) << p;
}
