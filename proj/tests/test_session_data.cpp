#include <gtest/gtest.h>

#include <json.hpp>
#include <set>

#include "enose/corpus_io.hpp"
#include "enose/error.hpp"
#include "support.hpp"

using namespace enose;
using nlohmann::json;

namespace {

json step_json(double t, double p, double h, double r) {
  return {{"t_deg_c", t}, {"p_hpa", p}, {"rh_pct", h}, {"r_ohm", r}};
}

json session_json(const std::string& id, int cycles, int steps = 10) {
  json cs = json::array();
  for (int c = 0; c < cycles; ++c) {
    json st = json::array();
    for (int s = 0; s < steps; ++s) st.push_back(step_json(20.0 + s, 1000.0, 40.0, 1e4 + c));
    cs.push_back({{"steps", st}});
  }
  return {{"session_id", id}, {"class", "Fruit"}, {"label", "Banana"}, {"freshness", "Rotten"}, {"cycles", cs}};
}

json raw_export(const std::string& id, int steps_per_cycle, int cycles) {
  json cols = json::array();
  for (const char* n : {"Sensor Index", "Scanning Cycle Index", "Heater Profile Step Index", "Temperature",
                        "Pressure", "Relative Humidity", "Resistance Gassensor", "Error Code"}) {
    cols.push_back({{"name", n}});
  }
  json block = json::array();
  for (int c = 0; c < cycles; ++c) {
    for (int s = 0; s < steps_per_cycle; ++s) {
      block.push_back({0, c, s, 21.5, 101325.0, 45.0, 5e4 + s, 0});
    }
  }
  return {{"session_id", id},
          {"class", "drink"},
          {"label", "milk"},
          {"freshness", "mostly fresh"},
          {"rawDataBody", {{"dataColumns", cols}, {"dataBlock", block}}}};
}

}  // namespace

TEST(Taxonomy, ClassPartitionMatchesLabelTable) {
  std::vector<std::size_t> sizes;
  std::size_t total = 0;
  for (auto c : kGeneralClasses) {
    sizes.push_back(labels_of(c).size());
    total += labels_of(c).size();
    for (auto l : labels_of(c)) EXPECT_EQ(class_of(l), c);
  }
  EXPECT_EQ(sizes, (std::vector<std::size_t>{3, 4, 4, 3}));
  EXPECT_EQ(total, 14u);
  EXPECT_EQ(kFreshnessLevels.size(), 4u);
}

TEST(Taxonomy, ParsingIsCaseInsensitive) {
  EXPECT_EQ(parse_general_class("fRuIt"), GeneralClass::Fruit);
  EXPECT_EQ(parse_specific_label("greenpepper"), SpecificLabel::GreenPepper);
  EXPECT_EQ(parse_freshness("PartiallyRotten"), FreshnessLevel::PartiallyRotten);
  EXPECT_FALSE(parse_specific_label("durian").has_value());
}

TEST(Taxonomy, JointEncodingIsABijection) {
  std::set<std::string> seen;
  for (auto l : kSpecificLabels) {
    for (auto f : kFreshnessLevels) {
      const std::string j = encode_joint(l, f);
      EXPECT_TRUE(seen.insert(j).second);
      const auto [l2, f2] = decode_joint(j);
      EXPECT_EQ(l2, l);
      EXPECT_EQ(f2, f);
    }
  }
  EXPECT_EQ(seen.size(), 56u);
  EXPECT_EQ(decode_joint(encode_joint(SpecificLabel::Banana, FreshnessLevel::Rotten)).first, SpecificLabel::Banana);
}

TEST(Features, ChannelMajorLayout) {
  // Pressure and resistance must be positive, so the "other channels" hold
  // constants rather than zeros.
  const ScanCycle cycle = test::ramp_cycle({0.0, 1000.0, 50.0, 2e4}, {1.0, 0.0, 0.0, 0.0});
  const FeatureVector v = extract_features(cycle, "s1");
  ASSERT_EQ(v.values.size(), 40u);
  for (std::size_t s = 0; s < 10; ++s) EXPECT_EQ(v.values[s], static_cast<double>(s));
  for (std::size_t i = 10; i < 20; ++i) EXPECT_EQ(v.values[i], 1000.0);
  for (std::size_t i = 20; i < 30; ++i) EXPECT_EQ(v.values[i], 50.0);
  for (std::size_t i = 30; i < 40; ++i) EXPECT_EQ(v.values[i], 2e4);
  EXPECT_EQ(v.source_session_id, "s1");
}

TEST(Features, SingleResistanceStepChangesOneIndex) {
  std::array<StepReading, kHeaterSteps> a{};
  for (auto& s : a) s = test::reading(21.0, 1001.0, 40.0, 3e4);
  auto b = a;
  b[7].resistance_ohm = 3.5e4;
  const auto va = extract_features(ScanCycle(a));
  const auto vb = extract_features(ScanCycle(b));
  for (std::size_t i = 0; i < 40; ++i) {
    if (i == 37) {
      EXPECT_NE(va.values[i], vb.values[i]);
    } else {
      EXPECT_EQ(va.values[i], vb.values[i]);
    }
  }
}

TEST(Features, IndexMapIsABijection) {
  std::set<std::size_t> seen;
  for (auto c : {Channel::Temperature, Channel::Pressure, Channel::Humidity, Channel::Resistance}) {
    for (std::size_t s = 0; s < kHeaterSteps; ++s) seen.insert(feature_index(c, s));
  }
  EXPECT_EQ(seen.size(), 40u);
  EXPECT_EQ(*seen.begin(), 0u);
  EXPECT_EQ(*seen.rbegin(), 39u);
}

TEST(ScanCycleTest, RejectsOutOfRangeReadings) {
  std::array<StepReading, kHeaterSteps> steps{};
  for (auto& s : steps) s = test::reading(20.0, 1000.0, 50.0, 1e4);
  auto bad = steps;
  bad[3].humidity_pct = 120.0;
  EXPECT_THROW(ScanCycle{bad}, RangeError);
  bad = steps;
  bad[0].resistance_ohm = 0.0;
  EXPECT_THROW(ScanCycle{bad}, RangeError);
  bad = steps;
  bad[9].pressure_hpa = -1.0;
  EXPECT_THROW(ScanCycle{bad}, RangeError);
}

TEST(BuildDataset, OneRowPerCycle) {
  std::vector<MeasurementSession> sessions{
      test::session("a", SpecificLabel::Apple, FreshnessLevel::Fresh, 3),
      test::session("b", SpecificLabel::Milk, FreshnessLevel::Rotten, 5)};
  const Dataset d = build_dataset(sessions);
  ASSERT_EQ(d.size(), 8u);
  std::size_t a = 0;
  for (const auto& r : d.rows()) {
    EXPECT_TRUE(r.session_id == "a" || r.session_id == "b");
    a += r.session_id == "a";
  }
  EXPECT_EQ(a, 3u);
  EXPECT_EQ(d.sessions(), (std::vector<std::string>{"a", "b"}));
}

TEST(BuildDataset, SingleCycleAndEmpty) {
  std::vector<MeasurementSession> one{test::session("only", SpecificLabel::Pork, FreshnessLevel::Fresh, 1)};
  const Dataset d = build_dataset(one);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d.row(0).session_id, "only");
  EXPECT_THROW(build_dataset(std::vector<MeasurementSession>{}), EmptyCorpus);
}

TEST(BuildDataset, RowsTraceBackToSessions) {
  const auto sessions = test::small_corpus(
      {{SpecificLabel::Pear, FreshnessLevel::Fresh}, {SpecificLabel::Coffee, FreshnessLevel::Rotten}}, 2, 3, 5);
  const Dataset d = build_dataset(sessions);
  std::set<std::string> ids;
  for (const auto& s : sessions) ids.insert(s.session_id());
  for (const auto& r : d.rows()) EXPECT_TRUE(ids.contains(r.session_id));
}

TEST(ParseSessionLog, ValidSession) {
  const json doc = json::array({session_json("s-1", 3)});
  const auto sessions = parse_session_log(doc.dump());
  ASSERT_EQ(sessions.size(), 1u);
  EXPECT_EQ(sessions[0].cycle_count(), 3u);
  EXPECT_EQ(sessions[0].annotation().label, SpecificLabel::Banana);
  EXPECT_EQ(sessions[0].annotation().freshness, FreshnessLevel::Rotten);
}

TEST(ParseSessionLog, NineStepsIsASchemaError) {
  const json doc = json::array({session_json("short", 2, 9)});
  EXPECT_THROW(parse_session_log(doc.dump()), SchemaError);
}

TEST(ParseSessionLog, HumidityOutOfRange) {
  json s = session_json("wet", 1);
  s["cycles"][0]["steps"][4]["rh_pct"] = 120.0;
  EXPECT_THROW(parse_session_log(json::array({s}).dump()), RangeError);
}

TEST(ParseSessionLog, DuplicateIdsAreRejected) {
  const json doc = json::array({session_json("dup", 1), session_json("dup", 2)});
  EXPECT_THROW(parse_session_log(doc.dump()), DuplicateSessionId);
}

TEST(ParseSessionLog, MissingFieldsAndClassMismatch) {
  json s = session_json("x", 1);
  s.erase("freshness");
  EXPECT_THROW(parse_session_log(json::array({s}).dump()), SchemaError);
  json m = session_json("y", 1);
  m["class"] = "Meat";
  EXPECT_THROW(parse_session_log(json::array({m}).dump()), SchemaError);
  EXPECT_THROW(parse_session_log("{not json"), SchemaError);
}

TEST(ParseSessionLog, RoundTripPreservesValues) {
  const auto sessions = test::small_corpus({{SpecificLabel::Carrot, FreshnessLevel::MostlyFresh},
                                            {SpecificLabel::Steak, FreshnessLevel::Fresh}},
                                           2, 4, 11);
  const auto again = parse_session_log(serialize_corpus(sessions));
  ASSERT_EQ(again.size(), sessions.size());
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    EXPECT_EQ(again[i].session_id(), sessions[i].session_id());
    EXPECT_EQ(again[i].annotation(), sessions[i].annotation());
    ASSERT_EQ(again[i].cycle_count(), sessions[i].cycle_count());
    for (std::size_t c = 0; c < sessions[i].cycle_count(); ++c) {
      EXPECT_EQ(extract_features(again[i].cycles()[c]).values, extract_features(sessions[i].cycles()[c]).values);
    }
  }
}

TEST(ImportRaw, ConvertsAndWarnsOnUnknownColumns) {
  RawImportOptions opt;
  opt.pressure_scale = 0.01;
  opt.ignored_columns.clear();
  const ImportResult r = import_raw_export(raw_export("milk-1", 10, 2).dump(), opt);
  ASSERT_EQ(r.sessions.size(), 1u);
  EXPECT_EQ(r.cycle_count, 2u);
  EXPECT_EQ(r.sessions[0].annotation().label, SpecificLabel::Milk);
  EXPECT_EQ(r.sessions[0].annotation().freshness, FreshnessLevel::MostlyFresh);
  EXPECT_DOUBLE_EQ(r.sessions[0].cycles()[0].step(0).pressure_hpa, 1013.25);
  EXPECT_DOUBLE_EQ(r.sessions[0].cycles()[1].step(9).resistance_ohm, 5e4 + 9);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("Error Code"), std::string::npos);
}

TEST(ImportRaw, NineStepCycleNamesTheSession) {
  try {
    import_raw_export(raw_export("milk-short", 9, 1).dump());
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("milk-short"), std::string::npos);
  }
}

TEST(ImportRaw, MappingFileRenamesColumns) {
  json raw = raw_export("m", 10, 1);
  raw["rawDataBody"]["dataColumns"][3]["name"] = "temp";
  EXPECT_THROW(import_raw_export(raw.dump()), SchemaError);
  const RawImportOptions opt = parse_import_mapping(R"({"temperature_column": "temp"})");
  EXPECT_EQ(import_raw_export(raw.dump(), opt).sessions.size(), 1u);
  EXPECT_THROW(parse_import_mapping(R"({"colour": "red"})"), SchemaError);
}
