#pragma once

// Seeded synthetic corpora with controllable class, label and freshness
// structure. Resistance is modelled in log space: a heater-step profile plus
// class and label offsets, a monotone freshness drift, a per-session latent
// shift and per-cycle noise. Temperature, pressure and humidity carry class
// and label offsets only.

#include <array>
#include <cstdint>
#include <map>
#include <string_view>
#include <utility>
#include <vector>

#include "enose/session.hpp"
#include "enose/taxonomy.hpp"

namespace enose {

struct ChannelRange {
  double low = 0.0;
  double high = 0.0;
  double center() const { return (low + high) / 2.0; }
};

struct SynthNoise {
  double temperature_c = 0.2;
  double pressure_hpa = 0.1;
  double humidity_pct = 0.5;
  double log_resistance = 0.03;  // relative, i.e. sigma of ln(R)
  // Ambient readings move little within one cycle: the sigmas above are drawn
  // once per cycle and each step adds this fraction of them on top.
  double step_jitter = 0.1;
};

struct SynthConfig {
  std::uint64_t seed = 1;
  int sessions_per_cell = 3;
  int cycles_per_session = 5;
  double class_separation = 1.0;  // sigma of class offsets in ln(R)
  double label_separation = 0.3;  // sigma of label offsets within a class; <= class_separation
  double freshness_drift = 0.2;   // ln(R) drop per freshness level, scaled per step
  double session_spread = 1.0;    // session latent sigma on ln(R), in units of the cycle noise
  double environment_spread = 1.0;  // same, for temperature, pressure and humidity
  SynthNoise noise{};
  ChannelRange temperature_c{20.0, 28.0};
  ChannelRange pressure_hpa{995.0, 1015.0};
  ChannelRange humidity_pct{30.0, 70.0};
  ChannelRange resistance_ohm{5e4, 5e5};
  /// (label, freshness) cells to generate; empty means all 56.
  std::vector<std::pair<SpecificLabel, FreshnessLevel>> cells;

  /// Throws InvalidConfig.
  void validate() const;
};

/// "easy", "hier", "flat" or "hard" with the given seed; throws InvalidConfig.
SynthConfig synth_preset(std::string_view name, std::uint64_t seed);

/// Mean feature vector of one cell, in sensor units.
using Signature = std::array<double, kPredictorCount>;

struct SignatureTable {
  std::map<std::pair<SpecificLabel, FreshnessLevel>, Signature> cells;
  const Signature& at(SpecificLabel l, FreshnessLevel f) const { return cells.at({l, f}); }
};

/// All 56 signatures; a deterministic function of the config.
SignatureTable signature_table(const SynthConfig& config);

/// Sessions in cell order (label, then freshness, then replicate), with ids
/// such as "banana-rotten-02".
std::vector<MeasurementSession> generate_corpus(const SynthConfig& config);

struct SeparabilityReport {
  double stage1 = 0.0;                              // general classes over all rows
  std::map<GeneralClass, double> stage2;            // labels within each class
  std::map<SpecificLabel, double> stage3;           // freshness within each label
};

/// Leading eigenvalue of Sw^-1 Sb (between over within scatter) per stage,
/// on column-standardized predictors. Groups with fewer than 2 targets are
/// left out.
SeparabilityReport separability_report(const Dataset& data);
double fisher_ratio(const Eigen::MatrixXd& rows, std::span<const int> targets, std::size_t classes);

}  // namespace enose
