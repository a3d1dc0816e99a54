#pragma once

// Measurement data model: heater-step readings, scan cycles, sessions, and the
// per-cycle 40-predictor feature vectors built from them.

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "enose/taxonomy.hpp"

namespace enose {

inline constexpr std::size_t kChannelCount = 4;
inline constexpr std::size_t kHeaterSteps = 10;
inline constexpr std::size_t kPredictorCount = kChannelCount * kHeaterSteps;

enum class Channel : std::uint8_t { Temperature = 0, Pressure = 1, Humidity = 2, Resistance = 3 };

/// Channel-major position of (channel, step) in a feature vector.
constexpr std::size_t feature_index(Channel channel, std::size_t step) {
  return kHeaterSteps * static_cast<std::size_t>(channel) + step;
}

struct StepReading {
  double temperature_c = 0.0;
  double pressure_hpa = 0.0;
  double humidity_pct = 0.0;
  double resistance_ohm = 0.0;

  double channel(Channel c) const;
};

/// One pass through the ten-step heater profile.
class ScanCycle {
 public:
  /// Throws RangeError for non-finite values, pressure <= 0, humidity
  /// outside [0, 100] or resistance <= 0.
  explicit ScanCycle(const std::array<StepReading, kHeaterSteps>& steps);

  const std::array<StepReading, kHeaterSteps>& steps() const { return steps_; }
  const StepReading& step(std::size_t index) const { return steps_.at(index); }

 private:
  std::array<StepReading, kHeaterSteps> steps_;
};

/// One detection run of a labelled specimen.
class MeasurementSession {
 public:
  /// Throws SchemaError when `cycles` is empty, the id is empty or the
  /// annotation's class disagrees with its label.
  MeasurementSession(std::string session_id, Annotation annotation, std::vector<ScanCycle> cycles);

  const std::string& session_id() const { return session_id_; }
  const Annotation& annotation() const { return annotation_; }
  const std::vector<ScanCycle>& cycles() const { return cycles_; }
  std::size_t cycle_count() const { return cycles_.size(); }

 private:
  std::string session_id_;
  Annotation annotation_;
  std::vector<ScanCycle> cycles_;
};

struct FeatureVector {
  std::array<double, kPredictorCount> values{};
  std::string source_session_id;

  std::span<const double> span() const { return values; }
};

FeatureVector extract_features(const ScanCycle& cycle, std::string session_id = {});

struct DatasetRow {
  FeatureVector features;
  Annotation annotation;
  std::string session_id;
  std::size_t row_id = 0;  // position in the dataset the row was first built into
};

class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<DatasetRow> rows) : rows_(std::move(rows)) {}

  const std::vector<DatasetRow>& rows() const { return rows_; }
  const DatasetRow& row(std::size_t i) const { return rows_.at(i); }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  /// n x 40 feature matrix.
  Eigen::MatrixXd matrix() const;
  /// Distinct session ids in order of first appearance.
  std::vector<std::string> sessions() const;
  /// Rows at `indices` (positions in this dataset); row ids are preserved.
  Dataset subset(std::span<const std::size_t> indices) const;

 private:
  std::vector<DatasetRow> rows_;
};

/// One row per cycle; throws EmptyCorpus for an empty list.
Dataset build_dataset(std::span<const MeasurementSession> sessions);

}  // namespace enose
