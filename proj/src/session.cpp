#include "enose/session.hpp"

#include <cmath>
#include <unordered_set>

#include "enose/error.hpp"

namespace enose {

double StepReading::channel(Channel c) const {
  switch (c) {
    case Channel::Temperature:
      return temperature_c;
    case Channel::Pressure:
      return pressure_hpa;
    case Channel::Humidity:
      return humidity_pct;
    case Channel::Resistance:
      return resistance_ohm;
  }
  return 0.0;
}

ScanCycle::ScanCycle(const std::array<StepReading, kHeaterSteps>& steps) : steps_(steps) {
  for (std::size_t s = 0; s < steps_.size(); ++s) {
    const StepReading& r = steps_[s];
    const std::string where = " at heater step " + std::to_string(s);
    if (!std::isfinite(r.temperature_c) || !std::isfinite(r.pressure_hpa) ||
        !std::isfinite(r.humidity_pct) || !std::isfinite(r.resistance_ohm)) {
      throw RangeError("non-finite reading" + where);
    }
    if (r.pressure_hpa <= 0.0) throw RangeError("pressure must be positive" + where);
    if (r.humidity_pct < 0.0 || r.humidity_pct > 100.0) {
      throw RangeError("humidity " + std::to_string(r.humidity_pct) + " outside [0, 100]" + where);
    }
    if (r.resistance_ohm <= 0.0) throw RangeError("gas resistance must be positive" + where);
  }
}

MeasurementSession::MeasurementSession(std::string session_id, Annotation annotation,
                                       std::vector<ScanCycle> cycles)
    : session_id_(std::move(session_id)), annotation_(annotation), cycles_(std::move(cycles)) {
  if (session_id_.empty()) throw SchemaError("session_id must not be empty");
  if (cycles_.empty()) throw SchemaError("session '" + session_id_ + "' has no cycles");
  if (class_of(annotation_.label) != annotation_.general_class) {
    throw SchemaError("session '" + session_id_ + "': label " +
                      std::string(name(annotation_.label)) + " does not belong to class " +
                      std::string(name(annotation_.general_class)));
  }
}

FeatureVector extract_features(const ScanCycle& cycle, std::string session_id) {
  FeatureVector out;
  out.source_session_id = std::move(session_id);
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    const auto channel = static_cast<Channel>(c);
    for (std::size_t s = 0; s < kHeaterSteps; ++s) {
      out.values[feature_index(channel, s)] = cycle.step(s).channel(channel);
    }
  }
  return out;
}

Eigen::MatrixXd Dataset::matrix() const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows_.size()), kPredictorCount);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    for (std::size_t j = 0; j < kPredictorCount; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows_[i].features.values[j];
    }
  }
  return m;
}

std::vector<std::string> Dataset::sessions() const {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& r : rows_) {
    if (seen.insert(r.session_id).second) out.push_back(r.session_id);
  }
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<DatasetRow> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(rows_.at(i));
  return Dataset(std::move(out));
}

Dataset build_dataset(std::span<const MeasurementSession> sessions) {
  if (sessions.empty()) throw EmptyCorpus("cannot build a dataset from zero sessions");
  std::vector<DatasetRow> rows;
  for (const auto& session : sessions) {
    for (const auto& cycle : session.cycles()) {
      DatasetRow row;
      row.features = extract_features(cycle, session.session_id());
      row.annotation = session.annotation();
      row.session_id = session.session_id();
      row.row_id = rows.size();
      rows.push_back(std::move(row));
    }
  }
  return Dataset(std::move(rows));
}

}  // namespace enose
