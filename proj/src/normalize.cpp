#include "enose/normalize.hpp"

#include <algorithm>
#include <numeric>

#include "enose/error.hpp"
#include "json_eigen.hpp"

namespace enose {

NormalizationRecord normalization_record(std::span<const double> values) {
  if (values.empty()) return {};
  NormalizationRecord r;
  r.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  r.min = *lo;
  r.max = *hi;
  return r;
}

std::vector<double> normalize(std::span<const double> values) {
  const NormalizationRecord r = normalization_record(values);
  const double range = r.max - r.min;
  std::vector<double> out(values.size(), 0.0);
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - r.mean) / range;
  return out;
}

FeatureVector normalize(const FeatureVector& v) {
  FeatureVector out;
  out.source_session_id = v.source_session_id;
  const auto n = normalize(v.span());
  std::copy(n.begin(), n.end(), out.values.begin());
  return out;
}

Normalizer Normalizer::per_vector() { return Normalizer{}; }

Normalizer Normalizer::fit_per_column(const Eigen::MatrixXd& rows) {
  if (rows.rows() == 0) throw InvalidConfig("per-column normalization needs at least one row");
  Normalizer n;
  n.mode_ = NormalizationMode::PerColumn;
  n.column_mean_ = rows.colwise().mean().transpose();
  n.column_range_ = (rows.colwise().maxCoeff() - rows.colwise().minCoeff()).transpose();
  return n;
}

Eigen::VectorXd Normalizer::apply(const Eigen::VectorXd& v) const {
  if (mode_ == NormalizationMode::PerVector) {
    const auto n = normalize(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
    return Eigen::Map<const Eigen::VectorXd>(n.data(), static_cast<Eigen::Index>(n.size()));
  }
  if (v.size() != column_mean_.size()) {
    throw DimensionMismatch("normalizer expects " + std::to_string(column_mean_.size()) +
                            " values, got " + std::to_string(v.size()));
  }
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out(i) = column_range_(i) > 0.0 ? (v(i) - column_mean_(i)) / column_range_(i) : 0.0;
  }
  return out;
}

Eigen::MatrixXd Normalizer::apply_rows(const Eigen::MatrixXd& rows) const {
  Eigen::MatrixXd out(rows.rows(), rows.cols());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    out.row(r) = apply(rows.row(r).transpose()).transpose();
  }
  return out;
}

nlohmann::json Normalizer::to_json() const {
  if (mode_ == NormalizationMode::PerVector) return {{"mode", "per_vector"}};
  return {{"mode", "per_column"},
          {"mean", detail::to_json(column_mean_)},
          {"range", detail::to_json(column_range_)}};
}

Normalizer Normalizer::from_json(const nlohmann::json& j) {
  const auto mode = j.at("mode").get<std::string>();
  Normalizer n;
  if (mode == "per_vector") return n;
  if (mode != "per_column") throw CorruptModel("unknown normalization mode '" + mode + "'");
  n.mode_ = NormalizationMode::PerColumn;
  n.column_mean_ = detail::vector_from_json(j.at("mean"));
  n.column_range_ = detail::vector_from_json(j.at("range"));
  if (n.column_mean_.size() != n.column_range_.size()) throw CorruptModel("normalizer shape");
  return n;
}

}  // namespace enose
