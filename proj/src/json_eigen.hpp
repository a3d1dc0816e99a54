#pragma once

// JSON encoding of Eigen vectors and matrices (row-major data arrays).

#include <Eigen/Dense>
#include <json.hpp>

#include "enose/error.hpp"

namespace enose::detail {

inline nlohmann::json to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline nlohmann::json to_json(const Eigen::MatrixXd& m) {
  nlohmann::json data = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw CorruptModel("expected a numeric array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || !data.is_array() ||
      data.size() != static_cast<std::size_t>(rows * cols)) {
    throw CorruptModel("matrix shape does not match its data");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[k++].get<double>();
  }
  return m;
}

}  // namespace enose::detail
