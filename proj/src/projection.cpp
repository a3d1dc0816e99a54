#include "enose/projection.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "enose/error.hpp"

namespace enose {

ProjectionModel::ProjectionModel(Normalizer normalizer, PcaModel pca, LdaModel lda,
                                 std::size_t class_count)
    : normalizer_(std::move(normalizer)),
      pca_(std::move(pca)),
      lda_(std::move(lda)),
      class_count_(class_count) {
  if (lda_.input_dim() != pca_.retained_count) {
    throw CorruptModel("LDA input dimension does not match retained PCA components");
  }
}

Eigen::VectorXd ProjectionModel::apply(std::span<const double> v) const {
  if (v.size() != input_dim()) {
    throw DimensionMismatch("projection expects " + std::to_string(input_dim()) +
                            " values, got " + std::to_string(v.size()));
  }
  const Eigen::Map<const Eigen::VectorXd> x(v.data(), static_cast<Eigen::Index>(v.size()));
  return project_normalized(normalizer_.apply(x));
}

Eigen::VectorXd ProjectionModel::project_normalized(const Eigen::VectorXd& normalized) const {
  return lda_.project(pca_.project(normalized));
}

nlohmann::json ProjectionModel::to_json() const {
  return {{"normalizer", normalizer_.to_json()},
          {"pca", pca_.to_json()},
          {"lda", lda_.to_json()},
          {"class_count", class_count_}};
}

ProjectionModel ProjectionModel::from_json(const nlohmann::json& j) {
  return ProjectionModel(Normalizer::from_json(j.at("normalizer")), PcaModel::from_json(j.at("pca")),
                         LdaModel::from_json(j.at("lda")), j.at("class_count").get<std::size_t>());
}

ProjectionModel fit_projection(const Eigen::MatrixXd& rows, std::span<const int> targets,
                               std::size_t class_count, const ProjectionOptions& options) {
  Normalizer normalizer = options.normalization == NormalizationMode::PerVector
                              ? Normalizer::per_vector()
                              : Normalizer::fit_per_column(rows);
  const Eigen::MatrixXd normalized = normalizer.apply_rows(rows);
  PcaModel pca = fit_pca(normalized, options.pca);

  const std::size_t rank = std::max<std::size_t>(pca.rank(), 1);
  const std::size_t floor = std::min(class_count > 0 ? class_count - 1 : 0, rank);
  pca.retained_count = std::clamp(std::max(pca.retained_count, floor), std::size_t{1}, rank);

  Eigen::MatrixXd reduced(rows.rows(), static_cast<Eigen::Index>(pca.retained_count));
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    reduced.row(r) = pca.project(normalized.row(r).transpose()).transpose();
  }
  LdaModel lda = fit_lda(reduced, targets, class_count);
  return ProjectionModel(std::move(normalizer), std::move(pca), std::move(lda), class_count);
}

std::string ScatterTable::to_csv() const {
  std::ostringstream out;
  out << std::setprecision(10);
  for (std::size_t d = 0; d < dims; ++d) out << "dim" << d << ',';
  out << "class\n";
  for (const auto& row : rows) {
    for (double v : row.coords) out << v << ',';
    out << row.class_name << '\n';
  }
  return out.str();
}

ScatterTable export_projection_scatter(const ProjectionModel& model, const Eigen::MatrixXd& rows,
                                       std::span<const std::string> class_names) {
  if (static_cast<std::size_t>(rows.rows()) != class_names.size()) {
    throw LengthMismatch("scatter export: row count and class-name count differ");
  }
  ScatterTable table;
  table.dims = model.output_dim();
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const Eigen::VectorXd x = rows.row(r).transpose();
    const Eigen::VectorXd y = model.apply(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
    table.rows.push_back({std::vector<double>(y.data(), y.data() + y.size()),
                          class_names[static_cast<std::size_t>(r)]});
  }
  return table;
}

}  // namespace enose
