#pragma once

// Normalization -> PCA -> LDA stack applied before the classical classifiers.

#include <Eigen/Dense>
#include <json.hpp>
#include <span>
#include <string>
#include <vector>

#include "enose/lda.hpp"
#include "enose/normalize.hpp"
#include "enose/pca.hpp"

namespace enose {

struct ProjectionOptions {
  NormalizationMode normalization = NormalizationMode::PerVector;
  Retention pca = VarianceFraction{0.95};
};

class ProjectionModel {
 public:
  ProjectionModel(Normalizer normalizer, PcaModel pca, LdaModel lda, std::size_t class_count);

  /// normalize -> centre -> PCA -> LDA. Throws DimensionMismatch on length != input_dim().
  Eigen::VectorXd apply(std::span<const double> v) const;
  /// Everything after the normalization step; affine in its input.
  Eigen::VectorXd project_normalized(const Eigen::VectorXd& normalized) const;

  std::size_t input_dim() const { return pca_.input_dim(); }
  std::size_t output_dim() const { return lda_.output_dim(); }
  std::size_t fitted_class_count() const { return class_count_; }
  const Normalizer& normalizer() const { return normalizer_; }
  const PcaModel& pca() const { return pca_; }
  const LdaModel& lda() const { return lda_; }

  nlohmann::json to_json() const;
  static ProjectionModel from_json(const nlohmann::json& j);

 private:
  Normalizer normalizer_;
  PcaModel pca_;
  LdaModel lda_;
  std::size_t class_count_;
};

/// Fits the stack on `rows`. PCA keeps the components requested by
/// `options.pca`, but never fewer than min(class_count - 1, rank), so that
/// LDA can always emit class_count - 1 coordinates when the data allow it.
ProjectionModel fit_projection(const Eigen::MatrixXd& rows, std::span<const int> targets,
                               std::size_t class_count, const ProjectionOptions& options = {});

struct ScatterTable {
  std::size_t dims = 0;
  struct Row {
    std::vector<double> coords;
    std::string class_name;
  };
  std::vector<Row> rows;

  /// UTF-8 CSV, header `dim0,dim1[,dim2...],class`.
  std::string to_csv() const;
};

ScatterTable export_projection_scatter(const ProjectionModel& model, const Eigen::MatrixXd& rows,
                                       std::span<const std::string> class_names);

}  // namespace enose
