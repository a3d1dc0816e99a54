#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "enose/error.hpp"
#include "enose/lda.hpp"
#include "enose/normalize.hpp"
#include "enose/pca.hpp"
#include "enose/projection.hpp"
#include "support.hpp"

using namespace enose;

namespace {

Eigen::MatrixXd gaussian_rows(Eigen::Index n, Eigen::Index d, std::uint64_t seed, double sigma = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, sigma);
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = z(rng);
  }
  return x;
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  return c.transpose() * c / static_cast<double>(x.rows() - 1);
}

}  // namespace

TEST(Normalize, WorkedExamples) {
  const auto a = normalize(std::vector<double>{1, 2, 3, 4});
  const std::vector<double> want{-0.5, -1.0 / 6.0, 1.0 / 6.0, 0.5};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(a[i], want[i], 1e-15);
  EXPECT_EQ(normalize(std::vector<double>{5, 5, 5, 5}), (std::vector<double>{0, 0, 0, 0}));
  const auto b = normalize(std::vector<double>{0, 10});
  EXPECT_DOUBLE_EQ(b[0], -0.5);
  EXPECT_DOUBLE_EQ(b[1], 0.5);
}

TEST(Normalize, ZeroMeanUnitRangeOnRandomVectors) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1e5, 1e5);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> v(40);
    for (double& x : v) x = u(rng);
    const auto r = normalization_record(v);
    EXPECT_LE(r.min, r.mean);
    EXPECT_LE(r.mean, r.max);
    const auto n = normalize(v);
    double sum = 0.0;
    for (double x : n) sum += x;
    EXPECT_NEAR(sum / 40.0, 0.0, 1e-9);
    EXPECT_NEAR(*std::max_element(n.begin(), n.end()) - *std::min_element(n.begin(), n.end()), 1.0, 1e-9);
  }
}

TEST(Normalize, PerColumnModeUsesTrainingStatistics) {
  Eigen::MatrixXd rows(3, 2);
  rows << 0, 10, 1, 20, 2, 30;
  const Normalizer n = Normalizer::fit_per_column(rows);
  const Eigen::MatrixXd out = n.apply_rows(rows);
  EXPECT_NEAR(out(0, 0), -0.5, 1e-12);
  EXPECT_NEAR(out(2, 1), 0.5, 1e-12);
  EXPECT_NEAR(out.col(1).sum(), 0.0, 1e-12);
}

TEST(Pca, PointsOnALine) {
  Eigen::MatrixXd x(5, 2);
  for (int i = 0; i < 5; ++i) x.row(i) << i - 2.0, 2.0 * (i - 2.0);
  const PcaModel m = fit_pca(x, ComponentCount{2});
  const double s = 1.0 / std::sqrt(5.0);
  EXPECT_NEAR(m.components(0, 0), s, 1e-10);
  EXPECT_NEAR(m.components(0, 1), 2.0 * s, 1e-10);
  EXPECT_NEAR(m.eigenvalues(1), 0.0, 1e-8);
  // Covariance of (t, 2t) with var(t) = 2.5 has eigenvalue 5 * 2.5.
  EXPECT_NEAR(m.eigenvalues(0), 12.5, 1e-9);
}

TEST(Pca, IsotropicCloudSpreadsVarianceEvenly) {
  const Eigen::MatrixXd x = gaussian_rows(20000, 40, 5);
  const PcaModel m = fit_pca(x, ComponentCount{40});
  const Eigen::MatrixXd cov = sample_covariance(x);
  EXPECT_NEAR(m.eigenvalues.sum(), cov.trace(), 1e-6 * cov.trace());
  for (std::size_t d : {5u, 10u, 20u, 30u}) {
    EXPECT_NEAR(m.cumulative_variance_ratio(d), static_cast<double>(d) / 40.0, 0.03);
  }
}

TEST(Pca, ComponentsAreOrthonormalAndSorted) {
  Eigen::MatrixXd x = gaussian_rows(300, 40, 9);
  for (Eigen::Index j = 0; j < 40; ++j) x.col(j) *= 1.0 + static_cast<double>(j);
  const PcaModel m = fit_pca(x);
  const Eigen::MatrixXd g = m.components * m.components.transpose();
  EXPECT_LT((g - Eigen::MatrixXd::Identity(40, 40)).cwiseAbs().maxCoeff(), 1e-8);
  for (Eigen::Index i = 1; i < m.eigenvalues.size(); ++i) EXPECT_LE(m.eigenvalues(i), m.eigenvalues(i - 1));
  EXPECT_GE(m.eigenvalues.minCoeff(), 0.0);
  const double trace = sample_covariance(x).trace();
  EXPECT_NEAR(m.eigenvalues.sum(), trace, 1e-6 * trace);
  EXPECT_GE(m.cumulative_variance_ratio(m.retained_count), 0.95);
  EXPECT_LT(m.cumulative_variance_ratio(m.retained_count - 1), 0.95);
}

TEST(Pca, FullBasisRoundTrip) {
  const Eigen::MatrixXd x = gaussian_rows(60, 40, 21, 3.0);
  const PcaModel m = fit_pca(x, ComponentCount{40});
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Eigen::VectorXd row = x.row(i).transpose();
    EXPECT_LT((m.reconstruct(m.project(row)) - row).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Pca, SignConventionAndDegenerateInput) {
  const PcaModel m = fit_pca(gaussian_rows(50, 6, 2));
  for (Eigen::Index r = 0; r < m.components.rows(); ++r) {
    for (Eigen::Index j = 0; j < m.components.cols(); ++j) {
      if (std::abs(m.components(r, j)) > 1e-12) {
        EXPECT_GT(m.components(r, j), 0.0);
        break;
      }
    }
  }
  EXPECT_THROW(fit_pca(Eigen::MatrixXd::Ones(4, 3)), DegenerateData);
  EXPECT_THROW(fit_pca(Eigen::MatrixXd::Ones(1, 3)), InvalidConfig);
}

TEST(Lda, OutputDimensionIsClassesMinusOne) {
  for (std::size_t c : {2u, 3u, 4u}) {
    const auto data = test::clusters40(c, 30, 3.0, 40 + c);
    const LdaModel m = fit_lda(data.x, data.y, c);
    EXPECT_EQ(m.output_dim(), c - 1);
  }
}

TEST(Lda, SeparatedClustersProjectFarApart) {
  Eigen::VectorXd a(2), b(2);
  a << 0.0, 0.0;
  b << 6.0, 3.0;
  const auto data = test::clusters({a, b}, 100, 1.0, 3);
  const LdaModel m = fit_lda(data.x, data.y, 2);
  ASSERT_EQ(m.output_dim(), 1u);
  std::vector<double> p[2];
  for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
    p[data.y[static_cast<std::size_t>(i)]].push_back(m.project(data.x.row(i).transpose())(0));
  }
  double mean[2], ss = 0.0;
  for (int k = 0; k < 2; ++k) {
    mean[k] = std::accumulate(p[k].begin(), p[k].end(), 0.0) / static_cast<double>(p[k].size());
    for (double v : p[k]) ss += (v - mean[k]) * (v - mean[k]);
  }
  const double pooled_sd = std::sqrt(ss / static_cast<double>(data.x.rows() - 2));
  EXPECT_GT(std::abs(mean[0] - mean[1]), 5.0 * pooled_sd);
}

TEST(Lda, DegenerateInputs) {
  Eigen::MatrixXd x(6, 2);
  x << 1, 0, -1, 0, 0, 1, 1, 0, -1, 0, 0, 1;
  const std::vector<int> same_means{0, 0, 0, 1, 1, 1};
  EXPECT_THROW(fit_lda(x, same_means, 2), BetweenScatterZero);
  const std::vector<int> lonely{0, 0, 0, 0, 0, 1};
  EXPECT_THROW(fit_lda(x, lonely, 2), DegenerateData);
}

TEST(Projection, StoredClassMeansAndDeterminism) {
  const auto data = test::clusters40(4, 40, 2.0, 77);
  const ProjectionModel m = fit_projection(data.x, data.y, 4);
  EXPECT_EQ(m.output_dim(), 3u);
  EXPECT_EQ(m.fitted_class_count(), 4u);
  const Eigen::MatrixXd z = m.normalizer().apply_rows(data.x);
  for (int k = 0; k < 4; ++k) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(40);
    int n = 0;
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      if (data.y[static_cast<std::size_t>(i)] == k) {
        mean += z.row(i).transpose();
        ++n;
      }
    }
    mean /= n;
    const Eigen::VectorXd got = m.project_normalized(mean);
    EXPECT_LT((got - m.lda().class_means.row(k).transpose()).cwiseAbs().maxCoeff(), 1e-9);
  }
  Eigen::VectorXd row = data.x.row(3).transpose();
  const std::vector<double> r(row.data(), row.data() + row.size());
  EXPECT_EQ(m.apply(r), m.apply(r));
  EXPECT_THROW(m.apply(std::vector<double>(39, 1.0)), DimensionMismatch);
}

TEST(Projection, AffineAfterNormalization) {
  const auto data = test::clusters40(3, 30, 2.0, 12);
  const ProjectionModel m = fit_projection(data.x, data.y, 3);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd a(40), b(40);
    for (Eigen::Index j = 0; j < 40; ++j) {
      a(j) = u(rng);
      b(j) = u(rng);
    }
    const double alpha = (u(rng) + 1.0) / 2.0;
    const Eigen::VectorXd lhs = m.project_normalized(alpha * a + (1.0 - alpha) * b);
    const Eigen::VectorXd rhs = alpha * m.project_normalized(a) + (1.0 - alpha) * m.project_normalized(b);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Projection, SerializationRoundTrip) {
  const auto data = test::clusters40(3, 20, 2.0, 8);
  const ProjectionModel m = fit_projection(data.x, data.y, 3);
  const ProjectionModel back = ProjectionModel::from_json(m.to_json());
  Eigen::VectorXd row = data.x.row(5).transpose();
  const std::vector<double> r(row.data(), row.data() + row.size());
  EXPECT_EQ(m.apply(r), back.apply(r));
}

TEST(Scatter, CoordinateColumnsFollowClassCount) {
  const auto four = test::clusters40(4, 15, 2.0, 1);
  const auto m4 = fit_projection(four.x, four.y, 4);
  const auto names4 = test::names_of(four);
  const ScatterTable t4 = export_projection_scatter(m4, four.x, names4);
  EXPECT_EQ(t4.dims, 3u);
  EXPECT_EQ(t4.rows.size(), 60u);
  EXPECT_EQ(t4.rows[0].coords.size(), 3u);
  const std::string csv = t4.to_csv();
  EXPECT_EQ(csv.substr(0, 21), "dim0,dim1,dim2,class\n");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 61);

  const auto three = test::clusters40(3, 15, 2.0, 2);
  const auto m3 = fit_projection(three.x, three.y, 3);
  const auto names3 = test::names_of(three);
  const ScatterTable t3 = export_projection_scatter(m3, three.x, names3);
  EXPECT_EQ(t3.dims, 2u);
  EXPECT_EQ(t3.rows[0].coords.size(), 2u);

  const ScatterTable empty = export_projection_scatter(m3, Eigen::MatrixXd(0, 40), {});
  EXPECT_EQ(empty.to_csv(), "dim0,dim1,class\n");
}
