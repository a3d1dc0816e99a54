#include "enose/svm.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "enose/error.hpp"
#include "enose/neural_net.hpp"
#include "json_eigen.hpp"

namespace enose {

SvmModel::SvmModel(SvmKernel kernel, double gamma, Eigen::MatrixXd support, Eigen::MatrixXd coefficients,
                   Eigen::VectorXd rho)
    : kernel_(kernel), gamma_(gamma), support_(std::move(support)), coef_(std::move(coefficients)),
      rho_(std::move(rho)) {}

double SvmModel::kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  if (kernel_ == SvmKernel::Linear) return a.dot(b);
  return std::exp(-gamma_ * (a - b).squaredNorm());
}

Eigen::VectorXd SvmModel::decision_values(const Eigen::VectorXd& x) const {
  Eigen::VectorXd k(support_.rows());
  for (Eigen::Index i = 0; i < support_.rows(); ++i) k(i) = kernel(support_.row(i).transpose(), x);
  return coef_.transpose() * k - rho_;
}

Eigen::VectorXd SvmModel::predict_proba(const Eigen::VectorXd& x) const { return softmax(decision_values(x)); }

nlohmann::json SvmModel::to_json() const {
  return {{"kernel", kernel_ == SvmKernel::Linear ? "linear" : "rbf"},
          {"gamma", gamma_},
          {"support", detail::to_json(support_)},
          {"coefficients", detail::to_json(coef_)},
          {"rho", detail::to_json(rho_)}};
}

std::unique_ptr<Model> SvmModel::from_json(const nlohmann::json& j) {
  const std::string k = j.at("kernel").get<std::string>();
  if (k != "linear" && k != "rbf") throw CorruptModel("unknown SVM kernel '" + k + "'");
  Eigen::MatrixXd sv = detail::matrix_from_json(j.at("support"));
  Eigen::MatrixXd coef = detail::matrix_from_json(j.at("coefficients"));
  Eigen::VectorXd rho = detail::vector_from_json(j.at("rho"));
  if (coef.rows() != sv.rows() || coef.cols() != rho.size()) throw CorruptModel("SVM model shape mismatch");
  return std::make_unique<SvmModel>(k == "linear" ? SvmKernel::Linear : SvmKernel::Rbf, j.at("gamma").get<double>(),
                                    std::move(sv), std::move(coef), std::move(rho));
}

double svm_auto_gamma(const Eigen::MatrixXd& x) {
  const double mean = x.mean();
  const double var = (x.array() - mean).square().mean();
  if (!(var > 0.0)) return 1.0;
  return 1.0 / (static_cast<double>(x.cols()) * var);
}

namespace {

struct BinaryResult {
  Eigen::VectorXd alpha;
  double rho = 0.0;
};

// Dual: min 1/2 a'Qa - e'a, 0 <= a <= C, y'a = 0, Q_ij = y_i y_j K_ij.
BinaryResult solve_smo(const Eigen::MatrixXd& kmat, const std::vector<double>& y, double c, double tol,
                       int max_iter) {
  const auto n = static_cast<Eigen::Index>(y.size());
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);
  const double inf = std::numeric_limits<double>::infinity();
  auto upper = [&](Eigen::Index t) { return y[t] > 0 ? alpha(t) < c : alpha(t) > 0.0; };
  auto lower = [&](Eigen::Index t) { return y[t] > 0 ? alpha(t) > 0.0 : alpha(t) < c; };

  for (int iter = 0; iter < max_iter; ++iter) {
    Eigen::Index i = -1, j = -1;
    double gmax = -inf, gmin = inf;
    for (Eigen::Index t = 0; t < n; ++t) {
      const double v = -y[t] * grad(t);
      if (upper(t) && v > gmax) {
        gmax = v;
        i = t;
      }
      if (lower(t) && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    if (i < 0 || j < 0 || gmax - gmin < tol) break;

    const double qii = kmat(i, i), qjj = kmat(j, j), kij = kmat(i, j);
    const double old_ai = alpha(i), old_aj = alpha(j);
    if (y[i] != y[j]) {
      double quad = qii + qjj + 2.0 * kij;
      if (quad <= 0.0) quad = 1e-12;
      const double delta = (-grad(i) - grad(j)) / quad;
      const double diff = alpha(i) - alpha(j);
      alpha(i) += delta;
      alpha(j) += delta;
      if (diff > 0.0) {
        if (alpha(j) < 0.0) {
          alpha(j) = 0.0;
          alpha(i) = diff;
        }
      } else if (alpha(i) < 0.0) {
        alpha(i) = 0.0;
        alpha(j) = -diff;
      }
      if (diff > 0.0) {
        if (alpha(i) > c) {
          alpha(i) = c;
          alpha(j) = c - diff;
        }
      } else if (alpha(j) > c) {
        alpha(j) = c;
        alpha(i) = c + diff;
      }
    } else {
      double quad = qii + qjj - 2.0 * kij;
      if (quad <= 0.0) quad = 1e-12;
      const double delta = (grad(i) - grad(j)) / quad;
      const double sum = alpha(i) + alpha(j);
      alpha(i) -= delta;
      alpha(j) += delta;
      if (sum > c) {
        if (alpha(i) > c) {
          alpha(i) = c;
          alpha(j) = sum - c;
        }
      } else if (alpha(j) < 0.0) {
        alpha(j) = 0.0;
        alpha(i) = sum;
      }
      if (sum > c) {
        if (alpha(j) > c) {
          alpha(j) = c;
          alpha(i) = sum - c;
        }
      } else if (alpha(i) < 0.0) {
        alpha(i) = 0.0;
        alpha(j) = sum;
      }
    }
    const double di = alpha(i) - old_ai, dj = alpha(j) - old_aj;
    for (Eigen::Index t = 0; t < n; ++t) {
      grad(t) += y[t] * (y[i] * di * kmat(t, i) + y[j] * dj * kmat(t, j));
    }
  }

  // rho as in LIBSVM: mean over free vectors, else the midpoint of the bounds.
  double ub = inf, lb = -inf, sum_free = 0.0;
  int free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y[t] * grad(t);
    if (alpha(t) >= c) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha(t) <= 0.0) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++free;
      sum_free += yg;
    }
  }
  BinaryResult r;
  r.alpha = std::move(alpha);
  r.rho = free > 0 ? sum_free / free : (ub + lb) / 2.0;
  return r;
}

}  // namespace

std::unique_ptr<SvmModel> fit_svm(const Eigen::MatrixXd& x, std::span<const int> y, std::size_t classes,
                                  const SvmParams& params) {
  const Eigen::Index n = x.rows();
  if (n == 0 || static_cast<std::size_t>(n) != y.size()) throw DimensionMismatch("svm: bad training shape");
  const double gamma = params.gamma > 0.0 ? params.gamma : svm_auto_gamma(x);

  Eigen::MatrixXd kmat(n, n);
  if (params.kernel == SvmKernel::Linear) {
    kmat.noalias() = x * x.transpose();
  } else {
    const Eigen::VectorXd sq = x.rowwise().squaredNorm();
    kmat.noalias() = -2.0 * x * x.transpose();
    kmat.colwise() += sq;
    kmat.rowwise() += sq.transpose();
    kmat = (-gamma * kmat.array().max(0.0)).exp();
  }

  const auto c = static_cast<Eigen::Index>(classes);
  Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(n, c);
  Eigen::VectorXd rho = Eigen::VectorXd::Zero(c);
  std::vector<double> yy(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < c; ++k) {
    bool any = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      yy[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] == k ? 1.0 : -1.0;
      any = any || y[static_cast<std::size_t>(i)] == k;
    }
    if (!any) {
      rho(k) = 1.0;
      continue;
    }
    BinaryResult r = solve_smo(kmat, yy, params.c, params.tolerance, params.max_iterations);
    for (Eigen::Index i = 0; i < n; ++i) coef(i, k) = r.alpha(i) * yy[static_cast<std::size_t>(i)];
    rho(k) = r.rho;
  }

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i) {
    if ((coef.row(i).array() != 0.0).any()) keep.push_back(i);
  }
  Eigen::MatrixXd sv(static_cast<Eigen::Index>(keep.size()), x.cols());
  Eigen::MatrixXd sc(static_cast<Eigen::Index>(keep.size()), c);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    sv.row(static_cast<Eigen::Index>(k)) = x.row(keep[k]);
    sc.row(static_cast<Eigen::Index>(k)) = coef.row(keep[k]);
  }
  return std::make_unique<SvmModel>(params.kernel, gamma, std::move(sv), std::move(sc), std::move(rho));
}

}  // namespace enose
