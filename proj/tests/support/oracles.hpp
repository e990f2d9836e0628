// Independent reference implementations the tests compare against. These are
// deliberately naive (triple loops, dense products, plain projected gradient)
// so a bug in the optimized code cannot hide in its own mirror image.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "stelar/engine.hpp"
#include "stelar/epi.hpp"
#include "stelar/sir_fit.hpp"
#include "stelar/tensor.hpp"

namespace oracles {

using stelar::DenseTensor3;
using stelar::FactorModel;
using stelar::Index;
using stelar::Matrix;
using stelar::Vector;

inline Matrix unfold_oracle(const DenseTensor3& t, int mode) {
  const Index m_dim = t.locations(), n_dim = t.signals(), l_dim = t.timesteps();
  Matrix out;
  if (mode == 1) out = Matrix::Zero(n_dim * l_dim, m_dim);
  if (mode == 2) out = Matrix::Zero(m_dim * l_dim, n_dim);
  if (mode == 3) out = Matrix::Zero(m_dim * n_dim, l_dim);
  for (Index tt = 0; tt < l_dim; ++tt)
    for (Index n = 0; n < n_dim; ++n)
      for (Index m = 0; m < m_dim; ++m) {
        if (mode == 1) out(tt * n_dim + n, m) = t(m, n, tt);
        if (mode == 2) out(tt * m_dim + m, n) = t(m, n, tt);
        if (mode == 3) out(n * m_dim + m, tt) = t(m, n, tt);
      }
  return out;
}

inline Matrix khatri_rao_oracle(const Matrix& p, const Matrix& q) {
  Matrix out(p.rows() * q.rows(), p.cols());
  for (Index k = 0; k < p.cols(); ++k)
    for (Index j = 0; j < p.rows(); ++j)
      for (Index i = 0; i < q.rows(); ++i) out(j * q.rows() + i, k) = p(j, k) * q(i, k);
  return out;
}

inline DenseTensor3 reconstruct_oracle(const FactorModel& model) {
  const Index m_dim = model.A.rows(), n_dim = model.B.rows(), l_dim = model.C.rows();
  const Index rank = model.rank();
  DenseTensor3 out(m_dim, n_dim, l_dim);
  for (Index tt = 0; tt < l_dim; ++tt)
    for (Index n = 0; n < n_dim; ++n)
      for (Index m = 0; m < m_dim; ++m) {
        double acc = 0.0;
        for (Index k = 0; k < rank; ++k) {
          const double w = model.weights.size() > 0 ? model.weights(k) : 1.0;
          acc += w * model.A(m, k) * model.B(n, k) * model.C(tt, k);
        }
        out(m, n, tt) = acc;
      }
  return out;
}

inline Matrix mttkrp_oracle(const DenseTensor3& t, const Matrix& f1, const Matrix& f2,
                            int mode) {
  return unfold_oracle(t, mode).transpose() * khatri_rao_oracle(f1, f2);
}

/// Eq-by-eq evaluation of the joint objective from scratch: data term by
/// triple loop, Frobenius terms by explicit sums, template term through a
/// fresh simulator run per component.
inline double objective_oracle(const DenseTensor3& t, const FactorModel& model,
                               const stelar::SirParams& sir, double mu, double nu) {
  const DenseTensor3 xhat = reconstruct_oracle(model);
  double data = 0.0;
  for (Index tt = 0; tt < t.timesteps(); ++tt)
    for (Index n = 0; n < t.signals(); ++n)
      for (Index m = 0; m < t.locations(); ++m) {
        const double r = t(m, n, tt) - xhat(m, n, tt);
        data += r * r;
      }
  double frob = 0.0;
  for (const Matrix* f : {&model.A, &model.B, &model.C}) frob += f->squaredNorm();
  double fit = 0.0;
  for (Index k = 0; k < sir.components(); ++k) {
    stelar::SirConfig cfg;
    cfg.beta = sir.beta(k);
    cfg.gamma = sir.gamma(k);
    cfg.s0 = sir.s(k);
    cfg.i0 = sir.i(k);
    cfg.horizon = static_cast<int>(model.C.rows());
    const auto curve = stelar::new_infections_curve(cfg);
    for (Index tt = 0; tt < model.C.rows(); ++tt) {
      const double r = model.C(tt, k) - curve[static_cast<std::size_t>(tt)];
      fit += r * r;
    }
  }
  return data + mu * frob + nu * fit;
}

/// min_{Y >= 0} ||X - Phi Y^T||_F^2 + mu ||Y||_F^2 + nu ||Y - T||_F^2 by
/// projected gradient with a Lipschitz step, run to tight convergence.
inline Matrix nnls_pg_oracle(const Matrix& x, const Matrix& phi, double mu = 0.0,
                             double nu = 0.0, const Matrix* target = nullptr,
                             int max_iters = 500000, double tol = 1e-13) {
  const Matrix gram = phi.transpose() * phi;
  const Matrix rhs = x.transpose() * phi;
  const double lip =
      2.0 * (Eigen::SelfAdjointEigenSolver<Matrix>(gram).eigenvalues().maxCoeff() + mu + nu);
  const double step = 1.0 / lip;
  Matrix y = Matrix::Zero(rhs.rows(), rhs.cols());
  for (int it = 0; it < max_iters; ++it) {
    Matrix grad = 2.0 * (y * gram - rhs + (mu + nu) * y);
    if (target != nullptr) grad -= 2.0 * nu * *target;
    const Matrix next = (y - step * grad).cwiseMax(0.0);
    const double delta = (next - y).norm();
    y = next;
    if (delta <= tol * (1.0 + y.norm())) break;
  }
  return y;
}

inline double nnls_objective(const Matrix& x, const Matrix& phi, const Matrix& y, double mu = 0.0,
                             double nu = 0.0, const Matrix* target = nullptr) {
  double obj = (x - phi * y.transpose()).squaredNorm() + mu * y.squaredNorm();
  if (target != nullptr) obj += nu * (y - *target).squaredNorm();
  return obj;
}

/// Central finite differences of sir_objective in one parameter entry.
inline double fd_partial(stelar::SirParams params, int which, Index k, const Matrix& c,
                         double nu, double h = 1e-6) {
  auto entry = [&](stelar::SirParams& p) -> double& {
    switch (which) {
      case 0: return p.beta(k);
      case 1: return p.gamma(k);
      case 2: return p.s(k);
      default: return p.i(k);
    }
  };
  stelar::SirParams hi = params, lo = params;
  entry(hi) += h;
  entry(lo) -= h;
  return (stelar::sir_objective(hi, c, nu) - stelar::sir_objective(lo, c, nu)) / (2.0 * h);
}

inline double cosine(const Vector& a, const Vector& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

struct AlignmentScore {
  double mean_cos_a = 0.0;
  double mean_cos_b = 0.0;
  double mean_cos_c = 0.0;
};

/// Greedy one-to-one matching of estimated components to true ones by the
/// averaged three-mode cosine, then per-mode mean cosines over the matching.
inline AlignmentScore greedy_align(const FactorModel& truth, const FactorModel& est) {
  const Index rank = truth.rank();
  Matrix score(rank, rank);
  for (Index k = 0; k < rank; ++k)
    for (Index j = 0; j < rank; ++j)
      score(k, j) = (cosine(truth.A.col(k), est.A.col(j)) +
                     cosine(truth.B.col(k), est.B.col(j)) +
                     cosine(truth.C.col(k), est.C.col(j))) /
                    3.0;
  std::vector<bool> used_true(static_cast<std::size_t>(rank), false);
  std::vector<bool> used_est(static_cast<std::size_t>(rank), false);
  AlignmentScore out;
  for (Index pick = 0; pick < rank; ++pick) {
    Index best_k = -1, best_j = -1;
    double best = -2.0;
    for (Index k = 0; k < rank; ++k) {
      if (used_true[static_cast<std::size_t>(k)]) continue;
      for (Index j = 0; j < rank; ++j) {
        if (used_est[static_cast<std::size_t>(j)]) continue;
        if (score(k, j) > best) {
          best = score(k, j);
          best_k = k;
          best_j = j;
        }
      }
    }
    used_true[static_cast<std::size_t>(best_k)] = true;
    used_est[static_cast<std::size_t>(best_j)] = true;
    out.mean_cos_a += cosine(truth.A.col(best_k), est.A.col(best_j));
    out.mean_cos_b += cosine(truth.B.col(best_k), est.B.col(best_j));
    out.mean_cos_c += cosine(truth.C.col(best_k), est.C.col(best_j));
  }
  out.mean_cos_a /= static_cast<double>(rank);
  out.mean_cos_b /= static_cast<double>(rank);
  out.mean_cos_c /= static_cast<double>(rank);
  return out;
}

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng, double lo = 0.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = dist(rng);
  return m;
}

inline DenseTensor3 random_tensor(Index m_dim, Index n_dim, Index l_dim, std::mt19937_64& rng) {
  DenseTensor3 t(m_dim, n_dim, l_dim);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (Index tt = 0; tt < l_dim; ++tt)
    for (Index n = 0; n < n_dim; ++n)
      for (Index m = 0; m < m_dim; ++m) t(m, n, tt) = dist(rng);
  return t;
}

inline double relative_fit_error(const DenseTensor3& x, const FactorModel& model) {
  const DenseTensor3 xhat = stelar::reconstruct(model);
  double num = 0.0;
  for (Index j = 0; j < x.size(); ++j) {
    const double d = x.data()[static_cast<std::size_t>(j)] -
                     xhat.data()[static_cast<std::size_t>(j)];
    num += d * d;
  }
  return std::sqrt(num) / x.frobenius_norm();
}

}  // namespace oracles
