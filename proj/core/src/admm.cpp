#include "stelar/admm.hpp"

#include <Eigen/Cholesky>

#include "stelar/error.hpp"

namespace stelar {

AdmmState AdmmState::zero_started(const Matrix& initial_factor, double rho_value) {
  AdmmState st;
  st.primal = initial_factor;
  st.aux = Matrix::Zero(initial_factor.rows(), initial_factor.cols());
  st.dual = Matrix::Zero(initial_factor.rows(), initial_factor.cols());
  st.rho = rho_value;
  return st;
}

double penalty_policy(const Matrix& gram) {
  constexpr double floor = 1e-12;
  if (gram.rows() == 0) return floor;
  const double rho = gram.trace() / static_cast<double>(gram.rows());
  return rho > floor ? rho : floor;
}

AdmmState admm_factor_update(AdmmState state, const FactorSubproblem& sub, int inner_iters) {
  if (inner_iters < 1) throw UsageError("admm_factor_update: inner_iters must be >= 1");
  const Index rows = state.primal.rows();
  const Index k = state.primal.cols();
  if (sub.gram.rows() != k || sub.gram.cols() != k)
    throw UsageError("admm_factor_update: gram must be K x K");
  if (sub.rhs.rows() != rows || sub.rhs.cols() != k)
    throw UsageError("admm_factor_update: rhs must match the factor shape");
  if (sub.nu > 0.0 && sub.target == nullptr)
    throw UsageError("admm_factor_update: nu > 0 requires a template target");
  if (state.aux.rows() != rows || state.aux.cols() != k || state.dual.rows() != rows ||
      state.dual.cols() != k)
    throw UsageError("admm_factor_update: state matrices must share the factor shape");

  // K x K system shared by every inner round.
  Matrix system = sub.gram;
  system.diagonal().array() += sub.mu + sub.nu + state.rho;
  Eigen::LLT<Matrix> llt(system);
  if (llt.info() != Eigen::Success)
    throw NumericalError("admm_factor_update: normal matrix is not positive definite");

  Matrix fixed_rhs_t = sub.rhs.transpose();  // K x rows
  if (sub.nu > 0.0) {
    if (sub.target->rows() != rows || sub.target->cols() != k)
      throw UsageError("admm_factor_update: template target must match the factor shape");
    fixed_rhs_t.noalias() += sub.nu * sub.target->transpose();
  }

  for (int it = 0; it < inner_iters; ++it) {
    Matrix rhs_t = fixed_rhs_t + state.rho * (state.primal + state.dual).transpose();
    state.aux = llt.solve(rhs_t).transpose();
    state.primal = (state.aux - state.dual).cwiseMax(0.0);
    state.dual += state.primal - state.aux;
  }
  return state;
}

}  // namespace stelar
