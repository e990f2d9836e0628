#pragma once

#include "stelar/tensor.hpp"

namespace stelar {

/// Split variables for one factor's nonnegative least-squares subproblem.
/// `primal` is the constrained factor, `aux` the unconstrained copy (stored
/// factor-shaped, i.e. already transposed back), `dual` the scaled dual.
/// All three share the factor's rows x K shape.
struct AdmmState {
  Matrix primal;
  Matrix aux;
  Matrix dual;
  double rho = 1.0;

  static AdmmState zero_started(const Matrix& initial_factor, double rho);
};

/// One factor subproblem: min ||X_unf - Phi * F^T||_F^2 + mu ||F||_F^2
///                            (+ nu ||F - target||_F^2 for the temporal factor)
/// posed through its normal-equation pieces.
struct FactorSubproblem {
  Matrix rhs;                     ///< rows x K, the MTTKRP X_unf^T * Phi
  Matrix gram;                    ///< K x K, Phi^T * Phi
  double mu = 0.0;                ///< Frobenius weight
  double nu = 0.0;                ///< template weight (temporal factor only)
  const Matrix* target = nullptr; ///< rows x K template, required iff nu > 0
};

/// rho = trace(gram) / K, floored at 1e-12.
double penalty_policy(const Matrix& gram);

/// Runs `inner_iters` scaled-dual ADMM rounds:
///   aux    <- (gram + (mu+nu+rho) I)^-1 (rhs^T + nu target^T + rho (primal+dual)^T), transposed back
///   primal <- max(0, aux - dual)
///   dual   <- dual + primal - aux
/// The K x K system is factorized once per call and the constant part of the
/// right-hand side is assembled once per call.
AdmmState admm_factor_update(AdmmState state, const FactorSubproblem& sub, int inner_iters);

}  // namespace stelar
