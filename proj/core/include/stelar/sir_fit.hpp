#pragma once

#include <array>

#include "stelar/tensor.hpp"

namespace stelar {

/// Per-component SIR parameters for the K latent temporal models.
struct SirParams {
  Vector beta;
  Vector gamma;
  Vector s;  ///< s(k) = S_k(0)
  Vector i;  ///< i(k) = I_k(0)

  Index components() const { return beta.size(); }
};

/// Box the projected-gradient fitter stays inside. Rates live in [0, 1]; the
/// initial-condition caps are deliberately loose because factor columns carry
/// arbitrary scale, and a curve scaled by alpha is reproduced exactly by
/// (beta/alpha, gamma, alpha*s, alpha*i) -- a tight cap on s and i would cut
/// those rescaled solutions off. Divergent iterates are rejected by the line
/// search, not the box.
struct SirFitBox {
  double beta_max = 1.0;
  double gamma_max = 1.0;
  double s_max = 10.0;
  double i_max = 10.0;
};

/// P(t,k) = S_k(t-1), Q(t,k) = I_k(t-1) for t = 1..horizon.
struct LatentTrajectories {
  Matrix P;
  Matrix Q;
};

LatentTrajectories latent_trajectories(const SirParams& params, int horizon);

/// Parameters a sensitivity is taken with respect to, in fixed order.
enum class SirParam { Beta = 0, Gamma = 1, S0 = 2, I0 = 3 };

/// dS(t)/dtheta and dI(t)/dtheta for t = 0..horizon-1, one component.
struct SensitivitySet {
  Vector dS;
  Vector dI;
};

struct SensitivityTrajectories {
  std::array<SensitivitySet, 4> wrt;  // indexed by SirParam

  const SensitivitySet& of(SirParam p) const { return wrt[static_cast<int>(p)]; }
};

/// Forward recursion of the four sensitivity pairs for one component.
/// Seeds: dS(0)/ds = 1, dI(0)/di = 1, everything else zero at t = 0.
SensitivityTrajectories sir_sensitivities(double beta, double gamma, double s0, double i0,
                                          int horizon);

/// Template matrix the temporal factor is regularized toward:
/// Cbar(t,k) = beta_k * S_k(t-1) * I_k(t-1), i.e. (P . Q) diag(beta).
Matrix build_template(const SirParams& params, int horizon);

/// Rows for times from_step+1 .. from_step+count of every component's
/// new-infections curve. extend_template(p, 0, L) == build_template(p, L).
Matrix extend_template(const SirParams& params, int from_step, int count);

/// f = nu * sum_{k,t} (C(t,k) - beta_k S_k(t-1) I_k(t-1))^2
double sir_objective(const SirParams& params, const Matrix& c_factor, double nu);

struct SirGradients {
  Vector beta;
  Vector gamma;
  Vector s;
  Vector i;
};

/// Analytic gradients of sir_objective, assembled from the recursive
/// sensitivities -- no finite differencing.
SirGradients sir_gradients(const SirParams& params, const Matrix& c_factor, double nu);

/// Projected gradient descent with Armijo backtracking (start 1.0, factor 0.5,
/// c = 1e-4) followed by projection onto the box. The per-component problems
/// are independent; a failed line search leaves that component unchanged.
SirParams fit_sir_params(const SirParams& params, const Matrix& c_factor, double nu, int steps,
                         const SirFitBox& box = {});

}  // namespace stelar
