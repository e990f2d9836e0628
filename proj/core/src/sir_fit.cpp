#include "stelar/sir_fit.hpp"

#include <algorithm>
#include <cmath>

#include "stelar/epi.hpp"
#include "stelar/error.hpp"

namespace stelar {

namespace {

void check_params(const SirParams& p) {
  const Index k = p.beta.size();
  if (p.gamma.size() != k || p.s.size() != k || p.i.size() != k)
    throw UsageError("SirParams vectors must share their length");
  if (k < 1) throw UsageError("SirParams must hold at least one component");
}

struct ComponentParams {
  double beta, gamma, s0, i0;
};

ComponentParams component(const SirParams& p, Index k) {
  return {p.beta(k), p.gamma(k), p.s(k), p.i(k)};
}

// Residual sum of squares of one column against its component's curve.
double component_objective(const ComponentParams& cp, const Matrix& c_factor, Index k) {
  SirConfig cfg{cp.s0, cp.i0, cp.beta, cp.gamma, static_cast<int>(c_factor.rows())};
  const EpiTrajectory tr = sir_simulate(cfg);
  double acc = 0.0;
  for (Index t = 0; t < c_factor.rows(); ++t) {
    const double r = c_factor(t, k) - tr.new_infections[static_cast<std::size_t>(t)];
    acc += r * r;
  }
  return acc;
}

// Gradient of the (unweighted) residual sum of squares for one component.
Eigen::Vector4d component_gradient(const ComponentParams& cp, const Matrix& c_factor, Index k) {
  const int horizon = static_cast<int>(c_factor.rows());
  SirConfig cfg{cp.s0, cp.i0, cp.beta, cp.gamma, horizon};
  const EpiTrajectory tr = sir_simulate(cfg);
  const SensitivityTrajectories sens = sir_sensitivities(cp.beta, cp.gamma, cp.s0, cp.i0, horizon);

  Eigen::Vector4d grad = Eigen::Vector4d::Zero();
  for (Index t = 0; t < horizon; ++t) {
    const std::size_t u = static_cast<std::size_t>(t);  // state index t-1 in curve terms
    const double s_prev = tr.susceptible[u];
    const double i_prev = tr.infected[u];
    const double residual = c_factor(t, k) - tr.new_infections[u];
    for (int p = 0; p < 4; ++p) {
      const SensitivitySet& ss = sens.wrt[static_cast<std::size_t>(p)];
      double d_curve = cp.beta * (ss.dS(t) * i_prev + s_prev * ss.dI(t));
      if (static_cast<SirParam>(p) == SirParam::Beta) d_curve += s_prev * i_prev;
      grad(p) += -2.0 * residual * d_curve;
    }
  }
  return grad;
}

Eigen::Vector4d clamp_to_box(const Eigen::Vector4d& v, const SirFitBox& box) {
  Eigen::Vector4d out;
  out(0) = std::clamp(v(0), 0.0, box.beta_max);
  out(1) = std::clamp(v(1), 0.0, box.gamma_max);
  out(2) = std::clamp(v(2), 0.0, box.s_max);
  out(3) = std::clamp(v(3), 0.0, box.i_max);
  return out;
}

}  // namespace

LatentTrajectories latent_trajectories(const SirParams& params, int horizon) {
  check_params(params);
  if (horizon < 1) throw UsageError("latent_trajectories: horizon must be >= 1");
  const Index k_count = params.components();
  LatentTrajectories lt;
  lt.P.resize(horizon, k_count);
  lt.Q.resize(horizon, k_count);
  for (Index k = 0; k < k_count; ++k) {
    SirConfig cfg{params.s(k), params.i(k), params.beta(k), params.gamma(k), horizon};
    const EpiTrajectory tr = sir_simulate(cfg);
    for (int t = 0; t < horizon; ++t) {
      lt.P(t, k) = tr.susceptible[static_cast<std::size_t>(t)];
      lt.Q(t, k) = tr.infected[static_cast<std::size_t>(t)];
    }
  }
  return lt;
}

SensitivityTrajectories sir_sensitivities(double beta, double gamma, double s0, double i0,
                                          int horizon) {
  if (horizon < 1) throw UsageError("sir_sensitivities: horizon must be >= 1");

  SirConfig cfg{s0, i0, beta, gamma, horizon};
  const EpiTrajectory tr = sir_simulate(cfg);

  SensitivityTrajectories out;
  for (int p = 0; p < 4; ++p) {
    SensitivitySet& ss = out.wrt[static_cast<std::size_t>(p)];
    ss.dS = Vector::Zero(horizon);
    ss.dI = Vector::Zero(horizon);
    const SirParam which = static_cast<SirParam>(p);
    ss.dS(0) = which == SirParam::S0 ? 1.0 : 0.0;
    ss.dI(0) = which == SirParam::I0 ? 1.0 : 0.0;

    for (int t = 1; t < horizon; ++t) {
      const std::size_t u = static_cast<std::size_t>(t - 1);
      const double s_prev = tr.susceptible[u];
      const double i_prev = tr.infected[u];
      const double d_prod = ss.dS(t - 1) * i_prev + s_prev * ss.dI(t - 1);
      const double extra = which == SirParam::Beta ? s_prev * i_prev : 0.0;
      ss.dS(t) = ss.dS(t - 1) - beta * d_prod - extra;
      ss.dI(t) = ss.dI(t - 1) + beta * d_prod + extra - gamma * ss.dI(t - 1) -
                 (which == SirParam::Gamma ? i_prev : 0.0);
    }
  }
  return out;
}

Matrix build_template(const SirParams& params, int horizon) {
  // Routed through the simulator so the template, its extension, and the
  // objective's residuals share bit-identical curve values.
  if (horizon < 1) throw UsageError("build_template: horizon must be >= 1");
  return extend_template(params, 0, horizon);
}

Matrix extend_template(const SirParams& params, int from_step, int count) {
  check_params(params);
  if (from_step < 0 || count < 1)
    throw UsageError("extend_template: need from_step >= 0 and count >= 1");
  const Index k_count = params.components();
  Matrix out(count, k_count);
  for (Index k = 0; k < k_count; ++k) {
    SirConfig cfg{params.s(k), params.i(k), params.beta(k), params.gamma(k), from_step + count};
    const std::vector<double> curve = new_infections_curve(cfg);
    for (int t = 0; t < count; ++t)
      out(t, k) = curve[static_cast<std::size_t>(from_step + t)];
  }
  return out;
}

double sir_objective(const SirParams& params, const Matrix& c_factor, double nu) {
  check_params(params);
  if (c_factor.cols() != params.components())
    throw UsageError("sir_objective: factor columns must match the component count");
  if (nu == 0.0) return 0.0;
  double acc = 0.0;
  for (Index k = 0; k < params.components(); ++k)
    acc += component_objective(component(params, k), c_factor, k);
  return nu * acc;
}

SirGradients sir_gradients(const SirParams& params, const Matrix& c_factor, double nu) {
  check_params(params);
  if (c_factor.cols() != params.components())
    throw UsageError("sir_gradients: factor columns must match the component count");
  const Index k_count = params.components();
  SirGradients g{Vector::Zero(k_count), Vector::Zero(k_count), Vector::Zero(k_count),
                 Vector::Zero(k_count)};
  if (nu == 0.0) return g;
  for (Index k = 0; k < k_count; ++k) {
    const Eigen::Vector4d gk = nu * component_gradient(component(params, k), c_factor, k);
    g.beta(k) = gk(0);
    g.gamma(k) = gk(1);
    g.s(k) = gk(2);
    g.i(k) = gk(3);
  }
  return g;
}

SirParams fit_sir_params(const SirParams& params, const Matrix& c_factor, double nu, int steps,
                         const SirFitBox& box) {
  check_params(params);
  if (steps < 1) throw UsageError("fit_sir_params: steps must be >= 1");
  if (c_factor.cols() != params.components())
    throw UsageError("fit_sir_params: factor columns must match the component count");
  if (nu == 0.0) return params;

  constexpr double armijo_c = 1e-4;
  constexpr int max_backtracks = 60;

  SirParams out = params;
  for (Index k = 0; k < params.components(); ++k) {
    Eigen::Vector4d p{out.beta(k), out.gamma(k), out.s(k), out.i(k)};
    double f = component_objective({p(0), p(1), p(2), p(3)}, c_factor, k);

    for (int step = 0; step < steps; ++step) {
      const Eigen::Vector4d g = component_gradient({p(0), p(1), p(2), p(3)}, c_factor, k);
      if (g.lpNorm<Eigen::Infinity>() == 0.0) break;

      double alpha = 1.0;
      bool accepted = false;
      for (int bt = 0; bt < max_backtracks; ++bt) {
        const Eigen::Vector4d cand = clamp_to_box(p - alpha * g, box);
        const double fc = component_objective({cand(0), cand(1), cand(2), cand(3)}, c_factor, k);
        if (std::isfinite(fc) && fc <= f + armijo_c * g.dot(cand - p)) {
          p = cand;
          f = fc;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;  // zero step, component stays where it is
    }

    out.beta(k) = p(0);
    out.gamma(k) = p(1);
    out.s(k) = p(2);
    out.i(k) = p(3);
  }
  return out;
}

}  // namespace stelar
