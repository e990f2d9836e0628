#include "stelar/engine.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "stelar/admm.hpp"
#include "stelar/epi.hpp"
#include "stelar/error.hpp"

namespace stelar {

namespace {

void check_hyperparams(const Hyperparams& hp) {
  if (hp.rank < 1) throw UsageError("rank must be >= 1");
  if (hp.mu < 0 || hp.nu < 0) throw UsageError("mu and nu must be nonnegative");
  if (hp.iters_outer < 1 || hp.iters_inner < 1) throw UsageError("iteration budgets must be >= 1");
  if (hp.iters_grad < 0) throw UsageError("iters_grad must be >= 0");
  if (hp.horizon < 1) throw UsageError("forecast horizon must be >= 1");
  if (hp.val_window < 0) throw UsageError("val_window must be >= 0");
}

DenseTensor3 leading_slabs(const DenseTensor3& t, Index count) {
  DenseTensor3 out(t.locations(), t.signals(), count);
  for (Index tt = 0; tt < count; ++tt) out.slab(tt) = t.slab(tt);
  return out;
}

// Entrywise uniform(0,1) factors rescaled so the model norm matches the data.
FactorModel init_factors(const DenseTensor3& t, Index rank, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&](Index rows) {
    Matrix f(rows, rank);
    for (Index c = 0; c < rank; ++c)
      for (Index r = 0; r < rows; ++r) f(r, c) = unit(rng);
    return f;
  };
  FactorModel model{draw(t.locations()), draw(t.signals()), draw(t.timesteps()), {}};
  const double model_norm = reconstruct(model).frobenius_norm();
  const double data_norm = t.frobenius_norm();
  if (model_norm > 0 && data_norm > 0) {
    const double scale = std::cbrt(data_norm / model_norm);
    model.A *= scale;
    model.B *= scale;
    model.C *= scale;
  }
  return model;
}

SirParams one_component(const SirParams& p, Index k) {
  return {Vector::Constant(1, p.beta(k)), Vector::Constant(1, p.gamma(k)),
          Vector::Constant(1, p.s(k)), Vector::Constant(1, p.i(k))};
}

// Per-component refit where the warm continuation competes against a fresh
// textbook start rescaled to the column's current peak. Incidence curves are
// invariant under (beta/a, gamma, a*s, a*i), so the natural fresh start for a
// column peaking at P is the textbook curve scaled by P over its own peak;
// without it the warm path can stay trapped in a basin formed while the
// factor was still far from converged.
SirParams update_sir(const SirParams& sir, const Matrix& c, double nu, int steps,
                     const SirFitBox& box = {}) {
  SirParams out = sir;
  for (Index k = 0; k < c.cols(); ++k) {
    const Matrix col = c.col(k);
    SirParams best = fit_sir_params(one_component(sir, k), col, nu, steps, box);
    double best_obj = sir_objective(best, col, nu);

    const double peak = col.maxCoeff();
    if (peak > 0.0) {
      SirConfig textbook{0.95, 0.05, 0.4, 0.1, static_cast<int>(col.rows())};
      const auto curve = new_infections_curve(textbook);
      const double tb_peak = *std::max_element(curve.begin(), curve.end());
      const double alpha = peak / tb_peak;
      SirParams fresh{Vector::Constant(1, 0.4), Vector::Constant(1, 0.1),
                      Vector::Constant(1, std::min(0.95 * alpha, box.s_max)),
                      Vector::Constant(1, std::min(0.05 * alpha, box.i_max))};
      const SirParams cand = fit_sir_params(fresh, col, nu, steps, box);
      const double cand_obj = sir_objective(cand, col, nu);
      // Only jump basins on a decisive win; ties go to the warm path so the
      // parameters (and the validation forecast) do not thrash while the
      // factor is still moving.
      if (cand_obj < 0.8 * best_obj) {
        best = cand;
        best_obj = cand_obj;
      }
    }

    out.beta(k) = best.beta(0);
    out.gamma(k) = best.gamma(0);
    out.s(k) = best.s(0);
    out.i(k) = best.i(0);
  }
  return out;
}

double validation_rmse_of(const DenseTensor3& t, const FactorModel& model, const SirParams& sir,
                          Index fit_len, int val_window, int val_signal) {
  const Matrix c_val = extend_template(sir, static_cast<int>(fit_len), val_window);
  double acc = 0.0;
  std::size_t count = 0;
  for (int v = 0; v < val_window; ++v) {
    const Matrix pred = model.A * c_val.row(v).asDiagonal() * model.B.transpose();
    for (Index n = 0; n < t.signals(); ++n) {
      if (val_signal >= 0 && n != val_signal) continue;
      for (Index m = 0; m < t.locations(); ++m) {
        const double err = pred(m, n) - t(m, n, fit_len + v);
        acc += err * err;
        ++count;
      }
    }
  }
  return count == 0 ? std::numeric_limits<double>::quiet_NaN()
                    : std::sqrt(acc / static_cast<double>(count));
}

}  // namespace

SirParams default_sir_start(Index components, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> jitter(0.9, 1.1);
  SirParams p{Vector(components), Vector(components), Vector(components), Vector(components)};
  for (Index k = 0; k < components; ++k) {
    p.beta(k) = 0.4 * jitter(rng);
    p.gamma(k) = 0.1 * jitter(rng);
    p.s(k) = 0.95 * jitter(rng);
    p.i(k) = 0.05 * jitter(rng);
    const double total = p.s(k) + p.i(k);
    if (total > 1.0) {
      p.s(k) /= total;
      p.i(k) /= total;
    }
  }
  return p;
}

bool EarlyStopper::observe(double rmse) {
  ++count_;
  if (!std::isfinite(rmse)) return false;
  if (rmse > best_ * (1.0 + rel_tol_)) return true;
  if (rmse < best_) {
    best_ = rmse;
    best_index_ = count_ - 1;
  }
  return false;
}

double default_frobenius_weight(const DenseTensor3& t) {
  const double norm = t.frobenius_norm();
  return 1e-3 * norm * norm /
         static_cast<double>(t.locations() + t.signals() + t.timesteps());
}

double template_scale(const Matrix& c_factor) {
  if (c_factor.size() == 0) return 0.0;
  return c_factor.squaredNorm() / static_cast<double>(c_factor.size());
}

double objective(const DenseTensor3& t, const FactorModel& model, const SirParams& sir,
                 const Hyperparams& hp) {
  if (model.A.rows() != t.locations() || model.B.rows() != t.signals() ||
      model.C.rows() != t.timesteps())
    throw UsageError("objective: factor shapes must match the tensor");
  const DenseTensor3 approx = reconstruct(model);
  double fit_term = 0.0;
  for (Index idx = 0; idx < t.size(); ++idx) {
    const double d = t.data()[static_cast<std::size_t>(idx)] -
                     approx.data()[static_cast<std::size_t>(idx)];
    fit_term += d * d;
  }
  const double frob_term =
      hp.mu * (model.A.squaredNorm() + model.B.squaredNorm() + model.C.squaredNorm());
  const double sir_term = hp.nu > 0 ? sir_objective(sir, model.C, hp.nu) : 0.0;
  return fit_term + frob_term + sir_term;
}

FittedStelar fit(const DenseTensor3& t, const Hyperparams& hp, const FitObserver& observer) {
  check_hyperparams(hp);
  if (!t.all_finite()) throw DataError("fit: tensor contains non-finite values");
  if (!t.all_nonnegative()) throw DataError("fit: tensor contains negative values");

  const Index m = t.locations(), n = t.signals(), l = t.timesteps();
  const Index max_rank = std::min({m * n, n * l, m * l});
  if (hp.rank > max_rank) throw UsageError("fit: rank exceeds min pairwise dimension product");
  if (hp.val_window >= l) throw UsageError("fit: val_window must leave at least one slab to fit");
  if (hp.val_signal >= n || hp.val_signal < -1)
    throw UsageError("fit: val_signal out of range");

  const Index fit_len = l - hp.val_window;
  const DenseTensor3 x_fit = hp.val_window > 0 ? leading_slabs(t, fit_len) : t;
  const bool validate = hp.val_window > 0;

  std::mt19937_64 rng(hp.seed);
  FactorModel model = init_factors(x_fit, hp.rank, rng);
  SirParams sir = default_sir_start(hp.rank, rng);

  AdmmState st_a = AdmmState::zero_started(model.A, 1.0);
  AdmmState st_b = AdmmState::zero_started(model.B, 1.0);
  AdmmState st_c = AdmmState::zero_started(model.C, 1.0);

  Hyperparams hp_fit = hp;  // objective is evaluated on the fit region

  FittedStelar out;
  out.hp = hp;
  out.anchor = l;

  EarlyStopper stopper;
  FactorModel best_model;
  SirParams best_sir;
  StopReason reason = StopReason::max_iters;

  for (int outer = 1; outer <= hp.iters_outer; ++outer) {
    const Matrix gram_b = model.B.transpose() * model.B;
    const Matrix gram_c = model.C.transpose() * model.C;

    FactorSubproblem sub_a{mttkrp(x_fit, model.C, model.B, 1), gram_c.cwiseProduct(gram_b),
                           hp.mu, 0.0, nullptr};
    st_a.rho = penalty_policy(sub_a.gram);
    st_a = admm_factor_update(std::move(st_a), sub_a, hp.iters_inner);
    model.A = st_a.primal;

    const Matrix gram_a = model.A.transpose() * model.A;
    FactorSubproblem sub_b{mttkrp(x_fit, model.C, model.A, 2), gram_c.cwiseProduct(gram_a),
                           hp.mu, 0.0, nullptr};
    st_b.rho = penalty_policy(sub_b.gram);
    st_b = admm_factor_update(std::move(st_b), sub_b, hp.iters_inner);
    model.B = st_b.primal;

    const Matrix gram_b2 = model.B.transpose() * model.B;
    const Matrix tmpl = hp.nu > 0 ? build_template(sir, static_cast<int>(fit_len)) : Matrix();
    FactorSubproblem sub_c{mttkrp(x_fit, model.B, model.A, 3), gram_b2.cwiseProduct(gram_a),
                           hp.mu, hp.nu, hp.nu > 0 ? &tmpl : nullptr};
    st_c.rho = penalty_policy(sub_c.gram);
    st_c = admm_factor_update(std::move(st_c), sub_c, hp.iters_inner);
    model.C = st_c.primal;

    if (hp.nu > 0 && hp.iters_grad > 0)
      sir = update_sir(sir, model.C, hp.nu, hp.iters_grad);

    out.objective_trace.push_back(objective(x_fit, model, sir, hp_fit));

    double val_rmse = std::numeric_limits<double>::quiet_NaN();
    bool stop = false;
    if (validate) {
      val_rmse = validation_rmse_of(t, model, sir, fit_len, hp.val_window, hp.val_signal);
      out.val_rmse_trace.push_back(val_rmse);
      const int prev_best = stopper.best_index();
      stop = stopper.observe(val_rmse);
      if (stopper.best_index() != prev_best) {
        best_model = model;
        best_sir = sir;
      }
    }

    if (observer) observer({outer, out.objective_trace.back(), val_rmse});
    if (stop) {
      reason = StopReason::val_rmse_increase;
      break;
    }
  }

  if (validate && stopper.has_best()) {
    out.model = best_model;
    out.sir = best_sir;
    out.validation_rmse = stopper.best_value();
  } else {
    out.model = model;
    out.sir = sir;
  }
  out.stopped_reason = reason;
  return out;
}

DenseTensor3 predict_slabs(const FittedStelar& fitted, int horizon) {
  if (horizon < 1) throw UsageError("predict_slabs: horizon must be >= 1");
  const FactorModel& model = fitted.model;
  const Matrix c_hat = extend_template(fitted.sir, static_cast<int>(fitted.anchor), horizon);

  Matrix scaled_a = model.A;
  if (model.weights.size() > 0) scaled_a = model.A * model.weights.asDiagonal();

  DenseTensor3 out(model.A.rows(), model.B.rows(), horizon);
  for (int tau = 0; tau < horizon; ++tau)
    out.slab(tau).noalias() = scaled_a * c_hat.row(tau).asDiagonal() * model.B.transpose();
  return out;
}

std::vector<ComponentSummary> extract_components(const FittedStelar& fitted, int top_k,
                                                 int n_locations, int n_signals) {
  const Index rank = fitted.model.rank();
  if (top_k < 1 || top_k > rank)
    throw UsageError("extract_components: top_k must be in [1, rank]");

  const FactorModel unit = normalize(fitted.model);

  std::vector<Index> order(static_cast<std::size_t>(rank));
  for (Index k = 0; k < rank; ++k) order[static_cast<std::size_t>(k)] = k;
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (unit.weights(a) != unit.weights(b)) return unit.weights(a) > unit.weights(b);
    return a < b;
  });

  auto top_loadings = [](const Matrix& factor, Index col, int count) {
    std::vector<std::pair<Index, double>> entries;
    entries.reserve(static_cast<std::size_t>(factor.rows()));
    for (Index r = 0; r < factor.rows(); ++r) entries.emplace_back(r, factor(r, col));
    std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    entries.resize(std::min<std::size_t>(entries.size(), static_cast<std::size_t>(count)));
    return entries;
  };

  std::vector<ComponentSummary> out;
  out.reserve(static_cast<std::size_t>(top_k));
  for (int rank_pos = 0; rank_pos < top_k; ++rank_pos) {
    const Index k = order[static_cast<std::size_t>(rank_pos)];
    ComponentSummary cs;
    cs.weight = unit.weights(k);
    cs.temporal_profile = unit.C.col(k);
    cs.top_locations = top_loadings(unit.A, k, n_locations);
    cs.top_signals = top_loadings(unit.B, k, n_signals);
    out.push_back(std::move(cs));
  }
  return out;
}

NuSweepResult fit_with_nu_sweep(const DenseTensor3& t, Hyperparams hp,
                                const std::vector<double>& multipliers) {
  if (hp.val_window < 1)
    throw UsageError("fit_with_nu_sweep: needs val_window > 0 to score candidates");
  if (multipliers.empty()) throw UsageError("fit_with_nu_sweep: no multipliers given");

  Hyperparams ref_hp = hp;
  ref_hp.nu = 0.0;
  const FittedStelar reference = fit(t, ref_hp);
  const double scale = template_scale(reference.model.C);

  NuSweepResult best;
  bool first = true;
  for (double mult : multipliers) {
    Hyperparams cand_hp = hp;
    cand_hp.nu = mult * scale;
    FittedStelar cand = fit(t, cand_hp);
    const double score = cand.validation_rmse;
    if (first || (std::isfinite(score) && score < best.val_rmse)) {
      best.nu = cand_hp.nu;
      best.val_rmse = score;
      best.fitted = std::move(cand);
      first = false;
    }
  }
  return best;
}

}  // namespace stelar
