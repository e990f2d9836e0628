#pragma once

#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "stelar/sir_fit.hpp"
#include "stelar/tensor.hpp"

namespace stelar {

/// Jittered textbook start (beta 0.4, gamma 0.1, s 0.95, i 0.05, each scaled
/// by U(0.9, 1.1)), with s + i renormalized to stay inside the unit simplex.
SirParams default_sir_start(Index components, std::mt19937_64& rng);

struct Hyperparams {
  int rank = 5;
  double mu = 0.0;        ///< Frobenius regularization weight
  double nu = 0.0;        ///< latent SIR regularization weight
  int iters_outer = 100;
  int iters_inner = 10;
  int iters_grad = 50;
  int horizon = 10;       ///< default forecast window
  std::uint64_t seed = 0;
  int val_window = 5;     ///< trailing slabs held out for early stopping; 0 disables
  int val_signal = 0;     ///< signal index scored for validation; -1 pools all signals
};

enum class StopReason { max_iters, val_rmse_increase };

struct FittedStelar {
  FactorModel model;
  SirParams sir;
  Hyperparams hp;
  std::vector<double> objective_trace;   ///< one entry per outer iteration
  std::vector<double> val_rmse_trace;    ///< empty when val_window == 0
  StopReason stopped_reason = StopReason::max_iters;
  Index anchor = 0;                      ///< input timesteps; forecasts start after this
  double validation_rmse = std::numeric_limits<double>::quiet_NaN();
};

struct OuterIterationInfo {
  int iteration;     ///< 1-based
  double objective;
  double val_rmse;   ///< NaN when validation is disabled
};
using FitObserver = std::function<void(const OuterIterationInfo&)>;

/// Minimum-tracking increase detector used for early stopping: observe()
/// reports stop as soon as a value exceeds the best seen so far.
class EarlyStopper {
 public:
  /// rel_tol is the fractional rise over the best value that counts as a real
  /// increase; values inside the band are treated as plateau noise.
  explicit EarlyStopper(double rel_tol = 0.02) : rel_tol_(rel_tol) {}
  bool observe(double rmse);
  bool has_best() const { return best_index_ >= 0; }
  int best_index() const { return best_index_; }
  double best_value() const { return best_; }

 private:
  double rel_tol_;
  double best_ = std::numeric_limits<double>::infinity();
  int best_index_ = -1;
  int count_ = 0;
};

/// Alternating updates: one ADMM pass per factor, then projected gradient
/// steps on the per-component SIR parameters, until iters_outer is reached or
/// the validation RMSE (forecast of the trailing val_window slabs) rises above
/// the best seen. Returns the best-validation snapshot when validation is on.
FittedStelar fit(const DenseTensor3& t, const Hyperparams& hp, const FitObserver& observer = {});

/// ||X - [[A,B,C]]||_F^2 + mu (||A||_F^2 + ||B||_F^2 + ||C||_F^2)
///   + nu sum_{k,t} (C(t,k) - beta_k S_k(t-1) I_k(t-1))^2
double objective(const DenseTensor3& t, const FactorModel& model, const SirParams& sir,
                 const Hyperparams& hp);

/// Forecast `horizon` slabs past the fitted anchor: slab tau is
/// A diag(c_hat(tau,:)) B^T with c_hat rows from the SIR extension.
DenseTensor3 predict_slabs(const FittedStelar& fitted, int horizon);

struct ComponentSummary {
  double weight = 0.0;
  Vector temporal_profile;                                  ///< unit Euclidean norm
  std::vector<std::pair<Index, double>> top_locations;      ///< sorted by loading desc
  std::vector<std::pair<Index, double>> top_signals;
};

/// Unit-normalize the factors, rank components by weight and report the top
/// loadings per mode. Ties break toward the lower index.
std::vector<ComponentSummary> extract_components(const FittedStelar& fitted, int top_k,
                                                 int n_locations, int n_signals);

/// Default Frobenius weight: 1e-3 * ||X||_F^2 / (M + N + L).
double default_frobenius_weight(const DenseTensor3& t);

/// Mean squared entry magnitude of a factor, ||C||_F^2 / (L*K); the unit the
/// nu sweep multipliers scale.
double template_scale(const Matrix& c_factor);

struct NuSweepResult {
  double nu = 0.0;
  double val_rmse = std::numeric_limits<double>::quiet_NaN();
  FittedStelar fitted;
};

/// Picks nu by validation RMSE over multiplier * template_scale(C0), where C0
/// comes from a nu = 0 reference fit. Requires hp.val_window > 0.
NuSweepResult fit_with_nu_sweep(const DenseTensor3& t, Hyperparams hp,
                                const std::vector<double>& multipliers = {0.1, 1.0, 10.0});

}  // namespace stelar
