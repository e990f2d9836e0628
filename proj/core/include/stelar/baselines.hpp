#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "stelar/engine.hpp"
#include "stelar/tensor.hpp"

namespace stelar {

/// Leading train_len slabs fit the model, the next val_len drive early
/// stopping, the trailing test_len are scored. Must sum to the tensor length.
struct SplitSpec {
  int train_len = 0;
  int val_len = 0;
  int test_len = 0;

  int window_len() const { return train_len + val_len; }
};

double rmse(std::span<const double> pred, std::span<const double> truth);
double mae(std::span<const double> pred, std::span<const double> truth);

/// Every forecast slab is the per-(location, signal) mean of the last five
/// slabs before the test region.
DenseTensor3 mean_baseline(const DenseTensor3& t, const SplitSpec& split);

/// Fit one SIR incidence curve to a single series by projected gradient,
/// then extend it `horizon` steps. The series is rescaled to a reference
/// peak before fitting (the parameter box caps representable magnitudes)
/// and the forecast is scaled back. An all-zero series forecasts zeros.
std::vector<double> fit_sir_baseline(const std::vector<double>& series, int horizon,
                                     int steps = 300);

/// SEIR variant with the extra exposed pool; gradients by central finite
/// differences over (beta, gamma, sigma, s0, e0, i0).
std::vector<double> fit_seir_baseline(const std::vector<double>& series, int horizon,
                                      int steps = 300);

/// Unregularized fit followed by a post-hoc SIR fit on the frozen temporal
/// columns, then the usual slab forecast. Setting fit_post_hoc = false skips
/// the second step, leaving the SIR parameters at their seeded start. The
/// frozen-column fits converge slowly when i0 is small, hence the large
/// default step budget; each step is cheap.
DenseTensor3 two_step_stelar(const DenseTensor3& t, const Hyperparams& hp,
                             bool fit_post_hoc = true, int post_hoc_steps = 5000);

/// A named forecaster: takes the train+val window and the split, returns an
/// M x N x test_len tensor.
struct ForecastMethod {
  std::string name;
  std::function<DenseTensor3(const DenseTensor3&, const SplitSpec&)> run;
};

ForecastMethod make_mean_method();
ForecastMethod make_sir_method(int steps = 300);
ForecastMethod make_seir_method(int steps = 300);
ForecastMethod make_two_step_method(Hyperparams hp);
ForecastMethod make_stelar_method(Hyperparams hp);

struct EvalRow {
  std::string method;
  std::string signal;
  int horizon_days = 0;
  double rmse = 0.0;
  double mae = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;

  void write_csv(std::ostream& os) const;
  void write_table(std::ostream& os) const;
};

/// Runs every method on the train+val window and scores it per signal over
/// the test slabs, errors pooled across locations and horizons. A method
/// that throws yields NaN cells instead of aborting the report.
EvalReport evaluate(const std::vector<ForecastMethod>& methods, const DenseTensor3& t,
                    const SplitSpec& split, const std::vector<int>& signals,
                    const std::vector<std::string>& signal_labels = {});

}  // namespace stelar
