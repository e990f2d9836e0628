#include "stelar/baselines.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <random>

#include "stelar/epi.hpp"
#include "stelar/error.hpp"

namespace stelar {

namespace {

// Series are rescaled to this peak before curve fitting: with all rates and
// initial fractions boxed into [0, 1] the representable incidence curves top
// out well below 1, and the textbook start peaks near 0.04.
constexpr double kFitScaleTarget = 0.04;

void check_split(const DenseTensor3& t, const SplitSpec& split) {
  if (split.train_len < 1 || split.val_len < 0 || split.test_len < 1)
    throw UsageError("split needs train_len >= 1, val_len >= 0, test_len >= 1");
  if (split.window_len() > t.timesteps())
    throw UsageError("split window exceeds tensor length");
}

std::vector<double> window_series(const DenseTensor3& t, Index m, Index n, int len) {
  std::vector<double> s(static_cast<std::size_t>(len));
  for (int tt = 0; tt < len; ++tt) s[static_cast<std::size_t>(tt)] = t(m, n, tt);
  return s;
}

// ---- SEIR curve fitting: objective plus central-difference gradients ----

using SeirPoint = std::array<double, 6>;  // beta, gamma, sigma, s0, e0, i0

std::vector<double> seir_curve(const SeirPoint& p, int horizon) {
  SeirConfig cfg;
  cfg.beta = p[0];
  cfg.gamma = p[1];
  cfg.sigma = p[2];
  cfg.s0 = p[3];
  cfg.e0 = p[4];
  cfg.i0 = p[5];
  cfg.horizon = horizon;
  return seir_simulate(cfg).new_infections;
}

double seir_ssr(const SeirPoint& p, const std::vector<double>& target) {
  const std::vector<double> curve = seir_curve(p, static_cast<int>(target.size()));
  double acc = 0.0;
  for (std::size_t t = 0; t < target.size(); ++t) {
    const double r = curve[t] - target[t];
    acc += r * r;
  }
  return acc;
}

SeirPoint project_unit_box(SeirPoint p) {
  for (double& v : p) v = std::clamp(v, 0.0, 1.0);
  return p;
}

SeirPoint fit_seir_point(const std::vector<double>& target, int steps) {
  SeirPoint p{0.4, 0.1, 0.5, 0.95, 0.0, 0.05};
  double f = seir_ssr(p, target);
  for (int it = 0; it < steps; ++it) {
    SeirPoint g{};
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(p[j]));
      SeirPoint lo = p, hi = p;
      hi[j] += h;
      lo[j] -= h;
      g[j] = (seir_ssr(hi, target) - seir_ssr(lo, target)) / (2.0 * h);
    }
    double step = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      SeirPoint cand = p;
      for (std::size_t j = 0; j < p.size(); ++j) cand[j] -= step * g[j];
      cand = project_unit_box(cand);
      double dir = 0.0;
      for (std::size_t j = 0; j < p.size(); ++j) dir += g[j] * (cand[j] - p[j]);
      const double f_cand = seir_ssr(cand, target);
      if (f_cand <= f + 1e-4 * dir) {
        p = cand;
        f = f_cand;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  return p;
}

// Fit one normalized series with the given curve fitter and extend it.
// fit(normalized_target) -> (curve over the window, extension of `horizon`).
template <typename Fit>
std::vector<double> scaled_curve_forecast(const std::vector<double>& series, int horizon,
                                          Fit&& fit) {
  if (series.size() < 5) throw UsageError("curve fitting needs at least 5 observations");
  if (horizon < 1) throw UsageError("forecast horizon must be >= 1");
  const double peak = *std::max_element(series.begin(), series.end());
  if (!(peak > 0.0)) return std::vector<double>(static_cast<std::size_t>(horizon), 0.0);

  const double scale = kFitScaleTarget / peak;
  std::vector<double> target(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) target[t] = series[t] * scale;

  std::vector<double> ext = fit(target, horizon);
  for (double& v : ext) v /= scale;
  return ext;
}

}  // namespace

double rmse(std::span<const double> pred, std::span<const double> truth) {
  if (pred.empty() || pred.size() != truth.size())
    throw UsageError("rmse needs two equal-length nonempty spans");
  double acc = 0.0;
  for (std::size_t j = 0; j < pred.size(); ++j) {
    const double r = pred[j] - truth[j];
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(pred.size()));
}

double mae(std::span<const double> pred, std::span<const double> truth) {
  if (pred.empty() || pred.size() != truth.size())
    throw UsageError("mae needs two equal-length nonempty spans");
  double acc = 0.0;
  for (std::size_t j = 0; j < pred.size(); ++j) acc += std::abs(pred[j] - truth[j]);
  return acc / static_cast<double>(pred.size());
}

DenseTensor3 mean_baseline(const DenseTensor3& t, const SplitSpec& split) {
  check_split(t, split);
  if (split.train_len < 5) throw UsageError("mean baseline needs train_len >= 5");

  DenseTensor3 out(t.locations(), t.signals(), split.test_len);
  for (Index n = 0; n < t.signals(); ++n) {
    for (Index m = 0; m < t.locations(); ++m) {
      double mean = 0.0;
      for (int tt = split.train_len - 5; tt < split.train_len; ++tt) mean += t(m, n, tt);
      mean /= 5.0;
      for (int tau = 0; tau < split.test_len; ++tau) out(m, n, tau) = mean;
    }
  }
  return out;
}

std::vector<double> fit_sir_baseline(const std::vector<double>& series, int horizon, int steps) {
  return scaled_curve_forecast(series, horizon, [steps](const std::vector<double>& target,
                                                        int h) {
    const int len = static_cast<int>(target.size());
    Matrix c(len, 1);
    for (int t = 0; t < len; ++t) c(t, 0) = target[static_cast<std::size_t>(t)];
    SirParams start{Vector::Constant(1, 0.4), Vector::Constant(1, 0.1),
                    Vector::Constant(1, 0.95), Vector::Constant(1, 0.05)};
    const SirParams fitted = fit_sir_params(start, c, 1.0, steps);
    const Matrix ext = extend_template(fitted, len, h);
    return std::vector<double>(ext.data(), ext.data() + h);
  });
}

std::vector<double> fit_seir_baseline(const std::vector<double>& series, int horizon, int steps) {
  return scaled_curve_forecast(series, horizon, [steps](const std::vector<double>& target,
                                                        int h) {
    const int len = static_cast<int>(target.size());
    const SeirPoint p = fit_seir_point(target, steps);
    const std::vector<double> full = seir_curve(p, len + h);
    return std::vector<double>(full.begin() + len, full.end());
  });
}

DenseTensor3 two_step_stelar(const DenseTensor3& t, const Hyperparams& hp, bool fit_post_hoc,
                             int post_hoc_steps) {
  Hyperparams plain = hp;
  plain.nu = 0.0;
  FittedStelar fitted = fit(t, plain);

  if (fit_post_hoc) {
    const Index rank = fitted.model.rank();
    std::mt19937_64 rng(hp.seed);
    SirParams start = default_sir_start(rank, rng);

    for (Index k = 0; k < rank; ++k) {
      const double peak = fitted.model.C.col(k).maxCoeff();
      if (!(peak > 0.0)) {
        // A flat column carries no epidemic signal; force its extension to zero.
        fitted.sir.i(k) = 0.0;
        continue;
      }
      // Rescale the column to the fitting range; the inverse on A keeps the
      // reconstruction (and hence the forecast) unchanged.
      const double scale = kFitScaleTarget / peak;
      fitted.model.C.col(k) *= scale;
      fitted.model.A.col(k) /= scale;

      Matrix target = fitted.model.C.col(k);
      SirParams one{Vector::Constant(1, start.beta(k)), Vector::Constant(1, start.gamma(k)),
                    Vector::Constant(1, start.s(k)), Vector::Constant(1, start.i(k))};
      const SirParams refit = fit_sir_params(one, target, 1.0, post_hoc_steps);
      fitted.sir.beta(k) = refit.beta(0);
      fitted.sir.gamma(k) = refit.gamma(0);
      fitted.sir.s(k) = refit.s(0);
      fitted.sir.i(k) = refit.i(0);
    }
  }
  return predict_slabs(fitted, hp.horizon);
}

ForecastMethod make_mean_method() {
  return {"mean5", [](const DenseTensor3& window, const SplitSpec& split) {
            return mean_baseline(window, split);
          }};
}

ForecastMethod make_sir_method(int steps) {
  return {"sir", [steps](const DenseTensor3& window, const SplitSpec& split) {
            DenseTensor3 out(window.locations(), window.signals(), split.test_len);
            for (Index n = 0; n < window.signals(); ++n) {
              for (Index m = 0; m < window.locations(); ++m) {
                const auto series = window_series(window, m, n, split.window_len());
                const auto fc = fit_sir_baseline(series, split.test_len, steps);
                for (int tau = 0; tau < split.test_len; ++tau)
                  out(m, n, tau) = fc[static_cast<std::size_t>(tau)];
              }
            }
            return out;
          }};
}

ForecastMethod make_seir_method(int steps) {
  return {"seir", [steps](const DenseTensor3& window, const SplitSpec& split) {
            DenseTensor3 out(window.locations(), window.signals(), split.test_len);
            for (Index n = 0; n < window.signals(); ++n) {
              for (Index m = 0; m < window.locations(); ++m) {
                const auto series = window_series(window, m, n, split.window_len());
                const auto fc = fit_seir_baseline(series, split.test_len, steps);
                for (int tau = 0; tau < split.test_len; ++tau)
                  out(m, n, tau) = fc[static_cast<std::size_t>(tau)];
              }
            }
            return out;
          }};
}

ForecastMethod make_two_step_method(Hyperparams hp) {
  return {"two_step", [hp](const DenseTensor3& window, const SplitSpec& split) {
            Hyperparams h = hp;
            h.val_window = split.val_len;
            h.horizon = split.test_len;
            return two_step_stelar(window, h);
          }};
}

ForecastMethod make_stelar_method(Hyperparams hp) {
  return {"stelar", [hp](const DenseTensor3& window, const SplitSpec& split) {
            Hyperparams h = hp;
            h.val_window = split.val_len;
            const FittedStelar fitted = fit(window, h);
            return predict_slabs(fitted, split.test_len);
          }};
}

void EvalReport::write_csv(std::ostream& os) const {
  os << "method,signal,horizon_days,rmse,mae\n";
  char buf[64];
  for (const EvalRow& r : rows) {
    os << r.method << ',' << r.signal << ',' << r.horizon_days;
    std::snprintf(buf, sizeof buf, "%.10g", r.rmse);
    os << ',' << buf;
    std::snprintf(buf, sizeof buf, "%.10g", r.mae);
    os << ',' << buf << '\n';
  }
}

void EvalReport::write_table(std::ostream& os) const {
  os << std::left << std::setw(12) << "method" << std::setw(16) << "signal" << std::setw(10)
     << "horizon" << std::setw(14) << "rmse" << std::setw(14) << "mae" << '\n';
  for (const EvalRow& r : rows) {
    os << std::left << std::setw(12) << r.method << std::setw(16) << r.signal << std::setw(10)
       << r.horizon_days << std::setw(14) << std::setprecision(6) << r.rmse << std::setw(14)
       << std::setprecision(6) << r.mae << '\n';
  }
}

EvalReport evaluate(const std::vector<ForecastMethod>& methods, const DenseTensor3& t,
                    const SplitSpec& split, const std::vector<int>& signals,
                    const std::vector<std::string>& signal_labels) {
  check_split(t, split);
  if (split.window_len() + split.test_len != t.timesteps())
    throw UsageError("split lengths must cover the tensor exactly");
  for (int n : signals)
    if (n < 0 || n >= t.signals()) throw UsageError("signal index out of range");

  DenseTensor3 window(t.locations(), t.signals(), split.window_len());
  for (int tt = 0; tt < split.window_len(); ++tt) window.slab(tt) = t.slab(tt);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  EvalReport report;
  for (const ForecastMethod& method : methods) {
    std::optional<DenseTensor3> fc;
    try {
      DenseTensor3 out = method.run(window, split);
      if (out.locations() == t.locations() && out.signals() == t.signals() &&
          out.timesteps() == split.test_len)
        fc = std::move(out);
    } catch (const std::exception&) {
      // Leave this method's cells as NaN; the other methods still report.
    }

    for (int n : signals) {
      EvalRow row;
      row.method = method.name;
      row.signal = static_cast<std::size_t>(n) < signal_labels.size()
                       ? signal_labels[static_cast<std::size_t>(n)]
                       : "signal_" + std::to_string(n);
      row.horizon_days = split.test_len;
      if (fc) {
        std::vector<double> pred, truth;
        pred.reserve(static_cast<std::size_t>(t.locations()) *
                     static_cast<std::size_t>(split.test_len));
        truth.reserve(pred.capacity());
        for (int tau = 0; tau < split.test_len; ++tau) {
          for (Index m = 0; m < t.locations(); ++m) {
            pred.push_back((*fc)(m, n, tau));
            truth.push_back(t(m, n, split.window_len() + tau));
          }
        }
        row.rmse = rmse(pred, truth);
        row.mae = mae(pred, truth);
      } else {
        row.rmse = nan;
        row.mae = nan;
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

}  // namespace stelar
