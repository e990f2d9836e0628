// Command-line driver: synth | fit | forecast | evaluate | inspect.
// Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stelar/baselines.hpp"
#include "stelar/engine.hpp"
#include "stelar/error.hpp"
#include "stelar/io.hpp"

namespace {

using namespace stelar;

double parse_number(const std::string& text, const char* flag) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string(flag) + " expects a number (or 'auto'), got '" + text + "'");
  }
}

struct HyperFlags {
  Hyperparams hp;
  std::string mu_text = "auto";
  std::string nu_text = "0";

  void attach(CLI::App& cmd) {
    cmd.add_option("--rank", hp.rank, "number of latent components");
    cmd.add_option("--mu", mu_text, "Frobenius weight, or 'auto'");
    cmd.add_option("--nu", nu_text, "SIR regularization weight, or 'auto' (validation sweep)");
    cmd.add_option("--iters_outer", hp.iters_outer, "max alternating iterations");
    cmd.add_option("--iters_inner", hp.iters_inner, "ADMM iterations per factor update");
    cmd.add_option("--iters_grad", hp.iters_grad, "projected-gradient steps per iteration");
    cmd.add_option("--horizon", hp.horizon, "default forecast slabs");
    cmd.add_option("--seed", hp.seed, "RNG seed");
    cmd.add_option("--val_window", hp.val_window, "trailing slabs for early stopping (0: off)");
    cmd.add_option("--val_signal", hp.val_signal, "signal scored for validation (-1: all)");
    cmd.set_config("--config", "", "flat key=value file; explicit flags win");
  }

  // mu resolves against the data; nu may stay "auto" for the sweep path.
  void resolve_mu(const DenseTensor3& t) {
    hp.mu = mu_text == "auto" ? default_frobenius_weight(t) : parse_number(mu_text, "--mu");
    if (hp.mu < 0) throw UsageError("--mu must be >= 0");
  }
  bool nu_auto() const { return nu_text == "auto"; }
  void resolve_nu() {
    hp.nu = parse_number(nu_text, "--nu");
    if (hp.nu < 0) throw UsageError("--nu must be >= 0");
  }
};

FillPolicy parse_fill(const std::string& text) {
  if (text == "zero") return FillPolicy::zero;
  if (text == "error") return FillPolicy::error;
  throw UsageError("--fill must be 'zero' or 'error'");
}

int run_synth(const SyntheticSpec& spec, const std::string& out, const std::string& truth) {
  const SyntheticData data = generate_synthetic(spec);
  write_bundle_csv(data.bundle, out);
  if (!truth.empty()) write_truth_json(data, truth);
  std::cout << "wrote " << out << " (" << spec.locations << "x" << spec.signals << "x"
            << spec.timesteps << ", rank " << spec.rank << ", noise " << spec.noise_level
            << ")\n";
  return 0;
}

int run_fit(HyperFlags& flags, const std::string& input, const std::string& output,
            const std::string& fill, bool quiet) {
  const TensorBundle bundle = ingest_csv(input, parse_fill(fill));
  flags.resolve_mu(bundle.tensor);

  FitObserver observer;
  if (!quiet) {
    observer = [](const OuterIterationInfo& info) {
      if (info.iteration % 10 == 0) {
        std::fprintf(stderr, "iter %4d  objective %.6e  val_rmse %.6g\n", info.iteration,
                     info.objective, info.val_rmse);
      }
    };
  }

  FittedStelar fitted;
  if (flags.nu_auto()) {
    const NuSweepResult res = fit_with_nu_sweep(bundle.tensor, flags.hp);
    fitted = res.fitted;
    std::cout << "nu sweep picked nu=" << res.nu << " (val_rmse " << res.val_rmse << ")\n";
  } else {
    flags.resolve_nu();
    fitted = fit(bundle.tensor, flags.hp, observer);
  }

  const ModelFile mf{fitted, bundle.location_labels, bundle.signal_labels, bundle.start_day};
  save_model(mf, output);
  std::cout << "fit " << input << ": " << fitted.objective_trace.size() << " iterations, "
            << "objective " << (fitted.objective_trace.empty() ? 0.0 : fitted.objective_trace.back())
            << ", stopped on "
            << (fitted.stopped_reason == StopReason::max_iters ? "max_iters" : "val_rmse_increase");
  if (std::isfinite(fitted.validation_rmse))
    std::cout << ", validation rmse " << fitted.validation_rmse;
  std::cout << "\nwrote " << output << "\n";
  return 0;
}

int run_forecast(const std::string& model_path, const std::string& out, int horizon) {
  const ModelFile mf = load_model(model_path);
  const int h = horizon > 0 ? horizon : mf.fitted.hp.horizon;
  if (h < 1) throw UsageError("--horizon must be >= 1");
  const DenseTensor3 fc = predict_slabs(mf.fitted, h);
  write_forecast_csv(mf, fc, out);
  std::cout << "wrote " << out << " (" << h << " slabs from "
            << format_date(mf.start_day + mf.fitted.anchor) << ")\n";
  return 0;
}

int run_evaluate(HyperFlags& flags, const std::string& input, const std::string& out,
                 const std::string& fill, const std::vector<int>& horizons, int val_len,
                 std::vector<std::string> methods, std::vector<int> signals, int sir_steps) {
  const TensorBundle bundle = ingest_csv(input, parse_fill(fill));
  const DenseTensor3& t = bundle.tensor;
  flags.resolve_mu(t);
  if (val_len < 0) throw UsageError("--val_window must be >= 0");

  if (methods.empty()) methods = {"mean", "sir", "seir", "two_step", "stelar"};
  if (signals.empty())
    for (Index n = 0; n < t.signals(); ++n) signals.push_back(static_cast<int>(n));

  EvalReport report;
  for (int h : horizons) {
    if (h < 1) throw UsageError("--horizons entries must be >= 1");
    SplitSpec split;
    split.test_len = h;
    split.val_len = val_len;
    split.train_len = static_cast<int>(t.timesteps()) - val_len - h;
    if (split.train_len < 5)
      throw UsageError("horizon " + std::to_string(h) + " leaves fewer than 5 training slabs");

    Hyperparams hp = flags.hp;
    std::vector<ForecastMethod> active;
    for (const std::string& name : methods) {
      if (name == "mean") {
        active.push_back(make_mean_method());
      } else if (name == "sir") {
        active.push_back(make_sir_method(sir_steps));
      } else if (name == "seir") {
        active.push_back(make_seir_method(sir_steps));
      } else if (name == "two_step") {
        active.push_back(make_two_step_method(hp));
      } else if (name == "stelar") {
        if (flags.nu_auto()) {
          active.push_back({"stelar", [hp](const DenseTensor3& window, const SplitSpec& s) {
                              Hyperparams run = hp;
                              run.val_window = s.val_len;
                              const NuSweepResult res = fit_with_nu_sweep(window, run);
                              return predict_slabs(res.fitted, s.test_len);
                            }});
        } else {
          flags.resolve_nu();
          hp.nu = flags.hp.nu;
          active.push_back(make_stelar_method(hp));
        }
      } else {
        throw UsageError("unknown method '" + name +
                         "' (valid: mean, sir, seir, two_step, stelar)");
      }
    }

    const EvalReport part = evaluate(active, t, split, signals, bundle.signal_labels);
    report.rows.insert(report.rows.end(), part.rows.begin(), part.rows.end());
  }

  write_report_csv(report, out);
  report.write_table(std::cout);
  std::cout << "wrote " << out << "\n";
  return 0;
}

int run_inspect(const std::string& model_path, const std::string& components_out,
                const std::string& profiles_out, int top_k, int top_locations,
                int top_signals) {
  const ModelFile mf = load_model(model_path);
  top_k = std::min<int>(top_k, static_cast<int>(mf.fitted.model.rank()));
  const auto comps = extract_components(mf.fitted, top_k, top_locations, top_signals);
  if (!components_out.empty())
    write_components_json(comps, mf.location_labels, mf.signal_labels, components_out);
  if (!profiles_out.empty()) write_profiles_csv(comps, profiles_out);

  for (std::size_t k = 0; k < comps.size(); ++k) {
    std::cout << "component " << k << ": weight " << comps[k].weight << "\n  locations:";
    for (const auto& [idx, loading] : comps[k].top_locations)
      std::cout << ' ' << mf.location_labels[static_cast<std::size_t>(idx)];
    std::cout << "\n  signals:";
    for (const auto& [idx, loading] : comps[k].top_signals)
      std::cout << ' ' << mf.signal_labels[static_cast<std::size_t>(idx)];
    std::cout << '\n';
  }
  if (!components_out.empty()) std::cout << "wrote " << components_out << "\n";
  if (!profiles_out.empty()) std::cout << "wrote " << profiles_out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"STELAR: epidemic-regularized tensor factorization and forecasting"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic bundle plus ground truth");
  SyntheticSpec spec;
  std::string synth_out, synth_truth;
  synth->add_option("--out", synth_out, "output CSV path")->required();
  synth->add_option("--truth", synth_truth, "ground-truth JSON path");
  synth->add_option("--locations", spec.locations, "tensor locations");
  synth->add_option("--signals", spec.signals, "tensor signals");
  synth->add_option("--timesteps", spec.timesteps, "tensor days");
  synth->add_option("--rank", spec.rank, "true rank");
  synth->add_option("--noise", spec.noise_level, "relative noise level");
  synth->add_option("--seed", spec.seed, "RNG seed");
  synth->add_option("--extension", spec.truth_extension, "extra true-curve steps");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit a model to a long-format CSV");
  HyperFlags fit_flags;
  std::string fit_input, fit_output, fit_fill = "zero";
  bool fit_quiet = false;
  fit_cmd->add_option("--input", fit_input, "input CSV")->required();
  fit_cmd->add_option("--output", fit_output, "model JSON path")->required();
  fit_cmd->add_option("--fill", fit_fill, "missing-cell policy: zero|error");
  fit_cmd->add_flag("--quiet", fit_quiet, "suppress per-iteration progress");
  fit_flags.attach(*fit_cmd);

  // forecast
  auto* fc_cmd = app.add_subcommand("forecast", "extend a fitted model past its anchor");
  std::string fc_model, fc_out;
  int fc_horizon = 0;
  fc_cmd->add_option("--model", fc_model, "model JSON path")->required();
  fc_cmd->add_option("--out", fc_out, "forecast CSV path")->required();
  fc_cmd->add_option("--horizon", fc_horizon, "slabs to forecast (default: model setting)");

  // evaluate
  auto* ev_cmd = app.add_subcommand("evaluate", "score forecasting methods on held-out slabs");
  HyperFlags ev_flags;
  std::string ev_input, ev_out, ev_fill = "zero";
  std::vector<int> ev_horizons = {10};
  std::vector<std::string> ev_methods;
  std::vector<int> ev_signals;
  int ev_val = 5, ev_sir_steps = 300;
  ev_cmd->add_option("--input", ev_input, "input CSV")->required();
  ev_cmd->add_option("--out", ev_out, "report CSV path")->required();
  ev_cmd->add_option("--fill", ev_fill, "missing-cell policy: zero|error");
  ev_cmd->add_option("--horizons", ev_horizons, "test horizons, comma separated")
      ->delimiter(',');
  ev_cmd->add_option("--eval_val_window", ev_val, "validation slabs between train and test");
  ev_cmd->add_option("--methods", ev_methods, "subset of mean,sir,seir,two_step,stelar")
      ->delimiter(',');
  ev_cmd->add_option("--signals", ev_signals, "signal indices to score (default: all)")
      ->delimiter(',');
  ev_cmd->add_option("--sir_steps", ev_sir_steps, "gradient steps for curve baselines");
  ev_flags.attach(*ev_cmd);

  // inspect
  auto* in_cmd = app.add_subcommand("inspect", "rank components and emit plot-ready files");
  std::string in_model, in_components, in_profiles;
  int in_top_k = 3, in_locations = 10, in_signals = 5;
  in_cmd->add_option("--model", in_model, "model JSON path")->required();
  in_cmd->add_option("--components", in_components, "component summary JSON path");
  in_cmd->add_option("--profiles", in_profiles, "temporal-profile CSV path");
  in_cmd->add_option("--top_k", in_top_k, "components to report");
  in_cmd->add_option("--locations", in_locations, "top location loadings per component");
  in_cmd->add_option("--signals", in_signals, "top signal loadings per component");

  try {
    app.parse(argc, argv);
    if (*synth) return run_synth(spec, synth_out, synth_truth);
    if (*fit_cmd) return run_fit(fit_flags, fit_input, fit_output, fit_fill, fit_quiet);
    if (*fc_cmd) return run_forecast(fc_model, fc_out, fc_horizon);
    if (*ev_cmd)
      return run_evaluate(ev_flags, ev_input, ev_out, ev_fill, ev_horizons, ev_val, ev_methods,
                          ev_signals, ev_sir_steps);
    if (*in_cmd)
      return run_inspect(in_model, in_components, in_profiles, in_top_k, in_locations,
                         in_signals);
    throw UsageError("no subcommand given");
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
