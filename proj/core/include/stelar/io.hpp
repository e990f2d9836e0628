#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "stelar/baselines.hpp"
#include "stelar/engine.hpp"
#include "stelar/epi.hpp"
#include "stelar/tensor.hpp"

namespace stelar {

/// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(int year, unsigned month, unsigned day);
void civil_from_days(std::int64_t days, int& year, unsigned& month, unsigned& day);

/// Strict YYYY-MM-DD; anything else is a DataError.
std::int64_t parse_date(const std::string& text);
std::string format_date(std::int64_t days);

/// A dense tensor plus its axis labels. The time axis is consecutive
/// calendar days starting at start_day.
struct TensorBundle {
  DenseTensor3 tensor;
  std::vector<std::string> location_labels;
  std::vector<std::string> signal_labels;
  std::int64_t start_day = 0;

  std::string date_label(Index t) const { return format_date(start_day + t); }
};

enum class FillPolicy { zero, error };

/// Long-format CSV (header `location,signal,date,value`) to a dense tensor
/// over observed labels x the full date range. Label order is first
/// appearance. Duplicates, negative values, and (under FillPolicy::error)
/// missing cells are DataErrors naming the offending row or cell.
TensorBundle ingest_csv(const std::string& path, FillPolicy policy = FillPolicy::zero);
TensorBundle ingest_csv_stream(std::istream& in, FillPolicy policy = FillPolicy::zero,
                               const std::string& name = "<stream>");

/// Inverse of ingest_csv for well-formed bundles; values keep full precision.
void write_bundle_csv(const TensorBundle& bundle, std::ostream& os);
void write_bundle_csv(const TensorBundle& bundle, const std::string& path);

struct SyntheticSpec {
  Index locations = 20;
  Index signals = 5;
  Index timesteps = 60;
  int rank = 3;
  double noise_level = 0.0;  ///< Gaussian noise relative to the signal norm
  std::uint64_t seed = 0;
  std::vector<SirConfig> components;  ///< empty: seeded defaults, `rank` of them
  int truth_extension = 15;           ///< extra true-curve steps kept for scoring
};

struct SyntheticData {
  TensorBundle bundle;
  FactorModel truth;       ///< C holds the leading `timesteps` curve rows
  SirParams sir;
  Matrix extended_curves;  ///< (timesteps + truth_extension) x rank
};

/// Ground-truth factor model with SIR temporal columns, uniform(0,1) spatial
/// and signal factors, additive truncated Gaussian noise. Deterministic per
/// seed.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// Everything needed to forecast later: the fitted state plus axis labels.
struct ModelFile {
  FittedStelar fitted;
  std::vector<std::string> location_labels;
  std::vector<std::string> signal_labels;
  std::int64_t start_day = 0;
};

/// Self-describing JSON document; numeric round-trip is exact, so a
/// save/load/forecast cycle reproduces forecasts bit for bit.
void save_model(const ModelFile& mf, const std::string& path);
ModelFile load_model(const std::string& path);

/// `location,signal,date,value_predicted`; dates continue past the anchor.
void write_forecast_csv(const ModelFile& mf, const DenseTensor3& forecast,
                        const std::string& path);

void write_report_csv(const EvalReport& report, const std::string& path);

/// Array of {weight, temporal_profile[], top_locations[], top_signals[]}.
void write_components_json(const std::vector<ComponentSummary>& components,
                           const std::vector<std::string>& location_labels,
                           const std::vector<std::string>& signal_labels,
                           const std::string& path);

/// Plot-ready long format: `component,step,value`.
void write_profiles_csv(const std::vector<ComponentSummary>& components,
                        const std::string& path);

void write_truth_json(const SyntheticData& data, const std::string& path);

}  // namespace stelar
