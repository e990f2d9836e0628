#include "stelar/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "stelar/error.hpp"

namespace stelar {

namespace {

using nlohmann::json;

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open for writing: " + path);
  return os;
}

std::vector<double> row_major(const Matrix& m) {
  std::vector<double> out(static_cast<std::size_t>(m.size()));
  std::size_t j = 0;
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) out[j++] = m(r, c);
  return out;
}

Matrix from_row_major(const std::vector<double>& v, Index rows, Index cols) {
  if (static_cast<Index>(v.size()) != rows * cols)
    throw DataError("factor array length does not match its dimensions");
  Matrix m(rows, cols);
  std::size_t j = 0;
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = v[j++];
  return m;
}

json vec_json(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector vec_from_json(const json& j) {
  const auto raw = j.get<std::vector<double>>();
  Vector v(static_cast<Index>(raw.size()));
  for (Index k = 0; k < v.size(); ++k) v(k) = raw[static_cast<std::size_t>(k)];
  return v;
}

}  // namespace

// Howard Hinnant's civil-date algorithms (public domain).
std::int64_t days_from_civil(int year, unsigned month, unsigned day) {
  year -= month <= 2;
  const std::int64_t era = (year >= 0 ? year : year - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(year - era * 400);
  const unsigned doy = (153 * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t days, int& year, unsigned& month, unsigned& day) {
  days += 719468;
  const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(days - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  day = doy - (153 * mp + 2) / 5 + 1;
  month = mp + (mp < 10 ? 3 : -9);
  year = static_cast<int>(y + (month <= 2));
}

std::int64_t parse_date(const std::string& text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-')
    throw DataError("bad date (want YYYY-MM-DD): '" + text + "'");
  int y = 0;
  unsigned m = 0, d = 0;
  auto parse_uint = [&](int begin, int end, auto& out) {
    auto res = std::from_chars(text.data() + begin, text.data() + end, out);
    if (res.ec != std::errc() || res.ptr != text.data() + end)
      throw DataError("bad date (want YYYY-MM-DD): '" + text + "'");
  };
  parse_uint(0, 4, y);
  parse_uint(5, 7, m);
  parse_uint(8, 10, d);
  static const unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  const unsigned in_month = (m == 2 && leap) ? 29u : (m >= 1 && m <= 12 ? kDays[m - 1] : 0u);
  if (m < 1 || m > 12 || d < 1 || d > in_month)
    throw DataError("date out of range: '" + text + "'");
  return days_from_civil(y, m, d);
}

std::string format_date(std::int64_t days) {
  int y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, d);
  return buf;
}

TensorBundle ingest_csv(const std::string& path, FillPolicy policy) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path);
  return ingest_csv_stream(in, policy, path);
}

TensorBundle ingest_csv_stream(std::istream& in, FillPolicy policy, const std::string& name) {
  auto fail = [&name](int line, const std::string& what) {
    throw DataError(name + ":" + std::to_string(line) + ": " + what);
  };

  std::string line;
  if (!std::getline(in, line)) throw DataError(name + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "location,signal,date,value")
    fail(1, "expected header 'location,signal,date,value', got '" + line + "'");

  struct RawRow {
    Index loc, sig;
    std::int64_t day;
    double value;
    int line;
  };

  std::unordered_map<std::string, Index> loc_ids, sig_ids;
  TensorBundle bundle;
  std::vector<RawRow> rows;
  std::int64_t day_min = std::numeric_limits<std::int64_t>::max();
  std::int64_t day_max = std::numeric_limits<std::int64_t>::min();

  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::array<std::string, 4> field;
    std::size_t start = 0, nfields = 0;
    for (std::size_t j = 0; j <= line.size(); ++j) {
      if (j == line.size() || line[j] == ',') {
        if (nfields >= 4) fail(lineno, "expected 4 comma-separated fields");
        field[nfields++] = line.substr(start, j - start);
        start = j + 1;
      }
    }
    if (nfields != 4) fail(lineno, "expected 4 comma-separated fields");
    if (field[0].empty() || field[1].empty()) fail(lineno, "empty location or signal label");

    RawRow r;
    auto intern = [](std::unordered_map<std::string, Index>& ids,
                     std::vector<std::string>& labels, const std::string& s) {
      auto [it, fresh] = ids.try_emplace(s, static_cast<Index>(labels.size()));
      if (fresh) labels.push_back(s);
      return it->second;
    };
    r.loc = intern(loc_ids, bundle.location_labels, field[0]);
    r.sig = intern(sig_ids, bundle.signal_labels, field[1]);
    try {
      r.day = parse_date(field[2]);
    } catch (const DataError& e) {
      fail(lineno, e.what());
    }
    const char* vb = field[3].data();
    auto res = std::from_chars(vb, vb + field[3].size(), r.value);
    if (res.ec != std::errc() || res.ptr != vb + field[3].size())
      fail(lineno, "bad value '" + field[3] + "'");
    if (!std::isfinite(r.value)) fail(lineno, "non-finite value");
    if (r.value < 0.0) fail(lineno, "negative value " + field[3]);
    r.line = lineno;
    day_min = std::min(day_min, r.day);
    day_max = std::max(day_max, r.day);
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw DataError(name + ": no data rows");

  const Index m_dim = static_cast<Index>(bundle.location_labels.size());
  const Index n_dim = static_cast<Index>(bundle.signal_labels.size());
  const Index l_dim = static_cast<Index>(day_max - day_min + 1);
  bundle.start_day = day_min;
  bundle.tensor = DenseTensor3(m_dim, n_dim, l_dim);

  std::vector<char> seen(static_cast<std::size_t>(m_dim * n_dim * l_dim), 0);
  auto cell = [&](Index m, Index n, Index t) {
    return static_cast<std::size_t>((t * n_dim + n) * m_dim + m);
  };
  for (const RawRow& r : rows) {
    const Index t = static_cast<Index>(r.day - day_min);
    if (seen[cell(r.loc, r.sig, t)])
      fail(r.line, "duplicate (location, signal, date) entry for " +
                       bundle.location_labels[static_cast<std::size_t>(r.loc)] + "," +
                       bundle.signal_labels[static_cast<std::size_t>(r.sig)] + "," +
                       format_date(r.day));
    seen[cell(r.loc, r.sig, t)] = 1;
    bundle.tensor(r.loc, r.sig, t) = r.value;
  }

  if (policy == FillPolicy::error) {
    for (Index t = 0; t < l_dim; ++t)
      for (Index n = 0; n < n_dim; ++n)
        for (Index m = 0; m < m_dim; ++m)
          if (!seen[cell(m, n, t)])
            throw DataError(name + ": missing cell (" +
                            bundle.location_labels[static_cast<std::size_t>(m)] + "," +
                            bundle.signal_labels[static_cast<std::size_t>(n)] + "," +
                            format_date(bundle.start_day + t) + ")");
  }
  return bundle;
}

void write_bundle_csv(const TensorBundle& bundle, std::ostream& os) {
  os << "location,signal,date,value\n";
  const DenseTensor3& x = bundle.tensor;
  for (Index m = 0; m < x.locations(); ++m)
    for (Index n = 0; n < x.signals(); ++n)
      for (Index t = 0; t < x.timesteps(); ++t)
        os << bundle.location_labels[static_cast<std::size_t>(m)] << ','
           << bundle.signal_labels[static_cast<std::size_t>(n)] << ',' << bundle.date_label(t)
           << ',' << g17(x(m, n, t)) << '\n';
}

void write_bundle_csv(const TensorBundle& bundle, const std::string& path) {
  auto os = open_out(path);
  write_bundle_csv(bundle, os);
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.locations < 1 || spec.signals < 1 || spec.timesteps < 1)
    throw UsageError("synthetic dims must be positive");
  if (spec.rank < 1) throw UsageError("synthetic rank must be >= 1");
  if (spec.noise_level < 0) throw UsageError("noise level must be >= 0");
  if (spec.truth_extension < 0) throw UsageError("truth extension must be >= 0");
  if (!spec.components.empty() && static_cast<int>(spec.components.size()) != spec.rank)
    throw UsageError("component list length must equal rank");

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const Index m_dim = spec.locations, n_dim = spec.signals, l_dim = spec.timesteps;
  const Index k_dim = spec.rank;

  SyntheticData out;
  out.truth.A = Matrix(m_dim, k_dim);
  out.truth.B = Matrix(n_dim, k_dim);
  for (Index k = 0; k < k_dim; ++k)
    for (Index m = 0; m < m_dim; ++m) out.truth.A(m, k) = unit(rng);
  for (Index k = 0; k < k_dim; ++k)
    for (Index n = 0; n < n_dim; ++n) out.truth.B(n, k) = unit(rng);

  std::vector<SirConfig> comps = spec.components;
  if (comps.empty()) {
    // Staggered epidemics: rate draws keep every peak inside a desk-scale
    // window, the log-uniform seed fraction spreads the peaks over time.
    comps.resize(static_cast<std::size_t>(k_dim));
    for (auto& c : comps) {
      c.beta = 0.25 + 0.30 * unit(rng);
      c.gamma = 0.05 + 0.13 * unit(rng);
      c.s0 = 0.90 + 0.09 * unit(rng);
      c.i0 = 0.001 * std::pow(50.0, unit(rng));
    }
  }

  out.sir = SirParams{Vector(k_dim), Vector(k_dim), Vector(k_dim), Vector(k_dim)};
  out.extended_curves = Matrix(l_dim + spec.truth_extension, k_dim);
  for (Index k = 0; k < k_dim; ++k) {
    SirConfig cfg = comps[static_cast<std::size_t>(k)];
    cfg.horizon = static_cast<int>(l_dim) + spec.truth_extension;
    const auto curve = new_infections_curve(cfg);
    for (Index t = 0; t < out.extended_curves.rows(); ++t)
      out.extended_curves(t, k) = curve[static_cast<std::size_t>(t)];
    out.sir.beta(k) = cfg.beta;
    out.sir.gamma(k) = cfg.gamma;
    out.sir.s(k) = cfg.s0;
    out.sir.i(k) = cfg.i0;
  }
  out.truth.C = out.extended_curves.topRows(l_dim);

  DenseTensor3 clean = reconstruct(out.truth);
  const double clean_norm = clean.frobenius_norm();
  const double cells = static_cast<double>(m_dim) * static_cast<double>(n_dim) *
                       static_cast<double>(l_dim);
  const double sigma = spec.noise_level * clean_norm / std::sqrt(cells);

  out.bundle.tensor = DenseTensor3(m_dim, n_dim, l_dim);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Index t = 0; t < l_dim; ++t)
    for (Index n = 0; n < n_dim; ++n)
      for (Index m = 0; m < m_dim; ++m) {
        const double noisy = clean(m, n, t) + (sigma > 0 ? sigma * gauss(rng) : 0.0);
        out.bundle.tensor(m, n, t) = std::max(0.0, noisy);
      }

  char buf[32];
  for (Index m = 0; m < m_dim; ++m) {
    std::snprintf(buf, sizeof buf, "loc_%03lld", static_cast<long long>(m));
    out.bundle.location_labels.push_back(buf);
  }
  for (Index n = 0; n < n_dim; ++n) {
    std::snprintf(buf, sizeof buf, "sig_%02lld", static_cast<long long>(n));
    out.bundle.signal_labels.push_back(buf);
  }
  out.bundle.start_day = days_from_civil(2020, 3, 1);
  return out;
}

void save_model(const ModelFile& mf, const std::string& path) {
  const FittedStelar& f = mf.fitted;
  json j;
  j["format"] = "stelar-model";
  j["version"] = 1;
  j["locations"] = f.model.A.rows();
  j["signals"] = f.model.B.rows();
  j["rank"] = f.model.rank();
  j["anchor"] = f.anchor;
  j["start_day"] = format_date(mf.start_day);
  j["location_labels"] = mf.location_labels;
  j["signal_labels"] = mf.signal_labels;
  j["factors"] = {{"a", row_major(f.model.A)},
                  {"b", row_major(f.model.B)},
                  {"c", row_major(f.model.C)},
                  {"c_rows", f.model.C.rows()}};
  j["weights"] = std::vector<double>(f.model.weights.data(),
                                     f.model.weights.data() + f.model.weights.size());
  j["sir"] = {{"beta", vec_json(f.sir.beta)},
              {"gamma", vec_json(f.sir.gamma)},
              {"s", vec_json(f.sir.s)},
              {"i", vec_json(f.sir.i)}};
  j["hyperparams"] = {{"rank", f.hp.rank},
                      {"mu", f.hp.mu},
                      {"nu", f.hp.nu},
                      {"iters_outer", f.hp.iters_outer},
                      {"iters_inner", f.hp.iters_inner},
                      {"iters_grad", f.hp.iters_grad},
                      {"horizon", f.hp.horizon},
                      {"seed", f.hp.seed},
                      {"val_window", f.hp.val_window},
                      {"val_signal", f.hp.val_signal}};
  j["objective_trace"] = f.objective_trace;
  j["val_rmse_trace"] = f.val_rmse_trace;
  j["stopped_reason"] =
      f.stopped_reason == StopReason::max_iters ? "max_iters" : "val_rmse_increase";
  if (std::isfinite(f.validation_rmse)) j["validation_rmse"] = f.validation_rmse;

  auto os = open_out(path);
  os << j.dump(2) << '\n';
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path);
  try {
    const json j = json::parse(in);
    if (j.at("format").get<std::string>() != "stelar-model")
      throw DataError(path + ": not a model file");
    if (j.at("version").get<int>() != 1) throw DataError(path + ": unsupported model version");

    ModelFile mf;
    FittedStelar& f = mf.fitted;
    const Index m_dim = j.at("locations").get<Index>();
    const Index n_dim = j.at("signals").get<Index>();
    const Index k_dim = j.at("rank").get<Index>();
    const Index c_rows = j.at("factors").at("c_rows").get<Index>();
    f.model.A = from_row_major(j.at("factors").at("a").get<std::vector<double>>(), m_dim, k_dim);
    f.model.B = from_row_major(j.at("factors").at("b").get<std::vector<double>>(), n_dim, k_dim);
    f.model.C = from_row_major(j.at("factors").at("c").get<std::vector<double>>(), c_rows, k_dim);
    const auto w = j.at("weights").get<std::vector<double>>();
    f.model.weights = Vector(static_cast<Index>(w.size()));
    for (Index k = 0; k < f.model.weights.size(); ++k)
      f.model.weights(k) = w[static_cast<std::size_t>(k)];

    f.sir.beta = vec_from_json(j.at("sir").at("beta"));
    f.sir.gamma = vec_from_json(j.at("sir").at("gamma"));
    f.sir.s = vec_from_json(j.at("sir").at("s"));
    f.sir.i = vec_from_json(j.at("sir").at("i"));
    if (f.sir.components() != k_dim) throw DataError(path + ": SIR parameter count mismatch");

    const json& hp = j.at("hyperparams");
    f.hp.rank = hp.at("rank").get<int>();
    f.hp.mu = hp.at("mu").get<double>();
    f.hp.nu = hp.at("nu").get<double>();
    f.hp.iters_outer = hp.at("iters_outer").get<int>();
    f.hp.iters_inner = hp.at("iters_inner").get<int>();
    f.hp.iters_grad = hp.at("iters_grad").get<int>();
    f.hp.horizon = hp.at("horizon").get<int>();
    f.hp.seed = hp.at("seed").get<std::uint64_t>();
    f.hp.val_window = hp.at("val_window").get<int>();
    f.hp.val_signal = hp.at("val_signal").get<int>();

    f.objective_trace = j.at("objective_trace").get<std::vector<double>>();
    f.val_rmse_trace = j.at("val_rmse_trace").get<std::vector<double>>();
    f.stopped_reason = j.at("stopped_reason").get<std::string>() == "max_iters"
                           ? StopReason::max_iters
                           : StopReason::val_rmse_increase;
    f.anchor = j.at("anchor").get<Index>();
    if (j.contains("validation_rmse")) f.validation_rmse = j.at("validation_rmse").get<double>();

    mf.location_labels = j.at("location_labels").get<std::vector<std::string>>();
    mf.signal_labels = j.at("signal_labels").get<std::vector<std::string>>();
    if (static_cast<Index>(mf.location_labels.size()) != m_dim ||
        static_cast<Index>(mf.signal_labels.size()) != n_dim)
      throw DataError(path + ": label count does not match dimensions");
    mf.start_day = parse_date(j.at("start_day").get<std::string>());
    return mf;
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_forecast_csv(const ModelFile& mf, const DenseTensor3& forecast,
                        const std::string& path) {
  if (forecast.locations() != static_cast<Index>(mf.location_labels.size()) ||
      forecast.signals() != static_cast<Index>(mf.signal_labels.size()))
    throw UsageError("forecast dimensions do not match the model labels");
  auto os = open_out(path);
  os << "location,signal,date,value_predicted\n";
  for (Index m = 0; m < forecast.locations(); ++m)
    for (Index n = 0; n < forecast.signals(); ++n)
      for (Index t = 0; t < forecast.timesteps(); ++t)
        os << mf.location_labels[static_cast<std::size_t>(m)] << ','
           << mf.signal_labels[static_cast<std::size_t>(n)] << ','
           << format_date(mf.start_day + mf.fitted.anchor + t) << ','
           << g17(forecast(m, n, t)) << '\n';
}

void write_report_csv(const EvalReport& report, const std::string& path) {
  auto os = open_out(path);
  report.write_csv(os);
}

void write_components_json(const std::vector<ComponentSummary>& components,
                           const std::vector<std::string>& location_labels,
                           const std::vector<std::string>& signal_labels,
                           const std::string& path) {
  auto label = [](const std::vector<std::string>& labels, Index idx) {
    return static_cast<std::size_t>(idx) < labels.size()
               ? labels[static_cast<std::size_t>(idx)]
               : "#" + std::to_string(idx);
  };
  json arr = json::array();
  for (const ComponentSummary& c : components) {
    json top_loc = json::array(), top_sig = json::array();
    for (const auto& [idx, loading] : c.top_locations)
      top_loc.push_back({{"index", idx}, {"label", label(location_labels, idx)},
                         {"loading", loading}});
    for (const auto& [idx, loading] : c.top_signals)
      top_sig.push_back({{"index", idx}, {"label", label(signal_labels, idx)},
                         {"loading", loading}});
    arr.push_back({{"weight", c.weight},
                   {"temporal_profile",
                    std::vector<double>(c.temporal_profile.data(),
                                        c.temporal_profile.data() + c.temporal_profile.size())},
                   {"top_locations", top_loc},
                   {"top_signals", top_sig}});
  }
  auto os = open_out(path);
  os << arr.dump(2) << '\n';
}

void write_profiles_csv(const std::vector<ComponentSummary>& components,
                        const std::string& path) {
  auto os = open_out(path);
  os << "component,step,value\n";
  for (std::size_t k = 0; k < components.size(); ++k) {
    const Vector& p = components[k].temporal_profile;
    for (Index t = 0; t < p.size(); ++t)
      os << k << ',' << t << ',' << g17(p(t)) << '\n';
  }
}

void write_truth_json(const SyntheticData& data, const std::string& path) {
  json j;
  j["locations"] = data.truth.A.rows();
  j["signals"] = data.truth.B.rows();
  j["timesteps"] = data.truth.C.rows();
  j["rank"] = data.truth.rank();
  j["extension"] = data.extended_curves.rows() - data.truth.C.rows();
  j["a"] = row_major(data.truth.A);
  j["b"] = row_major(data.truth.B);
  j["c_extended"] = row_major(data.extended_curves);
  j["sir"] = {{"beta", vec_json(data.sir.beta)},
              {"gamma", vec_json(data.sir.gamma)},
              {"s", vec_json(data.sir.s)},
              {"i", vec_json(data.sir.i)}};
  auto os = open_out(path);
  os << j.dump(2) << '\n';
}

}  // namespace stelar
