#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "pinning/pinning.hpp"

namespace pinning::cli {

namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr const char* kTool = "pinning";

HedgeMode parse_mode(const std::string& m) {
  if (m == "corrected") return HedgeMode::corrected;
  if (m == "original") return HedgeMode::original_time_term_only;
  if (m == "infinite-elasticity") return HedgeMode::infinite_elasticity;
  throw UsageError("unknown mode: " + m);
}

StepScheme parse_scheme(const std::string& m) {
  if (m == "rk4") return StepScheme::rk4;
  if (m == "euler") return StepScheme::euler;
  throw UsageError("unknown scheme: " + m);
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

json number_or_null(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct Resolved {
  ModelParams params;
  DimensionlessParams dp;
  OdeConfig cfg;
  std::vector<double> betas;
};

Resolved resolve(const Settings& s, const std::vector<double>& default_betas) {
  Resolved r;
  r.params.strike = s.strike;
  r.params.sigma = s.sigma;
  r.params.mu = s.mu;
  r.params.horizon = s.t0_min;
  try {
    r.params.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (!(s.open_price > 0.0)) throw UsageError("--open-price must be > 0");
  if (!(s.start_min >= 0.0 && s.start_min < s.end_min && s.end_min < s.t0_min))
    throw UsageError("need 0 <= --start-min < --end-min < --t0-min");
  if (s.steps < 1) throw UsageError("--steps must be >= 1");

  if (s.position.has_value() != s.elasticity.has_value())
    throw UsageError("--position and --elasticity must be given together");
  if (s.position && !s.betas.empty()) throw UsageError("give either --beta or --position/--elasticity, not both");
  if (s.position) {
    r.params.position = *s.position;
    r.params.elasticity = *s.elasticity;
    try {
      r.params.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }

  r.dp = to_dimensionless(r.params);
  if (s.position) {
    r.betas = {r.dp.beta};
  } else {
    r.betas = s.betas.empty() ? default_betas : s.betas;
  }
  for (double b : r.betas)
    if (!std::isfinite(b)) throw UsageError("--beta values must be finite (use --mode infinite-elasticity)");

  r.cfg.s_start = s.start_min / s.t0_min;
  r.cfg.s_end = s.end_min / s.t0_min;
  r.cfg.z_start = r.dp.coords.z(s.open_price);
  r.cfg.steps = s.steps;
  r.cfg.mode = s.mode;
  r.cfg.scheme = s.scheme;
  return r;
}

std::string indexed_path(const std::string& path, std::size_t i) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  const std::string suffix = ".beta" + std::to_string(i);
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + suffix;
  return path.substr(0, dot) + suffix + path.substr(dot);
}

std::string trajectory_csv(const Trajectory& t, double alpha) {
  std::ostringstream os;
  os << "s,t_min,z,price,N_d1\n";
  for (const auto& p : t.samples) {
    os << format_number(p.s) << ',' << format_number(p.time) << ',' << format_number(p.z) << ','
       << format_number(p.price) << ',' << format_number(normal_cdf(d1_dimensionless(p.z, p.s, alpha))) << '\n';
  }
  return os.str();
}

json trajectory_json(const Trajectory& t, double alpha) {
  json samples = json::array();
  for (const auto& p : t.samples) {
    samples.push_back({{"s", p.s},
                       {"t_min", p.time},
                       {"z", p.z},
                       {"price", p.price},
                       {"N_d1", normal_cdf(d1_dimensionless(p.z, p.s, alpha))}});
  }
  return samples;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

CommandResult cmd_simulate(const Settings& s) {
  const Resolved r = resolve(s, {1.0});
  if (s.format == "csv" && r.betas.size() > 1 && s.output.empty())
    throw UsageError("several --beta values with --format csv need --output");

  CommandResult res;
  json summary = json::array();
  json doc = {{"trajectories", json::array()}};
  for (std::size_t i = 0; i < r.betas.size(); ++i) {
    DimensionlessParams dp = r.dp;
    dp.beta = r.betas[i];
    const Trajectory t = integrate(r.cfg, dp);
    json info = {{"beta", dp.beta},
                 {"caption_impact", dp.caption_impact()},
                 {"termination", to_string(t.termination)},
                 {"singular_s", number_or_null(t.singular_s)},
                 {"final_price", t.samples.back().price},
                 {"final_z", t.samples.back().z}};
    if (t.termination != Termination::completed) res.exit_code = kSingularityTerminated;
    if (s.format == "json") {
      json entry = info;
      entry["samples"] = trajectory_json(t, dp.alpha);
      doc["trajectories"].push_back(std::move(entry));
    } else {
      const std::string path = r.betas.size() > 1 ? indexed_path(s.output, i) : s.output;
      res.artifacts.push_back({"output", path, trajectory_csv(t, dp.alpha)});
    }
    summary.push_back(std::move(info));
  }
  if (s.format == "json") res.artifacts.push_back({"output", s.output, dump(doc)});
  res.notes["alpha"] = r.dp.alpha;
  res.notes["z_start"] = r.cfg.z_start;
  res.notes["trajectories"] = summary;
  if (res.exit_code == kSingularityTerminated) res.message = "simulation terminated early (see manifest)";
  return res;
}

CommandResult cmd_analytic(const Settings& s) {
  const Resolved r = resolve(s, {});
  Trajectory t;
  for (int k = 0; k <= r.cfg.steps; ++k) {
    const double sk = r.cfg.grid(k);
    const double z = analytic_limit(r.cfg.z_start, r.cfg.s_start, sk, r.dp.alpha);
    t.samples.push_back({sk, z, r.dp.coords.time(sk), r.dp.coords.price(z)});
  }
  CommandResult res;
  if (s.format == "json") {
    res.artifacts.push_back({"output", s.output, dump({{"alpha", r.dp.alpha}, {"samples", trajectory_json(t, r.dp.alpha)}})});
  } else {
    res.artifacts.push_back({"output", s.output, trajectory_csv(t, r.dp.alpha)});
  }
  res.notes["alpha"] = r.dp.alpha;
  res.notes["z_start"] = r.cfg.z_start;
  res.notes["final_price"] = t.samples.back().price;
  return res;
}

json stats_json(const EnsembleStats& st, double beta, double rho) {
  json j = {{"beta", beta},
            {"noise_ratio", rho},
            {"runs", st.runs},
            {"pin_tolerance", st.pin_tolerance},
            {"pin_count", st.pin_count},
            {"pin_probability", st.pin_probability},
            {"wilson_lo", st.wilson.lo},
            {"wilson_hi", st.wilson.hi},
            {"singular_count", st.singular_count},
            {"rejected_count", st.rejected_count}};
  std::vector<double> closes;
  for (std::size_t i = 0; i < st.closing_prices.size(); ++i)
    if (st.terminations[i] == Termination::completed) closes.push_back(st.closing_prices[i]);
  if (closes.size() >= 2) {
    const MeanVariance mv = mean_variance(closes);
    j["close_mean"] = mv.mean;
    j["close_sd"] = std::sqrt(mv.variance);
  }
  return j;
}

CommandResult cmd_ensemble(const Settings& s) {
  if (s.mode != HedgeMode::corrected) throw UsageError("ensemble supports --mode corrected only");
  const Resolved r = resolve(s, {1.0});
  if (s.runs < 1) throw UsageError("--runs must be >= 1");
  if (!(s.noise_ratio >= 0.0)) throw UsageError("--noise-ratio must be >= 0");
  if (!(s.pin_tol >= 0.0)) throw UsageError("--pin-tol must be >= 0");

  NoiseConfig noise{s.noise_ratio, s.seed, s.runs};
  CommandResult res;
  if (r.betas.size() == 1) {
    DimensionlessParams dp = r.dp;
    dp.beta = r.betas.front();
    const EnsembleStats st = run_ensemble(r.cfg, dp, noise, s.pin_tol, s.threads);
    json j = stats_json(st, dp.beta, s.noise_ratio);
    j["seed"] = s.seed;
    res.artifacts.push_back({"output", s.output, dump(j)});
    if (!s.closes_output.empty()) {
      std::ostringstream os;
      os << "run,closing_price,termination\n";
      for (std::size_t i = 0; i < st.closing_prices.size(); ++i)
        os << i << ',' << format_number(st.closing_prices[i]) << ',' << to_string(st.terminations[i]) << '\n';
      res.artifacts.push_back({"closes", s.closes_output, os.str()});
    }
    res.notes["pin_probability"] = st.pin_probability;
  } else {
    const double rho[] = {s.noise_ratio};
    const auto rows = pin_probability_sweep(r.betas, rho, r.cfg, r.dp, noise, s.pin_tol, s.threads);
    json sweep = json::array();
    for (const auto& row : rows) {
      if (row.stats) {
        sweep.push_back(stats_json(*row.stats, row.beta, row.noise_ratio));
      } else {
        sweep.push_back({{"beta", row.beta}, {"noise_ratio", row.noise_ratio}, {"error", row.error}});
      }
    }
    res.artifacts.push_back({"output", s.output, dump({{"seed", s.seed}, {"sweep", sweep}})});
  }
  res.notes["alpha"] = r.dp.alpha;
  res.notes["z_start"] = r.cfg.z_start;
  return res;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open input file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

CommandResult cmd_hedge_demand(const Settings& s) {
  if (s.input.empty()) throw UsageError("hedge-demand needs --input PATH");
  ModelParams params;
  params.strike = s.strike;
  params.sigma = s.sigma;
  params.mu = s.mu;
  params.horizon = s.t0_min;
  params.position = s.position.value_or(1.0);
  params.elasticity = s.elasticity.value_or(0.0);
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const std::string text = read_file(s.input);
  PricePath path;
  try {
    path = ingest_csv(std::string_view(text));
  } catch (const InputError& e) {
    throw InputError(s.input + ": " + e.what());
  }
  HedgeSeries series;
  try {
    series = compute_hedge_series(path, params);
  } catch (const ExpirationReached& e) {
    throw InputError(s.input + ": " + e.what() + " (t_min must be < --t0-min)");
  }

  FlowWindow window{s.window_lo.value_or(series.front().time), s.window_hi.value_or(series.back().time)};
  FlowDiagnostic diag;
  try {
    diag = classify_flow(series, window, params.position);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--window: ") + e.what());
  }

  std::ostringstream csv;
  emit_hedge_csv(series, csv);
  json dj = {{"input", s.input},
             {"position", params.position},
             {"window", {window.t_lo, window.t_hi}},
             {"net_flow", diag.net_flow},
             {"price_change", diag.price_change},
             {"classification", to_string(diag.classification)},
             {"price_direction", to_string(diag.price_direction)},
             {"opposes_move", diag.opposes_move},
             {"points", series.size()}};
  if (path.points.size() >= 3) dj["realized_volatility"] = realized_volatility(path);

  CommandResult res;
  res.artifacts.push_back({"output", s.output, csv.str()});
  res.artifacts.push_back({"diagnostic", s.diagnostic_output, dump(dj)});
  res.notes["input_fnv1a64"] = hex64(fnv1a64(text));
  res.notes["opposes_move"] = diag.opposes_move;
  return res;
}

CommandResult cmd_singularity_scan(const Settings& s) {
  const Resolved r = resolve(s, {-0.1, -0.2, -0.3, -0.4});
  const double z = r.cfg.z_start;
  auto den = [&](const DimensionlessParams& dp, double sk) { return dimensionless_denominator(z, sk, dp); };

  std::ostringstream csv;
  csv << "beta,s,t_min,denominator,sign,first_singular_s\n";
  json per_beta = json::array();
  for (double beta : r.betas) {
    DimensionlessParams dp = r.dp;
    dp.beta = beta;
    json entry = {{"beta", beta}, {"caption_impact", dp.caption_impact()}};
    if (beta == 0.0) {
      entry["status"] = "no hedging force";
      per_beta.push_back(entry);
      continue;
    }
    std::vector<double> grid;
    std::vector<double> values;
    for (int k = 0; k <= r.cfg.steps; ++k) {
      grid.push_back(r.cfg.grid(k));
      values.push_back(den(dp, grid.back()));
    }
    std::optional<double> root;
    for (std::size_t k = 0; k < grid.size() && !root; ++k) {
      if (values[k] == 0.0) {
        root = grid[k];
      } else if (k + 1 < grid.size() && (values[k] > 0.0) != (values[k + 1] > 0.0) && values[k + 1] != 0.0) {
        double lo = grid[k];
        double hi = grid[k + 1];
        const bool lo_positive = values[k] > 0.0;
        while (hi - lo > 1e-13) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          const double v = den(dp, mid);
          if (v == 0.0) {
            lo = hi = mid;
            break;
          }
          ((v > 0.0) == lo_positive ? lo : hi) = mid;
        }
        root = 0.5 * (lo + hi);
      }
    }
    const std::string root_text = root ? format_number(*root) : std::string();
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const int sign = values[k] > 0.0 ? 1 : values[k] < 0.0 ? -1 : 0;
      csv << format_number(beta) << ',' << format_number(grid[k]) << ',' << format_number(r.dp.coords.time(grid[k]))
          << ',' << format_number(values[k]) << ',' << sign << ',' << root_text << '\n';
    }
    entry["status"] = beta > 0.0 ? "no singularity possible" : (root ? "singular" : "no sign change in window");
    entry["first_singular_s"] = number_or_null(root);
    entry["first_singular_t_min"] = root ? json(r.dp.coords.time(*root)) : json(nullptr);
    per_beta.push_back(entry);
  }

  CommandResult res;
  if (s.format == "json") {
    res.artifacts.push_back({"output", s.output, dump({{"z", z}, {"alpha", r.dp.alpha}, {"betas", per_beta}})});
  } else {
    res.artifacts.push_back({"output", s.output, csv.str()});
  }
  res.notes["alpha"] = r.dp.alpha;
  res.notes["z"] = z;
  res.notes["scan"] = per_beta;
  return res;
}

void write_artifact(const Artifact& a, std::ostream& out) {
  if (a.path.empty()) {
    out << a.content;
    return;
  }
  std::ofstream f(a.path, std::ios::binary);
  if (!f) throw InputError("cannot write output file: " + a.path);
  f << a.content;
}

std::pair<double, double> parse_window(const std::string& text) {
  const auto colon = text.find(':');
  double lo = 0.0;
  double hi = 0.0;
  if (colon == std::string::npos || !parse_number(std::string_view(text).substr(0, colon), lo) ||
      !parse_number(std::string_view(text).substr(colon + 1), hi))
    throw UsageError("--window expects lo:hi, got '" + text + "'");
  return {lo, hi};
}

int replay(const std::string& manifest_path, std::ostream& out, std::ostream& err) {
  json m;
  try {
    std::ifstream in(manifest_path);
    if (!in) throw InputError("cannot open manifest: " + manifest_path);
    m = json::parse(in);
  } catch (const json::exception& e) {
    err << "error: " << manifest_path << ": " << e.what() << '\n';
    return kInputError;
  }
  const Settings s = settings_from_json(m.at("parameters"));
  const CommandResult r = execute(s);
  const auto& expected = m.at("outputs");
  bool same = expected.size() == r.artifacts.size();
  for (std::size_t i = 0; i < r.artifacts.size(); ++i) {
    const std::string got = hex64(fnv1a64(r.artifacts[i].content));
    const bool match = i < expected.size() && expected[i].at("fnv1a64").get<std::string>() == got &&
                       expected[i].at("role").get<std::string>() == r.artifacts[i].role;
    same = same && match;
    out << r.artifacts[i].role << ' ' << (r.artifacts[i].path.empty() ? "<stdout>" : r.artifacts[i].path) << ' '
        << got << ' ' << (match ? "identical" : "MISMATCH") << '\n';
  }
  return same ? kOk : kReplayMismatch;
}

}  // namespace

json settings_to_json(const Settings& s) {
  return {{"subcommand", s.subcommand},
          {"strike", s.strike},
          {"open_price", s.open_price},
          {"sigma", s.sigma},
          {"mu", s.mu},
          {"t0_min", s.t0_min},
          {"start_min", s.start_min},
          {"end_min", s.end_min},
          {"steps", s.steps},
          {"mode", to_string(s.mode)},
          {"scheme", to_string(s.scheme)},
          {"betas", s.betas},
          {"position", number_or_null(s.position)},
          {"elasticity", number_or_null(s.elasticity)},
          {"seed", s.seed},
          {"runs", s.runs},
          {"noise_ratio", s.noise_ratio},
          {"pin_tol", s.pin_tol},
          {"window_lo", number_or_null(s.window_lo)},
          {"window_hi", number_or_null(s.window_hi)},
          {"input", s.input},
          {"output", s.output},
          {"closes_output", s.closes_output},
          {"diagnostic_output", s.diagnostic_output},
          {"format", s.format},
          {"threads", s.threads}};
}

Settings settings_from_json(const json& j) {
  auto opt = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
  };
  Settings s;
  s.subcommand = j.at("subcommand").get<std::string>();
  s.strike = j.at("strike").get<double>();
  s.open_price = j.at("open_price").get<double>();
  s.sigma = j.at("sigma").get<double>();
  s.mu = j.at("mu").get<double>();
  s.t0_min = j.at("t0_min").get<double>();
  s.start_min = j.at("start_min").get<double>();
  s.end_min = j.at("end_min").get<double>();
  s.steps = j.at("steps").get<int>();
  s.mode = parse_mode(j.at("mode").get<std::string>());
  s.scheme = parse_scheme(j.at("scheme").get<std::string>());
  s.betas = j.at("betas").get<std::vector<double>>();
  s.position = opt("position");
  s.elasticity = opt("elasticity");
  s.seed = j.at("seed").get<std::uint64_t>();
  s.runs = j.at("runs").get<std::uint64_t>();
  s.noise_ratio = j.at("noise_ratio").get<double>();
  s.pin_tol = j.at("pin_tol").get<double>();
  s.window_lo = opt("window_lo");
  s.window_hi = opt("window_hi");
  s.input = j.at("input").get<std::string>();
  s.output = j.at("output").get<std::string>();
  s.closes_output = j.at("closes_output").get<std::string>();
  s.diagnostic_output = j.at("diagnostic_output").get<std::string>();
  s.format = j.at("format").get<std::string>();
  s.threads = j.value("threads", 0u);
  return s;
}

CommandResult execute(const Settings& s) {
  if (s.format != "csv" && s.format != "json") throw UsageError("--format must be csv or json");
  if (s.subcommand == "simulate") return cmd_simulate(s);
  if (s.subcommand == "analytic") return cmd_analytic(s);
  if (s.subcommand == "ensemble") return cmd_ensemble(s);
  if (s.subcommand == "hedge-demand") return cmd_hedge_demand(s);
  if (s.subcommand == "singularity-scan") return cmd_singularity_scan(s);
  throw UsageError("unknown subcommand: " + s.subcommand);
}

json make_manifest(const Settings& s, const CommandResult& r) {
  json outputs = json::array();
  for (const auto& a : r.artifacts)
    outputs.push_back({{"role", a.role}, {"path", a.path}, {"fnv1a64", hex64(fnv1a64(a.content))}});
  return {{"tool", kTool},
          {"version", kVersion},
          {"subcommand", s.subcommand},
          {"seed", s.seed},
          {"parameters", settings_to_json(s)},
          {"resolved", r.notes},
          {"exit_code", r.exit_code},
          {"outputs", outputs}};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Delta-hedging price pinning simulator", kTool};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Settings s;
  std::string mode = "corrected";
  std::string scheme = "rk4";
  std::string window;
  std::string replay_manifest;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--strike", s.strike, "Strike price K (dollars)")->capture_default_str();
    sub->add_option("--open-price", s.open_price, "Price at simulation start (dollars)")->capture_default_str();
    sub->add_option("--sigma", s.sigma, "Implied volatility per sqrt(minute)")->capture_default_str();
    sub->add_option("--mu", s.mu, "Drift per minute")->capture_default_str();
    sub->add_option("--t0-min", s.t0_min, "Minutes from start to expiration")->capture_default_str();
    sub->add_option("--start-min", s.start_min, "Simulation start, minutes")->capture_default_str();
    sub->add_option("--end-min", s.end_min, "Simulation end, minutes")->capture_default_str();
    sub->add_option("--steps", s.steps, "Fixed integration steps")->capture_default_str();
    sub->add_option("--mode", mode, "corrected | original | infinite-elasticity")
        ->check(CLI::IsMember({"corrected", "original", "infinite-elasticity"}))
        ->capture_default_str();
    sub->add_option("--scheme", scheme, "rk4 | euler")->check(CLI::IsMember({"rk4", "euler"}))->capture_default_str();
    sub->add_option("--beta", s.betas, "Dimensionless hedging impact (repeatable)")->allow_extra_args(false);
    sub->add_option("--position", s.position, "Straddles held by the hedger, n (signed)");
    sub->add_option("--elasticity", s.elasticity, "Price elasticity E");
    sub->add_option("--seed", s.seed, "RNG seed")->capture_default_str();
    sub->add_option("--runs", s.runs, "Ensemble size")->capture_default_str();
    sub->add_option("--noise-ratio", s.noise_ratio, "Exogenous noise volatility / sigma")->capture_default_str();
    sub->add_option("--pin-tol", s.pin_tol, "Pin tolerance (dollars)")->capture_default_str();
    sub->add_option("--window", window, "Diagnostic window lo:hi in minutes");
    sub->add_option("--input", s.input, "Input CSV (t_min,price)");
    sub->add_option("--output", s.output, "Primary output path (default stdout)");
    sub->add_option("--closes-output", s.closes_output, "Ensemble closing-price CSV path");
    sub->add_option("--diagnostic-output", s.diagnostic_output, "Hedge-demand diagnostic JSON path");
    sub->add_option("--manifest", s.manifest, "Run manifest path (default <output>.manifest.json)");
    sub->add_option("--format", s.format, "csv | json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    sub->add_option("--threads", s.threads, "Ensemble worker threads (0 = all cores)");
  };

  for (const char* name : {"simulate", "ensemble", "analytic", "hedge-demand", "singularity-scan"}) {
    static const std::map<std::string, std::string> help = {
        {"simulate", "Deterministic hedging-feedback trajectories"},
        {"ensemble", "Noisy Monte Carlo ensemble and pin probability"},
        {"analytic", "Closed-form infinite-elasticity curve"},
        {"hedge-demand", "Hedge requirement and flow diagnostic for an intraday price CSV"},
        {"singularity-scan", "Feedback denominator sign scan over (beta, s)"}};
    add_common(app.add_subcommand(name, help.at(name)));
  }
  CLI::App* replay_cmd = app.add_subcommand("replay", "Re-run a manifest and compare output checksums");
  replay_cmd->add_option("manifest", replay_manifest, "Manifest JSON")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (replay_cmd->parsed()) return replay(replay_manifest, out, err);

    s.subcommand = app.get_subcommands().front()->get_name();
    s.mode = parse_mode(mode);
    s.scheme = parse_scheme(scheme);
    if (!window.empty()) {
      const auto [lo, hi] = parse_window(window);
      s.window_lo = lo;
      s.window_hi = hi;
    }

    const CommandResult r = execute(s);
    for (const auto& a : r.artifacts) write_artifact(a, out);
    std::string manifest_path = s.manifest;
    if (manifest_path.empty() && !s.output.empty()) manifest_path = s.output + ".manifest.json";
    if (!manifest_path.empty()) {
      std::ofstream f(manifest_path, std::ios::binary);
      if (!f) throw InputError("cannot write manifest: " + manifest_path);
      f << make_manifest(s, r).dump(2) << '\n';
    }
    if (!r.message.empty()) err << r.message << '\n';
    return r.exit_code;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace pinning::cli
