#include "coalsim/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "coalsim/errors.hpp"
#include "coalsim/experiments.hpp"
#include "coalsim/limits.hpp"
#include "coalsim/rates.hpp"
#include "coalsim/sim.hpp"

namespace coalsim {

namespace {

using nlohmann::ordered_json;

std::string num(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Numeric rows rendered as CSV or as a JSON array of objects.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::string csv() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << num(row[i]);
      os << '\n';
    }
    return os.str();
  }

  std::string json() const {
    ordered_json arr = ordered_json::array();
    for (const auto& row : rows) {
      ordered_json obj;
      for (std::size_t i = 0; i < row.size(); ++i) {
        const double v = row[i];
        if (!std::isfinite(v)) {
          obj[header[i]] = nullptr;
        } else if (v == std::floor(v) && std::abs(v) < 0x1p53) {
          obj[header[i]] = static_cast<std::int64_t>(v);
        } else {
          obj[header[i]] = v;
        }
      }
      arr.push_back(std::move(obj));
    }
    return arr.dump(2) + "\n";
  }

  std::string render(const std::string& format) const { return format == "json" ? json() : csv(); }
};

struct Common {
  std::string measure = "kingman";
  std::uint64_t seed = kDefaultSeed;
  std::string output;
  std::string format;
  std::string config;
};

void add_common(CLI::App* sub, Common& c, const std::string& default_format, bool with_measure, bool with_seed) {
  if (with_measure) {
    sub->add_option("--measure", c.measure,
                    "Λ measure: term ('+' term)*, term = kingman[:mass] | bolthausen-sznitman | beta:x,y"
                    " | powerbeta:c=C,a=A,b=B | dirac:p=P,m=M")
        ->capture_default_str();
  }
  if (with_seed) {
    sub->add_option("--seed", c.seed, "base seed; replication i uses seed XOR i")->capture_default_str();
  }
  c.format = default_format;
  sub->add_option("--format", c.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  sub->add_option("-o,--output", c.output, "output file (default: standard output)");
  sub->add_option("--config", c.config,
                  "JSON object whose keys are flag names of this subcommand; flags given on the command line win");
}

std::string config_text(const ordered_json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  throw CLI::ValidationError("--config", "value of '" + key + "' must be a string, number or boolean");
}

void apply_config(CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw CLI::ValidationError("--config", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw CLI::ValidationError("--config", "config file must hold a JSON object");
  for (const auto& [raw_key, value] : j.items()) {
    std::string key = raw_key;
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "config") throw CLI::ValidationError("--config", "config files cannot nest");
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) throw CLI::ValidationError("--config", "unknown key '" + raw_key + "'");
    if (opt->count() > 0) continue;
    std::vector<std::string> inputs;
    if (value.is_array()) {
      for (const auto& v : value) inputs.push_back(config_text(v, raw_key));
    } else if (value.is_object()) {
      for (const auto& [k, v] : value.items()) inputs.push_back(k + "=" + config_text(v, raw_key));
    } else {
      inputs.push_back(config_text(value, raw_key));
    }
    for (const auto& s : inputs) opt->add_result(s);
    opt->run_callback();
  }
}

void emit(const Common& c, const std::string& text, std::ostream& out) {
  if (c.output.empty()) {
    out << text;
    return;
  }
  std::ofstream f(c.output, std::ios::binary);
  if (!f) throw CLI::FileError("cannot open output file " + c.output);
  f << text;
}

std::map<std::string, double> parse_pairs(const std::vector<std::string>& items, const std::string& flag) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw CLI::ValidationError(flag, "expected key=value, got '" + item + "'");
    const std::string value = item.substr(eq + 1);
    double v = 0.0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
      throw CLI::ValidationError(flag, "value of '" + item.substr(0, eq) + "' is not a number");
    }
    out[item.substr(0, eq)] = v;
  }
  return out;
}

std::shared_ptr<const RateFunctions> make_rates(const std::string& measure) {
  return std::make_shared<const RateFunctions>(parse_measure(measure));
}

// ---- rates ---------------------------------------------------------------

struct RatesArgs {
  Common common;
  std::vector<double> x;
  std::vector<double> x_range;
  std::int64_t b = 0;
};

std::string run_rates(const RatesArgs& a) {
  const auto rates = make_rates(a.common.measure);
  Table t;
  if (a.b > 0) {
    if (a.b < 2) throw DomainError("--b must be at least 2");
    t.header = {"b", "k", "lambda_bk", "choose_weighted", "probability"};
    const auto probs = rates->merger_size_distribution(a.b);
    const double total = rates->total_jump_rate(a.b);
    for (std::int64_t k = 2; k <= a.b; ++k) {
      t.rows.push_back({static_cast<double>(a.b), static_cast<double>(k), rates->merger_rate(a.b, k),
                        probs[static_cast<std::size_t>(k - 2)] * total, probs[static_cast<std::size_t>(k - 2)]});
    }
    return t.render(a.common.format);
  }
  std::vector<double> xs = a.x;
  if (!a.x_range.empty()) {
    if (a.x_range.size() != 3 || !(a.x_range[0] > 0.0) || !(a.x_range[1] > a.x_range[0]) || a.x_range[2] < 2) {
      throw CLI::ValidationError("--x-range", "expected lo,hi,points with 0 < lo < hi and points >= 2");
    }
    const int points = static_cast<int>(a.x_range[2]);
    const double l0 = std::log(a.x_range[0]), l1 = std::log(a.x_range[1]);
    for (int i = 0; i < points; ++i) xs.push_back(std::exp(l0 + (l1 - l0) * i / (points - 1)));
  }
  if (xs.empty()) throw CLI::ValidationError("rates", "give --x, --x-range or --b");
  t.header = {"x", "mu", "mu_prime", "mu_double_prime", "kappa", "H_inv_x", "s", "jump_rate"};
  for (double x : xs) {
    if (!(x >= 1.0)) throw DomainError("--x values must be at least 1");
    const auto [d1, d2] = rates->mu_derivatives(x);
    const double s = x >= 2.0 ? rates->s_sequence(x) : std::nan("");
    const bool integral = x == std::floor(x) && x >= 2.0 && x < 9e15;
    const double jump = integral ? rates->total_jump_rate(static_cast<std::int64_t>(x)) : std::nan("");
    t.rows.push_back({x, rates->mu(x), d1, d2, rates->kappa(x), rates->H(1.0 / x), s, jump});
  }
  return t.render(a.common.format);
}

// ---- simulate --------------------------------------------------------------

struct SimulateArgs {
  Common common;
  std::int64_t n = 0;
  std::int64_t reps = 1;
  bool labeled = false;
};

void require_n(std::int64_t n) {
  if (n < 2) throw CLI::ValidationError("--n", "sample size --n >= 2 is required");
}

std::string run_simulate(const SimulateArgs& a) {
  require_n(a.n);
  if (a.reps < 1) throw DomainError("--reps must be at least 1");
  const auto rates = make_rates(a.common.measure);
  const Simulator sim(rates, a.n);
  const bool json = a.common.format == "json";
  ordered_json paths = ordered_json::array();
  Table t;
  t.header = a.labeled ? std::vector<std::string>{"replication", "leaf", "length"}
                       : std::vector<std::string>{"replication", "index", "x_before", "k", "dy", "w", "t"};
  for (std::int64_t i = 0; i < a.reps; ++i) {
    const auto seed = replication_seed(a.common.seed, static_cast<std::uint64_t>(i));
    if (a.labeled) {
      const LabeledRun run = sim.simulate_labeled(a.n, seed);
      if (json) {
        ordered_json parts = ordered_json::array();
        for (const auto& partition : run.partitions) {
          ordered_json blocks = ordered_json::array();
          for (std::uint32_t mask : partition) {
            ordered_json leaves = ordered_json::array();
            for (int leaf = 0; leaf < 32; ++leaf) {
              if (mask >> leaf & 1u) leaves.push_back(leaf);
            }
            blocks.push_back(std::move(leaves));
          }
          parts.push_back(std::move(blocks));
        }
        paths.push_back({{"replication", i}, {"seed", seed}, {"times", run.times},
                         {"partitions", std::move(parts)}, {"lengths", run.lengths}});
      } else {
        for (std::size_t leaf = 0; leaf < run.lengths.size(); ++leaf) {
          t.rows.push_back({static_cast<double>(i), static_cast<double>(leaf), run.lengths[leaf]});
        }
      }
      continue;
    }
    const CoalescentPath path = sim.simulate_path(a.n, seed);
    if (json) {
      ordered_json jumps = ordered_json::array();
      for (const Jump& j : path.jumps) {
        jumps.push_back({{"x_before", j.x_before}, {"k", j.k}, {"dy", j.dy}, {"w", j.w}, {"t", j.t_jump}});
      }
      paths.push_back({{"replication", i}, {"seed", seed}, {"jumps", std::move(jumps)}});
    } else {
      for (std::size_t j = 0; j < path.jumps.size(); ++j) {
        const Jump& jump = path.jumps[j];
        t.rows.push_back({static_cast<double>(i), static_cast<double>(j), static_cast<double>(jump.x_before),
                          static_cast<double>(jump.k), static_cast<double>(jump.dy), jump.w, jump.t_jump});
      }
    }
  }
  if (!json) return t.csv();
  ordered_json out;
  out["measure"] = rates->measure().serialize();
  out["n"] = a.n;
  out["seed"] = a.common.seed;
  out["mode"] = a.labeled ? "labeled" : "block-counting";
  out["paths"] = std::move(paths);
  return out.dump(2) + "\n";
}

// ---- lengths ---------------------------------------------------------------

struct LengthsArgs {
  Common common;
  std::int64_t n = 0;
  std::int64_t reps = 1;
  std::int64_t top = 0;
  bool scaled = false;
};

std::string run_lengths(const LengthsArgs& a) {
  require_n(a.n);
  if (a.reps < 1) throw DomainError("--reps must be at least 1");
  if (a.top < 0) throw DomainError("--top must be nonnegative");
  const auto rates = make_rates(a.common.measure);
  const Simulator sim(rates, a.n);
  const double scale = a.scaled ? rates->mu(static_cast<double>(a.n)) / static_cast<double>(a.n) : 1.0;
  const std::size_t keep = a.top > 0 ? static_cast<std::size_t>(a.top) : static_cast<std::size_t>(a.n);
  Table t;
  t.header = {"replication", "rank", "length"};
  ordered_json reps = ordered_json::array();
  for (std::int64_t i = 0; i < a.reps; ++i) {
    const auto seed = replication_seed(a.common.seed, static_cast<std::uint64_t>(i));
    auto values = external_lengths(sim.simulate_path(a.n, seed)).largest(keep);
    for (double& v : values) v *= scale;
    for (std::size_t r = 0; r < values.size(); ++r) {
      t.rows.push_back({static_cast<double>(i), static_cast<double>(r + 1), values[r]});
    }
    reps.push_back(values);
  }
  if (a.common.format == "csv") return t.csv();
  ordered_json out;
  out["measure"] = rates->measure().serialize();
  out["n"] = a.n;
  out["seed"] = a.common.seed;
  out["scale"] = scale;
  out["lengths"] = std::move(reps);
  return out.dump(2) + "\n";
}

// ---- experiment ------------------------------------------------------------

struct ExperimentArgs {
  Common common;
  ExperimentConfig cfg;
  std::vector<std::string> params;
  std::vector<std::string> tols;
  std::string curves;
};

std::string iso_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

int run_experiment_cmd(ExperimentArgs& a, std::ostream& out) {
  a.cfg.measure = a.common.measure;
  a.cfg.seed = a.common.seed;
  a.cfg.params = parse_pairs(a.params, "--param");
  a.cfg.tolerances = parse_pairs(a.tols, "--tol");
  if (a.cfg.threads < 1) throw DomainError("--threads must be at least 1");
  const ExperimentReport rep = run_experiment(a.cfg);
  emit(a.common, rep.to_json(2) + "\n", out);
  if (!a.curves.empty()) {
    std::ofstream f(a.curves, std::ios::binary);
    if (!f) throw CLI::FileError("cannot open curves file " + a.curves);
    f << rep.curves_csv();
  }
  if (!a.common.output.empty()) {
    ordered_json meta;
    meta["runtime_ms"] = rep.runtime_ms;
    meta["threads"] = a.cfg.threads;
    meta["finished_at"] = iso_now();
    std::ofstream f(a.common.output + ".meta.json", std::ios::binary);
    f << meta.dump(2) << "\n";
  }
  return rep.passed() ? kExitOk : kExitVerdictFail;
}

// ---- limits ----------------------------------------------------------------

struct LimitsArgs {
  Common common;
  std::string law = "typical";
  double alpha = 2.0;
  std::vector<double> x;
  double n = 0.0;
  std::vector<double> t;
  int r = 1;
  int ell = 1;
  std::int64_t samples = 0;
  std::int64_t y = 0;
  std::vector<double> u;
  bool shifted = false;
};

std::string run_limits(const LimitsArgs& a) {
  Table t;
  const auto need_x = [&] {
    if (a.x.empty()) throw CLI::ValidationError("--x", "law '" + a.law + "' needs --x");
  };
  if (a.law == "typical") {
    need_x();
    t.header = {"x", "density", "cdf", "tail"};
    for (double x : a.x) t.rows.push_back({x, typical_density(a.alpha, x), typical_cdf(a.alpha, x), typical_tail(a.alpha, x)});
  } else if (a.law == "frechet") {
    need_x();
    t.header = {"x", "cdf"};
    for (double x : a.x) t.rows.push_back({x, frechet_cdf(a.alpha, x)});
  } else if (a.law == "poisson") {
    need_x();
    t.header = {"x", "tail", "density"};
    for (double x : a.x) t.rows.push_back({x, poisson_intensity_tail(a.alpha, x), poisson_intensity_density(a.alpha, x)});
  } else if (a.law == "logistic" || a.law == "gumbel") {
    need_x();
    t.header = {"x", "cdf"};
    for (double x : a.x) t.rows.push_back({x, a.law == "logistic" ? logistic_cdf(x) : gumbel_cdf(x)});
  } else if (a.law == "cox") {
    need_x();
    t.header = {"x", "cdf", "cdf_quadrature"};
    for (double x : a.x) t.rows.push_back({x, cox_max_cdf(x), cox_max_cdf_integral(x)});
  } else if (a.law == "moehle") {
    if (a.t.empty() || !(a.n >= 1.0)) throw CLI::ValidationError("moehle", "needs --n and --t");
    t.header = {"n", "t", "r", "moment"};
    for (double time : a.t) t.rows.push_back({a.n, time, static_cast<double>(a.r), moehle_factorial_moment(a.n, time, a.r)});
  } else if (a.law == "cox-sample") {
    if (a.samples < 1) throw CLI::ValidationError("--samples", "cox-sample needs --samples >= 1");
    t.header = {"sample", "rank", "value"};
    for (std::int64_t i = 0; i < a.samples; ++i) {
      const auto v = sample_cox_extremes(a.ell, replication_seed(a.common.seed, static_cast<std::uint64_t>(i)));
      for (std::size_t k = 0; k < v.size(); ++k) t.rows.push_back({static_cast<double>(i), static_cast<double>(k + 1), v[k]});
    }
  } else if (a.law == "order-stat") {
    if (a.u.empty()) throw CLI::ValidationError("--u", "order-stat needs --u");
    t.header = {"density"};
    t.rows.push_back({order_stat_density(a.alpha, a.y, a.u, a.shifted)});
  } else if (a.law == "bs-limit") {
    if (a.u.empty()) throw CLI::ValidationError("--u", "bs-limit needs --u");
    t.header = {"density"};
    t.rows.push_back({bs_limit_density(a.u)});
  } else {
    throw CLI::ValidationError("--law", "unknown law '" + a.law + "'");
  }
  return t.render(a.common.format);
}

std::string error_json(const std::string& type, const std::string& message) {
  ordered_json j;
  j["error"] = type;
  j["message"] = message;
  return j.dump();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and rate evaluation for Λ-coalescents: external branch lengths and their limits"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "coalsim 0.1.0");

  RatesArgs rates_args;
  auto* rates = app.add_subcommand("rates", "Evaluate μ, μ', μ'', κ = μ/x, H(1/x), s and λ(b) at points x, or λ_{b,k} for one b");
  add_common(rates, rates_args.common, "csv", true, false);
  rates->add_option("--x", rates_args.x, "points x >= 1 (comma separated or repeated)")->delimiter(',');
  rates->add_option("--x-range", rates_args.x_range, "lo,hi,points: log-spaced grid of x")->delimiter(',');
  rates->add_option("--b", rates_args.b, "block count b: print λ_{b,k}, C(b,k)λ_{b,k} and the merger-size law for k = 2..b");

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Sample block-counting paths (or labeled partition runs)");
  add_common(simulate, sim_args.common, "json", true, true);
  simulate->add_option("--n", sim_args.n, "sample size n (initial blocks)")->check(CLI::Range(std::int64_t{2}, std::int64_t{1} << 40));
  simulate->add_option("--reps", sim_args.reps, "number of paths")->capture_default_str();
  simulate->add_flag("--labeled", sim_args.labeled, "labeled partition process, n <= 12");

  LengthsArgs len_args;
  auto* lengths = app.add_subcommand("lengths", "External branch lengths T_1^n..T_n^n of sampled paths, longest first");
  add_common(lengths, len_args.common, "csv", true, true);
  lengths->add_option("--n", len_args.n, "sample size n")->check(CLI::Range(std::int64_t{2}, std::int64_t{1} << 40));
  lengths->add_option("--reps", len_args.reps, "number of paths")->capture_default_str();
  lengths->add_option("--top", len_args.top, "keep only the ℓ longest lengths per path (0: all)")->capture_default_str();
  lengths->add_flag("--scaled", len_args.scaled, "multiply lengths by μ(n)/n");

  ExperimentArgs exp_args;
  auto* experiment = app.add_subcommand("experiment", "Seeded Monte Carlo check of one limit statement; exit code 3 on FAIL");
  add_common(experiment, exp_args.common, "json", true, true);
  experiment->add_option("--theorem", exp_args.cfg.theorem,
                         "tag: T1.1 (tail envelope), T1.2 (independence), T1.3/C1.4 (typical length law), "
                         "T1.5 (maxima, α > 1), T1.6/L9.2 (Bolthausen-Sznitman extremes), P2.1/P2.2 (laws of large numbers), "
                         "T4.1 (tail identity), L7.1 (factorial moments), SIM (labeled vs unlabeled)")
      ->check(CLI::IsMember({"T1.1", "T1.2", "T1.3", "C1.4", "T1.5", "T1.6", "P2.1", "P2.2", "T4.1", "L7.1", "L9.2", "SIM"}))
      ->capture_default_str();
  experiment->add_option("--n", exp_args.cfg.n, "sample size n")->capture_default_str();
  experiment->add_option("--n-grid", exp_args.cfg.n_grid, "sample sizes for the logistic trend of the maximum")->delimiter(',');
  experiment->add_option("--reps", exp_args.cfg.replications, "replications (>= 100)")->capture_default_str();
  experiment->add_option("--t-grid", exp_args.cfg.t_grid,
                         "time grid: tail envelope points, N_n(t) times, or x-grid of the Poisson counts")->delimiter(',');
  experiment->add_option("--r", exp_args.cfg.r_rule, "level r_n: a number, n/d, f*n or n^e");
  experiment->add_option("--c", exp_args.cfg.c, "c > 1 in t_{c,n} = t_n - log c / log log n")->capture_default_str();
  experiment->add_option("--ell", exp_args.cfg.ell, "number ℓ of largest lengths")->capture_default_str();
  experiment->add_option("--k", exp_args.cfg.k, "number k of leaves for the independence check (1..8)")->capture_default_str();
  experiment->add_option("--param", exp_args.params,
                         "key=value knobs: gamma, max_integral, lemma_n, lemma_reps, trend_reps, cox_samples, variance_paths");
  experiment->add_option("--tol", exp_args.tols, "key=value tolerance overrides by statistic key");
  experiment->add_option("--threads", exp_args.cfg.threads, "worker threads; results do not depend on it")->capture_default_str();
  experiment->add_option("--curves", exp_args.curves, "write ECDF and limit curves as CSV to this file");

  LimitsArgs lim_args;
  auto* limits = app.add_subcommand("limits", "Evaluate limit laws and exact formulas");
  add_common(limits, lim_args.common, "csv", false, true);
  limits->add_option("--law", lim_args.law,
                     "typical (density α(1+(α-1)x)^(-1-α/(α-1))), frechet, poisson (intensity of the maxima), logistic, "
                     "gumbel, cox (maximum of the Cox process, closed form and quadrature), moehle (E N_n(t)^(r) for "
                     "Bolthausen-Sznitman), cox-sample, order-stat, bs-limit")
      ->capture_default_str();
  limits->add_option("--alpha", lim_args.alpha, "regular-variation exponent α in [1,2]")->capture_default_str();
  limits->add_option("--x", lim_args.x, "evaluation points")->delimiter(',');
  limits->add_option("--n", lim_args.n, "sample size n for moehle");
  limits->add_option("--t", lim_args.t, "times t for moehle")->delimiter(',');
  limits->add_option("--r", lim_args.r, "order r of the ascending factorial moment")->capture_default_str();
  limits->add_option("--ell", lim_args.ell, "points per cox-sample draw")->capture_default_str();
  limits->add_option("--samples", lim_args.samples, "number of cox-sample draws");
  limits->add_option("--y", lim_args.y, "number y of i.i.d. variables for order-stat");
  limits->add_option("--u", lim_args.u, "decreasing points u_1 >= ... >= u_ℓ")->delimiter(',');
  limits->add_flag("--shifted", lim_args.shifted, "order-stat: use the y → ∞ Poisson limit");

  std::vector<const char*> argv{"coalsim"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    for (const auto& [sub, cfg] : std::initializer_list<std::pair<CLI::App*, const std::string*>>{
             {rates, &rates_args.common.config}, {simulate, &sim_args.common.config},
             {lengths, &len_args.common.config}, {experiment, &exp_args.common.config},
             {limits, &lim_args.common.config}}) {
      if (sub->parsed() && !cfg->empty()) apply_config(sub, *cfg);
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (rates->parsed()) {
      emit(rates_args.common, run_rates(rates_args), out);
    } else if (simulate->parsed()) {
      emit(sim_args.common, run_simulate(sim_args), out);
    } else if (lengths->parsed()) {
      emit(len_args.common, run_lengths(len_args), out);
    } else if (experiment->parsed()) {
      return run_experiment_cmd(exp_args, out);
    } else if (limits->parsed()) {
      emit(lim_args.common, run_limits(lim_args), out);
    }
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << error_json("UsageError", e.what()) << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << error_json("ParseError", e.what()) << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << error_json("DomainError", e.what()) << "\n";
  } catch (const RegimeError& e) {
    err << error_json("RegimeError", e.what()) << "\n";
  } catch (const QuadratureError& e) {
    err << error_json("QuadratureError", e.what()) << "\n";
  } catch (const std::exception& e) {
    err << error_json("Error", e.what()) << "\n";
  }
  return kExitFailure;
}

}  // namespace coalsim
