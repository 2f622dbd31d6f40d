#include "coalsim/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "coalsim/limits.hpp"
#include "coalsim/numerics.hpp"
#include "coalsim/random.hpp"
#include "coalsim/rates.hpp"
#include "coalsim/sim.hpp"
#include "coalsim/stats.hpp"

namespace coalsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Stream separators for experiments that draw several independent families
// of replications from one base seed.
constexpr std::uint64_t kSaltLabeled = 0x5a17ull << 40;
constexpr std::uint64_t kSaltLemma = 0x1e33ull << 40;
constexpr std::uint64_t kSaltTrend = 0x7e2dull << 40;
constexpr std::uint64_t kSaltCox = 0xc0c5ull << 40;
constexpr std::uint64_t kSaltResample = 0x2e5aull << 40;
constexpr std::uint64_t kSaltPaths = 0x9a75ull << 40;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct Setup {
  std::shared_ptr<const RateFunctions> rates;
  std::unique_ptr<Simulator> sim;
};

Setup make_setup(const ExperimentConfig& cfg, std::int64_t n_max) {
  Setup s;
  s.rates = std::make_shared<const RateFunctions>(parse_measure(cfg.measure));
  s.sim = std::make_unique<Simulator>(s.rates, n_max);
  return s;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.replications < 100) throw DomainError("replications must be at least 100");
  if (cfg.n < 2) throw DomainError("n must be at least 2");
  for (const auto& [key, v] : cfg.tolerances) {
    if (!(v > 0.0)) throw DomainError("tolerance '" + key + "' must be positive");
  }
}

ExperimentReport start_report(const ExperimentConfig& cfg) {
  validate(cfg);
  ExperimentReport rep;
  rep.config = cfg;
  return rep;
}

double tolerance(ExperimentReport& rep, const std::string& key, double fallback) {
  auto [it, inserted] = rep.config.tolerances.emplace(key, fallback);
  return it->second;
}

double param(ExperimentReport& rep, const std::string& key, double fallback) {
  auto [it, inserted] = rep.config.params.emplace(key, fallback);
  return it->second;
}

void require_dustless(const RateFunctions& rates, ExperimentReport& rep) {
  const DustDiagnosis d = rates.dust_diagnostic();
  rep.info["dust"] = to_string(d.verdict);
  rep.info["dust_evidence"] = d.evidence;
  if (d.verdict != DustVerdict::dustless) {
    throw RegimeError("measure '" + rep.config.measure + "' is not dustless (" + to_string(d.verdict) +
                      "): " + d.evidence);
  }
}

double resolve_alpha(const RateFunctions& rates, ExperimentReport& rep) {
  double alpha;
  if (const auto known = rates.known_alpha()) {
    alpha = *known;
    rep.info["alpha_source"] = "family";
  } else {
    alpha = std::clamp(rates.rv_exponent_estimate(1e3, 1e6), 1.0, 2.0);
    rep.info["alpha_source"] = "estimate on [1e3, 1e6]";
  }
  rep.info["alpha"] = format_double(alpha);
  return alpha;
}

Statistic check_max(std::string name, double value, double tol) {
  return {std::move(name), value, std::nullopt, std::nullopt, tol, value <= tol, "max"};
}

Statistic check_abs(std::string name, double value, double target, double tol, std::optional<double> se = {}) {
  return {std::move(name), value, se, target, tol, std::abs(value - target) <= tol, "abs"};
}

Statistic check_se(std::string name, double value, double se, double target, double k) {
  return {std::move(name), value, se, target, k, std::abs(value - target) <= k * se, "se"};
}

Statistic check_at_least(std::string name, double value, double target, double tol) {
  return {std::move(name), value, std::nullopt, target, tol, value >= target - tol, "at_least"};
}

Statistic check_at_most(std::string name, double value, double target, double tol) {
  return {std::move(name), value, std::nullopt, target, tol, value <= target + tol, "at_most"};
}

Statistic info_stat(std::string name, double value, std::optional<double> target = {}, std::optional<double> se = {}) {
  return {std::move(name), value, se, target, std::nullopt, std::nullopt, "info"};
}

std::string grid_label(double v) { return format_double(v); }

// Length of a uniformly chosen external branch; +inf if it outlives stop_time.
double random_leaf_length(const Simulator& sim, std::int64_t n, Rng& rng, double stop_time = kInf) {
  const auto leaf = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n)));
  std::int64_t absorbed = 0;
  double out = kInf;
  ChainOptions opts;
  opts.stop_time = stop_time;
  sim.run_chain(n, rng, [&](const Jump& j) {
    absorbed += j.dy;
    if (absorbed > leaf) {
      out = j.t_jump;
      return false;
    }
    return true;
  }, opts);
  return out;
}

// Lengths of k distinct uniformly chosen external branches.
std::vector<double> random_leaves_lengths(const Simulator& sim, std::int64_t n, int k, Rng& rng) {
  std::vector<std::int64_t> ranks;
  while (static_cast<int>(ranks.size()) < k) {
    const auto r = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n)));
    if (std::find(ranks.begin(), ranks.end(), r) == ranks.end()) ranks.push_back(r);
  }
  std::vector<double> out(static_cast<std::size_t>(k), kInf);
  std::int64_t absorbed = 0;
  int remaining = k;
  sim.run_chain(n, rng, [&](const Jump& j) {
    const std::int64_t before = absorbed;
    absorbed += j.dy;
    for (int i = 0; i < k; ++i) {
      if (ranks[i] >= before && ranks[i] < absorbed) {
        out[i] = j.t_jump;
        --remaining;
      }
    }
    return remaining > 0;
  });
  return out;
}

Curve ecdf_curve(std::string name, const std::vector<double>& sorted, const std::function<double(double)>& cdf) {
  Curve c;
  c.name = std::move(name);
  constexpr int points = 64;
  for (int i = 0; i < points; ++i) {
    const double x = quantile_sorted(sorted, (i + 0.5) / points);
    const auto below = std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
    c.x.push_back(x);
    c.empirical.push_back(static_cast<double>(below) / static_cast<double>(sorted.size()));
    c.theoretical.push_back(cdf(x));
  }
  return c;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_number(const std::string& text, const std::string& rule) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ParseError("invalid level rule '" + rule + "'", static_cast<std::size_t>(res.ptr - text.data()));
  }
  return v;
}

}  // namespace

double resolve_level(const std::string& rule, double n) {
  std::string s = trim(rule);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (s.empty()) throw ParseError("empty level rule", 0);
  if (s == "n") return n;
  if (s.rfind("n/", 0) == 0) return n / parse_number(s.substr(2), rule);
  if (s.rfind("n^", 0) == 0) return std::pow(n, parse_number(s.substr(2), rule));
  if (s.rfind("n*", 0) == 0) return n * parse_number(s.substr(2), rule);
  if (s.size() > 2 && s.compare(s.size() - 2, 2, "*n") == 0) return n * parse_number(s.substr(0, s.size() - 2), rule);
  return parse_number(s, rule);
}

bool ExperimentReport::passed() const {
  return std::all_of(statistics.begin(), statistics.end(),
                     [](const Statistic& s) { return !s.pass || *s.pass; });
}

std::string ExperimentReport::to_json(int indent) const {
  using nlohmann::ordered_json;
  ordered_json cfg;
  cfg["theorem"] = config.theorem;
  cfg["measure"] = config.measure;
  cfg["n"] = config.n;
  cfg["n_grid"] = config.n_grid;
  cfg["replications"] = config.replications;
  cfg["seed"] = config.seed;
  cfg["t_grid"] = config.t_grid;
  cfg["r_rule"] = config.r_rule;
  cfg["c"] = config.c;
  cfg["ell"] = config.ell;
  cfg["k"] = config.k;
  cfg["params"] = ordered_json(config.params);
  cfg["tolerances"] = ordered_json(config.tolerances);

  ordered_json stats = ordered_json::array();
  auto opt = [](const auto& o) -> ordered_json { return o ? ordered_json(*o) : ordered_json(nullptr); };
  for (const Statistic& s : statistics) {
    ordered_json j;
    j["name"] = s.name;
    j["value"] = std::isfinite(s.value) ? ordered_json(s.value) : ordered_json(nullptr);
    j["se"] = opt(s.se);
    j["target"] = opt(s.target);
    j["tol"] = opt(s.tol);
    j["pass"] = opt(s.pass);
    j["criterion"] = s.criterion;
    stats.push_back(std::move(j));
  }
  ordered_json out;
  out["config"] = std::move(cfg);
  out["statistics"] = std::move(stats);
  out["info"] = ordered_json(info);
  out["verdict"] = passed() ? "PASS" : "FAIL";
  out["seed"] = config.seed;
  return out.dump(indent);
}

std::string ExperimentReport::curves_csv() const {
  std::ostringstream os;
  os << "curve,x,empirical,theoretical\n";
  for (const Curve& c : curves) {
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      os << c.name << ',' << format_double(c.x[i]) << ',' << format_double(c.empirical[i]) << ','
         << format_double(c.theoretical[i]) << '\n';
    }
  }
  return os.str();
}

ExperimentReport run_typical_length(const ExperimentConfig& cfg) {
  ExperimentReport rep = start_report(cfg);
  const Setup s = make_setup(cfg, cfg.n);
  require_dustless(*s.rates, rep);
  const double alpha = resolve_alpha(*s.rates, rep);
  const double n = static_cast<double>(cfg.n);
  const double scale = s.rates->mu(n) / n;
  rep.info["scale"] = format_double(scale);

  auto samples = run_replications(cfg.replications, cfg.threads, [&](std::int64_t i) {
    Rng rng(replication_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    return scale * random_leaf_length(*s.sim, cfg.n, rng);
  });
  std::sort(samples.begin(), samples.end());
  const auto cdf = [alpha](double t) { return typical_cdf(alpha, t); };
  const double ks = ks_statistic(samples, cdf);
  if (cfg.theorem == "T1.1") {
    rep.statistics.push_back(info_stat("ks", ks));
  } else {
    rep.statistics.push_back(check_max("ks", ks, tolerance(rep, "ks", 0.05)));
  }
  const Summary sum = summarize(samples);
  rep.statistics.push_back(info_stat("mean", sum.mean, 1.0, sum.se));

  const double slack = tolerance(rep, "envelope_slack", 0.03);
  const std::vector<double> grid = cfg.t_grid.empty() ? std::vector<double>{0.25, 0.5, 1.0, 2.0, 4.0} : cfg.t_grid;
  for (double t : grid) {
    const auto above = samples.end() - std::upper_bound(samples.begin(), samples.end(), t);
    const double tail = static_cast<double>(above) / static_cast<double>(samples.size());
    rep.statistics.push_back(check_at_least("envelope_lower_t=" + grid_label(t), tail, std::exp(-2.0 * t), slack));
    rep.statistics.push_back(check_at_most("envelope_upper_t=" + grid_label(t), tail, 1.0 / (1.0 + t), slack));
  }
  rep.curves.push_back(ecdf_curve("scaled_length", samples, cdf));
  return rep;
}

ExperimentReport run_independence(const ExperimentConfig& cfg) {
  ExperimentReport rep = start_report(cfg);
  if (cfg.k < 1 || cfg.k > 8) throw DomainError("k must lie in [1, 8]");
  if (cfg.k > cfg.n) throw DomainError("k must not exceed n");
  const Setup s = make_setup(cfg, cfg.n);
  require_dustless(*s.rates, rep);
  const double n = static_cast<double>(cfg.n);
  const double scale = s.rates->mu(n) / n;
  const bool labeled = cfg.n <= 12;
  rep.info["mode"] = labeled ? "labeled" : "unlabeled random pairing";

  const auto rows = run_replications(cfg.replications, cfg.threads, [&](std::int64_t i) {
    const auto seed = replication_seed(cfg.seed, static_cast<std::uint64_t>(i));
    std::vector<double> v;
    if (labeled) {
      const LabeledRun run = s.sim->simulate_labeled(cfg.n, seed);
      v.assign(run.lengths.begin(), run.lengths.begin() + cfg.k);
    } else {
      Rng rng(seed);
      v = random_leaves_lengths(*s.sim, cfg.n, cfg.k, rng);
    }
    for (double& x : v) x *= scale;
    return v;
  });

  std::vector<std::vector<double>> cols(static_cast<std::size_t>(cfg.k));
  for (const auto& row : rows) {
    for (int j = 0; j < cfg.k; ++j) cols[j].push_back(row[j]);
  }
  double worst_corr = 0.0;
  double worst_gap = 0.0;
  for (int a = 0; a < cfg.k; ++a) {
    for (int b = a + 1; b < cfg.k; ++b) {
      worst_corr = std::max(worst_corr, std::abs(correlation(cols[a], cols[b])));
      auto grid_of = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        std::vector<double> g;
        for (int q = 1; q <= 5; ++q) g.push_back(quantile_sorted(v, q / 6.0));
        return g;
      };
      worst_gap = std::max(worst_gap, joint_product_gap(cols[a], cols[b], grid_of(cols[a]), grid_of(cols[b])));
    }
  }
  if (cfg.k > 1) rep.statistics.push_back(check_max("max_abs_correlation", worst_corr, tolerance(rep, "corr", 0.05)));
  rep.statistics.push_back(check_max("joint_product_gap", worst_gap, tolerance(rep, "gap", 0.05)));
  return rep;
}

ExperimentReport run_tail_identity(const ExperimentConfig& cfg) {
  ExperimentReport rep = start_report(cfg);
  const Setup s = make_setup(cfg, cfg.n);
  require_dustless(*s.rates, rep);
  const double n = static_cast<double>(cfg.n);
  const double r = resolve_level(cfg.r_rule.empty() ? "n/2" : cfg.r_rule, n);
  if (!(r > 1.0 && r <= n)) throw RegimeError("level r_n must satisfy 1 < r_n <= n");
  const double threshold = r == n ? 0.0 : s.rates->inverse_mu_integral(r, n);
  rep.info["r_n"] = format_double(r);
  rep.info["threshold"] = format_double(threshold);

  const auto exceed = run_replications(cfg.replications, cfg.threads, [&](std::int64_t i) {
    Rng rng(replication_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    return random_leaf_length(*s.sim, cfg.n, rng, threshold) > threshold ? 1.0 : 0.0;
  });
  const Summary sum = summarize(exceed);
  const double target = s.rates->mu(r) / s.rates->mu(n);
  rep.statistics.push_back(check_abs("exceedance", sum.mean, target, tolerance(rep, "exceedance", 0.03), sum.se));
  const double slack = tolerance(rep, "envelope_slack", 0.03);
  rep.statistics.push_back(check_at_least("envelope_lower", sum.mean, (r / n) * (r / n), slack));
  rep.statistics.push_back(check_at_most("envelope_upper", sum.mean, r / n, slack));
  return rep;
}

ExperimentReport run_lln(const ExperimentConfig& cfg) {
  ExperimentReport rep = start_report(cfg);
  const Setup s = make_setup(cfg, cfg.n);
  require_dustless(*s.rates, rep);
  const double n = static_cast<double>(cfg.n);
  const double r = resolve_level(cfg.r_rule.empty() ? "100" : cfg.r_rule, n);
  const double gamma = param(rep, "gamma", 0.5);
  if (!(r >= 2.0 && r <= gamma * n)) throw RegimeError("level r_n must satisfy 2 <= r_n <= gamma n");
  const double integral = s.rates->inverse_mu_integral(r, n);
  const double max_integral = param(rep, "max_integral", 1.0);
  if (!(integral <= max_integral)) {
    throw RegimeError("integral of 1/mu over [r_n, n] is " + format_double(integral) + ", above " +
                      format_double(max_integral) + ": not in the small-time regime");
  }
  const double log_target = std::log(s.rates->mu(n) / n * r / s.rates->mu(r));
  rep.info["r_n"] = format_double(r);
  rep.info["integral"] = format_double(integral);

  struct Row {
    double ratio = 0.0;
    double inverse_sum = 0.0;
  };
  const auto level = static_cast<std::int64_t>(std::floor(r));
  const auto rows = run_replications(cfg.replications, cfg.threads, [&](std::int64_t i) {
    Rng rng(replication_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    Row row;
    double t = 0.0;
    ChainOptions opts;
    opts.track_singletons = false;
    opts.stop_blocks = level;
    s.sim->run_chain(cfg.n, rng, [&](const Jump& j) {
      row.inverse_sum += 1.0 / static_cast<double>(j.x_before);
      t = j.t_jump;
      return true;
    }, opts);
    row.ratio = t / integral;
    return row;
  });
  std::vector<double> ratios, sums;
  for (const Row& row : rows) {
    ratios.push_back(row.ratio);
    sums.push_back(row.inverse_sum);
  }
  const Summary sr = summarize(ratios);
  const Summary ss = summarize(sums);
  rep.statistics.push_back(check_abs("rho_tilde_ratio", sr.mean, 1.0, tolerance(rep, "rho_tilde_ratio", 0.1), sr.se));
  rep.statistics.push_back(check_abs("inverse_block_sum", ss.mean, log_target, tolerance(rep, "inverse_block_sum", 0.1), ss.se));
  return rep;
}

ExperimentReport run_order_statistics(const ExperimentConfig& cfg) {
  ExperimentReport rep = start_report(cfg);
  if (cfg.ell < 1) throw DomainError("ell must be at least 1");
  const Setup s = make_setup(cfg, cfg.n);
  require_dustless(*s.rates, rep);
  const double alpha = resolve_alpha(*s.rates, rep);
  if (!(alpha > 1.0)) throw RegimeError("order statistics need alpha > 1; got " + format_double(alpha));
  const double n = static_cast<double>(cfg.n);
  const double s_n = s.rates->s_sequence(n);
  const double kappa = s.rates->kappa(s_n);
  rep.info["s_n"] = format_double(s_n);
  rep.info["kappa_s_n"] = format_double(kappa);
  const std::vector<double> x_grid = cfg.t_grid.empty() ? std::vector<double>{0.5, 1.0, 2.0} : cfg.t_grid;

  struct Row {
    std::vector<double> top;
    std::vector<double> counts;
  };
  const auto rows = run_replications(cfg.replications, cfg.threads, [&](std::int64_t i) {
    Rng rng(replication_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    std::vector<std::pair<double, std::int64_t>> absorbed;
    s.sim->run_chain(cfg.n, rng, [&](const Jump& j) {
      if (j.dy > 0) absorbed.emplace_back(j.t_jump, j.dy);
      return true;
    });
    Row row;
    row.counts.assign(x_grid.size(), 0.0);
    for (auto it = absorbed.rbegin(); it != absorbed.rend(); ++it) {
      const double v = kappa * it->first;
      for (std::int64_t m = 0; m < it->second && static_cast<int>(row.top.size()) < cfg.ell; ++m) row.top.push_back(v);
      bool any = false;
      for (std::size_t g = 0; g < x_grid.size(); ++g) {
        if (v > x_grid[g]) {
          row.counts[g] += static_cast<double>(it->second);
          any = true;
        }
      }
      if (!any && static_cast<int>(row.top.size()) >= cfg.ell) break;
    }
    return row;
  });

  for (int l = 0; l < cfg.ell; ++l) {
    std::vector<double> v;
    for (const Row& row : rows) v.push_back(l < static_cast<int>(row.top.size()) ? row.top[l] : 0.0);
    std::sort(v.begin(), v.end());
    // U_{l+1} <= x iff fewer than l+1 Poisson points lie above x.
    const auto cdf = [alpha, l](double x) {
      if (x <= 0.0) return 0.0;
      const double lam = poisson_intensity_tail(alpha, x);
      double term = std::exp(-lam), acc = term;
      for (int i = 1; i <= l; ++i) {
        term *= lam / i;
        acc += term;
      }
      return acc;
    };
    const double ks = ks_statistic(v, cdf);
    if (l == 0) {
      rep.statistics.push_back(check_max("ks_max_frechet", ks, tolerance(rep, "ks_max", alpha == 2.0 ? 0.06 : 0.08)));
      rep.curves.push_back(ecdf_curve("scaled_max", v, cdf));
      // Maximum of n i.i.d. copies of the typical law at this n.
      const auto iid_cdf = [&](double x) {
        return x <= 0.0 ? 0.0 : std::exp(-n * typical_tail(alpha, x * s_n));
      };
      rep.statistics.push_back(info_stat("ks_max_iid_typical", ks_statistic(v, iid_cdf)));
    } else {
      rep.statistics.push_back(info_stat("ks_order_" + std::to_string(l + 1), ks));
    }
  }
  const double count_tol = tolerance(rep, "count_relative", 0.15);
  for (std::size_t g = 0; g < x_grid.size(); ++g) {
    std::vector<double> c;
    for (const Row& row : rows) c.push_back(row.counts[g]);
    const Summary sc = summarize(c);
    const double tail = poisson_intensity_tail(alpha, x_grid[g]);
    const std::string label = grid_label(x_grid[g]);
    if (x_grid[g] == 1.0) {
      rep.statistics.push_back(check_abs("count_mean_x=1", sc.mean, tail, count_tol * tail, sc.se));
      rep.statistics.push_back(check_abs("count_variance_x=1", sc.variance, tail, count_tol * tail));
    } else {
      rep.statistics.push_back(info_stat("count_mean_x=" + label, sc.mean, tail, sc.se));
      rep.statistics.push_back(info_stat("count_variance_x=" + label, sc.variance, tail));
    }
    rep.statistics.push_back(info_stat("count_mean_iid_typical_x=" + label, sc.mean, n * typical_tail(alpha, x_grid[g] * s_n)));
  }
  return rep;
}

ExperimentReport run_bs_extremes(const ExperimentConfig& cfg) {
  ExperimentReport rep = start_report(cfg);
  const Setup s = make_setup(cfg, cfg.n);
  if (!s.rates->measure().is_bolthausen_sznitman()) {
    throw RegimeError("this experiment needs the Bolthausen-Sznitman coalescent");
  }
  if (!(cfg.c > 1.0)) throw DomainError("c must exceed 1");

  // Exact block-count moments at fixed times.
  std::vector<double> times = cfg.t_grid.empty() ? std::vector<double>{0.25, 0.5, 1.0} : cfg.t_grid;
  std::sort(times.begin(), times.end());
  const auto counts = run_replications(cfg.replications, cfg.threads, [&](std::int64_t i) {
    Rng rng(replication_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    std::vector<double> at(times.size());
    std::size_t g = 0;
    std::int64_t b = cfg.n;
    ChainOptions opts;
    opts.track_singletons = false;
    opts.stop_time = times.back();
    s.sim->run_chain(cfg.n, rng, [&](const Jump& j) {
      while (g < times.size() && times[g] < j.t_jump) at[g++] = static_cast<double>(j.x_before);
      b = j.x_before - j.k + 1;
      return true;
    }, opts);
    while (g < times.size()) at[g++] = static_cast<double>(b);
    return at;
  });
  const double k_se = tolerance(rep, "moehle_se", 3.0);
  const double n = static_cast<double>(cfg.n);
  for (std::size_t g = 0; g < times.size(); ++g) {
    for (int r = 1; r <= 2; ++r) {
      std::vector<double> v;
      for (const auto& row : counts) v.push_back(r == 1 ? row[g] : row[g] * (row[g] + 1.0));
      const Summary sv = summarize(v);
      rep.statistics.push_back(check_se("moehle_r=" + std::to_string(r) + "_t=" + grid_label(times[g]), sv.mean,
                                        sv.se, moehle_factorial_moment(n, times[g], r), k_se));
    }
  }

  // Each sub-study below is skipped when its replication count is 0.
  const auto lemma_n = static_cast<std::int64_t>(param(rep, "lemma_n", 1e6));
  const auto lemma_reps = static_cast<std::int64_t>(param(rep, "lemma_reps", 2000));
  const auto trend_reps = static_cast<std::int64_t>(param(rep, "trend_reps", 2000));
  const auto cox_samples = static_cast<std::int64_t>(param(rep, "cox_samples", 1e5));
  std::vector<std::int64_t> grid = cfg.n_grid.empty() ? std::vector<std::int64_t>{1000, 10000, 100000, 1000000} : cfg.n_grid;
  for (std::int64_t m : grid) {
    if (m < 16) throw DomainError("n_grid entries must be at least 16");
  }
  std::int64_t big_n = cfg.n;
  if (lemma_reps > 0) big_n = std::max(big_n, lemma_n);
  if (trend_reps > 0) big_n = std::max(big_n, *std::max_element(grid.begin(), grid.end()));
  const Simulator big(s.rates, big_n);

  // e^{-t_{c,n}} N_n(t_{c,n}) against the exponential law with mean c.
  if (lemma_reps > 0) {
    const double t_c = t_c_sequence(static_cast<double>(lemma_n), cfg.c);
    rep.info["t_c_n"] = format_double(t_c);
    auto scaled = run_replications(lemma_reps, cfg.threads, [&](std::int64_t i) {
      Rng rng(replication_seed(cfg.seed ^ kSaltLemma, static_cast<std::uint64_t>(i)));
      std::int64_t b = lemma_n;
      ChainOptions opts;
      opts.track_singletons = false;
      opts.stop_time = std::max(t_c, 0.0);
      big.run_chain(lemma_n, rng, [&](const Jump& j) {
        b = j.x_before - j.k + 1;
        return true;
      }, opts);
      return std::exp(-t_c) * static_cast<double>(b);
    });
    const Summary sl = summarize(scaled);
    rep.statistics.push_back(check_abs("lemma_mean", sl.mean, cfg.c, tolerance(rep, "lemma_relative", 0.15) * cfg.c, sl.se));
    std::sort(scaled.begin(), scaled.end());
    rep.statistics.push_back(info_stat("lemma_ks_exponential",
                                       ks_statistic(scaled, [c = cfg.c](double x) { return x <= 0 ? 0.0 : -std::expm1(-x / c); })));
  }

  // Trend of the centred maximum against the logistic law.
  if (trend_reps > 0) {
    std::vector<double> trend;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      const std::int64_t m = grid[gi];
      const double md = static_cast<double>(m);
      const double loglog = std::log(std::log(md));
      const double t_n = t_sequence(md);
      auto maxima = run_replications(trend_reps, cfg.threads, [&](std::int64_t i) {
        Rng rng(replication_seed(cfg.seed ^ kSaltTrend ^ (static_cast<std::uint64_t>(gi) << 32), static_cast<std::uint64_t>(i)));
        double last = 0.0;
        big.run_chain(m, rng, [&](const Jump& j) {
          if (j.dy > 0) last = j.t_jump;
          return true;
        });
        return loglog * (last - t_n);
      });
      std::sort(maxima.begin(), maxima.end());
      const double ks = ks_statistic(maxima, logistic_cdf);
      trend.push_back(ks);
      rep.statistics.push_back(info_stat("trend_ks_logistic_n=" + std::to_string(m), ks));
      if (gi + 1 == grid.size()) rep.curves.push_back(ecdf_curve("centred_max_n=" + std::to_string(m), maxima, logistic_cdf));
    }
    double worst_increase = 0.0;
    for (std::size_t i = 1; i < trend.size(); ++i) worst_increase = std::max(worst_increase, trend[i] - trend[i - 1]);
    rep.statistics.push_back(check_max("trend_max_increase", worst_increase, tolerance(rep, "trend_noise", 0.02)));
  }

  // Exact sampler of the limiting extremes.
  if (cox_samples > 0) {
    auto cox = run_replications(cox_samples, cfg.threads, [&](std::int64_t i) {
      Rng rng(replication_seed(cfg.seed ^ kSaltCox, static_cast<std::uint64_t>(i)));
      return sample_cox_extremes(1, rng).front();
    });
    std::sort(cox.begin(), cox.end());
    rep.statistics.push_back(check_max("cox_sampler_ks_logistic", ks_statistic(cox, logistic_cdf), tolerance(rep, "cox_ks", 0.01)));
  }
  return rep;
}

ExperimentReport run_factorial_moments(const ExperimentConfig& cfg) {
  ExperimentReport rep = start_report(cfg);
  const Setup s = make_setup(cfg, cfg.n);
  const CoalescentPath path = s.sim->simulate_path(cfg.n, cfg.seed);
  const auto x = block_counts(path);
  const double level = resolve_level(cfg.r_rule.empty() ? "n/2" : cfg.r_rule, static_cast<double>(cfg.n));
  const std::int64_t rho = stopping_times(path, std::clamp(level, 1.0, static_cast<double>(cfg.n))).rho;
  std::ostringstream chain;
  for (std::size_t i = 0; i < x.size(); ++i) chain << (i ? " " : "") << x[i];
  rep.info["chain"] = chain.str();
  rep.info["rho"] = std::to_string(rho);

  // Replay: resample the singleton decrements along the fixed chain.
  const auto y_rho = run_replications(cfg.replications, cfg.threads, [&](std::int64_t i) {
    Rng rng(replication_seed(cfg.seed ^ kSaltResample, static_cast<std::uint64_t>(i)));
    std::int64_t y = cfg.n;
    for (std::int64_t j = 0; j < rho; ++j) {
      const Jump& jump = path.jumps[static_cast<std::size_t>(j)];
      y -= sample_hypergeometric(rng, jump.x_before, y, jump.k);
    }
    return static_cast<double>(y);
  });
  const double k_se = tolerance(rep, "replay_se", 3.0);
  for (int r = 1; r <= 2; ++r) {
    std::vector<double> v;
    for (double y : y_rho) v.push_back(falling_factorial(y, r));
    const Summary sv = summarize(v);
    rep.statistics.push_back(check_se("replay_r=" + std::to_string(r), sv.mean, sv.se,
                                      conditional_factorial_moment(path, rho, r), k_se));
  }

  // Var(Y_ρ | N_n) <= E[Y_ρ | N_n] at every index of many random chains.
  const auto paths = static_cast<std::int64_t>(param(rep, "variance_paths", 1000));
  const auto violations = run_replications(paths, cfg.threads, [&](std::int64_t i) {
    const CoalescentPath p = s.sim->simulate_path(cfg.n, replication_seed(cfg.seed ^ kSaltPaths, static_cast<std::uint64_t>(i)));
    double bad = 0.0;
    for (std::int64_t j = 0; j <= p.tau(); ++j) {
      const double m1 = conditional_factorial_moment(p, j, 1);
      const double m2 = conditional_factorial_moment(p, j, 2);
      const double var = m2 + m1 - m1 * m1;
      if (var > m1 + 1e-9 * std::max(1.0, m1)) bad += 1.0;
    }
    return bad;
  });
  double total = 0.0;
  for (double v : violations) total += v;
  rep.statistics.push_back(check_max("variance_violations", total, tolerance(rep, "variance_violations", 0.5)));
  return rep;
}

ExperimentReport run_mode_equivalence(const ExperimentConfig& cfg) {
  ExperimentReport rep = start_report(cfg);
  if (cfg.n > 12) throw DomainError("labeled comparison needs n <= 12");
  const Setup s = make_setup(cfg, cfg.n);
  const auto unlabeled = run_replications(cfg.replications, cfg.threads, [&](std::int64_t i) {
    return external_lengths(s.sim->simulate_path(cfg.n, replication_seed(cfg.seed, static_cast<std::uint64_t>(i)))).values();
  });
  const auto labeled = run_replications(cfg.replications, cfg.threads, [&](std::int64_t i) {
    return s.sim->simulate_labeled(cfg.n, replication_seed(cfg.seed ^ kSaltLabeled, static_cast<std::uint64_t>(i))).lengths;
  });
  std::vector<double> a, b, first, second;
  for (const auto& v : unlabeled) a.insert(a.end(), v.begin(), v.end());
  for (const auto& v : labeled) {
    b.insert(b.end(), v.begin(), v.end());
    first.push_back(v[0]);
    second.push_back(v[1]);
  }
  for (auto* v : {&a, &b, &first, &second}) std::sort(v->begin(), v->end());
  rep.statistics.push_back(check_max("ks_unlabeled_vs_labeled", ks_two_sample(a, b), tolerance(rep, "ks_modes", 0.02)));
  rep.statistics.push_back(info_stat("ks_leaf1_vs_leaf2", ks_two_sample(first, second)));
  return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport rep;
  const std::string& tag = cfg.theorem;
  if (tag == "T1.1" || tag == "T1.3" || tag == "C1.4") {
    rep = run_typical_length(cfg);
  } else if (tag == "T1.2") {
    rep = run_independence(cfg);
  } else if (tag == "T4.1") {
    rep = run_tail_identity(cfg);
  } else if (tag == "P2.1" || tag == "P2.2") {
    rep = run_lln(cfg);
  } else if (tag == "T1.5") {
    rep = run_order_statistics(cfg);
  } else if (tag == "T1.6" || tag == "L9.2") {
    rep = run_bs_extremes(cfg);
  } else if (tag == "L7.1") {
    rep = run_factorial_moments(cfg);
  } else if (tag == "SIM") {
    rep = run_mode_equivalence(cfg);
  } else {
    throw DomainError("unknown theorem tag '" + tag + "'");
  }
  rep.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace coalsim
