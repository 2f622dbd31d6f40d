// Acceptance runner: one PASS/FAIL line per criterion.
// Usage: coalsim_acceptance [criterion ...]   (1..12, default all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "coalsim/cli.hpp"
#include "coalsim/experiments.hpp"
#include "coalsim/limits.hpp"
#include "coalsim/quadrature.hpp"
#include "coalsim/rates.hpp"
#include "coalsim/stats.hpp"

using namespace coalsim;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double rel_err(double got, double want) { return std::abs(got - want) / std::max(1e-300, std::abs(want)); }

// Checked statistics named in `names` must exist and pass.
void require_stats(Outcome& o, const ExperimentReport& rep, const std::string& prefix,
                   const std::vector<std::string>& names) {
  for (const auto& name : names) {
    const auto it = std::find_if(rep.statistics.begin(), rep.statistics.end(),
                                 [&](const Statistic& s) { return s.name == name; });
    if (it == rep.statistics.end()) {
      o.require(false, prefix + name + " missing");
      continue;
    }
    std::string what = prefix + name + "=" + fmt(it->value);
    if (it->target) what += " (target " + fmt(*it->target) + ")";
    o.require(it->pass.value_or(false), what);
  }
}

ExperimentConfig config(const std::string& tag, const std::string& measure, std::int64_t n, std::int64_t reps) {
  ExperimentConfig cfg;
  cfg.theorem = tag;
  cfg.measure = measure;
  cfg.n = n;
  cfg.replications = reps;
  return cfg;
}

double log_factorial(double k) { return std::lgamma(k + 1.0); }

Outcome exact_rates() {
  Outcome o;
  RatesConfig rc;
  rc.use_closed_forms = false;
  rc.build_mu_cache = false;
  const RateFunctions bs(LambdaMeasure::bolthausen_sznitman(), rc);
  double worst = 0.0, worst_total = 0.0;
  for (std::int64_t b = 2; b <= 30; ++b) {
    for (std::int64_t k = 2; k <= b; ++k) {
      const double want = std::exp(log_factorial(k - 2) + log_factorial(b - k) - log_factorial(b - 1));
      worst = std::max(worst, rel_err(bs.merger_rate(b, k), want));
    }
    worst_total = std::max(worst_total, rel_err(bs.total_jump_rate(b), b - 1.0));
  }
  o.require(worst <= 1e-9, "max rel err lambda_bk " + fmt(worst));
  o.require(worst_total <= 1e-9, "max rel err total rate " + fmt(worst_total));
  return o;
}

Outcome mu_consistency() {
  Outcome o;
  for (const char* spec : {"kingman", "bolthausen-sznitman", "powerbeta:c=1,a=0.5,b=1"}) {
    const RateFunctions r(parse_measure(spec));
    double worst = 0.0;
    for (std::int64_t b = 2; b <= 50; ++b) {
      double sum = 0.0;
      for (std::int64_t k = 2; k <= b; ++k) {
        const double binom = std::exp(log_factorial(b) - log_factorial(k) - log_factorial(b - k));
        sum += (k - 1.0) * binom * r.merger_rate(b, k);
      }
      worst = std::max(worst, rel_err(r.mu(static_cast<double>(b)), sum));
    }
    double worst_d = 0.0;
    for (double x : {2.0, 10.0, 100.0}) {
      const double h = 1e-3 * x;
      const double fd = (r.mu(x + h) - r.mu(x - h)) / (2.0 * h);
      worst_d = std::max(worst_d, rel_err(r.mu_derivatives(x).first, fd));
    }
    o.require(worst <= 1e-8, std::string(spec) + " mu sum " + fmt(worst));
    o.require(worst_d <= 1e-6, std::string(spec) + " mu' " + fmt(worst_d));
  }
  return o;
}

Outcome regular_variation() {
  Outcome o;
  const RateFunctions k(LambdaMeasure::kingman());
  const RateFunctions pb(LambdaMeasure::power_beta(1.0, 0.5, 1.0));
  const RateFunctions bs(LambdaMeasure::bolthausen_sznitman());
  const double ak = k.rv_exponent_estimate(1e3, 1e6);
  const double apb = pb.rv_exponent_estimate(1e3, 1e6);
  o.require(std::abs(ak - 2.0) <= 0.02, "kingman alpha " + fmt(ak));
  o.require(std::abs(apb - 1.5) <= 0.03, "powerbeta alpha " + fmt(apb));
  const double x = 1e6;
  auto ratio = [x](const RateFunctions& r, double alpha) {
    return r.mu(x) / (std::tgamma(3.0 - alpha) * x * x * r.H(1.0 / x));
  };
  const double rb = ratio(bs, 1.0);
  const double rp = ratio(pb, 1.5);
  o.require(rb >= 0.9 && rb <= 1.1, "BS H ratio " + fmt(rb));
  o.require(rp >= 0.9 && rp <= 1.1, "powerbeta H ratio " + fmt(rp));
  return o;
}

Outcome typical_length() {
  Outcome o;
  struct Case {
    const char* measure;
    std::int64_t n;
  };
  for (const Case c : {Case{"kingman", 5000}, Case{"bolthausen-sznitman", 10000}, Case{"powerbeta:c=1,a=0.5,b=1", 10000}}) {
    const ExperimentReport rep = run_experiment(config("C1.4", c.measure, c.n, 10000));
    require_stats(o, rep, std::string(c.measure) + " ", {"ks"});
  }
  return o;
}

Outcome tail_identity() {
  Outcome o;
  auto cfg = config("T4.1", "kingman:2", 2000, 10000);
  cfg.r_rule = "n/2";
  require_stats(o, run_experiment(cfg), "", {"exceedance", "envelope_lower", "envelope_upper"});
  return o;
}

Outcome laws_of_large_numbers() {
  Outcome o;
  auto cfg = config("P2.1", "kingman", 10000, 200);
  cfg.r_rule = "100";
  require_stats(o, run_experiment(cfg), "", {"rho_tilde_ratio", "inverse_block_sum"});
  return o;
}

Outcome factorial_moments() {
  Outcome o;
  auto cfg = config("L7.1", "kingman", 8, 100000);
  cfg.params["variance_paths"] = 1000;
  const ExperimentReport rep = run_experiment(cfg);
  std::vector<std::string> names;
  for (const auto& s : rep.statistics) {
    if (s.pass) names.push_back(s.name);
  }
  require_stats(o, rep, "", names);
  return o;
}

Outcome extremes_frechet() {
  Outcome o;
  for (const char* m : {"kingman", "powerbeta:c=1,a=0.5,b=1"}) {
    require_stats(o, run_experiment(config("T1.5", m, 100000, 2000)), std::string(m) + " ",
                  {"ks_max_frechet", "count_mean_x=1", "count_variance_x=1"});
  }
  return o;
}

Outcome bs_exactness() {
  Outcome o;
  auto cfg = config("T1.6", "bolthausen-sznitman", 10000, 20000);
  cfg.t_grid = {0.25, 0.5, 1.0};
  cfg.c = 2.0;
  cfg.params = {{"lemma_n", 1e6}, {"lemma_reps", 2000}, {"trend_reps", 0}, {"cox_samples", 0}};
  require_stats(o, run_experiment(cfg), "", {"moehle_r=1_t=0.25", "moehle_r=1_t=0.5", "moehle_r=1_t=1", "lemma_mean"});
  return o;
}

Outcome cox_limit_properties() {
  Outcome o;
  QuadratureConfig qc;
  qc.rel_tol = 1e-13;
  qc.abs_tol = 1e-16;
  double worst_g = 0.0, worst_l = 0.0, worst_c = 0.0;
  for (double x = -4.0; x <= 6.0; x += 0.5) {
    const auto g = adaptive_integrate([](double u) { return std::exp(-u - std::exp(-u)); }, std::min(x, 0.0) - 5.0, x, qc).value;
    worst_g = std::max(worst_g, std::abs(gumbel_cdf(x) - g));
    const auto l = adaptive_integrate([](double u) { return std::exp(-u) / ((1 + std::exp(-u)) * (1 + std::exp(-u))); },
                                      x - 60.0, x, qc)
                       .value;
    worst_l = std::max(worst_l, std::abs(logistic_cdf(x) - l));
    const double ex = std::exp(-x);
    const auto c = adaptive_integrate([ex](double y) { return std::exp(-y * ex - y); }, 0.0, 80.0, qc).value;
    worst_c = std::max(worst_c, std::abs(cox_max_cdf(x) - c));
  }
  o.require(worst_g <= 1e-9, "gumbel " + fmt(worst_g));
  o.require(worst_l <= 1e-9, "logistic " + fmt(worst_l));
  o.require(worst_c <= 1e-9, "cox max " + fmt(worst_c));

  auto cfg = config("T1.6", "bolthausen-sznitman", 1000, 100);
  cfg.params = {{"lemma_reps", 0}, {"trend_reps", 2000}, {"cox_samples", 100000}};
  const ExperimentReport rep = run_experiment(cfg);
  for (const auto& s : rep.statistics) {
    if (s.name.rfind("trend_ks_logistic", 0) == 0) o.detail += "; " + s.name + "=" + fmt(s.value);
  }
  require_stats(o, rep, "", {"cox_sampler_ks_logistic", "trend_max_increase"});
  return o;
}

Outcome simulator_modes() {
  Outcome o;
  for (const char* m : {"kingman", "bolthausen-sznitman"}) {
    require_stats(o, run_experiment(config("SIM", m, 6, 10000)), std::string(m) + " ", {"ks_unlabeled_vs_labeled"});
  }
  return o;
}

Outcome determinism() {
  Outcome o;
  const std::vector<std::string> base{"experiment", "--theorem", "T1.2", "--measure", "bolthausen-sznitman",
                                      "--n", "500", "--reps", "1000", "--k", "3", "--seed", "5"};
  auto run = [&](const char* threads) {
    auto args = base;
    args.insert(args.end(), {"--threads", threads});
    std::ostringstream out, err;
    run_cli(args, out, err);
    return out.str();
  };
  const std::string a = run("1");
  const std::string b = run("1");
  const std::string c = run("4");
  o.require(!a.empty() && a == b, "repeat identical");
  o.require(a == c, "threads 1 vs 4 identical");
  return o;
}

struct Criterion {
  const char* label;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {"exact_rates", exact_rates},
      {"mu_consistency", mu_consistency},
      {"regular_variation", regular_variation},
      {"typical_length", typical_length},
      {"tail_identity", tail_identity},
      {"laws_of_large_numbers", laws_of_large_numbers},
      {"factorial_moments", factorial_moments},
      {"extremes_frechet", extremes_frechet},
      {"bs_exactness", bs_exactness},
      {"cox_limit_properties", cox_limit_properties},
      {"simulator_modes", simulator_modes},
      {"determinism", determinism},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > static_cast<int>(all.size())) {
      std::fprintf(stderr, "unknown criterion %s\n", argv[i]);
      return 2;
    }
    selected.push_back(k);
  }
  if (selected.empty()) {
    for (int k = 1; k <= static_cast<int>(all.size()); ++k) selected.push_back(k);
  }

  int failures = 0;
  for (int k : selected) {
    const Criterion& c = all[static_cast<std::size_t>(k - 1)];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2d %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", k, c.label, secs, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
