#pragma once

// Monte Carlo risk estimation: Type I + worst-case Type II with
// deterministic per-replication streams, exponent fits across p-grids and
// the scan / HC / Max comparison.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "sparse_testbench/decision.hpp"
#include "sparse_testbench/design.hpp"
#include "sparse_testbench/error.hpp"
#include "sparse_testbench/numeric.hpp"
#include "sparse_testbench/random.hpp"
#include "sparse_testbench/signal.hpp"
#include "sparse_testbench/statistics.hpp"
#include "sparse_testbench/theory.hpp"

namespace sparse_testbench {

inline constexpr std::int64_t kMinReps = 100;
inline constexpr std::size_t kCandidateCount = 3;

/// Worker count for a request; 0 means every hardware thread.
inline unsigned resolve_threads(int requested) {
  if (requested < 0) throw DomainError("thread count must be >= 0");
  if (requested > 0) return static_cast<unsigned>(requested);
  return std::max(1U, std::thread::hardware_concurrency());
}

/// SPARSE_TESTBENCH_THREADS, or 0 when unset.
inline int threads_from_env() {
  const char* raw = std::getenv("SPARSE_TESTBENCH_THREADS");
  if (!raw || !*raw) return 0;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (*end != '\0' || v < 0 || v > 4096) {
    throw ConfigError("SPARSE_TESTBENCH_THREADS must be an integer in [0, 4096]");
  }
  return static_cast<int>(v);
}

struct RiskOptions {
  int threads = 0;  // 0 = all cores
  /// Run orthogonal designs through the full X, y path instead of sampling
  /// the sufficient statistic z ~ N(sqrt(n) beta, I) directly.
  bool materialize_orthogonal = false;
  /// Prior for type2_bayes; by default signed below the dense boundary,
  /// one-directional elsewhere.
  std::optional<SignMode> prior_sign_mode;
};

/// One error rate with its 95% Wilson half-width.
struct Rate {
  std::int64_t count = 0;
  std::int64_t trials = 0;
  double value = 0.0;
  double ci_halfwidth = 0.0;
  double stderr_ = 0.0;

  static Rate of(std::int64_t count, std::int64_t trials) {
    Rate r;
    r.count = count;
    r.trials = trials;
    r.value = trials ? static_cast<double>(count) / static_cast<double>(trials) : 0.0;
    r.ci_halfwidth = wilson_halfwidth(static_cast<std::uint64_t>(count),
                                      static_cast<std::uint64_t>(trials));
    r.stderr_ = r.ci_halfwidth / kZ95;
    return r;
  }
};

/// Risk estimate of one test at one p. The worst-case Type II error is taken
/// over a finite set of alternatives, so `risk` estimates a lower bound on
/// the supremum over the whole alternative space.
struct RiskEstimate {
  std::string test_label;
  TestName test = TestName::chisq_center;
  ResolvedRegime regime;
  DesignFamily design_family = DesignFamily::orthogonal;
  SignMode prior_sign_mode = SignMode::one_directional;
  std::int64_t reps = 0;
  std::uint64_t seed = 0;

  Rate type1;
  Rate type2_bayes;
  std::array<Rate, kCandidateCount> type2_candidates{};
  Rate type2_worst_candidate;
  std::size_t worst_candidate = 0;

  double risk = 0.0;     // type1 + max(type2_bayes, type2_worst_candidate)
  double risk_se = 0.0;  // sqrt(se(type1)^2 + se(chosen type2)^2)
  std::vector<std::string> warnings;
};

/// Fixed candidate alternatives: +A on {0..s-1}; alternating signs on
/// {0..s-1}; +A on the evenly spread support {floor(k p / s)}.
inline std::array<Signal, kCandidateCount> candidate_signals(const ResolvedRegime& regime) {
  const auto p = static_cast<std::size_t>(regime.p);
  const auto s = static_cast<std::size_t>(regime.s);
  std::vector<std::size_t> leading(s), spread(s);
  std::vector<int> plus(s, 1), alternating(s);
  for (std::size_t k = 0; k < s; ++k) {
    leading[k] = k;
    spread[k] = k * p / s;
    alternating[k] = (k % 2 == 0) ? 1 : -1;
  }
  return {make_signal(p, leading, regime.amplitude, plus),
          make_signal(p, leading, regime.amplitude, alternating),
          make_signal(p, spread, regime.amplitude, plus)};
}

inline SignMode default_prior_sign_mode(const RegimeSpec& regime) {
  return classify_regime(regime).regime_label == RegimeLabel::below_dense
             ? SignMode::symmetric_signed
             : SignMode::one_directional;
}

namespace detail {

// Scenario tags within a replication.
inline constexpr std::uint64_t kNullScenario = 0;
inline constexpr std::uint64_t kBayesScenario = 1;
inline constexpr std::uint64_t kFirstCandidate = 2;

struct Counts {
  std::int64_t rejects_null = 0;
  std::int64_t accepts_bayes = 0;
  std::array<std::int64_t, kCandidateCount> accepts_candidate{};
};

/// z ~ N(sqrt(n) beta, I_p): the exact law of the whitened vector for an
/// orthogonal design, independent of X.
inline ProjectedData sample_orthogonal(const ResolvedRegime& regime, const Signal* beta,
                                       std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd z(regime.p);
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = gauss(rng);
  if (beta) z.noalias() += std::sqrt(static_cast<double>(regime.n)) * beta->coords;
  return project_isotropic(std::move(z), regime.n);
}

}  // namespace detail

/// Estimates the risk of each test at dimension p. Replication i draws its
/// design, its prior alternative and every noise vector from streams derived
/// from (seed, i), so the result does not depend on the worker count.
inline std::vector<RiskEstimate> estimate_risks(const std::vector<TestSpec>& tests,
                                                const RegimeSpec& regime, double p,
                                                std::int64_t reps, std::uint64_t seed,
                                                DesignFamily family,
                                                const RiskOptions& options = {}) {
  if (reps < kMinReps) throw DomainError("estimate_risk needs reps >= 100");
  if (tests.empty()) throw DomainError("estimate_risk needs at least one test");
  const ResolvedRegime resolved = resolve_regime(regime, p);
  for (const auto& t : tests) {
    if (!(t.regime.spec == regime) || t.regime.p != resolved.p) {
      throw DomainError("test '" + t.label + "' was built for a different regime or p");
    }
  }
  const SignMode sign_mode = options.prior_sign_mode.value_or(default_prior_sign_mode(regime));
  const PriorSpec prior{static_cast<std::size_t>(resolved.p), static_cast<std::size_t>(resolved.s),
                        resolved.amplitude, sign_mode};
  const auto candidates = candidate_signals(resolved);
  const bool fast_path = family == DesignFamily::orthogonal && !options.materialize_orthogonal;

  auto run_replication = [&](std::int64_t i, std::vector<detail::Counts>& counts) {
    const std::uint64_t rep_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    const Signal bayes = draw_prior(prior, derive_seed(rep_seed, stream::kPrior));

    std::optional<DesignMatrix> design;
    std::optional<GramFactorization> gram;
    if (!fast_path) {
      design = generate_design(family, resolved.n, resolved.p, derive_seed(rep_seed, stream::kDesign));
      gram = gram_factorize(*design);
    }
    auto data_for = [&](const Signal* beta, std::uint64_t scenario) {
      const std::uint64_t noise_seed = derive_seed(rep_seed, scenario);
      if (fast_path) return detail::sample_orthogonal(resolved, beta, noise_seed);
      return project(simulate(*design, beta, noise_seed), *gram);
    };

    const ProjectedData null_data = data_for(nullptr, detail::kNullScenario);
    for (std::size_t t = 0; t < tests.size(); ++t) {
      counts[t].rejects_null += decide(tests[t], null_data).reject ? 1 : 0;
    }
    const ProjectedData bayes_data = data_for(&bayes, detail::kBayesScenario);
    for (std::size_t t = 0; t < tests.size(); ++t) {
      counts[t].accepts_bayes += decide(tests[t], bayes_data).reject ? 0 : 1;
    }
    for (std::size_t c = 0; c < kCandidateCount; ++c) {
      const ProjectedData alt = data_for(&candidates[c], detail::kFirstCandidate + c);
      for (std::size_t t = 0; t < tests.size(); ++t) {
        counts[t].accepts_candidate[c] += decide(tests[t], alt).reject ? 0 : 1;
      }
    }
  };

  const unsigned workers =
      std::min<std::int64_t>(resolve_threads(options.threads), reps);
  std::vector<std::vector<detail::Counts>> partial(workers,
                                                   std::vector<detail::Counts>(tests.size()));
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      const std::int64_t begin = reps * w / workers;
      const std::int64_t end = reps * (w + 1) / workers;
      pool.emplace_back([&, w, begin, end] {
        try {
          for (std::int64_t i = begin; i < end; ++i) run_replication(i, partial[w]);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<RiskEstimate> out;
  out.reserve(tests.size());
  for (std::size_t t = 0; t < tests.size(); ++t) {
    detail::Counts total;
    for (const auto& part : partial) {
      total.rejects_null += part[t].rejects_null;
      total.accepts_bayes += part[t].accepts_bayes;
      for (std::size_t c = 0; c < kCandidateCount; ++c) {
        total.accepts_candidate[c] += part[t].accepts_candidate[c];
      }
    }
    RiskEstimate est;
    est.test_label = tests[t].label;
    est.test = tests[t].name;
    est.regime = resolved;
    est.design_family = family;
    est.prior_sign_mode = sign_mode;
    est.reps = reps;
    est.seed = seed;
    est.warnings = tests[t].warnings;
    est.type1 = Rate::of(total.rejects_null, reps);
    est.type2_bayes = Rate::of(total.accepts_bayes, reps);
    for (std::size_t c = 0; c < kCandidateCount; ++c) {
      est.type2_candidates[c] = Rate::of(total.accepts_candidate[c], reps);
      if (total.accepts_candidate[c] > total.accepts_candidate[est.worst_candidate]) {
        est.worst_candidate = c;
      }
    }
    est.type2_worst_candidate = est.type2_candidates[est.worst_candidate];
    const Rate& type2 = est.type2_bayes.count > est.type2_worst_candidate.count
                            ? est.type2_bayes
                            : est.type2_worst_candidate;
    est.risk = est.type1.value + type2.value;
    est.risk_se = std::hypot(est.type1.stderr_, type2.stderr_);
    out.push_back(std::move(est));
  }
  return out;
}

inline RiskEstimate estimate_risk(const TestSpec& test, const RegimeSpec& regime, double p,
                                  std::int64_t reps, std::uint64_t seed, DesignFamily family,
                                  const RiskOptions& options = {}) {
  return estimate_risks({test}, regime, p, reps, seed, family, options).front();
}

inline RiskEstimate estimate_risk(const TestRequest& test, const RegimeSpec& regime, double p,
                                  std::int64_t reps, std::uint64_t seed, DesignFamily family,
                                  const RiskOptions& options = {}) {
  return estimate_risk(build_test(test, regime, p), regime, p, reps, seed, family, options);
}

// --- exponent fits ---------------------------------------------------------

struct FitPoint {
  double p = 0.0;
  double s = 1.0;
  double risk = 0.0;
  std::int64_t reps = 0;  // 0 = exact value, no censoring possible
};

struct ExponentFit {
  struct Point {
    double p = 0.0;
    double x = 0.0;  // normalizer
    double y = 0.0;  // log risk, log(1 - risk) or risk
    bool censored = false;
  };
  std::vector<Point> points;
  Scale scale = Scale::log_p;
  Side side = Side::log_risk;
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
  bool censored = false;
};

/// Value of the normalizer at (p, s). `delta` is used by the p^(2 delta) and
/// p^(1/2 + delta) scales. Scale::none falls back to log p.
inline double normalizer(Scale scale, double p, double s, double delta) {
  switch (scale) {
    case Scale::log_p: return std::log(p);
    case Scale::p_2delta: return std::pow(p, 2.0 * delta);
    case Scale::p_half_plus_delta: return std::pow(p, 0.5 + delta);
    case Scale::s_log_p: return s * std::log(p);
    case Scale::none: return std::log(p);
  }
  return std::log(p);
}

/// Least-squares line (with intercept) of the transformed risk against the
/// normalizer. A log transform of 0 replaces the value by 1/(2 reps) and
/// flags the point as censored.
inline ExponentFit fit_exponent(std::span<const FitPoint> series, Side side, Scale scale,
                                double delta = 0.0) {
  if (series.size() < 3) throw DomainError("fit_exponent needs at least 3 points");
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (!(series[i].p > series[i - 1].p)) {
      throw DomainError("fit_exponent needs strictly increasing p");
    }
  }
  ExponentFit fit;
  fit.scale = scale;
  fit.side = side;
  for (const auto& pt : series) {
    ExponentFit::Point q;
    q.p = pt.p;
    q.x = normalizer(scale, pt.p, pt.s, delta);
    double v = side == Side::log_one_minus_risk ? 1.0 - pt.risk : pt.risk;
    if (side != Side::risk_itself) {
      if (!(v > 0.0)) {
        if (pt.reps <= 0) throw DomainError("fit_exponent: log of a nonpositive exact value");
        v = 1.0 / (2.0 * static_cast<double>(pt.reps));
        q.censored = true;
        fit.censored = true;
      }
      v = std::log(v);
    }
    q.y = v;
    fit.points.push_back(q);
  }
  const double m = static_cast<double>(fit.points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& q : fit.points) mx += q.x, my += q.y;
  mx /= m, my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& q : fit.points) {
    sxx += (q.x - mx) * (q.x - mx);
    sxy += (q.x - mx) * (q.y - my);
    syy += (q.y - my) * (q.y - my);
  }
  if (!(sxx > 0.0)) throw DomainError("fit_exponent: normalizer is constant across the series");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (const auto& q : fit.points) {
    const double e = q.y - (fit.intercept + fit.slope * q.x);
    sse += e * e;
  }
  fit.slope_stderr = std::sqrt(sse / (m - 2.0) / sxx);
  fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return fit;
}

inline ExponentFit fit_exponent(const std::vector<RiskEstimate>& series, Side side, Scale scale) {
  std::vector<FitPoint> pts;
  pts.reserve(series.size());
  for (const auto& e : series) {
    pts.push_back({static_cast<double>(e.regime.p), static_cast<double>(e.regime.s), e.risk,
                   e.reps});
  }
  const double delta = series.empty() ? 0.0 : series.front().regime.spec.delta;
  return fit_exponent(pts, side, scale, delta);
}

// --- scan vs HC vs Max -----------------------------------------------------

inline constexpr std::array<double, 5> kHcCutoffMultipliers = {0.25, 0.5, 1.0, 2.0, 4.0};
inline constexpr std::array<double, 12> kMaxCutoffLevels = {0.5,  0.75, 1.0, 1.25, 1.5, 1.75,
                                                            2.0,  2.25, 2.5, 3.0,  3.5, 4.0};

struct ComparisonOverrides {
  std::optional<double> scan_cutoff;
  std::optional<double> hc_cutoff;
  std::optional<double> max_cutoff;
};

struct ComparisonReport {
  RiskEstimate scan;
  std::vector<RiskEstimate> hc;   // one per HC cutoff
  std::vector<RiskEstimate> max;  // one per Max cutoff
  std::size_t best_hc = 0;
  std::size_t best_max = 0;
  double optimal_exponent = 0.0;  // -(r-alpha)^2/(4r)
  /// log(risk) / (s log p), with 0 risks censored at 1/(2 reps).
  double scan_ratio = 0.0, hc_ratio = 0.0, max_ratio = 0.0;
  /// (inf risk - scan risk) / combined standard error.
  double hc_gap_se = 0.0, max_gap_se = 0.0;
  bool degenerate = false;  // no test beats the trivial risk of 1

  const RiskEstimate& inf_hc() const { return hc[best_hc]; }
  const RiskEstimate& inf_max() const { return max[best_max]; }
};

/// Scan test against the infimum over cutoff grids of ideal HC and Max.
inline ComparisonReport compare_tests(const RegimeSpec& regime, double p, std::int64_t reps,
                                      std::uint64_t seed,
                                      DesignFamily family = DesignFamily::orthogonal,
                                      const RiskOptions& options = {},
                                      const ComparisonOverrides& overrides = {}) {
  if (regime.mode != SignalMode::sparse_r) throw DomainError("compare_tests needs a sparse_r regime");
  if (!(regime.alpha > 0.5)) throw DomainError("compare_tests needs alpha > 1/2");
  if (!(regime.r > regime.alpha)) throw DomainError("compare_tests needs r > alpha");
  const ResolvedRegime resolved = resolve_regime(regime, p);
  const double s = static_cast<double>(resolved.s);

  std::vector<TestRequest> requests;
  TestRequest scan{TestName::scan_taustar, {}, std::nullopt, {}};
  if (overrides.scan_cutoff) scan.params["cutoff"] = *overrides.scan_cutoff;
  requests.push_back(scan);
  for (double c : kHcCutoffMultipliers) {
    TestRequest hc{TestName::hc_ideal, {{"t", std::ceil(c * s)}}, std::nullopt, {}};
    if (overrides.hc_cutoff) hc.params["cutoff"] = *overrides.hc_cutoff;
    requests.push_back(hc);
  }
  for (double c : kMaxCutoffLevels) {
    TestRequest mx{TestName::max_free, {{"t", std::sqrt(2.0 * c * resolved.log_p)}}, std::nullopt,
                   {}};
    if (overrides.max_cutoff) mx.params["cutoff"] = *overrides.max_cutoff;
    requests.push_back(mx);
  }
  std::vector<TestSpec> specs;
  specs.reserve(requests.size());
  for (const auto& r : requests) specs.push_back(build_test(r, resolved));
  auto estimates = estimate_risks(specs, regime, p, reps, seed, family, options);

  ComparisonReport out;
  out.scan = estimates[0];
  const std::size_t hc_n = kHcCutoffMultipliers.size();
  out.hc.assign(estimates.begin() + 1, estimates.begin() + 1 + static_cast<std::ptrdiff_t>(hc_n));
  out.max.assign(estimates.begin() + 1 + static_cast<std::ptrdiff_t>(hc_n), estimates.end());
  auto argmin = [](const std::vector<RiskEstimate>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (v[i].risk < v[best].risk) best = i;
    }
    return best;
  };
  out.best_hc = argmin(out.hc);
  out.best_max = argmin(out.max);
  out.optimal_exponent = -(regime.r - regime.alpha) * (regime.r - regime.alpha) / (4.0 * regime.r);

  const double s_log_p = s * resolved.log_p;
  auto ratio = [&](const RiskEstimate& e) {
    const double v = e.risk > 0.0 ? e.risk : 1.0 / (2.0 * static_cast<double>(e.reps));
    return std::log(v) / s_log_p;
  };
  out.scan_ratio = ratio(out.scan);
  out.hc_ratio = ratio(out.inf_hc());
  out.max_ratio = ratio(out.inf_max());
  out.hc_gap_se = (out.inf_hc().risk - out.scan.risk) / std::hypot(out.inf_hc().risk_se, out.scan.risk_se);
  out.max_gap_se =
      (out.inf_max().risk - out.scan.risk) / std::hypot(out.inf_max().risk_se, out.scan.risk_se);
  out.degenerate = out.scan.risk >= 1.0 && out.inf_hc().risk >= 1.0 && out.inf_max().risk >= 1.0;
  return out;
}

}  // namespace sparse_testbench
