#pragma once

// Independent verifiers for the probability inequalities the analysis rests
// on, and a brute-force reference for the integrated likelihood ratio.
// Every check takes a `bound_scale` that multiplies the bound under test;
// 1 is the inequality as stated, 0 forces failures.

#include <Eigen/Dense>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "sparse_testbench/error.hpp"
#include "sparse_testbench/numeric.hpp"
#include "sparse_testbench/random.hpp"
#include "sparse_testbench/signal.hpp"

namespace sparse_testbench {

struct LemmaCheckResult {
  std::string lemma_id;
  std::string grid;
  std::int64_t points = 0;
  std::int64_t violations = 0;
  double max_slack = std::numeric_limits<double>::infinity();  // smallest bound - value
  double tolerance = 0.0;
  std::string worst_point;  // point with the smallest slack, or the first violation
  std::vector<std::string> notes;

  bool passed() const { return violations == 0; }
};

namespace detail {

/// Collects value <= bound assertions.
class BoundTally {
 public:
  BoundTally(std::string id, std::string grid, double tolerance) {
    result_.lemma_id = std::move(id);
    result_.grid = std::move(grid);
    result_.tolerance = tolerance;
  }

  void check(double value, double bound, const std::string& where) {
    ++result_.points;
    const double slack = bound - value;
    const bool bad = !(value <= bound + result_.tolerance);
    if (bad) {
      if (result_.violations == 0) result_.worst_point = where;
      ++result_.violations;
    }
    if (slack < result_.max_slack || std::isnan(slack)) {
      result_.max_slack = slack;
      if (result_.violations == 0) result_.worst_point = where;
    }
  }

  /// |a - b| <= tol, counted as a point of the same check.
  void agree(double a, double b, double tol, const std::string& where) {
    ++result_.points;
    if (!(std::abs(a - b) <= tol)) {
      if (result_.violations == 0) result_.worst_point = where + " (disagreement)";
      ++result_.violations;
    }
  }

  void note(std::string text) { result_.notes.push_back(std::move(text)); }
  LemmaCheckResult done() && { return std::move(result_); }

 private:
  LemmaCheckResult result_;
};

inline std::string point(std::initializer_list<std::pair<const char*, double>> kv) {
  std::ostringstream os;
  os.precision(6);
  bool first = true;
  for (const auto& [k, v] : kv) {
    os << (first ? "" : ", ") << k << '=' << v;
    first = false;
  }
  return os.str();
}

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

template <typename F>
double integrate(F f, double a, double b, double rel_tol = 1e-12) {
  double error = 0.0;
  double l1 = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, rel_tol, &error, &l1);
  if (!(error <= std::max(10.0 * rel_tol * l1, 1e-11))) {
    std::ostringstream msg;
    msg << "quadrature did not converge on [" << a << ", " << b << "] (error estimate " << error
        << ", L1 " << l1 << ")";
    throw Error(msg.str());
  }
  return value;
}

}  // namespace detail

// --- chi-square tails ------------------------------------------------------

struct ChisqGrid {
  std::vector<double> dof = {1, 2, 3, 5, 10, 30, 100};
  std::vector<double> x = {0.01, 0.1, 0.5, 1, 2, 5, 10, 20};
  std::vector<double> noncentrality = {0.5, 2, 10, 50};
  std::int64_t mc_samples = 1'000'000;
  std::uint64_t seed = 20240611;
};

/// P[chi2_k(nu) > t] and P[chi2_k(nu) <= t]; nu = 0 is the central law.
inline double chisq_sf(double k, double nu, double t) {
  if (t <= 0.0) return 1.0;
  if (nu == 0.0) return boost::math::cdf(boost::math::complement(boost::math::chi_squared(k), t));
  return boost::math::cdf(
      boost::math::complement(boost::math::non_central_chi_squared(k, nu), t));
}

inline double chisq_cdf(double k, double nu, double t) {
  if (t <= 0.0) return 0.0;
  if (nu == 0.0) return boost::math::cdf(boost::math::chi_squared(k), t);
  return boost::math::cdf(boost::math::non_central_chi_squared(k, nu), t);
}

/// Upper and lower central tail bounds (Laurent-Massart form).
inline LemmaCheckResult check_chisq_tails(const ChisqGrid& grid = {}, double bound_scale = 1.0) {
  detail::BoundTally tally("chisq_conc", "k x x grid, central", 1e-12);
  for (double k : grid.dof) {
    for (double x : grid.x) {
      const double bound = bound_scale * std::exp(-x);
      const double upper = chisq_sf(k, 0.0, k + 2.0 * std::sqrt(k * x) + 2.0 * x);
      const double lower = chisq_cdf(k, 0.0, k - 2.0 * std::sqrt(k * x));
      tally.check(upper, bound, detail::point({{"k", k}, {"x", x}, {"upper", 1}}));
      tally.check(lower, bound, detail::point({{"k", k}, {"x", x}, {"lower", 1}}));
    }
  }
  // Exact tails against simulation at three points.
  Rng rng = make_rng(grid.seed);
  std::normal_distribution<double> gauss;
  for (const auto& [k, t] : {std::pair{1.0, 5.0}, std::pair{2.0, 10.0}, std::pair{5.0, 7.0}}) {
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < grid.mc_samples; ++i) {
      double acc = 0.0;
      for (int j = 0; j < static_cast<int>(k); ++j) {
        const double g = gauss(rng);
        acc += g * g;
      }
      hits += acc > t ? 1 : 0;
    }
    const double exact = chisq_sf(k, 0.0, t);
    const double se = wilson_stderr(static_cast<std::uint64_t>(hits),
                                    static_cast<std::uint64_t>(grid.mc_samples));
    tally.agree(static_cast<double>(hits) / static_cast<double>(grid.mc_samples), exact, 5.0 * se,
                detail::point({{"mc_k", k}, {"t", t}}));
  }
  auto out = std::move(tally).done();
  out.grid = std::to_string(grid.dof.size()) + " dof x " + std::to_string(grid.x.size()) +
             " x (2 tails) + 3 simulation points";
  return out;
}

/// Non-central tail bounds (Birge form): centre k + nu, variance proxy k + 2nu.
inline LemmaCheckResult check_noncentral_chisq_tails(const ChisqGrid& grid = {},
                                                     double bound_scale = 1.0) {
  detail::BoundTally tally("noncchisq_conc", "", 1e-12);
  for (double k : grid.dof) {
    for (double nu : grid.noncentrality) {
      for (double x : grid.x) {
        const double bound = bound_scale * std::exp(-x);
        const double spread = 2.0 * std::sqrt((k + 2.0 * nu) * x);
        const double upper = chisq_sf(k, nu, k + nu + spread + 2.0 * x);
        const double lower = chisq_cdf(k, nu, k + nu - spread);
        tally.check(upper, bound, detail::point({{"k", k}, {"nu", nu}, {"x", x}, {"upper", 1}}));
        tally.check(lower, bound, detail::point({{"k", k}, {"nu", nu}, {"x", x}, {"lower", 1}}));
      }
    }
  }
  Rng rng = make_rng(derive_seed(grid.seed, 1));
  std::normal_distribution<double> gauss;
  for (const auto& [k, nu, t] : {std::tuple{1.0, 2.0, 6.0}, std::tuple{3.0, 10.0, 20.0},
                                std::tuple{5.0, 0.5, 3.0}}) {
    const double shift = std::sqrt(nu);
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < grid.mc_samples; ++i) {
      double acc = 0.0;
      for (int j = 0; j < static_cast<int>(k); ++j) {
        const double g = gauss(rng) + (j == 0 ? shift : 0.0);
        acc += g * g;
      }
      hits += acc > t ? 1 : 0;
    }
    const double se = wilson_stderr(static_cast<std::uint64_t>(hits),
                                    static_cast<std::uint64_t>(grid.mc_samples));
    tally.agree(static_cast<double>(hits) / static_cast<double>(grid.mc_samples),
                chisq_sf(k, nu, t), 5.0 * se, detail::point({{"mc_k", k}, {"nu", nu}, {"t", t}}));
  }
  auto out = std::move(tally).done();
  out.grid = std::to_string(grid.dof.size()) + " dof x " + std::to_string(grid.noncentrality.size()) +
             " nu x " + std::to_string(grid.x.size()) + " x (2 tails) + 3 simulation points";
  return out;
}

// --- folded normal moments -------------------------------------------------

/// exp(l^2/2 - mu l) Phibar(l - mu) + exp(l^2/2 + mu l) Phibar(mu + l) = E[exp(-l |mu + Z|)].
inline double folded_moment_closed_form(double lambda, double mu) {
  const double h = 0.5 * lambda * lambda;
  return std::exp(h - mu * lambda) * normal_sf(lambda - mu) +
         std::exp(h + mu * lambda) * normal_sf(mu + lambda);
}

/// E[exp(-l |mu + Z|)] by adaptive Gauss-Kronrod on each side of 0.
inline double folded_moment_quadrature(double lambda, double mu) {
  const auto f = [&](double y) { return std::exp(-lambda * std::abs(y)) * normal_pdf(y - mu); };
  const double inf = std::numeric_limits<double>::infinity();
  return detail::integrate(f, -inf, 0.0) + detail::integrate(f, 0.0, inf);
}

/// Same moment by composite Simpson over [mu - 40, mu + 40], split at 0.
inline double folded_moment_simpson(double lambda, double mu, int intervals) {
  const auto f = [&](double y) { return std::exp(-lambda * std::abs(y)) * normal_pdf(y - mu); };
  const auto simpson = [&](double a, double b) {
    if (!(b > a)) return 0.0;
    const double h = (b - a) / intervals;
    double acc = f(a) + f(b);
    for (int i = 1; i < intervals; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
  };
  const double lo = mu - 40.0, hi = mu + 40.0;
  if (lo >= 0.0) return simpson(lo, hi);
  if (hi <= 0.0) return simpson(lo, hi);
  return simpson(lo, 0.0) + simpson(0.0, hi);
}

/// E[exp(l |Z|)] by quadrature.
inline double abs_normal_mgf_quadrature(double lambda) {
  const auto f = [&](double y) {
    return 2.0 * std::exp(lambda * y - 0.5 * y * y) / std::sqrt(2.0 * std::numbers::pi);
  };
  return detail::integrate(f, 0.0, std::numeric_limits<double>::infinity());
}

struct FoldedNormalGrid {
  std::vector<double> lambda = {1e-4, 0.01, 0.1, 0.5, 1, 2, 3, 5};
  std::vector<double> mu = {-3, -1, 0, 0.5, 1, 2, 5};
  int simpson_intervals = 20000;
};

/// Part 2 closed form against two quadratures, and E[e^{l|Z|}] <= 2 e^{l^2/2}.
inline LemmaCheckResult check_folded_normal(const FoldedNormalGrid& grid = {},
                                            double bound_scale = 1.0) {
  detail::BoundTally tally("folded_normal_expression", "", 1e-12);
  double worst_gap = 0.0;
  double worst_halving = 0.0;
  for (double lambda : grid.lambda) {
    if (!(lambda > 0.0)) throw DomainError("check_folded_normal needs lambda > 0");
    for (double mu : grid.mu) {
      const double closed = folded_moment_closed_form(lambda, mu);
      const double quad = folded_moment_quadrature(lambda, mu);
      const double s1 = folded_moment_simpson(lambda, mu, grid.simpson_intervals);
      const double s2 = folded_moment_simpson(lambda, mu, 2 * grid.simpson_intervals);
      worst_gap = std::max(worst_gap, std::abs(closed - quad));
      worst_halving = std::max(worst_halving, std::abs(s1 - s2));
      const auto where = detail::point({{"lambda", lambda}, {"mu", mu}});
      tally.agree(closed, quad, 1e-8, where + " closed vs quadrature");
      tally.agree(s2, quad, 1e-8, where + " simpson vs quadrature");
      tally.agree(s1, s2, 1e-10, where + " simpson step halving");
    }
    const double mgf = abs_normal_mgf_quadrature(lambda);
    tally.check(mgf, bound_scale * 2.0 * std::exp(0.5 * lambda * lambda),
                detail::point({{"lambda", lambda}, {"part", 1}}));
  }
  tally.note("max |closed - quadrature| = " + detail::sci(worst_gap));
  tally.note("max Simpson step-halving change = " + detail::sci(worst_halving));
  auto out = std::move(tally).done();
  out.grid = std::to_string(grid.lambda.size()) + " lambda x " + std::to_string(grid.mu.size()) +
             " mu (closed form) + " + std::to_string(grid.lambda.size()) + " lambda (mgf bound)";
  return out;
}

// --- hypergeometric overlap ------------------------------------------------

/// P[W = k] for W ~ Hyp(p, s, s): overlap of two independent uniform size-s
/// subsets of {1..p}.
inline double hypergeometric_pmf(std::int64_t p, std::int64_t s, std::int64_t k) {
  if (p < 1 || s < 0 || s > p) throw DomainError("hypergeometric_pmf needs 0 <= s <= p");
  if (k < 0 || k > s || s - k > p - s) return 0.0;
  const double pd = static_cast<double>(p), sd = static_cast<double>(s), kd = static_cast<double>(k);
  return std::exp(log_choose(sd, kd) + log_choose(pd - sd, sd - kd) - log_choose(pd, sd));
}

/// Whole pmf of Hyp(p, s, s) by the ratio recurrence
/// P[k+1]/P[k] = (s-k)^2 / ((k+1)(p-2s+k+1)), started from a product form.
inline std::vector<double> hypergeometric_pmf_vector(std::int64_t p, std::int64_t s) {
  if (p < 1 || s < 0 || s > p) throw DomainError("hypergeometric_pmf needs 0 <= s <= p");
  std::vector<double> out(static_cast<std::size_t>(s + 1), 0.0);
  const std::int64_t k_min = std::max<std::int64_t>(0, 2 * s - p);
  double start = 1.0;
  if (k_min == 0) {
    // C(p-s, s) / C(p, s) = prod_{i<s} (p-s-i) / (p-i).
    for (std::int64_t i = 0; i < s; ++i) start *= double(p - s - i) / double(p - i);
  } else {
    start = hypergeometric_pmf(p, s, k_min);
  }
  out[static_cast<std::size_t>(k_min)] = start;
  for (std::int64_t k = k_min; k < s; ++k) {
    const double sk = double(s - k);
    out[static_cast<std::size_t>(k + 1)] =
        out[static_cast<std::size_t>(k)] * sk * sk / (double(k + 1) * double(p - 2 * s + k + 1));
  }
  return out;
}

struct HypergeometricGrid {
  std::vector<std::int64_t> p = {4, 9, 16, 64, 256, 1024, 4096};
  std::vector<double> c = {0.25, 0.5, 1.0, 1.5, 2.0};  // s = max(1, floor(c sqrt p))
};

/// P[W=k] <= C (s^2/p)^k / k! with C = exp(2 c^2) for s <= c sqrt(p).
inline LemmaCheckResult check_hypergeometric(const HypergeometricGrid& grid = {},
                                             double bound_scale = 1.0) {
  detail::BoundTally tally("hyp_bounds", "", 1e-15);
  double fitted_c = 0.0;
  double worst_norm = 0.0;
  for (std::int64_t p : grid.p) {
    for (double c : grid.c) {
      const auto s = std::max<std::int64_t>(
          1, static_cast<std::int64_t>(std::floor(c * std::sqrt(static_cast<double>(p)))));
      if (s > p) continue;
      const double ratio = static_cast<double>(s * s) / static_cast<double>(p);
      const double c_eff = static_cast<double>(s) / std::sqrt(static_cast<double>(p));
      const double constant = std::exp(2.0 * c_eff * c_eff);
      double total = 0.0;
      const auto pmf = hypergeometric_pmf_vector(p, s);
      for (std::int64_t k = 0; k <= s; ++k) {
        const double mass = pmf[static_cast<std::size_t>(k)];
        total += mass;
        const double via_lgamma = hypergeometric_pmf(p, s, k);
        if (mass > 1e-200) {
          tally.agree(via_lgamma / mass, 1.0, 1e-9,
                      detail::point({{"p", double(p)}, {"s", double(s)}, {"k", double(k)}}) + " lgamma route");
        }
        const double envelope = std::exp(k * std::log(ratio) - std::lgamma(k + 1.0));
        if (envelope > 0.0) fitted_c = std::max(fitted_c, mass / envelope);
        tally.check(mass, bound_scale * constant * envelope,
                    detail::point({{"p", double(p)}, {"s", double(s)}, {"k", double(k)}}));
      }
      worst_norm = std::max(worst_norm, std::abs(total - 1.0));
      tally.agree(total, 1.0, 1e-12, detail::point({{"p", double(p)}, {"s", double(s)}}) + " normalization");
    }
  }
  // 1 - P[W=0] ~ s^2/p when s^2/p -> 0: report the ratio on the s = 1 column.
  std::ostringstream trend;
  trend.precision(4);
  trend << "(1 - P[W=0]) / (s^2/p) at s = ceil(p^(1/4)):";
  for (std::int64_t p : grid.p) {
    const auto s = static_cast<std::int64_t>(std::ceil(std::pow(static_cast<double>(p), 0.25)));
    trend << ' ' << (1.0 - hypergeometric_pmf_vector(p, s)[0]) * static_cast<double>(p) / double(s * s);
  }
  tally.note(trend.str());
  tally.note("fitted constant max_k P[W=k] k! / (s^2/p)^k = " + detail::sci(fitted_c));
  tally.note("max |sum pmf - 1| = " + detail::sci(worst_norm));
  auto out = std::move(tally).done();
  out.grid = std::to_string(grid.p.size()) + " p x " + std::to_string(grid.c.size()) +
             " s = c sqrt(p), all k";
  return out;
}

// --- folded normal deviations ----------------------------------------------

namespace detail {

/// Density of |m + Z| on (0, inf).
inline double folded_density(double x, double m) {
  return x <= 0.0 ? 0.0 : normal_pdf(x - m) + normal_pdf(x + m);
}

/// P[|m + Z| <= x].
inline double folded_cdf(double x, double m) {
  if (x <= 0.0) return 0.0;
  // P[a < Z < b] without cancellation for short intervals.
  const double a = -x - m, b = x - m;
  if (a >= 0.0) return normal_sf(a) - normal_sf(b);
  if (b <= 0.0) return normal_sf(-b) - normal_sf(-a);
  return 0.5 * (std::erf(b / std::numbers::sqrt2) - std::erf(a / std::numbers::sqrt2));
}

/// P[sum_{i<s} |m + Z_i| <= t] for s in {1, 2, 3} by nested quadrature.
inline double folded_sum_cdf(int s, double m, double t) {
  if (t <= 0.0) return 0.0;
  if (s == 1) return folded_cdf(t, m);
  return integrate([&](double x) { return folded_density(x, m) * folded_sum_cdf(s - 1, m, t - x); },
                   0.0, t, s == 2 ? 1e-11 : 1e-8);
}

/// P[sum_{i<s} |m + Z_i| > t] for s in {1, 2, 3}. Computed through the
/// upper tail directly so small probabilities keep their relative accuracy.
inline double folded_sum_sf(int s, double m, double t) {
  if (t <= 0.0) return 1.0;
  if (s == 1) return normal_sf(t - m) + normal_sf(t + m);
  const double inside = integrate(
      [&](double x) { return folded_density(x, m) * folded_sum_sf(s - 1, m, t - x); }, 0.0, t, s == 2 ? 1e-11 : 1e-8);
  // Mass where the first term alone already exceeds t.
  return inside + (normal_sf(t - m) + normal_sf(t + m));
}

}  // namespace detail

struct FoldedDeviationGrid {
  std::vector<int> s = {1, 2, 3};
  std::vector<double> log_p = {1.0, 2.0, std::log(100.0), std::log(1e4)};
  std::vector<double> r = {1.0, 2.0, 4.0};
  std::vector<double> tau = {0.1, 0.25, 0.5, 1.0};
  /// Larger s by simulation: (s, log p, r, tau).
  std::vector<std::array<double, 4>> simulated = {{{5, 2.0, 2.0, 0.1}, {8, 1.0, 1.0, 0.05}}};
  std::int64_t mc_samples = 1'000'000;
  std::uint64_t seed = 7;
};

/// P[sum |Z_i| > s sqrt(2 tau log p)] <= 3^s p^(-tau s) and
/// P[sum |sqrt(2 r log p) + Z_i| <= s sqrt(2 tau log p)] <= 2 p^(-(sqrt r - sqrt tau)^2 s).
inline LemmaCheckResult check_folded_deviations(const FoldedDeviationGrid& grid = {},
                                                double bound_scale = 1.0) {
  detail::BoundTally tally("folded_normal_exp", "", 1e-12);
  for (int s : grid.s) {
    if (s < 1 || s > 3) throw DomainError("exact folded deviations need s in {1, 2, 3}");
    for (double lp : grid.log_p) {
      for (double tau : grid.tau) {
        const double t = s * std::sqrt(2.0 * tau * lp);
        const double part1 = detail::folded_sum_sf(s, 0.0, t);
        tally.check(part1, bound_scale * std::pow(3.0, s) * std::exp(-tau * s * lp),
                    detail::point({{"s", double(s)}, {"log_p", lp}, {"tau", tau}, {"part", 1}}));
        for (double r : grid.r) {
          if (!(tau < r)) continue;
          const double part2 = detail::folded_sum_cdf(s, std::sqrt(2.0 * r * lp), t);
          const double gap = std::sqrt(r) - std::sqrt(tau);
          tally.check(part2, bound_scale * 2.0 * std::exp(-gap * gap * s * lp),
                      detail::point({{"s", double(s)}, {"log_p", lp}, {"r", r}, {"tau", tau}, {"part", 2}}));
        }
      }
    }
  }
  // Simulation for larger s: a violation needs the lower 3-se limit above the bound.
  Rng rng = make_rng(grid.seed);
  std::normal_distribution<double> gauss;
  for (const auto& [sd, lp, r, tau] : grid.simulated) {
    const int s = static_cast<int>(sd);
    const double t = s * std::sqrt(2.0 * tau * lp);
    const double m = std::sqrt(2.0 * r * lp);
    std::int64_t above = 0, below = 0;
    for (std::int64_t i = 0; i < grid.mc_samples; ++i) {
      double a = 0.0, b = 0.0;
      for (int j = 0; j < s; ++j) {
        const double g = gauss(rng);
        a += std::abs(g);
        b += std::abs(m + g);
      }
      above += a > t ? 1 : 0;
      below += b <= t ? 1 : 0;
    }
    const auto n = static_cast<std::uint64_t>(grid.mc_samples);
    const double est1 = static_cast<double>(above) / static_cast<double>(n);
    const double est2 = static_cast<double>(below) / static_cast<double>(n);
    tally.check(est1 - 3.0 * wilson_stderr(static_cast<std::uint64_t>(above), n),
                bound_scale * std::pow(3.0, s) * std::exp(-tau * s * lp),
                detail::point({{"mc_s", sd}, {"log_p", lp}, {"tau", tau}, {"part", 1}}));
    const double gap = std::sqrt(r) - std::sqrt(tau);
    tally.check(est2 - 3.0 * wilson_stderr(static_cast<std::uint64_t>(below), n),
                bound_scale * 2.0 * std::exp(-gap * gap * s * lp),
                detail::point({{"mc_s", sd}, {"log_p", lp}, {"r", r}, {"tau", tau}, {"part", 2}}));
  }
  auto out = std::move(tally).done();
  out.grid = "s in {1,2,3} x " + std::to_string(grid.log_p.size()) + " log p x " +
             std::to_string(grid.tau.size()) + " tau x " + std::to_string(grid.r.size()) +
             " r (quadrature) + " + std::to_string(grid.simulated.size()) + " simulated points";
  return out;
}

// --- soft max --------------------------------------------------------------

struct SoftMaxGrid {
  std::int64_t instances = 10'000;
  int max_n = 20;
  std::vector<double> m = {10, 100, 1000};
  std::uint64_t seed = 11;
};

/// |(1/M) log sum a_i e^{M x_i} - max x_i| for weights a.
inline double soft_max_gap(std::span<const double> a, std::span<const double> x, double m) {
  std::vector<double> terms(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) terms[i] = std::log(a[i]) + m * x[i];
  return std::abs(log_sum_exp(terms) / m - *std::max_element(x.begin(), x.end()));
}

/// Gap <= max(|log c|, log(C N)) / M for weights in (c, C).
inline LemmaCheckResult check_soft_max(const SoftMaxGrid& grid = {}, double bound_scale = 1.0) {
  detail::BoundTally tally("soft_max", "", 1e-12);
  {
    const double a[] = {1.0}, x[] = {0.3};
    tally.check(soft_max_gap(a, x, 10.0), bound_scale * std::log(1.0) / 10.0, "N=1, a=1");
    const double a2[] = {1.0, 1.0}, x2[] = {0.0, 0.0};
    tally.check(soft_max_gap(a2, x2, 10.0), bound_scale * std::log(2.0) / 10.0, "N=2, a=(1,1), x=0");
  }
  Rng rng = make_rng(grid.seed);
  std::uniform_int_distribution<int> pick_n(1, grid.max_n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::int64_t i = 0; i < grid.instances; ++i) {
    const int n = pick_n(rng);
    const double lo = 0.01 + 0.98 * unit(rng);      // c in (0.01, 0.99)
    const double hi = 1.0 + 99.0 * unit(rng);       // C in (1, 100)
    const double m = grid.m[static_cast<std::size_t>(i) % grid.m.size()];
    std::vector<double> a(static_cast<std::size_t>(n)), x(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      a[static_cast<std::size_t>(j)] = lo + (hi - lo) * unit(rng);
      x[static_cast<std::size_t>(j)] = -5.0 + 10.0 * unit(rng);
    }
    const double bound = std::max(std::abs(std::log(lo)), std::log(hi * n)) / m;
    tally.check(soft_max_gap(a, x, m), bound_scale * bound,
                detail::point({{"instance", double(i)}, {"N", double(n)}, {"M", m}}));
  }
  auto out = std::move(tally).done();
  out.grid = "2 fixed + " + std::to_string(grid.instances) + " random instances, N <= " +
             std::to_string(grid.max_n);
  return out;
}

// --- cosh moment -----------------------------------------------------------

/// E over two independent prior draws of exp(t <b, b'> / A^2), via the exact
/// overlap law: E[cosh(t)^W] (signed) or E[e^{tW}] (one-directional).
inline double overlap_moment(std::int64_t p, std::int64_t s, double t, SignMode mode) {
  const double base = mode == SignMode::symmetric_signed ? std::cosh(t) : std::exp(t);
  const auto pmf = hypergeometric_pmf_vector(p, s);
  double acc = 0.0;
  for (std::int64_t k = 0; k <= s; ++k) acc += pmf[static_cast<std::size_t>(k)] * std::pow(base, k);
  return acc;
}

/// Envelope exp((s^2/p)(cosh t - 1)) or exp((s^2/p)(e^t - 1)).
inline double overlap_envelope(std::int64_t p, std::int64_t s, double t, SignMode mode) {
  const double base = mode == SignMode::symmetric_signed ? std::cosh(t) : std::exp(t);
  return std::exp(static_cast<double>(s * s) / static_cast<double>(p) * (base - 1.0));
}

namespace detail {

/// Same moment by averaging exp(t * sum of sign products on the overlap)
/// over every pair of (support, signs), or over `draws` sampled pairs.
inline double overlap_moment_direct(std::int64_t p, std::int64_t s, double t, SignMode mode,
                                    std::int64_t draws, std::uint64_t seed, bool* exact) {
  const auto pz = static_cast<std::size_t>(p), sz = static_cast<std::size_t>(s);
  const double supports = choose(pz, sz);
  const double patterns = mode == SignMode::symmetric_signed ? std::pow(2.0, double(s)) : 1.0;
  const double pairs = supports * supports * patterns * patterns;
  if (pairs <= 1e6) {
    *exact = true;
    std::vector<std::vector<std::size_t>> all;
    for_each_combination(pz, sz, [&](std::span<const std::size_t> c) { all.emplace_back(c.begin(), c.end()); });
    const auto npat = static_cast<std::uint64_t>(patterns);
    double acc = 0.0;
    for (const auto& a : all) {
      for (const auto& b : all) {
        for (std::uint64_t ma = 0; ma < npat; ++ma) {
          for (std::uint64_t mb = 0; mb < npat; ++mb) {
            double dot = 0.0;
            for (std::size_t i = 0; i < sz; ++i) {
              for (std::size_t j = 0; j < sz; ++j) {
                if (a[i] != b[j]) continue;
                const double sa = ((ma >> i) & 1U) ? -1.0 : 1.0;
                const double sb = ((mb >> j) & 1U) ? -1.0 : 1.0;
                dot += sa * sb;
              }
            }
            acc += std::exp(t * dot);
          }
        }
      }
    }
    return acc / pairs;
  }
  *exact = false;
  // One stream for all pairs; Floyd sampling into a dense sign vector.
  Rng rng = make_rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> u(pz, 0.0);
  std::vector<std::size_t> chosen;
  auto draw = [&](auto&& visit) {
    chosen.clear();
    for (std::size_t j = pz - sz; j < pz; ++j) {
      const std::size_t pick = std::uniform_int_distribution<std::size_t>(0, j)(rng);
      chosen.push_back(std::find(chosen.begin(), chosen.end(), pick) == chosen.end() ? pick : j);
    }
    for (std::size_t i : chosen) {
      visit(i, mode == SignMode::symmetric_signed && coin(rng) ? -1.0 : 1.0);
    }
  };
  double acc = 0.0;
  for (std::int64_t k = 0; k < draws; ++k) {
    draw([&](std::size_t i, double v) { u[i] = v; });
    double dot = 0.0;
    draw([&](std::size_t i, double v) { dot += u[i] * v; });
    for (std::size_t i = 0; i < pz; ++i) u[i] = 0.0;
    acc += std::exp(t * dot);
  }
  return acc / static_cast<double>(draws);
}

}  // namespace detail

struct CoshGrid {
  std::vector<std::pair<std::int64_t, std::int64_t>> ps = {{2, 1}, {4, 1}, {4, 2}, {6, 2}, {8, 3},
                                                           {10, 2}, {12, 3}, {50, 5}, {200, 10}};
  std::vector<double> t = {0.0, 0.1, 0.5, 1.0, 2.0};  // t = n A^2
  std::int64_t mc_pairs = 1'000'000;
  std::uint64_t seed = 13;
};

/// Hoeffding envelopes for the overlap moment, one check per prior.
inline LemmaCheckResult check_cosh_moment(SignMode mode, const CoshGrid& grid = {},
                                          double bound_scale = 1.0) {
  detail::BoundTally tally(mode == SignMode::symmetric_signed ? "cosh_moment_signed"
                                                              : "cosh_moment_one_directional",
                           "", 1e-12);
  int simulated = 0;
  for (const auto& [p, s] : grid.ps) {
    if (s > p) throw DomainError("check_cosh_moment needs s <= p");
    for (double t : grid.t) {
      const double exact = overlap_moment(p, s, t, mode);
      const auto where = detail::point({{"p", double(p)}, {"s", double(s)}, {"t", t}});
      tally.check(exact, bound_scale * overlap_envelope(p, s, t, mode), where);
      // Cross-check the overlap formula on the largest t of each (p, s).
      if (t != grid.t.back()) continue;
      bool was_exact = false;
      const std::int64_t draws = grid.mc_pairs;
      const double direct = detail::overlap_moment_direct(p, s, t, mode, draws,
                                                          derive_seed(grid.seed, std::uint64_t(p * 1000 + s)),
                                                          &was_exact);
      if (was_exact) {
        tally.agree(direct, exact, 1e-10 * exact, where + " enumeration");
      } else {
        ++simulated;
        // Loose agreement: the summand is heavy-tailed, so allow 5% relative.
        tally.agree(direct, exact, 0.05 * exact, where + " simulation");
      }
    }
  }
  auto out = std::move(tally).done();
  out.grid = std::to_string(grid.ps.size()) + " (p, s) x " + std::to_string(grid.t.size()) +
             " t; " + std::to_string(simulated) + " simulated cross-checks";
  return out;
}

// --- likelihood ratio reference -------------------------------------------

/// L_pi computed from X and y directly: average of exp(y'X b - |X b|^2 / 2)
/// over every prior support and sign pattern, summed with Kahan compensation
/// in plain double precision.
inline double exact_lr_reference(const Observation& obs, const PriorSpec& prior) {
  prior.validate();
  const auto& x = obs.design.entries();
  if (static_cast<std::size_t>(x.cols()) != prior.p) throw DimensionError("prior p differs from design p");
  const bool signed_prior = prior.sign_mode == SignMode::symmetric_signed;
  const double terms = choose(prior.p, prior.s) * (signed_prior ? std::pow(2.0, double(prior.s)) : 1.0);
  if (choose(prior.p, prior.s) > 1e4) throw BudgetError("exact_lr_reference needs C(p, s) <= 1e4");
  const std::uint64_t patterns = signed_prior ? (std::uint64_t{1} << prior.s) : 1;
  double sum = 0.0, comp = 0.0;
  Eigen::VectorXd xb(x.rows());
  for_each_combination(prior.p, prior.s, [&](std::span<const std::size_t> support) {
    for (std::uint64_t mask = 0; mask < patterns; ++mask) {
      xb.setZero();
      for (std::size_t k = 0; k < support.size(); ++k) {
        const double v = ((mask >> k) & 1U) ? -prior.amplitude : prior.amplitude;
        xb += v * x.col(static_cast<Eigen::Index>(support[k]));
      }
      const double exponent = obs.y.dot(xb) - 0.5 * xb.squaredNorm();
      if (exponent >= 700.0) throw OverflowError("exact_lr_reference: term exceeds e^700");
      const double yk = std::exp(exponent) - comp;
      const double tk = sum + yk;
      comp = (tk - sum) - yk;
      sum = tk;
    }
  });
  return sum / terms;
}

// --- suite -----------------------------------------------------------------

inline const std::vector<std::string>& lemma_ids() {
  static const std::vector<std::string> ids = {
      "chisq_conc",        "noncchisq_conc", "folded_normal_expression", "hyp_bounds",
      "folded_normal_exp", "soft_max",       "cosh_moment_signed",       "cosh_moment_one_directional"};
  return ids;
}

/// Runs the default-grid checks, optionally a single lemma.
inline std::vector<LemmaCheckResult> verify_lemmas(std::optional<std::string> only = std::nullopt,
                                                   double bound_scale = 1.0) {
  if (only && std::find(lemma_ids().begin(), lemma_ids().end(), *only) == lemma_ids().end()) {
    throw DomainError("unknown lemma '" + *only + "'");
  }
  const auto want = [&](const char* id) { return !only || *only == id; };
  std::vector<LemmaCheckResult> out;
  if (want("chisq_conc")) out.push_back(check_chisq_tails({}, bound_scale));
  if (want("noncchisq_conc")) out.push_back(check_noncentral_chisq_tails({}, bound_scale));
  if (want("folded_normal_expression")) out.push_back(check_folded_normal({}, bound_scale));
  if (want("hyp_bounds")) out.push_back(check_hypergeometric({}, bound_scale));
  if (want("folded_normal_exp")) out.push_back(check_folded_deviations({}, bound_scale));
  if (want("soft_max")) out.push_back(check_soft_max({}, bound_scale));
  if (want("cosh_moment_signed")) {
    out.push_back(check_cosh_moment(SignMode::symmetric_signed, {}, bound_scale));
  }
  if (want("cosh_moment_one_directional")) {
    out.push_back(check_cosh_moment(SignMode::one_directional, {}, bound_scale));
  }
  return out;
}

}  // namespace sparse_testbench
