#pragma once

// Statistics computed from an observation: the whitened vector
// z = (X'X)^{-1/2} X'y, its OLS cousin, the chi-square / max / scan / HC
// statistics, and the integrated and truncated likelihood ratios.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sparse_testbench/design.hpp"
#include "sparse_testbench/error.hpp"
#include "sparse_testbench/numeric.hpp"
#include "sparse_testbench/random.hpp"
#include "sparse_testbench/signal.hpp"

namespace sparse_testbench {

enum class WhiteningVariant { half_inverse, full_inverse };

struct WhitenedVector {
  Eigen::VectorXd z;
  WhiteningVariant variant = WhiteningVariant::half_inverse;
};

/// z = (X'X)^{-1/2} X'y or z~ = (X'X)^{-1} X'y.
inline WhitenedVector compute_z(const Observation& obs, const GramFactorization& gram,
                                WhiteningVariant variant) {
  const auto& x = obs.design.entries();
  if (obs.y.size() != x.rows()) throw DimensionError("compute_z: y length differs from n");
  if (gram.inv_sqrt.rows() != x.cols()) throw DimensionError("compute_z: gram is not p x p");
  const Eigen::VectorXd xty = x.transpose() * obs.y;
  WhitenedVector out;
  out.variant = variant;
  out.z = variant == WhiteningVariant::half_inverse ? (gram.inv_sqrt * xty).eval()
                                                    : (gram.inverse * xty).eval();
  return out;
}

/// Everything the tests need from one data set: y enters only through X'y
/// and X'X. For an orthogonal design X'X = nI, so `gram` may be left empty
/// and `gram_scale` used instead.
struct ProjectedData {
  Eigen::VectorXd z;        // (X'X)^{-1/2} X'y
  Eigen::VectorXd z_tilde;  // (X'X)^{-1} X'y
  Eigen::VectorXd xty;      // X'y
  std::shared_ptr<const Eigen::MatrixXd> gram;  // X'X, or null when isotropic
  double gram_scale = 1.0;                      // X'X = gram_scale * I when gram is null
  std::int64_t n = 0;

  Eigen::Index p() const { return z.size(); }

  /// beta' (X'X) beta restricted to a support with the given entries.
  double quad_form(std::span<const std::size_t> support, std::span<const double> values) const {
    double acc = 0.0;
    if (!gram) {
      for (double v : values) acc += v * v;
      return gram_scale * acc;
    }
    for (std::size_t a = 0; a < support.size(); ++a) {
      const auto ia = static_cast<Eigen::Index>(support[a]);
      acc += values[a] * values[a] * (*gram)(ia, ia);
      for (std::size_t b = a + 1; b < support.size(); ++b) {
        acc += 2.0 * values[a] * values[b] * (*gram)(ia, static_cast<Eigen::Index>(support[b]));
      }
    }
    return acc;
  }
};

inline ProjectedData project(const Observation& obs, const GramFactorization& gram) {
  const auto& x = obs.design.entries();
  if (obs.y.size() != x.rows()) throw DimensionError("project: y length differs from n");
  ProjectedData out;
  out.xty = x.transpose() * obs.y;
  out.z = gram.inv_sqrt * out.xty;
  out.z_tilde = gram.inverse * out.xty;
  out.gram = std::make_shared<const Eigen::MatrixXd>(gram.gram);
  out.n = x.rows();
  return out;
}

/// Sufficient statistics of an orthogonal design (X'X = nI) given z.
inline ProjectedData project_isotropic(Eigen::VectorXd z, std::int64_t n) {
  const double root_n = std::sqrt(static_cast<double>(n));
  ProjectedData out;
  out.xty = root_n * z;
  out.z_tilde = z / root_n;
  out.z = std::move(z);
  out.gram_scale = static_cast<double>(n);
  out.n = n;
  return out;
}

// --- coordinate statistics -------------------------------------------------

inline double chi_sq_stat(const Eigen::VectorXd& z) { return z.squaredNorm(); }

inline double chi_sq_stat(const WhitenedVector& w) {
  if (w.variant != WhiteningVariant::half_inverse) {
    throw DomainError("chi_sq_stat needs the half-inverse whitened vector");
  }
  return chi_sq_stat(w.z);
}

inline double max_stat(const Eigen::VectorXd& z) {
  return z.size() == 0 ? 0.0 : z.cwiseAbs().maxCoeff();
}
inline double max_stat(const WhitenedVector& w) { return max_stat(w.z); }

enum class ScanFlavor { abs_sum, signed_sum };

namespace detail {

/// Sum of the k largest entries of v (v is reordered).
inline double top_k_sum(std::vector<double>& v, std::size_t k) {
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k - 1), v.end(),
                   std::greater<>());
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) acc += v[i];
  return acc;
}

}  // namespace detail

/// abs_sum: largest sum of s entries of |z| (sum of the top-s order
/// statistics). signed_sum: max over |S| = s of |sum_{i in S} z_i|.
inline double scan_stat(const Eigen::VectorXd& z, std::int64_t s, ScanFlavor flavor) {
  if (s < 1 || s > z.size()) throw DomainError("scan_stat needs 1 <= s <= p");
  const auto k = static_cast<std::size_t>(s);
  std::vector<double> buf(static_cast<std::size_t>(z.size()));
  if (flavor == ScanFlavor::abs_sum) {
    for (Eigen::Index i = 0; i < z.size(); ++i) buf[static_cast<std::size_t>(i)] = std::abs(z(i));
    return detail::top_k_sum(buf, k);
  }
  for (Eigen::Index i = 0; i < z.size(); ++i) buf[static_cast<std::size_t>(i)] = z(i);
  const double upper = detail::top_k_sum(buf, k);
  for (auto& v : buf) v = -v;
  const double lower = detail::top_k_sum(buf, k);
  return std::max(upper, lower);
}

inline double scan_stat(const WhitenedVector& w, std::int64_t s, ScanFlavor flavor) {
  return scan_stat(w.z, s, flavor);
}

/// Number of coordinates with |z_j| > tau (strict).
inline std::int64_t hc_stat(const Eigen::VectorXd& z, double tau) {
  if (tau < 0.0) throw DomainError("hc_stat needs tau >= 0");
  std::int64_t count = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i) count += std::abs(z(i)) > tau ? 1 : 0;
  return count;
}
inline std::int64_t hc_stat(const WhitenedVector& w, double tau) { return hc_stat(w.z, tau); }

// --- likelihood ratios -----------------------------------------------------

/// Maximum number of (support, sign pattern) terms for exact enumeration.
inline constexpr double kEnumerationBudget = 1e6;

struct LikelihoodRatioValue {
  double log_value = 0.0;
  bool truncated = false;
  PriorSpec prior;
  double truncation_level = std::numeric_limits<double>::infinity();

  double value() const { return std::exp(log_value); }
};

struct LrMode {
  enum class Kind { exact_enumeration, monte_carlo } kind = Kind::exact_enumeration;
  std::int64_t draws = 0;
  std::uint64_t seed = 0;

  static LrMode exact() { return {}; }
  static LrMode monte_carlo(std::int64_t m, std::uint64_t seed) {
    return {Kind::monte_carlo, m, seed};
  }
};

/// Number of terms exact enumeration of `prior` visits.
inline double enumeration_terms(const PriorSpec& prior) {
  const double subsets = choose(prior.p, prior.s);
  return prior.sign_mode == SignMode::symmetric_signed
             ? subsets * std::pow(2.0, static_cast<double>(prior.s))
             : subsets;
}

namespace detail {

/// log-likelihood ratio of beta = values on support against the null.
inline double log_lr_term(const ProjectedData& data, std::span<const std::size_t> support,
                          std::span<const double> values) {
  double linear = 0.0;
  for (std::size_t k = 0; k < support.size(); ++k) {
    linear += values[k] * data.xty(static_cast<Eigen::Index>(support[k]));
  }
  return linear - 0.5 * data.quad_form(support, values);
}

/// Averages exp(term) over the prior, optionally multiplying each term by
/// 1(max_{i in S} z_i < level).
inline double log_prior_average(const ProjectedData& data, const PriorSpec& prior,
                                const LrMode& mode, std::optional<double> truncation) {
  prior.validate();
  if (static_cast<Eigen::Index>(prior.p) != data.p()) {
    throw DimensionError("likelihood ratio: prior p differs from data p");
  }
  const auto kept = [&](std::span<const std::size_t> support) {
    if (!truncation) return true;
    for (std::size_t i : support) {
      if (!(data.z(static_cast<Eigen::Index>(i)) < *truncation)) return false;
    }
    return true;
  };

  LogSumExp acc;
  std::vector<double> values(prior.s);
  double count = 0.0;
  if (mode.kind == LrMode::Kind::exact_enumeration) {
    const double terms = enumeration_terms(prior);
    if (terms > kEnumerationBudget) {
      throw BudgetError("exact enumeration needs " + std::to_string(terms) +
                        " terms (budget 1e6)");
    }
    const bool signed_prior = prior.sign_mode == SignMode::symmetric_signed;
    const std::uint64_t patterns = signed_prior ? (std::uint64_t{1} << prior.s) : 1;
    for_each_combination(prior.p, prior.s, [&](std::span<const std::size_t> support) {
      const bool keep = kept(support);
      for (std::uint64_t mask = 0; mask < patterns; ++mask) {
        count += 1.0;
        if (!keep) continue;
        for (std::size_t k = 0; k < prior.s; ++k) {
          values[k] = ((mask >> k) & 1U) ? -prior.amplitude : prior.amplitude;
        }
        acc.add(log_lr_term(data, support, values));
      }
    });
  } else {
    if (mode.draws < 1) throw DomainError("monte_carlo likelihood ratio needs m >= 1");
    for (std::int64_t k = 0; k < mode.draws; ++k) {
      const Signal beta = draw_prior(prior, derive_seed(mode.seed, static_cast<std::uint64_t>(k)));
      count += 1.0;
      if (!kept(beta.support)) continue;
      for (std::size_t j = 0; j < prior.s; ++j) {
        values[j] = beta.coords(static_cast<Eigen::Index>(beta.support[j]));
      }
      acc.add(log_lr_term(data, beta.support, values));
    }
  }
  return acc.value() - std::log(count);
}

}  // namespace detail

/// Integrated likelihood ratio L_pi of the prior against the null, in log space.
inline LikelihoodRatioValue integrated_lr(const ProjectedData& data, const PriorSpec& prior,
                                          const LrMode& mode = LrMode::exact()) {
  LikelihoodRatioValue out;
  out.prior = prior;
  out.log_value = detail::log_prior_average(data, prior, mode, std::nullopt);
  return out;
}

inline LikelihoodRatioValue integrated_lr(const Observation& obs, const PriorSpec& prior,
                                          const LrMode& mode = LrMode::exact()) {
  return integrated_lr(project(obs, gram_factorize(obs.design)), prior, mode);
}

/// L_pi with each support term multiplied by 1(max_{i in S} z_i < sqrt(2 log p)).
/// Only the one-directional prior is supported.
inline LikelihoodRatioValue truncated_lr(const ProjectedData& data, const PriorSpec& prior,
                                         const LrMode& mode = LrMode::exact()) {
  if (prior.sign_mode != SignMode::one_directional) {
    throw DomainError("truncated_lr is defined for the one-directional prior");
  }
  LikelihoodRatioValue out;
  out.prior = prior;
  out.truncated = true;
  out.truncation_level = std::sqrt(2.0 * std::log(static_cast<double>(prior.p)));
  out.log_value = detail::log_prior_average(data, prior, mode, out.truncation_level);
  return out;
}

inline LikelihoodRatioValue truncated_lr(const Observation& obs, const PriorSpec& prior,
                                         const GramFactorization& gram) {
  return truncated_lr(project(obs, gram), prior);
}

}  // namespace sparse_testbench
