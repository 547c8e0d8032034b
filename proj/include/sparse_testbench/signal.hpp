#pragma once

// Alternatives on the boundary of the sparse parameter space, the uniform
// support priors, the (alpha, r | delta | fixed s) parametrizations and the
// Gaussian linear model y = X beta + eps.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sparse_testbench/design.hpp"
#include "sparse_testbench/error.hpp"
#include "sparse_testbench/numeric.hpp"
#include "sparse_testbench/random.hpp"

namespace sparse_testbench {

/// A boundary alternative: |beta_i| = A on the support, 0 elsewhere.
struct Signal {
  Eigen::VectorXd coords;
  std::vector<std::size_t> support;  // ascending
  double amplitude = 0.0;
  bool signed_entries = false;  // some entry is negative

  std::size_t p() const { return static_cast<std::size_t>(coords.size()); }
  std::size_t s() const { return support.size(); }
};

/// Builds the boundary signal with entries signs[k] * A on support[k].
inline Signal make_signal(std::size_t p, std::span<const std::size_t> support, double amplitude,
                          std::span<const int> signs) {
  if (signs.size() != support.size()) {
    throw DimensionError("make_signal: signs and support differ in length");
  }
  if (amplitude < 0.0) throw DomainError("make_signal: amplitude must be nonnegative");
  Signal out;
  out.coords = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  out.amplitude = amplitude;
  std::vector<std::pair<std::size_t, int>> entries;
  entries.reserve(support.size());
  for (std::size_t k = 0; k < support.size(); ++k) {
    if (support[k] >= p) {
      throw DimensionError("make_signal: index " + std::to_string(support[k]) +
                           " out of range for p=" + std::to_string(p));
    }
    if (signs[k] != 1 && signs[k] != -1) throw DomainError("make_signal: signs must be +1/-1");
    entries.emplace_back(support[k], signs[k]);
  }
  std::sort(entries.begin(), entries.end());
  for (std::size_t k = 1; k < entries.size(); ++k) {
    if (entries[k].first == entries[k - 1].first) {
      throw DimensionError("make_signal: duplicate index " + std::to_string(entries[k].first));
    }
  }
  for (const auto& [i, sign] : entries) {
    out.support.push_back(i);
    out.coords(static_cast<Eigen::Index>(i)) = sign * amplitude;
    out.signed_entries = out.signed_entries || sign < 0;
  }
  return out;
}

enum class SignMode { one_directional, symmetric_signed };

inline std::string_view to_string(SignMode m) {
  return m == SignMode::one_directional ? "one_directional" : "symmetric_signed";
}

inline SignMode parse_sign_mode(std::string_view s) {
  if (s == "one_directional") return SignMode::one_directional;
  if (s == "symmetric_signed") return SignMode::symmetric_signed;
  throw DomainError("unknown sign mode '" + std::string(s) + "'");
}

/// Uniform prior over size-s supports with entries +A or fair ±A.
struct PriorSpec {
  std::size_t p = 1;
  std::size_t s = 1;
  double amplitude = 0.0;
  SignMode sign_mode = SignMode::one_directional;

  void validate() const {
    if (s < 1 || s > p) throw DomainError("PriorSpec needs 1 <= s <= p");
    if (amplitude < 0.0) throw DomainError("PriorSpec amplitude must be nonnegative");
  }
};

/// One draw from the prior; deterministic in `seed`.
inline Signal draw_prior(const PriorSpec& prior, std::uint64_t seed) {
  prior.validate();
  Rng rng = make_rng(seed);
  // Floyd's algorithm: uniform size-s subset in O(s log s).
  std::vector<std::size_t> chosen;
  chosen.reserve(prior.s);
  for (std::size_t j = prior.p - prior.s; j < prior.p; ++j) {
    std::uniform_int_distribution<std::size_t> pick(0, j);
    const std::size_t t = pick(rng);
    if (std::find(chosen.begin(), chosen.end(), t) == chosen.end()) {
      chosen.push_back(t);
    } else {
      chosen.push_back(j);
    }
  }
  std::sort(chosen.begin(), chosen.end());
  std::vector<int> signs(prior.s, 1);
  if (prior.sign_mode == SignMode::symmetric_signed) {
    std::bernoulli_distribution coin(0.5);
    for (auto& sign : signs) sign = coin(rng) ? 1 : -1;
  }
  return make_signal(prior.p, chosen, prior.amplitude, signs);
}

enum class SignalMode { sparse_r, dense_delta, boundary_fixed_s };

inline std::string_view to_string(SignalMode m) {
  switch (m) {
    case SignalMode::sparse_r: return "sparse_r";
    case SignalMode::dense_delta: return "dense_delta";
    case SignalMode::boundary_fixed_s: return "boundary_fixed_s";
  }
  return "?";
}

inline SignalMode parse_signal_mode(std::string_view s) {
  if (s == "sparse_r") return SignalMode::sparse_r;
  if (s == "dense_delta") return SignalMode::dense_delta;
  if (s == "boundary_fixed_s") return SignalMode::boundary_fixed_s;
  throw DomainError("unknown signal mode '" + std::string(s) + "'");
}

/// n = ceil(c * p^gamma * (log p)^kappa).
struct NRule {
  double c = 1.0;
  double gamma = 1.0;
  double kappa = 0.0;

  /// n = p, the orthogonal default.
  static NRule linear() { return {1.0, 1.0, 0.0}; }
  /// n = ceil(p^2 log p), the sub-Gaussian default.
  static NRule quadratic_log() { return {1.0, 2.0, 1.0}; }

  std::int64_t operator()(double p) const {
    return snapped_ceil(c * std::pow(p, gamma) * std::pow(std::log(p), kappa));
  }
  bool operator==(const NRule&) const = default;
};

/// Asymptotic parametrization. Exactly one of r / delta / fixed_s is read,
/// according to `mode`. delta is signed: A^2 = p^(alpha - 1/2 + delta) / n,
/// so delta < 0 is below the dense detection boundary.
struct RegimeSpec {
  double alpha = 0.5;
  SignalMode mode = SignalMode::sparse_r;
  double r = 0.0;
  double delta = 0.0;
  std::optional<std::int64_t> fixed_s;
  NRule n_rule = NRule::linear();

  static RegimeSpec sparse(double alpha, double r, NRule rule = NRule::linear()) {
    RegimeSpec out;
    out.alpha = alpha;
    out.mode = SignalMode::sparse_r;
    out.r = r;
    out.n_rule = rule;
    return out;
  }
  static RegimeSpec dense(double alpha, double delta, NRule rule = NRule::linear()) {
    RegimeSpec out;
    out.alpha = alpha;
    out.mode = SignalMode::dense_delta;
    out.delta = delta;
    out.n_rule = rule;
    return out;
  }
  static RegimeSpec boundary(std::int64_t s, NRule rule = NRule::linear()) {
    RegimeSpec out;
    out.mode = SignalMode::boundary_fixed_s;
    out.fixed_s = s;
    out.n_rule = rule;
    return out;
  }

  void validate() const {
    switch (mode) {
      case SignalMode::sparse_r:
        if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("sparse_r needs 0 < alpha < 1");
        if (!(r > 0.0)) throw DomainError("sparse_r needs r > 0");
        if (fixed_s) throw DomainError("sparse_r does not take fixed_s");
        break;
      case SignalMode::dense_delta:
        if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("dense_delta needs 0 < alpha < 1");
        if (!std::isfinite(delta)) throw DomainError("dense_delta needs a finite delta");
        if (fixed_s) throw DomainError("dense_delta does not take fixed_s");
        break;
      case SignalMode::boundary_fixed_s:
        if (!fixed_s || *fixed_s < 1) throw DomainError("boundary_fixed_s needs fixed_s >= 1");
        break;
    }
    if (!(n_rule.c > 0.0)) throw DomainError("n_rule.c must be positive");
  }

  bool operator==(const RegimeSpec&) const = default;
};

/// Regime evaluated at a concrete dimension.
struct ResolvedRegime {
  RegimeSpec spec;
  std::int64_t p = 0;
  std::int64_t s = 0;
  std::int64_t n = 0;
  double amplitude = 0.0;  // A, on the beta scale
  double log_p = 0.0;

  /// sqrt(n) * A, the signal size seen by z.
  double z_amplitude() const { return std::sqrt(static_cast<double>(n)) * amplitude; }
  /// r such that sqrt(n) A = sqrt(2 r log p); equals spec.r in sparse_r mode.
  double effective_r() const {
    return static_cast<double>(n) * amplitude * amplitude / (2.0 * log_p);
  }
};

/// Resolves (s, A, n) at dimension p (p may be non-integer for formula
/// checks; it must be >= 2).
inline ResolvedRegime resolve_regime(const RegimeSpec& regime, double p) {
  regime.validate();
  if (!(p >= 2.0)) throw DomainError("resolve_regime needs p >= 2");
  ResolvedRegime out;
  out.spec = regime;
  out.p = snapped_ceil(p);
  out.log_p = std::log(p);
  out.n = regime.n_rule(p);
  if (out.n < out.p) {
    throw DomainError("n_rule gives n=" + std::to_string(out.n) + " < p=" +
                      std::to_string(out.p));
  }
  const double n = static_cast<double>(out.n);
  if (regime.mode == SignalMode::boundary_fixed_s) {
    out.s = *regime.fixed_s;
  } else {
    out.s = std::clamp<std::int64_t>(snapped_ceil(std::pow(p, 1.0 - regime.alpha)), 1, out.p);
  }
  if (out.s > out.p) throw DomainError("fixed_s exceeds p");
  switch (regime.mode) {
    case SignalMode::sparse_r:
      out.amplitude = std::sqrt(2.0 * regime.r * out.log_p / n);
      break;
    case SignalMode::dense_delta:
      out.amplitude = std::sqrt(std::pow(p, regime.alpha - 0.5 + regime.delta) / n);
      break;
    case SignalMode::boundary_fixed_s:
      out.amplitude = std::sqrt(2.0 * out.log_p / n);
      break;
  }
  return out;
}

/// Data set drawn from the linear model. `truth` is empty under the null.
struct Observation {
  Eigen::VectorXd y;
  DesignMatrix design;
  std::optional<Signal> truth;
};

/// y = X beta + eps with eps ~ N(0, I_n) from its own stream (the design has
/// a separate one). `zero_noise` suppresses eps for exactness tests only.
inline Observation simulate(const DesignMatrix& x, const Signal* signal, std::uint64_t seed,
                            bool zero_noise = false) {
  Observation obs{Eigen::VectorXd::Zero(x.n()), x, std::nullopt};
  if (signal) {
    if (static_cast<Eigen::Index>(signal->p()) != x.p()) {
      throw DimensionError("simulate: signal length differs from design p");
    }
    obs.y.noalias() = x.entries() * signal->coords;
    obs.truth = *signal;
  }
  if (!zero_noise) {
    Rng rng = make_rng(derive_seed(seed, stream::kNoise));
    std::normal_distribution<double> gauss;
    for (Eigen::Index i = 0; i < obs.y.size(); ++i) obs.y(i) += gauss(rng);
  }
  return obs;
}

inline Observation simulate(const DesignMatrix& x, const std::optional<Signal>& signal,
                            std::uint64_t seed, bool zero_noise = false) {
  return simulate(x, signal ? &*signal : nullptr, seed, zero_noise);
}

}  // namespace sparse_testbench
