#pragma once

// Named binary tests: each statistic packaged with its calibrated cutoff.
// Cutoffs are materialized from the resolved regime when the test is built;
// deciding is then a pure function of the data.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sparse_testbench/error.hpp"
#include "sparse_testbench/numeric.hpp"
#include "sparse_testbench/signal.hpp"
#include "sparse_testbench/statistics.hpp"

namespace sparse_testbench {

enum class TestName {
  chisq_center,
  chisq_above,
  max_sqrt2logp,
  max_free,
  scan_taustar,
  scan_binom,
  hc_below,
  hc_ideal,
  lr_test,
  lr_truncated_test,
  ols_max,
  bonferroni,
  always_reject,
  never_reject,
};

inline std::string_view to_string(TestName name) {
  switch (name) {
    case TestName::chisq_center: return "chisq_center";
    case TestName::chisq_above: return "chisq_above";
    case TestName::max_sqrt2logp: return "max_sqrt2logp";
    case TestName::max_free: return "max_free";
    case TestName::scan_taustar: return "scan_taustar";
    case TestName::scan_binom: return "scan_binom";
    case TestName::hc_below: return "hc_below";
    case TestName::hc_ideal: return "hc_ideal";
    case TestName::lr_test: return "lr_test";
    case TestName::lr_truncated_test: return "lr_truncated_test";
    case TestName::ols_max: return "ols_max";
    case TestName::bonferroni: return "bonferroni";
    case TestName::always_reject: return "always_reject";
    case TestName::never_reject: return "never_reject";
  }
  return "?";
}

inline TestName parse_test_name(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(TestName::never_reject); ++i) {
    const auto name = static_cast<TestName>(i);
    if (to_string(name) == s) return name;
  }
  throw DomainError("unknown test '" + std::string(s) + "'");
}

/// A test as requested by a caller or a config file, before resolution.
struct TestRequest {
  TestName name = TestName::chisq_center;
  /// Named overrides: t, tau (scan_binom), tau_p (hc_below), ols_tau,
  /// ols_cstar, cutoff (forces the final cutoff).
  std::map<std::string, double> params;
  std::optional<SignMode> lr_sign_mode;  // lr tests; one_directional by default
  std::vector<TestRequest> members;      // bonferroni only

  std::optional<double> param(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end()) return std::nullopt;
    return it->second;
  }

  /// Canonical label used in output files, e.g. "hc_ideal(t=5)".
  std::string label() const {
    std::ostringstream os;
    os.precision(17);
    os << to_string(name);
    if (name == TestName::bonferroni) {
      os << '[';
      for (std::size_t i = 0; i < members.size(); ++i) os << (i ? "+" : "") << members[i].label();
      os << ']';
    }
    const bool has_args = !params.empty() || lr_sign_mode.has_value();
    if (has_args) {
      os << '(';
      bool first = true;
      for (const auto& [k, v] : params) {
        os << (first ? "" : ",") << k << '=' << v;
        first = false;
      }
      if (lr_sign_mode) os << (first ? "" : ",") << "prior=" << to_string(*lr_sign_mode);
      os << ')';
    }
    return os.str();
  }

  bool operator==(const TestRequest&) const = default;
};

/// A fully resolved test.
struct TestSpec {
  TestName name = TestName::chisq_center;
  std::string label;
  ResolvedRegime regime;
  double cutoff = 0.0;
  /// Coordinate threshold for count statistics (HC), or the scan level tau.
  double threshold = 0.0;
  PriorSpec prior;  // lr tests
  std::vector<TestSpec> members;
  std::vector<std::string> warnings;
};

struct TestDecision {
  bool reject = false;
  double statistic_value = 0.0;
  double cutoff = 0.0;
};

inline constexpr double kDefaultScanBinomTau = 1.0;
inline constexpr double kDefaultOlsTau = 4.0;

inline TestSpec build_test(const TestRequest& request, const ResolvedRegime& regime) {
  TestSpec out;
  out.name = request.name;
  out.label = request.label();
  out.regime = regime;
  const double p = static_cast<double>(regime.p);
  const double s = static_cast<double>(regime.s);
  const double log_p = regime.log_p;
  const double n = static_cast<double>(regime.n);
  const double z_amp = regime.z_amplitude();

  switch (request.name) {
    case TestName::chisq_center:
      out.cutoff = p;
      break;
    case TestName::chisq_above: {
      // tau = n s A^2 / (2 sqrt(2p)); cutoff p + tau sqrt(2p).
      const double tau = n * s * regime.amplitude * regime.amplitude / (2.0 * std::sqrt(2.0 * p));
      out.threshold = tau;
      out.cutoff = p + tau * std::sqrt(2.0 * p);
      break;
    }
    case TestName::max_sqrt2logp:
      out.cutoff = std::sqrt(2.0 * log_p);
      break;
    case TestName::max_free: {
      const auto t = request.param("t");
      if (!t) throw DomainError("max_free needs parameter t");
      out.cutoff = *t;
      break;
    }
    case TestName::scan_taustar: {
      double r = regime.spec.r;
      if (regime.spec.mode != SignalMode::sparse_r) {
        r = regime.effective_r();
        out.warnings.push_back("scan_taustar outside sparse_r mode; using r = nA^2/(2 log p)");
      } else if (!(r > regime.spec.alpha)) {
        out.warnings.push_back("scan_taustar is calibrated for r > alpha");
      }
      const double alpha = regime.spec.alpha;
      const double tau_star = (r + alpha) * (r + alpha) / (4.0 * r);
      out.threshold = tau_star;
      out.cutoff = s * std::sqrt(2.0 * tau_star * log_p);
      break;
    }
    case TestName::scan_binom: {
      const double tau = request.param("tau").value_or(kDefaultScanBinomTau);
      out.threshold = tau;
      out.cutoff = std::sqrt(2.0 * (1.0 + tau) * log_choose(p, s));
      break;
    }
    case TestName::hc_below: {
      // Count |z_j| > 2 sqrt(n) A against its null mean plus tau_p null sds.
      const double thr = 2.0 * z_amp;
      const double q = 2.0 * normal_sf(thr);
      const double tau_p = request.param("tau_p").value_or(std::log(log_p));
      out.threshold = thr;
      out.cutoff = p * q + tau_p * std::sqrt(p * q * (1.0 - q));
      break;
    }
    case TestName::hc_ideal: {
      const auto t = request.param("t");
      if (!t) throw DomainError("hc_ideal needs parameter t");
      out.threshold = std::sqrt(2.0 * log_p);
      out.cutoff = *t;
      break;
    }
    case TestName::lr_test:
    case TestName::lr_truncated_test: {
      out.prior = PriorSpec{static_cast<std::size_t>(regime.p), static_cast<std::size_t>(regime.s),
                            regime.amplitude,
                            request.lr_sign_mode.value_or(SignMode::one_directional)};
      if (request.name == TestName::lr_truncated_test &&
          out.prior.sign_mode != SignMode::one_directional) {
        throw DomainError("lr_truncated_test needs the one-directional prior");
      }
      if (enumeration_terms(out.prior) > kEnumerationBudget) {
        throw BudgetError("lr test at p=" + std::to_string(regime.p) + ", s=" +
                          std::to_string(regime.s) + " exceeds the enumeration budget");
      }
      out.cutoff = 1.0;
      break;
    }
    case TestName::ols_max: {
      // max |z~_j| on the OLS vector against sqrt(2 tau log p / n); the
      // companion constant C* > 4 tau delimits where the test is used.
      const double tau = request.param("ols_tau").value_or(kDefaultOlsTau);
      const double cstar = request.param("ols_cstar").value_or(16.0 * tau);
      if (!(cstar > 4.0 * tau)) out.warnings.push_back("ols_max expects C* > 4 tau");
      out.threshold = tau;
      out.cutoff = std::sqrt(2.0 * tau * log_p / n);
      break;
    }
    case TestName::bonferroni:
      if (request.members.empty()) throw DomainError("bonferroni needs at least one member");
      for (const auto& m : request.members) out.members.push_back(build_test(m, regime));
      out.cutoff = 0.0;
      break;
    case TestName::always_reject:
      out.cutoff = -std::numeric_limits<double>::infinity();
      break;
    case TestName::never_reject:
      out.cutoff = std::numeric_limits<double>::infinity();
      break;
  }
  if (const auto forced = request.param("cutoff")) out.cutoff = *forced;
  return out;
}

inline TestSpec build_test(const TestRequest& request, const RegimeSpec& regime, double p) {
  return build_test(request, resolve_regime(regime, p));
}

inline TestSpec build_test(TestName name, const RegimeSpec& regime, double p) {
  return build_test(TestRequest{name, {}, std::nullopt, {}}, regime, p);
}

/// Applies a resolved test to projected data. Rejects iff statistic > cutoff.
inline TestDecision decide(const TestSpec& test, const ProjectedData& data) {
  if (data.p() != test.regime.p) {
    throw DimensionError("decide: test built for p=" + std::to_string(test.regime.p) +
                         " applied to p=" + std::to_string(data.p()));
  }
  double stat = 0.0;
  switch (test.name) {
    case TestName::chisq_center:
    case TestName::chisq_above:
      stat = chi_sq_stat(data.z);
      break;
    case TestName::max_sqrt2logp:
    case TestName::max_free:
      stat = max_stat(data.z);
      break;
    case TestName::scan_taustar:
      stat = scan_stat(data.z, test.regime.s, ScanFlavor::abs_sum);
      break;
    case TestName::scan_binom:
      stat = scan_stat(data.z, test.regime.s, ScanFlavor::signed_sum);
      break;
    case TestName::hc_below:
    case TestName::hc_ideal:
      stat = static_cast<double>(hc_stat(data.z, test.threshold));
      break;
    case TestName::lr_test:
      stat = integrated_lr(data, test.prior).value();
      break;
    case TestName::lr_truncated_test:
      stat = truncated_lr(data, test.prior).value();
      break;
    case TestName::ols_max:
      stat = max_stat(data.z_tilde);
      break;
    case TestName::bonferroni: {
      int rejecting = 0;
      for (const auto& m : test.members) rejecting += decide(m, data).reject ? 1 : 0;
      stat = rejecting;
      break;
    }
    case TestName::always_reject:
      stat = 0.0;
      break;
    case TestName::never_reject:
      stat = 0.0;
      break;
  }
  return TestDecision{stat > test.cutoff, stat, test.cutoff};
}

inline TestDecision decide(const TestSpec& test, const Observation& obs,
                           const GramFactorization& gram) {
  return decide(test, project(obs, gram));
}

}  // namespace sparse_testbench
