#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "sparse_testbench/decision.hpp"

namespace st = sparse_testbench;

namespace {

st::TestRequest req(st::TestName name, std::map<std::string, double> params = {}) {
  return st::TestRequest{name, std::move(params), std::nullopt, {}};
}

}  // namespace

TEST(BuildTest, ChisqCenterCutoffIsP) {
  for (double p : {10.0, 100.0, 1234.0}) {
    EXPECT_EQ(st::build_test(st::TestName::chisq_center, st::RegimeSpec::dense(0.3, -0.1), p).cutoff, p);
  }
}

TEST(BuildTest, ChisqAboveArithmetic) {
  const st::NRule square{1.0, 2.0, 0.0};
  const auto t = st::build_test(st::TestName::chisq_above, st::RegimeSpec::sparse(0.5, 1.0, square), 100);
  const double a2 = 2.0 * std::log(100.0) / 1e4;
  const double tau = 1e4 * 10.0 * a2 / (2.0 * std::sqrt(200.0));
  EXPECT_NEAR(tau, 3.256, 1e-3);
  EXPECT_NEAR(t.cutoff, 100.0 + tau * std::sqrt(200.0), 1e-9);
  EXPECT_NEAR(t.cutoff, 146.05, 0.01);
}

TEST(BuildTest, ScanTaustarCutoff) {
  const double p = 1000;
  const auto t = st::build_test(st::TestName::scan_taustar, st::RegimeSpec::sparse(0.6, 1.0), p);
  const double s = std::ceil(std::pow(p, 0.4));
  EXPECT_NEAR(t.cutoff, s * std::sqrt(1.28 * std::log(p)), 1e-9);
  EXPECT_NEAR(t.threshold, 0.64, 1e-12);
  EXPECT_TRUE(t.warnings.empty());
}

TEST(BuildTest, ScanTaustarWarnsOutsideAboveSparse) {
  const auto t = st::build_test(st::TestName::scan_taustar, st::RegimeSpec::sparse(0.6, 0.3), 1000);
  EXPECT_FALSE(t.warnings.empty());
}

TEST(BuildTest, MaxAndHc) {
  const double p = 500;
  EXPECT_NEAR(st::build_test(st::TestName::max_sqrt2logp, st::RegimeSpec::sparse(0.6, 1.0), p).cutoff,
              std::sqrt(2.0 * std::log(p)), 1e-12);
  const auto hc = st::build_test(req(st::TestName::hc_ideal, {{"t", 3}}), st::RegimeSpec::sparse(0.6, 1.0), p);
  EXPECT_NEAR(hc.threshold, std::sqrt(2.0 * std::log(p)), 1e-12);
  EXPECT_EQ(hc.cutoff, 3.0);
  EXPECT_EQ(hc.label, "hc_ideal(t=3)");
}

TEST(BuildTest, HcBelowCutoff) {
  const double p = 1024;
  const auto regime = st::RegimeSpec::sparse(0.7, 0.05);
  const auto resolved = st::resolve_regime(regime, p);
  const auto t = st::build_test(st::TestName::hc_below, regime, p);
  const double thr = 2.0 * resolved.z_amplitude();
  const double q = 2.0 * st::normal_sf(thr);
  const double tau_p = std::log(std::log(p));
  EXPECT_NEAR(t.threshold, thr, 1e-12);
  EXPECT_NEAR(t.cutoff, p * q + tau_p * std::sqrt(p * q * (1.0 - q)), 1e-9);
}

TEST(BuildTest, CutoffOverrideAndErrors) {
  const auto t = st::build_test(req(st::TestName::max_sqrt2logp, {{"cutoff", 1.5}}),
                                st::RegimeSpec::sparse(0.6, 1.0), 100);
  EXPECT_EQ(t.cutoff, 1.5);
  EXPECT_THROW(st::build_test(st::TestName::max_free, st::RegimeSpec::sparse(0.6, 1.0), 100),
               st::DomainError);
  EXPECT_THROW(st::parse_test_name("median"), st::DomainError);
  EXPECT_THROW(st::build_test(st::TestName::lr_test, st::RegimeSpec::sparse(0.6, 1.0), 4096),
               st::BudgetError);
}

TEST(BuildTest, NamesRoundTrip) {
  for (auto n : {st::TestName::chisq_center, st::TestName::scan_binom, st::TestName::lr_truncated_test,
                 st::TestName::ols_max, st::TestName::never_reject}) {
    EXPECT_EQ(st::parse_test_name(st::to_string(n)), n);
  }
}

TEST(Decide, ChisqAtZero) {
  const auto t = st::build_test(st::TestName::chisq_center, st::RegimeSpec::sparse(0.6, 1.0), 10);
  const auto d = st::decide(t, st::project_isotropic(Eigen::VectorXd::Zero(10), 10));
  EXPECT_FALSE(d.reject);
  EXPECT_EQ(d.cutoff, 10.0);
}

TEST(Decide, MaxAtPEqualsE) {
  // p = e rounds up to 3 coordinates; the cutoff is sqrt(2 log e) = sqrt(2).
  const auto t = st::build_test(st::TestName::max_sqrt2logp, st::RegimeSpec::boundary(1), std::numbers::e);
  EXPECT_NEAR(t.cutoff, std::numbers::sqrt2, 1e-12);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(t.regime.p);
  z(0) = 10.0;
  EXPECT_TRUE(st::decide(t, st::project_isotropic(z, t.regime.n)).reject);
}

TEST(Decide, BonferroniOfStubs) {
  st::TestRequest b = req(st::TestName::bonferroni);
  b.members = {req(st::TestName::always_reject), req(st::TestName::never_reject)};
  const auto t = st::build_test(b, st::RegimeSpec::sparse(0.6, 1.0), 20);
  EXPECT_EQ(t.label, "bonferroni[always_reject+never_reject]");
  const auto d = st::decide(t, st::project_isotropic(Eigen::VectorXd::Zero(20), 20));
  EXPECT_TRUE(d.reject);
}

TEST(Decide, Stubs) {
  const auto data = st::project_isotropic(Eigen::VectorXd::Zero(20), 20);
  const auto regime = st::RegimeSpec::sparse(0.6, 1.0);
  EXPECT_TRUE(st::decide(st::build_test(st::TestName::always_reject, regime, 20), data).reject);
  EXPECT_FALSE(st::decide(st::build_test(st::TestName::never_reject, regime, 20), data).reject);
}

TEST(Decide, DimensionMismatch) {
  const auto t = st::build_test(st::TestName::chisq_center, st::RegimeSpec::sparse(0.6, 1.0), 10);
  EXPECT_THROW(st::decide(t, st::project_isotropic(Eigen::VectorXd::Zero(11), 11)),
               st::DimensionError);
}

TEST(Decide, LrTestMatchesStatistic) {
  const auto regime = st::RegimeSpec::sparse(0.6, 1.0);
  const auto t = st::build_test(st::TestName::lr_test, regime, 12);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(12);
  z(3) = 4.0;
  const auto data = st::project_isotropic(z, t.regime.n);
  const auto d = st::decide(t, data);
  EXPECT_NEAR(d.statistic_value, st::integrated_lr(data, t.prior).value(), 1e-12);
  EXPECT_EQ(d.reject, d.statistic_value > 1.0);
}

TEST(Decide, Deterministic) {
  const auto t = st::build_test(st::TestName::scan_taustar, st::RegimeSpec::sparse(0.6, 1.0), 64);
  Eigen::VectorXd z = Eigen::VectorXd::LinSpaced(64, -3.0, 3.0);
  const auto data = st::project_isotropic(z, 64);
  const auto a = st::decide(t, data), b = st::decide(t, data);
  EXPECT_EQ(a.reject, b.reject);
  EXPECT_EQ(a.statistic_value, b.statistic_value);
}
