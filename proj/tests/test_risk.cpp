#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "sparse_testbench/risk.hpp"

namespace st = sparse_testbench;

namespace {

const st::RegimeSpec kSparse = st::RegimeSpec::sparse(0.6, 1.0);

}  // namespace

TEST(EstimateRisk, AlwaysRejectStub) {
  const auto e = st::estimate_risk(st::build_test(st::TestName::always_reject, kSparse, 64), kSparse,
                                   64, 200, 1, st::DesignFamily::orthogonal);
  EXPECT_EQ(e.type1.value, 1.0);
  EXPECT_EQ(e.type2_bayes.value, 0.0);
  EXPECT_EQ(e.type2_worst_candidate.value, 0.0);
  EXPECT_EQ(e.risk, 1.0);
}

TEST(EstimateRisk, NeverRejectStub) {
  const auto e = st::estimate_risk(st::build_test(st::TestName::never_reject, kSparse, 64), kSparse,
                                   64, 200, 1, st::DesignFamily::gaussian);
  EXPECT_EQ(e.type1.value, 0.0);
  EXPECT_EQ(e.type2_bayes.value, 1.0);
  EXPECT_EQ(e.risk, 1.0);
}

TEST(EstimateRisk, ChisqNullMatchesExactTail) {
  const double p = 100;
  const auto regime = st::RegimeSpec::dense(0.3, -0.1);
  const auto e = st::estimate_risk(st::build_test(st::TestName::chisq_center, regime, p), regime, p,
                                   4000, 5, st::DesignFamily::orthogonal);
  const double exact = boost::math::cdf(boost::math::complement(boost::math::chi_squared(p), p));
  EXPECT_NEAR(exact, 0.4812, 1e-3);
  EXPECT_LE(std::abs(e.type1.value - exact), 3.0 * e.type1.ci_halfwidth);
}

TEST(EstimateRisk, MaterializedOrthogonalAgreesInLaw) {
  const double p = 32;
  const auto t = st::build_test(st::TestName::max_sqrt2logp, kSparse, p);
  st::RiskOptions full;
  full.materialize_orthogonal = true;
  const auto a = st::estimate_risk(t, kSparse, p, 2000, 3, st::DesignFamily::orthogonal);
  const auto b = st::estimate_risk(t, kSparse, p, 2000, 3, st::DesignFamily::orthogonal, full);
  const double exact = 1.0 - std::pow(2.0 * st::normal_cdf(t.cutoff) - 1.0, p);
  EXPECT_LE(std::abs(a.type1.value - exact), 3.0 * a.type1.ci_halfwidth);
  EXPECT_LE(std::abs(b.type1.value - exact), 3.0 * b.type1.ci_halfwidth);
}

TEST(EstimateRisk, ThreadCountDoesNotChangeResults) {
  const double p = 128;
  std::vector<st::TestSpec> tests = {st::build_test(st::TestName::max_sqrt2logp, kSparse, p),
                                     st::build_test(st::TestName::scan_taustar, kSparse, p)};
  st::RiskOptions one, four;
  one.threads = 1;
  four.threads = 4;
  for (auto family : {st::DesignFamily::orthogonal, st::DesignFamily::rademacher}) {
    const double pp = family == st::DesignFamily::orthogonal ? p : 16;
    if (family != st::DesignFamily::orthogonal) {
      tests = {st::build_test(st::TestName::max_sqrt2logp, kSparse, pp)};
    }
    const auto a = st::estimate_risks(tests, kSparse, pp, 300, 9, family, one);
    const auto b = st::estimate_risks(tests, kSparse, pp, 300, 9, family, four);
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].type1.count, b[i].type1.count);
      EXPECT_EQ(a[i].type2_bayes.count, b[i].type2_bayes.count);
      EXPECT_EQ(a[i].type2_worst_candidate.count, b[i].type2_worst_candidate.count);
      EXPECT_EQ(a[i].risk, b[i].risk);
    }
  }
}

TEST(EstimateRisk, RiskComposition) {
  const double p = 256;
  const auto e = st::estimate_risk(st::build_test(st::TestName::max_sqrt2logp, kSparse, p), kSparse,
                                   p, 500, 2, st::DesignFamily::orthogonal);
  const double type2 = std::max(e.type2_bayes.value, e.type2_worst_candidate.value);
  EXPECT_DOUBLE_EQ(e.risk, e.type1.value + type2);
  double worst = 0.0;
  for (const auto& c : e.type2_candidates) worst = std::max(worst, c.value);
  EXPECT_EQ(e.type2_worst_candidate.value, worst);
  EXPECT_GT(e.risk_se, 0.0);
}

TEST(EstimateRisk, Errors) {
  const auto t = st::build_test(st::TestName::max_sqrt2logp, kSparse, 64);
  EXPECT_THROW(st::estimate_risk(t, kSparse, 64, 99, 1, st::DesignFamily::orthogonal), st::DomainError);
  EXPECT_THROW(st::estimate_risk(t, kSparse, 128, 100, 1, st::DesignFamily::orthogonal),
               st::DomainError);
}

TEST(CandidateSignals, Shapes) {
  const auto r = st::resolve_regime(kSparse, 1000);
  const auto c = st::candidate_signals(r);
  ASSERT_EQ(c[0].support.size(), static_cast<std::size_t>(r.s));
  EXPECT_EQ(c[0].support.front(), 0u);
  EXPECT_EQ(c[1].coords(1), -r.amplitude);
  EXPECT_EQ(c[2].support.back(), static_cast<std::size_t>((r.s - 1) * r.p / r.s));
}

TEST(FitExponent, PowerLawOnLogP) {
  std::vector<st::FitPoint> pts;
  for (int k = 8; k <= 12; ++k) {
    const double p = std::ldexp(1.0, k);
    pts.push_back({p, 1.0, std::pow(p, -0.5), 0});
  }
  const auto fit = st::fit_exponent(pts, st::Side::log_risk, st::Scale::log_p);
  EXPECT_NEAR(fit.slope, -0.5, 1e-9);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
}

TEST(FitExponent, StretchedExponentialOnP2Delta) {
  std::vector<st::FitPoint> pts;
  for (int k = 8; k <= 12; ++k) {
    const double p = std::ldexp(1.0, k);
    pts.push_back({p, 1.0, std::exp(-std::pow(p, 0.1) / 16.0), 0});
  }
  const auto fit = st::fit_exponent(pts, st::Side::log_risk, st::Scale::p_2delta, 0.05);
  EXPECT_NEAR(fit.slope, -1.0 / 16.0, 1e-9);
}

TEST(FitExponent, CensorsZeroRisk) {
  std::vector<st::FitPoint> pts = {{100, 1, 0.1, 1000}, {200, 1, 0.01, 1000}, {400, 1, 0.0, 1000}};
  const auto fit = st::fit_exponent(pts, st::Side::log_risk, st::Scale::log_p);
  EXPECT_TRUE(fit.censored);
  EXPECT_TRUE(fit.points[2].censored);
  EXPECT_NEAR(fit.points[2].y, std::log(1.0 / 2000.0), 1e-12);
}

TEST(FitExponent, Errors) {
  std::vector<st::FitPoint> two = {{100, 1, 0.1, 0}, {200, 1, 0.1, 0}};
  EXPECT_THROW(st::fit_exponent(two, st::Side::log_risk, st::Scale::log_p), st::DomainError);
  std::vector<st::FitPoint> unsorted = {{100, 1, 0.1, 0}, {50, 1, 0.1, 0}, {200, 1, 0.1, 0}};
  EXPECT_THROW(st::fit_exponent(unsorted, st::Side::log_risk, st::Scale::log_p), st::DomainError);
}

TEST(CompareTests, DegenerateWhenEveryCutoffIsInfinite) {
  st::ComparisonOverrides inf;
  inf.scan_cutoff = inf.hc_cutoff = inf.max_cutoff = std::numeric_limits<double>::infinity();
  const auto report = st::compare_tests(st::RegimeSpec::sparse(0.6, 2.0), 128, 100, 1,
                                        st::DesignFamily::orthogonal, {}, inf);
  EXPECT_TRUE(report.degenerate);
  EXPECT_EQ(report.scan.risk, 1.0);
  EXPECT_EQ(report.inf_hc().risk, 1.0);
  EXPECT_EQ(report.inf_max().risk, 1.0);
}

TEST(CompareTests, ReportShape) {
  const auto report = st::compare_tests(st::RegimeSpec::sparse(0.6, 2.0), 256, 200, 1);
  EXPECT_EQ(report.hc.size(), st::kHcCutoffMultipliers.size());
  EXPECT_EQ(report.max.size(), st::kMaxCutoffLevels.size());
  EXPECT_NEAR(report.optimal_exponent, -0.245, 1e-12);
  for (const auto& e : report.hc) EXPECT_GE(e.risk, report.inf_hc().risk);
  EXPECT_FALSE(report.degenerate);
}

TEST(CompareTests, Preconditions) {
  EXPECT_THROW(st::compare_tests(st::RegimeSpec::sparse(0.6, 0.5), 128, 100, 1), st::DomainError);
  EXPECT_THROW(st::compare_tests(st::RegimeSpec::dense(0.4, 0.2), 128, 100, 1), st::DomainError);
}

TEST(Threads, EnvironmentParsing) {
  ::setenv("SPARSE_TESTBENCH_THREADS", "3", 1);
  EXPECT_EQ(st::threads_from_env(), 3);
  ::setenv("SPARSE_TESTBENCH_THREADS", "abc", 1);
  EXPECT_THROW(st::threads_from_env(), st::ConfigError);
  ::unsetenv("SPARSE_TESTBENCH_THREADS");
  EXPECT_EQ(st::threads_from_env(), 0);
  EXPECT_GE(st::resolve_threads(0), 1u);
}
