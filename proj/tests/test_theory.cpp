#include <gtest/gtest.h>

#include <cmath>

#include "sparse_testbench/svg.hpp"
#include "sparse_testbench/theory.hpp"

namespace st = sparse_testbench;

TEST(RhoStar, SpotValues) {
  EXPECT_NEAR(st::rho_star(0.6), 0.1, 1e-12);
  EXPECT_NEAR(st::rho_star(0.75), 0.25, 1e-12);
  EXPECT_NEAR(st::rho_star(0.84), 0.36, 1e-12);
}

TEST(RhoStar, ContinuousAtThreeQuarters) {
  const double eps = 1e-6;
  EXPECT_LT(std::abs(st::rho_star(0.75 - eps) - st::rho_star(0.75 + eps)), 1e-5);
}

TEST(RhoStar, RejectsOutsideDomain) {
  EXPECT_THROW(st::rho_star(0.5), st::DomainError);
  EXPECT_THROW(st::rho_star(1.0), st::DomainError);
  EXPECT_THROW(st::rho_star(0.2), st::DomainError);
}

TEST(RhoStar, Monotone) {
  double prev = 0.0;
  for (double a = 0.51; a < 1.0; a += 0.01) {
    const double v = st::rho_star(a);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(ClassifyRegime, SparseExamples) {
  using st::RegimeLabel;
  EXPECT_EQ(st::classify_regime(st::RegimeSpec::sparse(0.6, 1.0)).regime_label,
            RegimeLabel::above_sparse);
  EXPECT_EQ(st::classify_regime(st::RegimeSpec::sparse(0.6, 0.08)).regime_label,
            RegimeLabel::below_sparse_small_r);
  EXPECT_EQ(st::classify_regime(st::RegimeSpec::sparse(0.6, 0.3)).regime_label, RegimeLabel::gap);
  EXPECT_EQ(st::classify_regime(st::RegimeSpec::sparse(0.9, 0.36)).regime_label,
            RegimeLabel::below_sparse_large_r);
  // r = alpha belongs to the gap.
  EXPECT_EQ(st::classify_regime(st::RegimeSpec::sparse(0.6, 0.6)).regime_label, RegimeLabel::gap);
}

TEST(ClassifyRegime, DenseExamples) {
  using st::RegimeLabel;
  EXPECT_EQ(st::classify_regime(st::RegimeSpec::dense(0.4, -0.2)).regime_label,
            RegimeLabel::below_dense);
  EXPECT_EQ(st::classify_regime(st::RegimeSpec::dense(0.3, 0.05)).regime_label,
            RegimeLabel::above_dense_near);
  EXPECT_EQ(st::classify_regime(st::RegimeSpec::dense(0.4, 0.3)).regime_label,
            RegimeLabel::above_dense_far);
  EXPECT_EQ(st::classify_regime(st::RegimeSpec::dense(0.4, 0.0)).regime_label, RegimeLabel::gap);
  EXPECT_EQ(st::classify_regime(st::RegimeSpec::dense(0.7, 0.1)).regime_label, RegimeLabel::gap);
}

TEST(PredictExponent, SpecExamples) {
  const auto a = st::predict_exponent(st::RegimeSpec::sparse(0.6, 1.0));
  EXPECT_EQ(a.side, st::Side::log_risk);
  EXPECT_EQ(a.scale, st::Scale::s_log_p);
  EXPECT_NEAR(*a.limit_value, -0.04, 1e-12);

  const auto b = st::predict_exponent(st::RegimeSpec::sparse(0.9, 0.36));
  EXPECT_EQ(b.side, st::Side::log_one_minus_risk);
  EXPECT_EQ(b.scale, st::Scale::log_p);
  EXPECT_NEAR(*b.limit_value, -0.06, 1e-12);

  const auto c = st::predict_exponent(st::RegimeSpec::boundary(3));
  EXPECT_EQ(c.side, st::Side::risk_itself);
  EXPECT_NEAR(*c.limit_value, 0.125, 1e-12);
}

TEST(PredictExponent, GapThrows) {
  EXPECT_THROW(st::predict_exponent(st::RegimeSpec::sparse(0.6, 0.3)), st::GapRegimeError);
}

TEST(PredictExponent, BelowLimitsVanishAtBoundary) {
  for (int i = 0; i < 10; ++i) {
    const double alpha = 0.52 + 0.047 * i;
    const double rho = st::rho_star(alpha);
    const auto pred = st::predict_exponent(st::RegimeSpec::sparse(alpha, rho));
    EXPECT_NEAR(*pred.limit_value, 0.0, 1e-12) << "alpha=" << alpha;
  }
}

TEST(Suboptimality, Examples) {
  const auto a = st::suboptimality_gap(0.6, 1.0);
  EXPECT_NEAR(a.optimal_exponent, -0.04, 1e-12);
  EXPECT_EQ(a.hc_exponent, 0.0);
  EXPECT_EQ(a.max_exponent, 0.0);
  EXPECT_NEAR(st::suboptimality_gap(0.55, 0.56).optimal_exponent, -(0.01 * 0.01) / (4 * 0.56),
              1e-15);
  EXPECT_THROW(st::suboptimality_gap(0.6, 0.5), st::DomainError);
}

TEST(PhaseDiagram, Labels) {
  EXPECT_EQ(st::phase_label(st::PhaseMode::figure1_sparse, 0.8, 0.5), "powerful region");
  EXPECT_EQ(st::phase_label(st::PhaseMode::figure1_sparse, 0.8, 0.2), "powerless region");
  EXPECT_EQ(st::phase_label(st::PhaseMode::figure2_sparse, 0.8, 0.9), "above_sparse");
  EXPECT_EQ(st::phase_label(st::PhaseMode::figure2_dense, 0.4, -0.2), "below_dense");
}

TEST(PhaseDiagram, GridAndSvg) {
  const auto grid = st::phase_diagram(st::PhaseMode::figure1_sparse, 20);
  EXPECT_EQ(grid.cells.size(), 400u);
  const std::string svg = st::svg::phase_diagram_svg(grid);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("powerless-region"), std::string::npos);
  EXPECT_NE(svg.find("detection-boundary"), std::string::npos);
  EXPECT_THROW(st::parse_phase_mode("figure3"), st::DomainError);
}
