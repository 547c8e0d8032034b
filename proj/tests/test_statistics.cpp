#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sparse_testbench/oracle.hpp"
#include "sparse_testbench/statistics.hpp"

namespace st = sparse_testbench;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST(ComputeZ, OrthogonalIsRotation) {
  const auto x = st::generate_design(st::DesignFamily::orthogonal, 8, 8, 2);
  const auto obs = st::simulate(x, nullptr, 5);
  const auto gram = st::gram_factorize(x);
  const Eigen::MatrixXd q = x.entries() / std::sqrt(8.0);
  const auto half = st::compute_z(obs, gram, st::WhiteningVariant::half_inverse);
  const auto full = st::compute_z(obs, gram, st::WhiteningVariant::full_inverse);
  EXPECT_LT((half.z - q.transpose() * obs.y).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((full.z - half.z / std::sqrt(8.0)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ComputeZ, NullVarianceIsOne) {
  const auto x = st::generate_design(st::DesignFamily::gaussian, 20, 5, 3);
  const auto gram = st::gram_factorize(x);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(5), sq = Eigen::VectorXd::Zero(5);
  const int reps = 10000;
  for (int i = 0; i < reps; ++i) {
    const auto z = st::compute_z(st::simulate(x, nullptr, static_cast<std::uint64_t>(i)), gram,
                                 st::WhiteningVariant::half_inverse).z;
    sum += z;
    sq += z.cwiseProduct(z);
  }
  for (Eigen::Index j = 0; j < 5; ++j) {
    const double mean = sum(j) / reps;
    EXPECT_NEAR(sq(j) / reps - mean * mean, 1.0, 0.05);
  }
}

TEST(ProjectIsotropic, MatchesMaterializedPath) {
  const std::int64_t n = 16;
  const auto x = st::generate_design(st::DesignFamily::orthogonal, n, n, 4);
  const auto obs = st::simulate(x, nullptr, 1);
  const auto full = st::project(obs, st::gram_factorize(x));
  const auto iso = st::project_isotropic(full.z, n);
  EXPECT_LT((iso.xty - full.xty).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((iso.z_tilde - full.z_tilde).cwiseAbs().maxCoeff(), 1e-10);
  const std::vector<std::size_t> support = {1, 5};
  const std::vector<double> values = {0.3, -0.3};
  EXPECT_NEAR(iso.quad_form(support, values), full.quad_form(support, values), 1e-10);
}

TEST(Statistics, ChiSquare) {
  EXPECT_EQ(st::chi_sq_stat(vec({3, 4})), 25.0);
  EXPECT_EQ(st::chi_sq_stat(vec({0, 0})), 0.0);
}

TEST(Statistics, Max) {
  EXPECT_EQ(st::max_stat(vec({1, -7, 3})), 7.0);
  EXPECT_EQ(st::max_stat(vec({0, 0, 0})), 0.0);
}

TEST(Statistics, Scan) {
  EXPECT_EQ(st::scan_stat(vec({3, -1, 2}), 2, st::ScanFlavor::abs_sum), 5.0);
  EXPECT_EQ(st::scan_stat(vec({-3, -2, 1}), 2, st::ScanFlavor::signed_sum), 5.0);
  EXPECT_THROW(st::scan_stat(vec({1, 2}), 3, st::ScanFlavor::abs_sum), st::DomainError);
}

TEST(Statistics, ScanMatchesSubsetEnumeration) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd z(9);
    for (Eigen::Index i = 0; i < 9; ++i) z(i) = g(rng);
    for (std::int64_t s = 1; s <= 4; ++s) {
      double best_abs = -1e300, best_signed = -1e300;
      st::for_each_combination(9, static_cast<std::size_t>(s), [&](std::span<const std::size_t> sub) {
        double a = 0.0, plus = 0.0;
        for (auto i : sub) a += std::abs(z(static_cast<Eigen::Index>(i))), plus += z(static_cast<Eigen::Index>(i));
        best_abs = std::max(best_abs, a);
        best_signed = std::max({best_signed, plus, -plus});
      });
      EXPECT_NEAR(st::scan_stat(z, s, st::ScanFlavor::abs_sum), best_abs, 1e-12);
      EXPECT_NEAR(st::scan_stat(z, s, st::ScanFlavor::signed_sum), best_signed, 1e-12);
    }
  }
}

TEST(Statistics, HigherCriticismCount) {
  EXPECT_EQ(st::hc_stat(vec({0.5, 3.0, -2.5}), 2.0), 2);
  EXPECT_EQ(st::hc_stat(vec({0.5, 3.0, -2.5}), 10.0), 0);
}

TEST(IntegratedLr, SingleTerm) {
  const auto x = st::generate_design(st::DesignFamily::gaussian, 5, 1, 1);
  const auto obs = st::simulate(x, nullptr, 2);
  const double a = 0.4;
  const st::PriorSpec prior{1, 1, a, st::SignMode::one_directional};
  const Eigen::VectorXd col = x.entries().col(0);
  const double expected = a * obs.y.dot(col) - 0.5 * a * a * col.squaredNorm();
  EXPECT_NEAR(st::integrated_lr(obs, prior).log_value, expected, 1e-12);
}

TEST(IntegratedLr, AgreesWithDirectSummation) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto x = st::generate_design(st::DesignFamily::gaussian, 10, 6, seed);
    const auto obs = st::simulate(x, nullptr, seed + 100);
    for (auto mode : {st::SignMode::one_directional, st::SignMode::symmetric_signed}) {
      const st::PriorSpec prior{6, 2, 0.5, mode};
      const double ref = st::exact_lr_reference(obs, prior);
      EXPECT_NEAR(st::integrated_lr(obs, prior).value() / ref, 1.0, 1e-10);
    }
  }
}

TEST(IntegratedLr, NoOverflowForLargeTerms) {
  const std::int64_t n = 64;
  Eigen::VectorXd z = Eigen::VectorXd::Constant(8, 60.0);
  const auto data = st::project_isotropic(z, n);
  const st::PriorSpec prior{8, 2, 2.0, st::SignMode::one_directional};
  const auto lr = st::integrated_lr(data, prior);
  EXPECT_TRUE(std::isfinite(lr.log_value));
  // Every term equals 2 * (A sqrt(n) * 60) - A^2 n.
  EXPECT_NEAR(lr.log_value, 2.0 * 2.0 * 8.0 * 60.0 - 4.0 * 64.0, 1e-9);
}

TEST(IntegratedLr, MonteCarloConverges) {
  const auto x = st::generate_design(st::DesignFamily::gaussian, 20, 8, 1);
  const auto obs = st::simulate(x, nullptr, 4);
  const st::PriorSpec prior{8, 2, 0.3, st::SignMode::symmetric_signed};
  const auto data = st::project(obs, st::gram_factorize(x));
  const double exact = st::integrated_lr(data, prior).value();
  const double mc = st::integrated_lr(data, prior, st::LrMode::monte_carlo(200000, 7)).value();
  EXPECT_NEAR(mc / exact, 1.0, 0.02);
}

TEST(IntegratedLr, BudgetExceeded) {
  const auto data = st::project_isotropic(Eigen::VectorXd::Zero(200), 200);
  const st::PriorSpec prior{200, 4, 0.1, st::SignMode::one_directional};
  EXPECT_THROW(st::integrated_lr(data, prior), st::BudgetError);
}

TEST(TruncatedLr, AllAboveLevelIsZero) {
  const auto data = st::project_isotropic(Eigen::VectorXd::Constant(5, 10.0), 5);
  const st::PriorSpec prior{5, 2, 0.5, st::SignMode::one_directional};
  EXPECT_EQ(st::truncated_lr(data, prior).value(), 0.0);
}

TEST(TruncatedLr, AllBelowLevelEqualsUntruncated) {
  const auto data = st::project_isotropic(Eigen::VectorXd::Constant(5, 0.1), 5);
  const st::PriorSpec prior{5, 2, 0.5, st::SignMode::one_directional};
  EXPECT_EQ(st::truncated_lr(data, prior).log_value, st::integrated_lr(data, prior).log_value);
}

TEST(TruncatedLr, SignedPriorRejected) {
  const auto data = st::project_isotropic(Eigen::VectorXd::Zero(5), 5);
  const st::PriorSpec prior{5, 2, 0.5, st::SignMode::symmetric_signed};
  EXPECT_THROW(st::truncated_lr(data, prior), st::DomainError);
}
