#pragma once

// Design matrices (orthogonal and isotropic sub-Gaussian families) and the
// spectral factorizations of X'X that every test statistic relies on.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "sparse_testbench/error.hpp"
#include "sparse_testbench/random.hpp"

namespace sparse_testbench {

enum class DesignFamily { orthogonal, gaussian, rademacher };

inline std::string_view to_string(DesignFamily f) {
  switch (f) {
    case DesignFamily::orthogonal: return "orthogonal";
    case DesignFamily::gaussian: return "gaussian";
    case DesignFamily::rademacher: return "rademacher";
  }
  return "?";
}

inline DesignFamily parse_design_family(std::string_view s) {
  if (s == "orthogonal") return DesignFamily::orthogonal;
  if (s == "gaussian") return DesignFamily::gaussian;
  if (s == "rademacher") return DesignFamily::rademacher;
  throw DomainError("unknown design family '" + std::string(s) + "'");
}

/// Relative eigenvalue floor below which X'X counts as singular.
inline constexpr double kEigenRelativeTolerance = 1e-12;
/// Degenerate draws tolerated before generate_design gives up.
inline constexpr int kMaxDesignRedraws = 10;

/// Spectral factorization of G = X'X.
struct GramFactorization {
  Eigen::MatrixXd gram;       // X'X
  Eigen::MatrixXd inv_sqrt;   // (X'X)^{-1/2}
  Eigen::MatrixXd inverse;    // (X'X)^{-1}
  Eigen::VectorXd eigenvalues;  // ascending, all positive
};

/// Factorizes a symmetric positive definite gram matrix. Throws
/// SingularityError when the smallest eigenvalue is not above
/// kEigenRelativeTolerance times the largest.
inline GramFactorization factorize_gram(const Eigen::MatrixXd& gram) {
  if (gram.rows() != gram.cols() || gram.rows() == 0) {
    throw DimensionError("gram matrix must be square and nonempty");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw SingularityError("eigendecomposition failed");
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double top = lambda.maxCoeff();
  if (!(top > 0.0) || !(lambda.minCoeff() > kEigenRelativeTolerance * top)) {
    throw SingularityError("X'X is not positive definite (min eigenvalue " +
                           std::to_string(lambda.minCoeff()) + ", max " + std::to_string(top) +
                           ")");
  }
  const Eigen::MatrixXd& v = eig.eigenvectors();
  GramFactorization out;
  out.gram = gram;
  out.eigenvalues = lambda;
  out.inv_sqrt = v * lambda.array().rsqrt().matrix().asDiagonal() * v.transpose();
  out.inverse = v * lambda.array().inverse().matrix().asDiagonal() * v.transpose();
  // Symmetrize away round-off.
  out.inv_sqrt = 0.5 * (out.inv_sqrt + out.inv_sqrt.transpose()).eval();
  out.inverse = 0.5 * (out.inverse + out.inverse.transpose()).eval();
  return out;
}

/// An n x p design with its family tag. Immutable; copies share storage.
class DesignMatrix {
 public:
  DesignMatrix(Eigen::MatrixXd entries, DesignFamily family, std::uint64_t seed,
               std::shared_ptr<const GramFactorization> gram = nullptr)
      : impl_(std::make_shared<Impl>(Impl{std::move(entries), family, seed, std::move(gram)})) {
    if (impl_->entries.rows() < 1 || impl_->entries.cols() < 1) {
      throw DimensionError("design must have n >= 1 and p >= 1");
    }
  }

  const Eigen::MatrixXd& entries() const { return impl_->entries; }
  DesignFamily family() const { return impl_->family; }
  Eigen::Index n() const { return impl_->entries.rows(); }
  Eigen::Index p() const { return impl_->entries.cols(); }
  std::uint64_t seed() const { return impl_->seed; }

  /// Factorization computed when the design was validated, if any.
  const std::shared_ptr<const GramFactorization>& cached_gram() const { return impl_->gram; }

 private:
  struct Impl {
    Eigen::MatrixXd entries;
    DesignFamily family;
    std::uint64_t seed;
    std::shared_ptr<const GramFactorization> gram;
  };
  std::shared_ptr<const Impl> impl_;
};

namespace detail {

inline Eigen::MatrixXd draw_entries(DesignFamily family, Eigen::Index n, Eigen::Index p,
                                    std::uint64_t seed) {
  Rng rng = make_rng(seed);
  Eigen::MatrixXd x(n, p);
  switch (family) {
    case DesignFamily::rademacher: {
      std::bernoulli_distribution coin(0.5);
      for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index i = 0; i < n; ++i) x(i, j) = coin(rng) ? 1.0 : -1.0;
      break;
    }
    case DesignFamily::gaussian:
    case DesignFamily::orthogonal: {
      std::normal_distribution<double> gauss;
      for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index i = 0; i < n; ++i) x(i, j) = gauss(rng);
      break;
    }
  }
  if (family == DesignFamily::orthogonal) {
    // Thin Q of a Gaussian matrix, scaled so that X'X = n I.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
    x = std::sqrt(static_cast<double>(n)) * q;
  }
  return x;
}

}  // namespace detail

/// Draws a design of the requested family. Pure in (family, n, p, seed).
/// Degenerate draws (X'X not positive definite) are redrawn from derived
/// seeds up to kMaxDesignRedraws times.
inline DesignMatrix generate_design(DesignFamily family, Eigen::Index n, Eigen::Index p,
                                    std::uint64_t seed) {
  if (n < 1 || p < 1) throw DimensionError("generate_design needs n >= 1 and p >= 1");
  if (family == DesignFamily::orthogonal && n < p) {
    throw DimensionError("orthogonal design needs n >= p (n=" + std::to_string(n) +
                         ", p=" + std::to_string(p) + ")");
  }
  for (int attempt = 0; attempt < kMaxDesignRedraws; ++attempt) {
    const std::uint64_t draw_seed =
        attempt == 0 ? seed : derive_seed(seed, stream::kRedraw + attempt);
    Eigen::MatrixXd x = detail::draw_entries(family, n, p, draw_seed);
    try {
      auto gram = std::make_shared<const GramFactorization>(
          factorize_gram((x.transpose() * x).eval()));
      return DesignMatrix(std::move(x), family, seed, std::move(gram));
    } catch (const SingularityError&) {
      continue;
    }
  }
  throw SingularityError("generate_design: " + std::to_string(kMaxDesignRedraws) +
                         " consecutive degenerate draws");
}

/// Spectral factorization of X'X; reuses the cached one when present.
inline GramFactorization gram_factorize(const DesignMatrix& x) {
  if (x.cached_gram()) return *x.cached_gram();
  return factorize_gram((x.entries().transpose() * x.entries()).eval());
}

/// |‖Xβ‖²/n - ‖β‖²| for one coefficient vector.
inline double rip_deviation_at(const DesignMatrix& x, const Eigen::VectorXd& beta) {
  if (beta.size() != x.p()) throw DimensionError("beta length must equal p");
  const double n = static_cast<double>(x.n());
  return std::abs((x.entries() * beta).squaredNorm() / n - beta.squaredNorm());
}

/// Largest restricted-isometry deviation over `trials` random s-sparse unit
/// vectors (uniform support, Gaussian direction).
inline double rip_deviation(const DesignMatrix& x, Eigen::Index s, int trials,
                            std::uint64_t seed) {
  if (s < 1 || s > x.p()) throw DimensionError("rip_deviation needs 1 <= s <= p");
  if (trials < 1) throw DomainError("rip_deviation needs trials >= 1");
  Rng rng = make_rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(x.p()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  double worst = 0.0;
  Eigen::VectorXd beta(x.p());
  for (int t = 0; t < trials; ++t) {
    // Partial Fisher-Yates for the support.
    for (Eigen::Index k = 0; k < s; ++k) {
      std::uniform_int_distribution<Eigen::Index> pick(k, x.p() - 1);
      std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(pick(rng))]);
    }
    beta.setZero();
    for (Eigen::Index k = 0; k < s; ++k) beta(idx[static_cast<std::size_t>(k)]) = gauss(rng);
    const double norm = beta.norm();
    if (norm == 0.0) continue;
    beta /= norm;
    worst = std::max(worst, rip_deviation_at(x, beta));
  }
  return worst;
}

/// Spectral norm ‖(X'X/n)^{1/2} - I‖ = max_λ |sqrt(λ/n) - 1|.
inline double gram_sqrt_deviation(const GramFactorization& gram, Eigen::Index n) {
  const double nn = static_cast<double>(n);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < gram.eigenvalues.size(); ++i) {
    worst = std::max(worst, std::abs(std::sqrt(gram.eigenvalues(i) / nn) - 1.0));
  }
  return worst;
}

inline double gram_sqrt_deviation(const DesignMatrix& x) {
  return gram_sqrt_deviation(gram_factorize(x), x.n());
}

}  // namespace sparse_testbench
