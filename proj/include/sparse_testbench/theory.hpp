#pragma once

// Closed-form layer: detection boundary, regime classification and the
// predicted minimax exponents.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sparse_testbench/error.hpp"
#include "sparse_testbench/signal.hpp"

namespace sparse_testbench {

/// Sparse detection boundary rho*(alpha) for 1/2 < alpha < 1.
inline double rho_star(double alpha) {
  if (!(alpha > 0.5 && alpha < 1.0)) {
    throw DomainError("rho_star needs 1/2 < alpha < 1 (got " + std::to_string(alpha) + ")");
  }
  if (alpha < 0.75) return alpha - 0.5;
  const double root = 1.0 - std::sqrt(1.0 - alpha);
  return root * root;
}

enum class RegimeLabel {
  below_dense,
  below_sparse_small_r,
  below_sparse_large_r,
  above_dense_near,
  above_dense_far,
  above_sparse,
  boundary_fixed_s,
  gap,
};

inline std::string_view to_string(RegimeLabel label) {
  switch (label) {
    case RegimeLabel::below_dense: return "below_dense";
    case RegimeLabel::below_sparse_small_r: return "below_sparse_small_r";
    case RegimeLabel::below_sparse_large_r: return "below_sparse_large_r";
    case RegimeLabel::above_dense_near: return "above_dense_near";
    case RegimeLabel::above_dense_far: return "above_dense_far";
    case RegimeLabel::above_sparse: return "above_sparse";
    case RegimeLabel::boundary_fixed_s: return "boundary_fixed_s";
    case RegimeLabel::gap: return "gap";
  }
  return "?";
}

/// Normalizer of the limit.
enum class Scale { log_p, p_2delta, p_half_plus_delta, s_log_p, none };

inline std::string_view to_string(Scale scale) {
  switch (scale) {
    case Scale::log_p: return "log p";
    case Scale::p_2delta: return "p^(2delta)";
    case Scale::p_half_plus_delta: return "p^(1/2+delta)";
    case Scale::s_log_p: return "s log p";
    case Scale::none: return "none";
  }
  return "?";
}

/// Quantity whose normalized limit is predicted.
enum class Side { log_one_minus_risk, log_risk, risk_itself };

inline std::string_view to_string(Side side) {
  switch (side) {
    case Side::log_one_minus_risk: return "log_one_minus_risk";
    case Side::log_risk: return "log_risk";
    case Side::risk_itself: return "risk_itself";
  }
  return "?";
}

struct ExponentPrediction {
  RegimeLabel regime_label = RegimeLabel::gap;
  Scale scale = Scale::none;
  std::optional<double> limit_value;  // empty in the gap regime
  Side side = Side::log_risk;
};

/// Labels a regime and attaches its limit when one is known; never throws
/// for a valid spec (gap is a label).
inline ExponentPrediction classify_regime(const RegimeSpec& regime) {
  regime.validate();
  ExponentPrediction out;
  const double alpha = regime.alpha;
  switch (regime.mode) {
    case SignalMode::boundary_fixed_s:
      out.regime_label = RegimeLabel::boundary_fixed_s;
      out.scale = Scale::none;
      out.side = Side::risk_itself;
      out.limit_value = std::pow(0.5, static_cast<double>(*regime.fixed_s));
      return out;

    case SignalMode::dense_delta: {
      // Signed delta: A^2 = p^(alpha - 1/2 + delta) / n.
      const double delta = regime.delta;
      if (!(alpha <= 0.5)) return out;
      if (delta < 0.0) {
        if (delta > -0.5) {
          out.regime_label = RegimeLabel::below_dense;
          out.scale = Scale::log_p;
          out.side = Side::log_one_minus_risk;
          out.limit_value = delta;
        }
        return out;
      }
      if (delta > 0.0 && delta < 0.1 && alpha - 0.5 + 2.0 * delta < 0.0) {
        out.regime_label = RegimeLabel::above_dense_near;
        out.scale = Scale::p_2delta;
        out.side = Side::log_risk;
        out.limit_value = -1.0 / 16.0;
      } else if (delta > 0.0 && delta < 0.5 && alpha - 0.5 + delta > 0.0) {
        out.regime_label = RegimeLabel::above_dense_far;
        out.scale = Scale::p_half_plus_delta;
        out.side = Side::log_risk;
        out.limit_value = -1.0 / 8.0;
      }
      return out;
    }

    case SignalMode::sparse_r: {
      if (!(alpha > 0.5)) return out;
      const double r = regime.r;
      if (r <= rho_star(alpha)) {
        out.scale = Scale::log_p;
        out.side = Side::log_one_minus_risk;
        if (4.0 * r <= 1.0) {
          out.regime_label = RegimeLabel::below_sparse_small_r;
          out.limit_value = r - (alpha - 0.5);
        } else {
          out.regime_label = RegimeLabel::below_sparse_large_r;
          const double root = 1.0 - std::sqrt(r);
          out.limit_value = 1.0 - alpha - root * root;
        }
      } else if (r > alpha) {
        out.regime_label = RegimeLabel::above_sparse;
        out.scale = Scale::s_log_p;
        out.side = Side::log_risk;
        out.limit_value = -(r - alpha) * (r - alpha) / (4.0 * r);
      }
      return out;
    }
  }
  return out;
}

/// Predicted limit; throws GapRegimeError where no limit is established.
inline ExponentPrediction predict_exponent(const RegimeSpec& regime) {
  ExponentPrediction out = classify_regime(regime);
  if (out.regime_label == RegimeLabel::gap) {
    throw GapRegimeError("no exponent is established for this regime");
  }
  return out;
}

struct SuboptimalityRecord {
  double alpha = 0.0;
  double r = 0.0;
  double optimal_exponent = 0.0;  // scan / minimax, on the s log p scale
  double hc_exponent = 0.0;       // inf over cutoffs of ideal HC(sqrt(2 log p))
  double max_exponent = 0.0;      // inf over cutoffs of the Max test
  std::string statement;
};

/// For r > alpha > 1/2 the HC and Max tests have no negative exponent on the
/// s log p scale, whereas the optimum is -(r-alpha)^2/(4r).
inline SuboptimalityRecord suboptimality_gap(double alpha, double r) {
  if (!(alpha > 0.5 && alpha < 1.0)) throw DomainError("suboptimality_gap needs 1/2 < alpha < 1");
  if (!(r > alpha)) throw DomainError("suboptimality_gap needs r > alpha");
  SuboptimalityRecord out;
  out.alpha = alpha;
  out.r = r;
  out.optimal_exponent = -(r - alpha) * (r - alpha) / (4.0 * r);
  out.statement =
      "inf-cutoff ideal HC and Max risks exceed exp(-C s log p) for every C > 0: "
      "no negative s log p exponent";
  return out;
}

enum class PhaseMode { figure1_dense, figure1_sparse, figure2_dense, figure2_sparse };

inline std::string_view to_string(PhaseMode m) {
  switch (m) {
    case PhaseMode::figure1_dense: return "figure1_dense";
    case PhaseMode::figure1_sparse: return "figure1_sparse";
    case PhaseMode::figure2_dense: return "figure2_dense";
    case PhaseMode::figure2_sparse: return "figure2_sparse";
  }
  return "?";
}

inline PhaseMode parse_phase_mode(std::string_view s) {
  for (auto m : {PhaseMode::figure1_dense, PhaseMode::figure1_sparse, PhaseMode::figure2_dense,
                 PhaseMode::figure2_sparse}) {
    if (to_string(m) == s) return m;
  }
  throw DomainError("unknown phase-diagram mode '" + std::string(s) + "'");
}

inline constexpr std::string_view kPowerless = "powerless region";
inline constexpr std::string_view kPowerful = "powerful region";

/// Label of one (alpha, y) point; y is delta for the dense modes, r otherwise.
inline std::string phase_label(PhaseMode mode, double alpha, double y) {
  switch (mode) {
    case PhaseMode::figure1_dense:
      return std::string(y > 0.0 ? kPowerful : kPowerless);
    case PhaseMode::figure1_sparse:
      return std::string(y > rho_star(alpha) ? kPowerful : kPowerless);
    case PhaseMode::figure2_dense:
      return std::string(to_string(classify_regime(RegimeSpec::dense(alpha, y)).regime_label));
    case PhaseMode::figure2_sparse:
      return std::string(to_string(classify_regime(RegimeSpec::sparse(alpha, y)).regime_label));
  }
  return "?";
}

struct PhaseCell {
  double alpha = 0.0;
  double y = 0.0;
  std::string label;
};

struct PhaseGrid {
  PhaseMode mode = PhaseMode::figure1_sparse;
  std::string y_name;  // "delta" or "r"
  double alpha_lo = 0.0, alpha_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
  int alpha_cells = 0, y_cells = 0;
  std::vector<PhaseCell> cells;  // alpha-major
};

/// Default axis ranges: dense modes over alpha in (0, 1/2], delta in (-1/2, 1/2);
/// sparse modes over alpha in (1/2, 1), r in (0, 1.5).
inline PhaseGrid phase_diagram(PhaseMode mode, int alpha_cells, int y_cells) {
  if (alpha_cells < 2 || y_cells < 2) throw DomainError("phase_diagram needs resolution >= 2");
  PhaseGrid grid;
  grid.mode = mode;
  grid.alpha_cells = alpha_cells;
  grid.y_cells = y_cells;
  const bool dense = mode == PhaseMode::figure1_dense || mode == PhaseMode::figure2_dense;
  grid.y_name = dense ? "delta" : "r";
  if (dense) {
    grid.alpha_lo = 0.0, grid.alpha_hi = 0.5, grid.y_lo = -0.5, grid.y_hi = 0.5;
  } else {
    grid.alpha_lo = 0.5, grid.alpha_hi = 1.0, grid.y_lo = 0.0, grid.y_hi = 1.5;
  }
  const double da = (grid.alpha_hi - grid.alpha_lo) / alpha_cells;
  const double dy = (grid.y_hi - grid.y_lo) / y_cells;
  grid.cells.reserve(static_cast<std::size_t>(alpha_cells) * static_cast<std::size_t>(y_cells));
  for (int i = 0; i < alpha_cells; ++i) {
    const double alpha = grid.alpha_lo + (i + 0.5) * da;
    for (int j = 0; j < y_cells; ++j) {
      const double y = grid.y_lo + (j + 0.5) * dy;
      grid.cells.push_back({alpha, y, phase_label(mode, alpha, y)});
    }
  }
  return grid;
}

inline PhaseGrid phase_diagram(PhaseMode mode, int resolution) {
  return phase_diagram(mode, resolution, resolution);
}

}  // namespace sparse_testbench
