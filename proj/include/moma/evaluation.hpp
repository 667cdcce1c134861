#pragma once

#include "moma/aggregation.hpp"
#include "moma/chain.hpp"

#include <optional>
#include <span>
#include <vector>

namespace moma {

/// Floor applied to the denominator of relative gaps.
inline constexpr double kGapFloor = 1e-12;

/// Solves (I - alpha P_bar G) R = Uc densely; P_bar holds the rows of P at the representative states.
std::vector<double> solve_aggregate(const RowStochasticMatrix& p_bar, const RowStochasticMatrix& g,
                                    std::span<const double> uc, double alpha,
                                    double* residual = nullptr);

/// Dense L x L matrix P_bar G.
Eigen::MatrixXd aggregate_matrix(const RowStochasticMatrix& p_bar, const RowStochasticMatrix& g);

/// V~ = c + alpha P G R.
std::vector<double> lift_value(const RowStochasticMatrix& p, const RowStochasticMatrix& g,
                               std::span<const double> r, std::span<const double> cost, double alpha);

std::vector<double> aggregate_value(const MarkovRewardProcess& mrp, const AggregationScheme& scheme);

struct GapSummary {
    std::vector<double> abs_gap;
    std::vector<double> rel_gap; ///< |a - b| / max(b, floor)
    double mean_rel = 0.0;
    double max_rel = 0.0;
    double max_abs = 0.0;
};

/// Gaps of `candidate` relative to `reference`.
GapSummary gap_summary(std::span<const double> reference, std::span<const double> candidate);

struct EvaluationReport {
    std::optional<std::vector<double>> V_exact;
    std::vector<double> V_moma;
    std::vector<double> R;
    std::optional<GapSummary> gaps;
    double interp_residual_exact = 0.0; ///< |V - GV|_inf, only with V_exact
    double interp_residual_moma = 0.0;  ///< |V~ - GV~|_inf
    double lift_consistency = 0.0;      ///< |U V~ - R|_inf
    double aggregate_residual = 0.0;
    // wall-clock milliseconds
    double time_preprocess_ms = 0.0;
    double time_solve_ms = 0.0;
    double time_lift_ms = 0.0;
    double time_exact_ms = 0.0;
};

struct EvaluationOptions {
    bool compute_exact = true;
    SolveOptions solve;
};

EvaluationReport moma_evaluate(const MarkovRewardProcess& mrp, const AggregationScheme& scheme,
                               const EvaluationOptions& options = {});

struct InterpolationResidual {
    std::vector<double> per_state; ///< |V - GV|
    double sup = 0.0;
};

/// (GV)(y) = sum_l g_yl V(x_l).
InterpolationResidual interpolation_residuals(std::span<const double> v,
                                              const AggregationScheme& scheme);

struct BackToDeltaCheck {
    double lhs = 0.0; ///< |V - V~|_inf
    double rhs = 0.0; ///< (|V - GV|_inf + |V~ - GV~|_inf) / (1 - alpha)
    double slack() const noexcept { return rhs - lhs; }
};

BackToDeltaCheck backtodelta_check(const MarkovRewardProcess& mrp, const AggregationScheme& scheme,
                                   const SolveOptions& options = {});
/// Same bound from precomputed values.
BackToDeltaCheck backtodelta_from_values(std::span<const double> v, std::span<const double> v_tilde,
                                         const AggregationScheme& scheme, double alpha);

} // namespace moma
