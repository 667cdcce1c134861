#include "moma/evaluation.hpp"

#include "moma/errors.hpp"
#include "moma/parallel.hpp"

#include <chrono>
#include <cmath>

namespace moma {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

} // namespace

Eigen::MatrixXd aggregate_matrix(const RowStochasticMatrix& p_bar, const RowStochasticMatrix& g) {
    if (p_bar.n_cols() != g.n_rows())
        throw DomainError("aggregate_matrix: P_bar columns must match G rows");
    const auto l_rows = static_cast<Eigen::Index>(p_bar.n_rows());
    const auto l_cols = static_cast<Eigen::Index>(g.n_cols());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(l_rows, l_cols);
    parallel_for(p_bar.n_rows(), [&](std::size_t l) {
        const auto row = p_bar.row(l);
        for (std::size_t k = 0; k < row.size(); ++k) {
            const auto grow = g.row(row.cols[k]);
            for (std::size_t j = 0; j < grow.size(); ++j)
                m(static_cast<Eigen::Index>(l), grow.cols[j]) += row.vals[k] * grow.vals[j];
        }
    });
    return m;
}

std::vector<double> solve_aggregate(const RowStochasticMatrix& p_bar, const RowStochasticMatrix& g,
                                    std::span<const double> uc, double alpha, double* residual) {
    if (p_bar.n_rows() != g.n_cols() || uc.size() != p_bar.n_rows())
        throw DomainError("solve_aggregate: expected an L x N slice and an N x L aggregation");
    Eigen::MatrixXd a = aggregate_matrix(p_bar, g);
    a *= -alpha;
    a.diagonal().array() += 1.0;
    return solve_dense(a, uc, 1e-10, residual);
}

std::vector<double> lift_value(const RowStochasticMatrix& p, const RowStochasticMatrix& g,
                               std::span<const double> r, std::span<const double> cost, double alpha) {
    const auto gr = g.apply(r);
    auto v = p.apply(gr);
    for (std::size_t x = 0; x < v.size(); ++x)
        v[x] = cost[x] + alpha * v[x];
    return v;
}

std::vector<double> aggregate_value(const MarkovRewardProcess& mrp, const AggregationScheme& scheme) {
    if (scheme.G.n_rows() != mrp.size())
        throw DomainError("scheme was built for a different lattice");
    const auto p_bar = mrp.P.row_slice(scheme.grid.rep_indices());
    return solve_aggregate(p_bar, scheme.G, scheme.U.apply(mrp.cost), mrp.discount);
}

GapSummary gap_summary(std::span<const double> reference, std::span<const double> candidate) {
    if (reference.size() != candidate.size())
        throw DomainError("gap_summary: length mismatch");
    GapSummary g;
    const std::size_t n = reference.size();
    g.abs_gap.resize(n);
    g.rel_gap.resize(n);
    double sum = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
        g.abs_gap[x] = std::abs(candidate[x] - reference[x]);
        g.rel_gap[x] = g.abs_gap[x] / std::max(reference[x], kGapFloor);
        sum += g.rel_gap[x];
        g.max_rel = std::max(g.max_rel, g.rel_gap[x]);
        g.max_abs = std::max(g.max_abs, g.abs_gap[x]);
    }
    g.mean_rel = n ? sum / static_cast<double>(n) : 0.0;
    return g;
}

InterpolationResidual interpolation_residuals(std::span<const double> v,
                                              const AggregationScheme& scheme) {
    if (v.size() != scheme.G.n_rows())
        throw DomainError("interpolation_residuals: length mismatch");
    const auto gv = scheme.G.apply(scheme.U.apply(v));
    InterpolationResidual out;
    out.per_state.resize(v.size());
    for (std::size_t x = 0; x < v.size(); ++x) {
        out.per_state[x] = std::abs(v[x] - gv[x]);
        out.sup = std::max(out.sup, out.per_state[x]);
    }
    return out;
}

EvaluationReport moma_evaluate(const MarkovRewardProcess& mrp, const AggregationScheme& scheme,
                               const EvaluationOptions& options) {
    EvaluationReport rep;
    auto t0 = Clock::now();
    const auto p_bar = mrp.P.row_slice(scheme.grid.rep_indices());
    const auto uc = scheme.U.apply(mrp.cost);
    rep.time_preprocess_ms = ms_since(t0);

    t0 = Clock::now();
    rep.R = solve_aggregate(p_bar, scheme.G, uc, mrp.discount, &rep.aggregate_residual);
    rep.time_solve_ms = ms_since(t0);

    t0 = Clock::now();
    rep.V_moma = lift_value(mrp.P, scheme.G, rep.R, mrp.cost, mrp.discount);
    rep.time_lift_ms = ms_since(t0);

    const auto uv = scheme.U.apply(rep.V_moma);
    for (std::size_t l = 0; l < uv.size(); ++l)
        rep.lift_consistency = std::max(rep.lift_consistency, std::abs(uv[l] - rep.R[l]));
    rep.interp_residual_moma = interpolation_residuals(rep.V_moma, scheme).sup;

    if (options.compute_exact) {
        t0 = Clock::now();
        rep.V_exact = exact_value(mrp, options.solve);
        rep.time_exact_ms = ms_since(t0);
        rep.gaps = gap_summary(*rep.V_exact, rep.V_moma);
        rep.interp_residual_exact = interpolation_residuals(*rep.V_exact, scheme).sup;
    }
    return rep;
}

BackToDeltaCheck backtodelta_from_values(std::span<const double> v, std::span<const double> v_tilde,
                                         const AggregationScheme& scheme, double alpha) {
    BackToDeltaCheck c;
    for (std::size_t x = 0; x < v.size(); ++x)
        c.lhs = std::max(c.lhs, std::abs(v[x] - v_tilde[x]));
    c.rhs = (interpolation_residuals(v, scheme).sup + interpolation_residuals(v_tilde, scheme).sup) /
            (1.0 - alpha);
    return c;
}

BackToDeltaCheck backtodelta_check(const MarkovRewardProcess& mrp, const AggregationScheme& scheme,
                                   const SolveOptions& options) {
    EvaluationOptions eo;
    eo.solve = options;
    const auto rep = moma_evaluate(mrp, scheme, eo);
    return backtodelta_from_values(*rep.V_exact, rep.V_moma, scheme, mrp.discount);
}

} // namespace moma
