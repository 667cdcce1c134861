#include "moma/chain.hpp"

#include "moma/errors.hpp"
#include "moma/parallel.hpp"

#include <cmath>
#include <string>

namespace moma {

MarkovRewardProcess::MarkovRewardProcess(StateLattice lat, RowStochasticMatrix p,
                                         std::vector<double> c, double alpha)
    : lattice(std::move(lat)), P(std::move(p)), cost(std::move(c)), discount(alpha) {
    const std::size_t n = lattice.size();
    if (P.n_rows() != n || P.n_cols() != n)
        throw DomainError("transition matrix does not match the lattice size");
    if (cost.size() != n)
        throw DomainError("cost vector does not match the lattice size");
    if (!(discount > 0.0 && discount < 1.0))
        throw DomainError("discount must lie in (0,1)");
    for (double v : cost)
        if (!std::isfinite(v) || v < 0.0)
            throw DomainError("cost entries must be finite and nonnegative");
}

std::vector<double> exact_value(const MarkovRewardProcess& mrp, const SolveOptions& options) {
    return solve_discounted(mrp.P, mrp.discount, mrp.cost, options);
}

std::vector<double> apply(const RowStochasticMatrix& p, std::span<const double> f) {
    return p.apply(f);
}

std::vector<double> coordinate_table(const StateLattice& lattice) {
    const std::size_t d = lattice.dims();
    std::vector<double> out(lattice.size() * d);
    parallel_for(lattice.size(), [&](std::size_t x) {
        for (std::size_t i = 0; i < d; ++i)
            out[x * d + i] = static_cast<double>(lattice.coord(x, i));
    });
    return out;
}

LocalMoments local_moments(const MarkovRewardProcess& mrp) {
    const auto& lat = mrp.lattice;
    const std::size_t d = lat.dims();
    const std::size_t n = lat.size();
    LocalMoments m;
    m.dims = d;
    m.mu.assign(n * d, 0.0);
    m.sigma2.assign(n * d * d, 0.0);
    parallel_for(n, [&](std::size_t x) {
        const auto row = mrp.P.row(x);
        double* mu = &m.mu[x * d];
        double* s2 = &m.sigma2[x * d * d];
        std::vector<double> diff(d);
        for (std::size_t k = 0; k < row.size(); ++k) {
            for (std::size_t i = 0; i < d; ++i)
                diff[i] = static_cast<double>(lat.coord(row.cols[k], i) - lat.coord(x, i));
            for (std::size_t i = 0; i < d; ++i) {
                mu[i] += row.vals[k] * diff[i];
                for (std::size_t j = 0; j < d; ++j)
                    s2[i * d + j] += row.vals[k] * diff[i] * diff[j];
            }
        }
    });
    return m;
}

double max_jump(const MarkovRewardProcess& mrp, StateIndex x) {
    if (x >= mrp.size())
        throw DomainError("state index out of range");
    const auto& lat = mrp.lattice;
    const auto row = mrp.P.row(x);
    double best = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < lat.dims(); ++i) {
            const double dd = static_cast<double>(lat.coord(row.cols[k], i) - lat.coord(x, i));
            s += dd * dd;
        }
        best = std::max(best, s);
    }
    return std::sqrt(best);
}

std::vector<double> max_jumps(const MarkovRewardProcess& mrp) {
    std::vector<double> out(mrp.size());
    parallel_for(mrp.size(), [&](std::size_t x) { out[x] = max_jump(mrp, x); });
    return out;
}

std::vector<double> scaled_value(const MarkovRewardProcess& mrp, double eps,
                                 const SolveOptions& options) {
    if (!(eps >= 0.0 && eps <= 1.0))
        throw DomainError("eps must lie in [0,1]");
    std::vector<double> c(mrp.size());
    StateVec coords(mrp.lattice.dims());
    for (std::size_t x = 0; x < mrp.size(); ++x) {
        mrp.lattice.to_coords(x, coords);
        c[x] = mrp.cost[x] / std::pow(1.0 + euclidean_norm(std::span<const Coord>(coords)), eps);
    }
    return solve_discounted(mrp.P, mrp.discount, c, options);
}

MarkovRewardProcess m_step_chain(const MarkovRewardProcess& mrp, int m, std::size_t nnz_budget) {
    if (m < 1)
        throw DomainError("m must be at least 1");
    RowStochasticMatrix pm = mrp.P;
    double alpha_m = mrp.discount;
    for (int k = 1; k < m; ++k) {
        pm = multiply(pm, mrp.P, nnz_budget);
        alpha_m *= mrp.discount;
    }
    return MarkovRewardProcess(mrp.lattice, std::move(pm), mrp.cost, alpha_m);
}

double verify_mstep_identity(const MarkovRewardProcess& mrp, int m, const SolveOptions& options,
                             std::size_t nnz_budget) {
    const auto sub = m_step_chain(mrp, m, nnz_budget);
    const auto vm = exact_value(sub, options);
    const auto v = exact_value(mrp, options);
    const std::size_t n = mrp.size();

    // correction(x) = sum_k alpha^k (P^k V^m - V^m)(x), weight = 1 + sum_k alpha^k
    std::vector<double> correction(n, 0.0);
    std::vector<double> pk_vm = vm;
    double weight = 1.0;
    double ak = 1.0;
    for (int k = 1; k < m; ++k) {
        pk_vm = mrp.P.apply(pk_vm);
        ak *= mrp.discount;
        weight += ak;
        for (std::size_t x = 0; x < n; ++x)
            correction[x] += ak * (pk_vm[x] - vm[x]);
    }
    double worst = 0.0;
    for (std::size_t x = 0; x < n; ++x)
        worst = std::max(worst, std::abs(vm[x] - (v[x] - correction[x]) / weight));
    return worst;
}

DeltaProfile delta_from_images(std::span<const double> pf, std::span<const double> ptf) {
    if (pf.size() != ptf.size())
        throw DomainError("delta: dimension mismatch");
    DeltaProfile out;
    out.per_state.resize(pf.size());
    for (std::size_t x = 0; x < pf.size(); ++x) {
        out.per_state[x] = std::abs(ptf[x] - pf[x]);
        out.sup = std::max(out.sup, out.per_state[x]);
    }
    return out;
}

DeltaProfile delta_f(const RowStochasticMatrix& p, const RowStochasticMatrix& p_tilde,
                     std::span<const double> f) {
    if (p.n_rows() != p_tilde.n_rows() || p.n_cols() != p_tilde.n_cols())
        throw DomainError("delta: matrices have different shapes");
    return delta_from_images(p.apply(f), p_tilde.apply(f));
}

double delta_at(const RowStochasticMatrix& p, const RowStochasticMatrix& p_tilde,
                std::span<const double> f, StateIndex x) {
    if (p.n_rows() != p_tilde.n_rows() || p.n_cols() != p_tilde.n_cols() || f.size() != p.n_cols())
        throw DomainError("delta: dimension mismatch");
    if (x >= p.n_rows())
        throw DomainError("state index out of range");
    return std::abs(p_tilde.row(x).dot(f) - p.row(x).dot(f));
}

double sup_delta(const RowStochasticMatrix& p, const RowStochasticMatrix& p_tilde,
                 std::span<const double> f) {
    return delta_f(p, p_tilde, f).sup;
}

} // namespace moma
