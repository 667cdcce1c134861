#include "moma/aggregation.hpp"

#include "moma/errors.hpp"
#include "moma/evaluation.hpp"
#include "moma/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace moma {

namespace {

struct AxisFactor {
    std::size_t k_lo, k_hi;
    double w_lo, w_hi; // w_hi == 0 on collapsed axes
    bool collapsed;
};

AxisFactor axis_factor(const AxisGrid& axis, double t) {
    const std::size_t pos = axis.find(static_cast<Coord>(std::llround(t)));
    if (pos < axis.size() && static_cast<double>(axis.values[pos]) == t)
        return {pos, pos, 1.0, 0.0, true};
    const std::size_t k = axis.bracket(static_cast<Coord>(std::floor(t)));
    const double lo = static_cast<double>(axis.values[k]);
    const double hi = static_cast<double>(axis.values[k + 1]);
    const double w_hi = (t - lo) / (hi - lo);
    return {k, k + 1, 1.0 - w_hi, w_hi, false};
}

WeightRow combine(const CoarseGrid& grid, const std::vector<AxisFactor>& f) {
    WeightRow row{{0, 1.0}};
    for (std::size_t i = 0; i < f.size(); ++i) {
        const std::size_t stride = grid.meta_stride(i);
        if (f[i].collapsed) {
            for (auto& e : row)
                e.first += f[i].k_lo * stride;
            continue;
        }
        WeightRow next;
        next.reserve(row.size() * 2);
        for (const auto& e : row) {
            next.emplace_back(e.first + f[i].k_lo * stride, e.second * f[i].w_lo);
            next.emplace_back(e.first + f[i].k_hi * stride, e.second * f[i].w_hi);
        }
        row = std::move(next);
    }
    std::sort(row.begin(), row.end());
    return row;
}

void check_point(const CoarseGrid& grid, const StateLattice& lattice, std::span<const Coord> y) {
    if (grid.dims() != lattice.dims() || y.size() != lattice.dims())
        throw DomainError("point dimension does not match the grid");
    if (!lattice.contains(y))
        throw DomainError("point lies outside the lattice");
}

std::vector<AxisFactor> lattice_factors(const CoarseGrid& grid, std::span<const Coord> y) {
    std::vector<AxisFactor> f(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        f[i] = axis_factor(grid.axis(i), static_cast<double>(y[i]));
    return f;
}

RowStochasticMatrix rows_to_matrix(std::vector<WeightRow>& rows, std::size_t n_cols) {
    std::vector<std::size_t> row_ptr(rows.size() + 1, 0);
    for (std::size_t r = 0; r < rows.size(); ++r)
        row_ptr[r + 1] = row_ptr[r] + rows[r].size();
    std::vector<ColIndex> cols(row_ptr.back());
    std::vector<double> vals(row_ptr.back());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::size_t k = row_ptr[r];
        for (const auto& [c, v] : rows[r]) {
            cols[k] = static_cast<ColIndex>(c);
            vals[k++] = v;
        }
        WeightRow().swap(rows[r]);
    }
    return RowStochasticMatrix::from_csr(rows.size(), n_cols, std::move(row_ptr), std::move(cols),
                                         std::move(vals));
}

} // namespace

EnclosingBox enclosing_box(const CoarseGrid& grid, const StateLattice& lattice,
                           std::span<const Coord> y) {
    check_point(grid, lattice, y);
    const auto f = lattice_factors(grid, y);
    EnclosingBox box;
    for (std::size_t i = 0; i < f.size(); ++i) {
        box.lower.push_back(grid.axis(i).values[f[i].k_lo]);
        box.upper.push_back(grid.axis(i).values[f[i].k_hi]);
    }
    for (const auto& e : combine(grid, f))
        box.corners.push_back(e.first);
    return box;
}

WeightRow weights(const CoarseGrid& grid, const StateLattice& lattice, std::span<const Coord> y) {
    check_point(grid, lattice, y);
    return combine(grid, lattice_factors(grid, y));
}

WeightRow mstep_weights(const CoarseGrid& grid, std::span<const double> target, bool clamp) {
    if (target.size() != grid.dims())
        throw DomainError("target dimension does not match the grid");
    std::vector<AxisFactor> f(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) {
        const auto& axis = grid.axis(i);
        double t = target[i];
        const double lo = static_cast<double>(axis.front());
        const double hi = static_cast<double>(axis.back());
        if (!std::isfinite(t))
            throw DomainError("target is not finite");
        if (t < lo || t > hi) {
            if (!clamp)
                throw DomainError("target lies outside the grid hull");
            t = std::clamp(t, lo, hi);
        }
        f[i] = axis_factor(axis, t);
    }
    WeightRow row = combine(grid, f);
    std::erase_if(row, [](const auto& e) { return e.second == 0.0; });
    return row;
}

RowStochasticMatrix build_G(const CoarseGrid& grid, const StateLattice& lattice) {
    if (grid.dims() != lattice.dims())
        throw DomainError("grid and lattice dimensions differ");
    std::vector<WeightRow> rows(lattice.size());
    parallel_for_chunked(lattice.size(), [&](std::size_t begin, std::size_t end) {
        StateVec y(lattice.dims());
        for (std::size_t x = begin; x < end; ++x) {
            lattice.to_coords(x, y);
            rows[x] = combine(grid, lattice_factors(grid, y));
        }
    }, 1024);
    return rows_to_matrix(rows, grid.meta_count());
}

RowStochasticMatrix build_mstep_G(const MarkovRewardProcess& mrp, const CoarseGrid& grid, int m,
                                  bool clamp) {
    if (m < 1)
        throw DomainError("m must be at least 1");
    const std::size_t d = mrp.lattice.dims();
    const std::size_t n = mrp.size();
    // targets(y) = E_y[X_{m-1}], one column per axis
    std::vector<std::vector<double>> targets(d, std::vector<double>(n));
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t x = 0; x < n; ++x)
            targets[i][x] = static_cast<double>(mrp.lattice.coord(x, i));
        for (int k = 1; k < m; ++k)
            targets[i] = mrp.P.apply(targets[i]);
    }
    std::vector<WeightRow> rows(n);
    parallel_for(n, [&](std::size_t x) {
        std::vector<double> t(d);
        for (std::size_t i = 0; i < d; ++i)
            t[i] = targets[i][x];
        rows[x] = mstep_weights(grid, t, clamp);
        double total = 0.0;
        for (const auto& e : rows[x])
            total += e.second;
        for (auto& e : rows[x])
            e.second /= total;
    });
    return rows_to_matrix(rows, grid.meta_count());
}

AggregationScheme scheme_from_grid(const StateLattice& lattice, CoarseGrid grid) {
    AggregationScheme s;
    s.U = build_U(grid, lattice);
    s.G = build_G(grid, lattice);
    s.grid = std::move(grid);
    return s;
}

AggregationScheme make_scheme(const StateLattice& lattice, double s, const GridOptions& options) {
    return scheme_from_grid(lattice, build_grid(lattice, s, options));
}

AggregationScheme identity_scheme(const StateLattice& lattice) {
    return scheme_from_grid(lattice, full_grid(lattice));
}

SisterChain::SisterChain(const MarkovRewardProcess& mrp, RowStochasticMatrix g, RowStochasticMatrix u)
    : mrp_(&mrp), g_(std::move(g)), u_(std::move(u)) {
    if (g_.n_rows() != mrp.size() || u_.n_cols() != mrp.size() || g_.n_cols() != u_.n_rows())
        throw DomainError("sister chain: G must be N x L and U must be L x N");
}

std::vector<double> SisterChain::apply(std::span<const double> f) const {
    return mrp_->P.apply(g_.apply(u_.apply(f)));
}

RowStochasticMatrix SisterChain::materialize(std::size_t nnz_budget) const {
    return multiply(multiply(mrp_->P, g_, nnz_budget), u_, nnz_budget);
}

const std::vector<double>& SisterChain::aggregate_value() const {
    if (r_.empty()) {
        const auto p_bar = multiply(u_, mrp_->P);
        r_ = solve_aggregate(p_bar, g_, u_.apply(mrp_->cost), mrp_->discount);
    }
    return r_;
}

const std::vector<double>& SisterChain::lifted_value() const {
    if (v_tilde_.empty())
        v_tilde_ = lift_value(mrp_->P, g_, aggregate_value(), mrp_->cost, mrp_->discount);
    return v_tilde_;
}

SisterChain lifted_chain(const MarkovRewardProcess& mrp, const AggregationScheme& scheme) {
    return SisterChain(mrp, scheme.G, scheme.U);
}

SisterChain lifted_chain(const MarkovRewardProcess& mrp, const RowStochasticMatrix& u,
                         const RowStochasticMatrix& g) {
    return SisterChain(mrp, g, u);
}

double first_moment_gap(const SisterChain& sister) {
    const auto& mrp = sister.focal();
    const std::size_t d = mrp.lattice.dims();
    const std::size_t n = mrp.size();
    std::vector<double> sq(n, 0.0);
    std::vector<double> w1(n);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t x = 0; x < n; ++x)
            w1[x] = static_cast<double>(mrp.lattice.coord(x, i));
        const auto pt = sister.apply(w1);
        const auto p = mrp.P.apply(w1);
        for (std::size_t x = 0; x < n; ++x)
            sq[x] += (pt[x] - p[x]) * (pt[x] - p[x]);
    }
    double worst = 0.0;
    for (double v : sq)
        worst = std::max(worst, std::sqrt(v));
    return worst;
}

SecondMomentReport second_moment_gap(const SisterChain& sister, double s) {
    const auto& mrp = sister.focal();
    const auto& lat = mrp.lattice;
    const std::size_t d = lat.dims();
    const std::size_t n = mrp.size();
    const std::size_t l_count = sister.meta_count();

    // representative coordinates (U W_1)
    std::vector<std::vector<double>> rep(d);
    for (std::size_t i = 0; i < d; ++i) {
        std::vector<double> w1(n);
        for (std::size_t x = 0; x < n; ++x)
            w1[x] = static_cast<double>(lat.coord(x, i));
        rep[i] = sister.U().apply(w1);
    }

    std::vector<double> sq(n, 0.0);
    std::vector<double> h(n);
    std::vector<double> rep_ij(l_count);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            // h(y) = (G U W_2)_{ij}(y) - y_i y_j, then P h
            for (std::size_t l = 0; l < l_count; ++l)
                rep_ij[l] = rep[i][l] * rep[j][l];
            const auto guw2 = sister.G().apply(rep_ij);
            for (std::size_t y = 0; y < n; ++y)
                h[y] = guw2[y] - static_cast<double>(lat.coord(y, i)) *
                                     static_cast<double>(lat.coord(y, j));
            const auto ph = mrp.P.apply(h);
            for (std::size_t x = 0; x < n; ++x)
                sq[x] += ph[x] * ph[x];
        }
    }

    const auto jumps = max_jumps(mrp);
    SecondMomentReport out;
    out.mismatch.resize(n);
    out.normalized.resize(n);
    out.normalized_s.resize(n);
    StateVec coords(d);
    for (std::size_t x = 0; x < n; ++x) {
        lat.to_coords(x, coords);
        const double scale = 1.0 + euclidean_norm(std::span<const Coord>(coords)) + jumps[x];
        out.mismatch[x] = std::sqrt(sq[x]);
        out.normalized[x] = out.mismatch[x] / std::pow(scale, 2.0 * s);
        out.normalized_s[x] = out.mismatch[x] / std::pow(scale, s);
        out.max_mismatch = std::max(out.max_mismatch, out.mismatch[x]);
        out.max_normalized = std::max(out.max_normalized, out.normalized[x]);
        out.max_normalized_s = std::max(out.max_normalized_s, out.normalized_s[x]);
    }
    return out;
}

} // namespace moma
