#include "moma/grid.hpp"

#include "moma/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace moma {

namespace {

// Offsets 0 = f(0) < f(1) < ... from `start`, last one clamped to `span`.
std::vector<Coord> recursion_offsets(Coord start, Coord span, double s, double multiplier) {
    std::vector<Coord> out{start};
    Coord f = start;
    while (f < span) {
        const double step = multiplier * std::pow(static_cast<double>(f), s);
        // tolerance keeps exact integer powers from rounding up
        Coord next = static_cast<Coord>(std::ceil(static_cast<double>(f) + step - 1e-9)) + 1;
        next = std::min(next, span);
        if (next <= f)
            next = f + 1;
        out.push_back(next);
        f = next;
    }
    return out;
}

void check_spacing(double s) {
    if (!(s > 0.0 && s < 1.0))
        throw DomainError("spacing exponent must lie in (0,1), got " + std::to_string(s));
}

} // namespace

std::size_t AxisGrid::bracket(Coord y) const {
    if (values.size() < 2)
        return 0;
    auto it = std::upper_bound(values.begin(), values.end(), y);
    std::size_t k = static_cast<std::size_t>(it - values.begin());
    k = k == 0 ? 0 : k - 1;
    return std::min(k, values.size() - 2);
}

std::size_t AxisGrid::find(Coord y) const {
    auto it = std::lower_bound(values.begin(), values.end(), y);
    if (it == values.end() || *it != y)
        return values.size();
    return static_cast<std::size_t>(it - values.begin());
}

AxisGrid axis_grid(Coord lower, Coord upper, double s, Coord origin, double multiplier) {
    check_spacing(s);
    if (lower > upper)
        throw DomainError("axis_grid: lower bound exceeds upper bound");
    if (!(multiplier > 0.0))
        throw DomainError("axis_grid: spacing multiplier must be positive");
    AxisGrid g;
    if (upper >= origin) {
        const Coord start = std::max<Coord>(0, lower - origin);
        for (Coord f : recursion_offsets(start, upper - origin, s, multiplier))
            g.values.push_back(origin + f);
    }
    if (lower < origin) {
        const Coord start = std::max<Coord>(0, origin - upper);
        for (Coord f : recursion_offsets(start, origin - lower, s, multiplier))
            g.values.push_back(origin - f);
    }
    std::sort(g.values.begin(), g.values.end());
    g.values.erase(std::unique(g.values.begin(), g.values.end()), g.values.end());
    return g;
}

CoarseGrid CoarseGrid::from_axes(const StateLattice& lattice, std::vector<AxisGrid> axes, double s) {
    const std::size_t d = lattice.dims();
    if (axes.size() != d)
        throw DomainError("one axis grid per lattice dimension required");
    for (std::size_t i = 0; i < d; ++i) {
        const auto& v = axes[i].values;
        if (v.empty() || v.front() != lattice.lower(i) || v.back() != lattice.upper(i))
            throw DomainError("axis grid " + std::to_string(i) + " must span the lattice bounds");
        if (!std::is_sorted(v.begin(), v.end()) ||
            std::adjacent_find(v.begin(), v.end()) != v.end())
            throw DomainError("axis grid values must be strictly increasing");
    }
    CoarseGrid g;
    g.axes_ = std::move(axes);
    g.spacing_ = s;
    g.lattice_size_ = lattice.size();
    g.strides_.assign(d, 1);
    g.meta_count_ = 1;
    for (std::size_t i = d; i-- > 0;) {
        g.strides_[i] = g.meta_count_;
        g.meta_count_ *= g.axes_[i].size();
    }
    g.rep_coords_.resize(g.meta_count_ * d);
    g.rep_index_.resize(g.meta_count_);
    for (std::size_t l = 0; l < g.meta_count_; ++l) {
        for (std::size_t i = 0; i < d; ++i)
            g.rep_coords_[l * d + i] = g.axes_[i].values[(l / g.strides_[i]) % g.axes_[i].size()];
        g.rep_index_[l] = lattice.to_index(g.rep_state(l));
    }
    return g;
}

std::size_t CoarseGrid::meta_index(std::span<const std::size_t> k) const {
    if (k.size() != dims())
        throw DomainError("multi-index has wrong length");
    std::size_t l = 0;
    for (std::size_t i = 0; i < dims(); ++i) {
        if (k[i] >= axes_[i].size())
            throw DomainError("multi-index out of range");
        l += k[i] * strides_[i];
    }
    return l;
}

std::vector<std::size_t> CoarseGrid::multi_index(std::size_t l) const {
    if (l >= meta_count_)
        throw DomainError("meta index out of range");
    std::vector<std::size_t> k(dims());
    for (std::size_t i = 0; i < dims(); ++i)
        k[i] = (l / strides_[i]) % axes_[i].size();
    return k;
}

CoarseGrid build_grid(const StateLattice& lattice, double s, const GridOptions& options) {
    check_spacing(s);
    const std::size_t d = lattice.dims();
    if (!options.origin.empty() && options.origin.size() != d)
        throw DomainError("grid origin must have one entry per axis");
    double multiplier = 1.0;
    if (options.discount_multiplier) {
        if (!(options.alpha > 0.0 && options.alpha < 1.0))
            throw DomainError("discount multiplier requires alpha in (0,1)");
        multiplier = std::pow(1.0 - options.alpha, 0.25);
    }
    std::vector<AxisGrid> axes;
    axes.reserve(d);
    for (std::size_t i = 0; i < d; ++i) {
        const Coord o = options.origin.empty() ? 0 : options.origin[i];
        axes.push_back(axis_grid(lattice.lower(i), lattice.upper(i), s, o, multiplier));
    }
    return CoarseGrid::from_axes(lattice, std::move(axes), s);
}

CoarseGrid full_grid(const StateLattice& lattice) {
    std::vector<AxisGrid> axes(lattice.dims());
    for (std::size_t i = 0; i < lattice.dims(); ++i)
        for (Coord v = lattice.lower(i); v <= lattice.upper(i); ++v)
            axes[i].values.push_back(v);
    return CoarseGrid::from_axes(lattice, std::move(axes), 0.5);
}

RowStochasticMatrix build_U(const CoarseGrid& grid, const StateLattice& lattice) {
    if (grid.dims() != lattice.dims())
        throw DomainError("grid and lattice dimensions differ");
    return RowStochasticMatrix::selection(lattice.size(), grid.rep_indices());
}

double meta_count_bound(const StateLattice& lattice, double s) {
    check_spacing(s);
    const double d = static_cast<double>(lattice.dims());
    return std::pow(std::sqrt(2.0) / (1.0 - s), d) *
           std::pow(static_cast<double>(lattice.size()), 1.0 - s);
}

} // namespace moma
