#pragma once

#include "moma/lattice.hpp"
#include "moma/sparse.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace moma {

/// Strictly increasing grid values on one axis, covering [lower, upper].
struct AxisGrid {
    std::vector<Coord> values;

    std::size_t size() const noexcept { return values.size(); }
    Coord front() const { return values.front(); }
    Coord back() const { return values.back(); }
    /// Position k with values[k] <= y <= values[k+1]; the last gap for y == back().
    std::size_t bracket(Coord y) const;
    /// Position of y if y is a grid value, otherwise size().
    std::size_t find(Coord y) const;
};

struct GridOptions {
    /// Center of the recursion on each axis; empty means the origin.
    std::vector<Coord> origin;
    /// Multiply the spacing function by (1 - alpha)^{1/4}.
    bool discount_multiplier = false;
    double alpha = 0.0;
};

/**
 * Grid on [lower, upper] with gaps growing like z^s away from `origin`:
 *   f(0) = max(0, lower - origin),  f(k+1) = ceil(f(k) + m f(k)^s) + 1,
 * values origin + f(k), the first f(k) past upper clamped to upper, and the
 * same recursion mirrored below origin.
 */
AxisGrid axis_grid(Coord lower, Coord upper, double s, Coord origin = 0, double multiplier = 1.0);

/// Cartesian product of axis grids; meta index l enumerates grid multi-indices row-major.
class CoarseGrid {
  public:
    CoarseGrid() = default;
    static CoarseGrid from_axes(const StateLattice& lattice, std::vector<AxisGrid> axes, double s);

    std::size_t dims() const noexcept { return axes_.size(); }
    std::size_t meta_count() const noexcept { return meta_count_; }
    double spacing_exponent() const noexcept { return spacing_; }
    const AxisGrid& axis(std::size_t i) const { return axes_.at(i); }
    std::span<const AxisGrid> axes() const noexcept { return axes_; }

    /// Coordinates of representative state x_l.
    std::span<const Coord> rep_state(std::size_t l) const {
        return std::span<const Coord>(rep_coords_).subspan(l * dims(), dims());
    }
    /// Lattice index of x_l.
    StateIndex rep_index(std::size_t l) const { return rep_index_.at(l); }
    std::span<const StateIndex> rep_indices() const noexcept { return rep_index_; }

    /// Meta index of the grid multi-index k (one position per axis).
    std::size_t meta_index(std::span<const std::size_t> k) const;
    std::vector<std::size_t> multi_index(std::size_t l) const;
    std::size_t meta_stride(std::size_t axis) const { return strides_.at(axis); }

    bool is_identity() const noexcept { return meta_count_ == lattice_size_; }

  private:
    std::vector<AxisGrid> axes_;
    std::vector<std::size_t> strides_;
    std::vector<Coord> rep_coords_;
    std::vector<StateIndex> rep_index_;
    std::size_t meta_count_ = 0;
    std::size_t lattice_size_ = 0;
    double spacing_ = 0.0;
};

CoarseGrid build_grid(const StateLattice& lattice, double s, const GridOptions& options = {});

/// Grid containing every lattice point; used for the identity scheme.
CoarseGrid full_grid(const StateLattice& lattice);

/// L x N binary matrix selecting each representative state.
RowStochasticMatrix build_U(const CoarseGrid& grid, const StateLattice& lattice);

/// (sqrt(2) / (1 - s))^d N^{1 - s}
double meta_count_bound(const StateLattice& lattice, double s);

} // namespace moma
