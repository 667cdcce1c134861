#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace moma {

using Coord = std::int64_t;
using StateIndex = std::size_t;
using StateVec = std::vector<Coord>;

/**
 * Integer box  prod_i [lower_i, upper_i]  intersected with Z^d.
 *
 * States are enumerated row-major (mixed radix, axis 0 slowest), so the flat
 * index of a state only depends on the box and never on how it was visited.
 * Instances are immutable after construction.
 */
class StateLattice {
  public:
    StateLattice() = default;
    StateLattice(std::vector<Coord> lower, std::vector<Coord> upper);

    /// The cube [lo, hi]^dims.
    static StateLattice cube(std::size_t dims, Coord lo, Coord hi);

    std::size_t dims() const noexcept { return lower_.size(); }
    std::size_t size() const noexcept { return size_; }
    std::span<const Coord> lower() const noexcept { return lower_; }
    std::span<const Coord> upper() const noexcept { return upper_; }
    Coord lower(std::size_t axis) const { return lower_.at(axis); }
    Coord upper(std::size_t axis) const { return upper_.at(axis); }
    /// Number of lattice points on one axis.
    std::size_t extent(std::size_t axis) const {
        return static_cast<std::size_t>(upper_.at(axis) - lower_.at(axis) + 1);
    }
    std::size_t stride(std::size_t axis) const { return strides_.at(axis); }

    bool contains(std::span<const Coord> coords) const noexcept;

    /// Throws DomainError when coords fall outside the box.
    StateIndex to_index(std::span<const Coord> coords) const;
    /// Throws DomainError when index >= size().
    StateVec to_coords(StateIndex index) const;
    void to_coords(StateIndex index, std::span<Coord> out) const;
    /// Single coordinate of a state without materializing the vector.
    Coord coord(StateIndex index, std::size_t axis) const noexcept {
        return lower_[axis] + static_cast<Coord>((index / strides_[axis]) % extent_[axis]);
    }

    bool operator==(const StateLattice& other) const noexcept {
        return lower_ == other.lower_ && upper_ == other.upper_;
    }

  private:
    std::vector<Coord> lower_;
    std::vector<Coord> upper_;
    std::vector<std::size_t> extent_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

double euclidean_norm(std::span<const Coord> coords) noexcept;
double euclidean_norm(std::span<const double> coords) noexcept;

} // namespace moma
