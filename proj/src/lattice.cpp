#include "moma/lattice.hpp"

#include "moma/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace moma {

StateLattice::StateLattice(std::vector<Coord> lower, std::vector<Coord> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.empty())
        throw DomainError("lattice must have at least one axis");
    if (lower_.size() != upper_.size())
        throw DomainError("lattice bounds have mismatched lengths");

    const std::size_t d = lower_.size();
    extent_.resize(d);
    strides_.resize(d);
    std::size_t n = 1;
    for (std::size_t i = d; i-- > 0;) {
        if (lower_[i] > upper_[i])
            throw DomainError("lattice axis " + std::to_string(i) + " has lower > upper");
        extent_[i] = static_cast<std::size_t>(upper_[i] - lower_[i] + 1);
        strides_[i] = n;
        if (n > std::numeric_limits<std::size_t>::max() / extent_[i])
            throw DomainError("lattice size overflows the index type");
        n *= extent_[i];
    }
    size_ = n;
}

StateLattice StateLattice::cube(std::size_t dims, Coord lo, Coord hi) {
    return StateLattice(std::vector<Coord>(dims, lo), std::vector<Coord>(dims, hi));
}

bool StateLattice::contains(std::span<const Coord> coords) const noexcept {
    if (coords.size() != dims())
        return false;
    for (std::size_t i = 0; i < coords.size(); ++i)
        if (coords[i] < lower_[i] || coords[i] > upper_[i])
            return false;
    return true;
}

StateIndex StateLattice::to_index(std::span<const Coord> coords) const {
    if (!contains(coords))
        throw DomainError("coordinates outside lattice");
    StateIndex index = 0;
    for (std::size_t i = 0; i < coords.size(); ++i)
        index += static_cast<std::size_t>(coords[i] - lower_[i]) * strides_[i];
    return index;
}

StateVec StateLattice::to_coords(StateIndex index) const {
    StateVec out(dims());
    to_coords(index, out);
    return out;
}

void StateLattice::to_coords(StateIndex index, std::span<Coord> out) const {
    if (index >= size_)
        throw DomainError("state index " + std::to_string(index) + " out of range");
    if (out.size() != dims())
        throw DomainError("coordinate buffer has wrong length");
    for (std::size_t i = 0; i < dims(); ++i) {
        out[i] = lower_[i] + static_cast<Coord>(index / strides_[i]);
        index %= strides_[i];
    }
}

double euclidean_norm(std::span<const Coord> coords) noexcept {
    double s = 0.0;
    for (Coord c : coords)
        s += static_cast<double>(c) * static_cast<double>(c);
    return std::sqrt(s);
}

double euclidean_norm(std::span<const double> coords) noexcept {
    double s = 0.0;
    for (double c : coords)
        s += c * c;
    return std::sqrt(s);
}

} // namespace moma
