#pragma once

#include "moma/chain.hpp"
#include "moma/grid.hpp"

#include <span>
#include <utility>
#include <vector>

namespace moma {

/// Weighted meta-state list, sorted by meta index.
using WeightRow = std::vector<std::pair<std::size_t, double>>;

/// Smallest grid box around a point; axes where the point sits on a grid value collapse.
struct EnclosingBox {
    std::vector<Coord> lower; ///< lower corner value per axis
    std::vector<Coord> upper; ///< equals lower on collapsed axes
    std::vector<std::size_t> corners; ///< meta indices, ascending
};

EnclosingBox enclosing_box(const CoarseGrid& grid, const StateLattice& lattice,
                           std::span<const Coord> y);

/// Multilinear corner weights of a lattice point; they sum to one and average to y.
WeightRow weights(const CoarseGrid& grid, const StateLattice& lattice, std::span<const Coord> y);

/// Weights of a real-valued target inside the grid hull. Targets outside the
/// hull raise DomainError unless `clamp` is set, in which case they are
/// projected onto the hull first.
WeightRow mstep_weights(const CoarseGrid& grid, std::span<const double> target, bool clamp = false);

/// N x L aggregation matrix, row y = weights(grid, y).
RowStochasticMatrix build_G(const CoarseGrid& grid, const StateLattice& lattice);

/// Aggregation matrix whose row y interpolates the target E_y[X_{m-1}].
RowStochasticMatrix build_mstep_G(const MarkovRewardProcess& mrp, const CoarseGrid& grid, int m,
                                  bool clamp = false);

/// Grid, disaggregation U (L x N) and aggregation G (N x L) for one lattice.
struct AggregationScheme {
    CoarseGrid grid;
    RowStochasticMatrix U;
    RowStochasticMatrix G;

    std::size_t meta_count() const noexcept { return grid.meta_count(); }
    /// (G f)(y) = sum_l g_yl f_l for a meta-state vector f (length L).
    std::vector<double> interpolate(std::span<const double> f) const { return G.apply(f); }
    /// f restricted to representative states (length L).
    std::vector<double> restrict_to_reps(std::span<const double> f) const { return U.apply(f); }
};

AggregationScheme make_scheme(const StateLattice& lattice, double s, const GridOptions& options = {});
AggregationScheme identity_scheme(const StateLattice& lattice);
AggregationScheme scheme_from_grid(const StateLattice& lattice, CoarseGrid grid);

/**
 * Lifted chain P~ = P G U with aggregate value R and lifted value V~ = c + alpha P G R.
 * P~ is applied in operator form; materialize() forms the product explicitly.
 */
class SisterChain {
  public:
    SisterChain(const MarkovRewardProcess& mrp, RowStochasticMatrix g, RowStochasticMatrix u);

    const MarkovRewardProcess& focal() const noexcept { return *mrp_; }
    const RowStochasticMatrix& G() const noexcept { return g_; }
    const RowStochasticMatrix& U() const noexcept { return u_; }
    std::size_t meta_count() const noexcept { return u_.n_rows(); }

    /// (P~ f)(x) for a full-length f.
    std::vector<double> apply(std::span<const double> f) const;
    RowStochasticMatrix materialize(std::size_t nnz_budget = RowStochasticMatrix::unlimited) const;

    /// Computes R and V~ on first use.
    const std::vector<double>& aggregate_value() const;
    const std::vector<double>& lifted_value() const;

  private:
    const MarkovRewardProcess* mrp_;
    RowStochasticMatrix g_;
    RowStochasticMatrix u_;
    mutable std::vector<double> r_;
    mutable std::vector<double> v_tilde_;
};

SisterChain lifted_chain(const MarkovRewardProcess& mrp, const AggregationScheme& scheme);
SisterChain lifted_chain(const MarkovRewardProcess& mrp, const RowStochasticMatrix& u,
                         const RowStochasticMatrix& g);

/// sup_x |P~ W_1(x) - P W_1(x)| with W_1 the coordinate map.
double first_moment_gap(const SisterChain& sister);

struct SecondMomentReport {
    std::vector<double> mismatch;      ///< Frobenius norm per state
    std::vector<double> normalized;    ///< mismatch / (1 + |x| + D_x)^{2s}
    std::vector<double> normalized_s;  ///< mismatch / (1 + |x| + D_x)^{s}
    double max_mismatch = 0.0;
    double max_normalized = 0.0;
    double max_normalized_s = 0.0;
};

/// |sum_l (PG)_xl x_l x_l^T - P W_2(x)|_F with W_2(y) = y y^T.
SecondMomentReport second_moment_gap(const SisterChain& sister, double s);

} // namespace moma
