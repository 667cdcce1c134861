#pragma once

#include "moma/lattice.hpp"
#include "moma/linalg.hpp"
#include "moma/sparse.hpp"

#include <span>
#include <vector>

namespace moma {

/// Discounted Markov reward process <S, P, c, alpha> on a lattice.
struct MarkovRewardProcess {
    StateLattice lattice;
    RowStochasticMatrix P;
    std::vector<double> cost;
    double discount = 0.0;

    MarkovRewardProcess() = default;
    /// Validates shapes, 0 < alpha < 1, and finite nonnegative cost.
    MarkovRewardProcess(StateLattice lattice, RowStochasticMatrix p, std::vector<double> cost,
                        double discount);

    std::size_t size() const noexcept { return lattice.size(); }
};

/// Per-state drift mu(x) = E_x[X_1 - x] and second moment E_x[(X_1 - x)(X_1 - x)^T].
struct LocalMoments {
    std::size_t dims = 0;
    std::vector<double> mu;     ///< N x d, row-major
    std::vector<double> sigma2; ///< N x d x d, row-major

    std::span<const double> mu_at(StateIndex x) const {
        return std::span<const double>(mu).subspan(x * dims, dims);
    }
    std::span<const double> sigma2_at(StateIndex x) const {
        return std::span<const double>(sigma2).subspan(x * dims * dims, dims * dims);
    }
};

/// Solves (I - alpha P) V = c.
std::vector<double> exact_value(const MarkovRewardProcess& mrp, const SolveOptions& options = {});

std::vector<double> apply(const RowStochasticMatrix& p, std::span<const double> f);

LocalMoments local_moments(const MarkovRewardProcess& mrp);

/// max over supported y of |y - x|.
double max_jump(const MarkovRewardProcess& mrp, StateIndex x);
std::vector<double> max_jumps(const MarkovRewardProcess& mrp);

/// Value of the cost c(x) / (1 + |x|)^eps, eps in [0, 1].
std::vector<double> scaled_value(const MarkovRewardProcess& mrp, double eps,
                                 const SolveOptions& options = {});

/// The process observed every m steps: transition P^m, discount alpha^m, same cost.
MarkovRewardProcess m_step_chain(const MarkovRewardProcess& mrp, int m,
                                 std::size_t nnz_budget = 50'000'000);

/// Largest violation of the identity relating V to the m-subsampled value V^m.
double verify_mstep_identity(const MarkovRewardProcess& mrp, int m,
                             const SolveOptions& options = {},
                             std::size_t nnz_budget = 50'000'000);

struct DeltaProfile {
    std::vector<double> per_state; ///< |P~f(x) - Pf(x)|
    double sup = 0.0;
};

/// One-step discrepancy of two transition operators on f.
DeltaProfile delta_f(const RowStochasticMatrix& p, const RowStochasticMatrix& p_tilde,
                     std::span<const double> f);
/// Same discrepancy from precomputed Pf and P~f.
DeltaProfile delta_from_images(std::span<const double> pf, std::span<const double> ptf);
double delta_at(const RowStochasticMatrix& p, const RowStochasticMatrix& p_tilde,
                std::span<const double> f, StateIndex x);
double sup_delta(const RowStochasticMatrix& p, const RowStochasticMatrix& p_tilde,
                 std::span<const double> f);

/// Coordinate functions W_1 (N x d) evaluated as doubles.
std::vector<double> coordinate_table(const StateLattice& lattice);

} // namespace moma
