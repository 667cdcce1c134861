#pragma once

#include "moma/chain.hpp"
#include "moma/control.hpp"
#include "moma/grid.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace moma {

/// Discrete uniform demand on {lo, ..., hi}.
struct UniformDemand {
    std::int64_t lo = 0;
    std::int64_t hi = 0;
};

struct JrpParams {
    std::vector<UniformDemand> demand;
    std::vector<double> holding;  ///< H_i
    std::vector<double> backorder; ///< B_i
    std::vector<double> minor;    ///< k_i
    double major = 0.0;           ///< K, per truckload
    std::int64_t truck_capacity = 1;
    std::vector<Coord> lower;
    std::vector<Coord> upper;
    double discount = 0.99;
    /// Allow q_i <= u_i - I_i + min demand_i instead of q_i <= u_i - I_i.
    bool widen_orders = false;
    /// Recursion center of the coarse grid on each axis.
    std::vector<Coord> grid_origin;
};

struct HospitalParams {
    std::vector<double> arrival;   ///< lambda_j (Poisson mean per period)
    std::vector<double> service;   ///< p_j (per-period discharge probability)
    std::vector<std::int64_t> beds; ///< N_j
    std::vector<double> holding;   ///< H_j
    /// overflow[i][j] = B_ij for i != j; diagonal ignored.
    std::vector<std::vector<double>> overflow;
    std::vector<Coord> cap; ///< u_j
    double discount = 0.99;
    std::vector<Coord> grid_origin;
};

JrpParams jrp_small();
JrpParams jrp_large();
HospitalParams hospital2();
/// Three wards at the given load; arrival rates are load * N_j * p_j.
HospitalParams hospital3(double load = 0.7);
HospitalParams hospital4();

/**
 * Computes (E f)(z) = sum_y prod_i K_i(z_i, y_i) f(y) for a product kernel.
 * f lives on a box with the given extents; kernel i has one row per value of
 * the new axis i and extents[i] columns. Returns values row-major over the
 * new extents.
 */
std::vector<double> separable_expectation(std::span<const double> f,
                                          std::span<const std::size_t> extents,
                                          std::span<const RowStochasticMatrix> kernels);

/// Joint replenishment: state = inventory levels, action = order quantities.
class JrpMdp final : public ControlledMdp {
  public:
    explicit JrpMdp(JrpParams params);

    const StateLattice& lattice() const override { return lattice_; }
    double discount() const override { return params_.discount; }
    std::size_t action_count(StateIndex x) const override;
    double cost(StateIndex x, ActionId a) const override;
    void transition(StateIndex x, ActionId a, SparseRow& out) const override;
    std::string action_label(StateIndex x, ActionId a) const override;
    std::unique_ptr<ExpectationOracle> prepare(std::span<const double> f) const override;

    const JrpParams& params() const noexcept { return params_; }
    std::vector<std::int64_t> order_of(StateIndex x, ActionId a) const;
    /// Action id of an order vector; throws DomainError when infeasible.
    ActionId action_of(StateIndex x, std::span<const std::int64_t> q) const;
    std::int64_t max_order(StateIndex x, std::size_t item) const;

  private:
    StateIndex post_index(StateIndex x, ActionId a, double* order_cost) const;

    JrpParams params_;
    StateLattice lattice_;
    StateLattice post_;                     ///< inventory after ordering, before demand
    std::vector<RowStochasticMatrix> kernels_; ///< per item, post value -> next value
    std::vector<std::vector<double>> stage_cost_; ///< per item, expected H/B cost by post value
};

/// Inpatient overflow routing between wards.
class HospitalMdp final : public ControlledMdp {
  public:
    explicit HospitalMdp(HospitalParams params);

    const StateLattice& lattice() const override { return lattice_; }
    double discount() const override { return params_.discount; }
    std::size_t action_count(StateIndex x) const override {
        return offsets_.at(x + 1) - offsets_[x];
    }
    double cost(StateIndex x, ActionId a) const override { return costs_[slot(x, a)]; }
    void transition(StateIndex x, ActionId a, SparseRow& out) const override;
    std::string action_label(StateIndex x, ActionId a) const override;
    std::unique_ptr<ExpectationOracle> prepare(std::span<const double> f) const override;

    const HospitalParams& params() const noexcept { return params_; }
    /// Overflow counts u_ij (row-major J x J, zero diagonal) of an action.
    std::vector<std::int64_t> overflow_of(StateIndex x, ActionId a) const;
    StateIndex post_state(StateIndex x, ActionId a) const { return post_[slot(x, a)]; }
    /// Per-ward distribution of the next count given the post-action count.
    const RowStochasticMatrix& ward_kernel(std::size_t j) const { return kernels_.at(j); }

  private:
    std::size_t slot(StateIndex x, ActionId a) const;

    HospitalParams params_;
    StateLattice lattice_;
    std::vector<std::size_t> offsets_;
    std::vector<double> costs_;
    std::vector<StateIndex> post_;
    std::vector<std::uint8_t> overflow_; ///< J(J-1) counts per action
    std::vector<RowStochasticMatrix> kernels_;
};

/// Simple random walk on [0, n] with c(x) = x; absorbing or reflecting ends.
MarkovRewardProcess build_simple_rw(std::int64_t n, bool absorbing = true, double alpha = 0.9);
/// Jumps from x to n with probability x/n and to 0 otherwise; c(x) = x.
MarkovRewardProcess build_two_point_chain(std::int64_t n, double alpha = 0.9);
/// Random walk on [1, n] with reflecting ends and seeded downward drift; c(i) = i^2.
MarkovRewardProcess build_reflecting_rw(std::int64_t n, std::uint64_t seed, double alpha = 0.95);

/// Uniform [0,1) draw from a counter-based stream; stable across thread counts.
double seeded_uniform(std::uint64_t seed, std::uint64_t counter);

} // namespace moma
