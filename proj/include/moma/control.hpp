#pragma once

#include "moma/aggregation.hpp"
#include "moma/chain.hpp"
#include "moma/errors.hpp"
#include "moma/evaluation.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace moma {

using ActionId = std::uint32_t;
/// Action id per state (full policy) or per representative state (restricted policy).
using Policy = std::vector<ActionId>;

/// E[f(X_1) | x, a] for one fixed function f.
class ExpectationOracle {
  public:
    virtual ~ExpectationOracle() = default;
    virtual double expected(StateIndex x, ActionId a) const = 0;
};

/**
 * Finite-action discounted MDP on a lattice, cost minimization.
 *
 * Actions of state x are 0 .. action_count(x) - 1; id 0 plays the role of the
 * default action. transition() may emit repeated columns; consumers merge them.
 */
class ControlledMdp {
  public:
    virtual ~ControlledMdp() = default;

    virtual const StateLattice& lattice() const = 0;
    virtual double discount() const = 0;
    virtual std::size_t action_count(StateIndex x) const = 0;
    virtual double cost(StateIndex x, ActionId a) const = 0;
    virtual void transition(StateIndex x, ActionId a, SparseRow& out) const = 0;
    virtual std::string action_label(StateIndex x, ActionId a) const;

    /// Oracle for f; f must outlive it. The default builds one transition row per query.
    virtual std::unique_ptr<ExpectationOracle> prepare(std::span<const double> f) const;

    std::size_t size() const { return lattice().size(); }
};

/// MDP given by explicit per-(state, action) rows.
class TabularMdp final : public ControlledMdp {
  public:
    struct Action {
        double cost = 0.0;
        std::vector<std::pair<StateIndex, double>> next;
    };

    TabularMdp(StateLattice lattice, std::vector<std::vector<Action>> actions, double discount);

    const StateLattice& lattice() const override { return lattice_; }
    double discount() const override { return discount_; }
    std::size_t action_count(StateIndex x) const override {
        return offsets_.at(x + 1) - offsets_[x];
    }
    double cost(StateIndex x, ActionId a) const override { return costs_[slot(x, a)]; }
    void transition(StateIndex x, ActionId a, SparseRow& out) const override;
    const RowStochasticMatrix& rows() const noexcept { return rows_; }

  private:
    std::size_t slot(StateIndex x, ActionId a) const;

    StateLattice lattice_;
    double discount_;
    std::vector<std::size_t> offsets_;
    std::vector<double> costs_;
    RowStochasticMatrix rows_;
};

/// Lifted MDP with kernel P^a G U and the original costs.
class LiftedMdp final : public ControlledMdp {
  public:
    LiftedMdp(const ControlledMdp& base, const AggregationScheme& scheme);

    const StateLattice& lattice() const override { return base_.lattice(); }
    double discount() const override { return base_.discount(); }
    std::size_t action_count(StateIndex x) const override { return base_.action_count(x); }
    double cost(StateIndex x, ActionId a) const override { return base_.cost(x, a); }
    void transition(StateIndex x, ActionId a, SparseRow& out) const override;

  private:
    const ControlledMdp& base_;
    const AggregationScheme& scheme_;
};

/// Transition matrix and cost of a full policy.
MarkovRewardProcess induced_mrp(const ControlledMdp& mdp, const Policy& policy);

/// Rows of P^pi at the given states, pi indexed like `states`.
RowStochasticMatrix policy_rows(const ControlledMdp& mdp, std::span<const StateIndex> states,
                                const Policy& policy);

struct PiOptions {
    int max_iterations = 100;
    /// An action replaces the current one only if it improves Q by more than
    /// this relative amount.
    double improvement_tolerance = 1e-10;
    SolveOptions solve;
};

struct IterationTiming {
    double update_ms = 0.0;
    double compute_p_ms = 0.0;
    double evaluation_ms = 0.0;
};

struct PiReport {
    int iterations = 0;
    bool converged = false;
    std::vector<IterationTiming> timing;
    Policy policy;           ///< full policy
    std::vector<double> value; ///< V* for exact PI, V~ = min_a Q for MoMa-API
    Policy rep_policy;       ///< restricted policy on representative states (MoMa-API)
    std::vector<double> R;   ///< aggregate value (MoMa-API)
    double full_update_ms = 0.0;
    double total_ms = 0.0;
};

/// Raised when the iteration cap is hit; carries the last iterate.
class IterationLimitError : public NumericalError {
  public:
    IterationLimitError(const std::string& what, PiReport last)
        : NumericalError(what, 0.0), last_(std::move(last)) {}
    const PiReport& last() const noexcept { return last_; }

  private:
    PiReport last_;
};

/// Greedy action at x against oracle values: argmin_a c(x,a) + alpha E f.
/// Lowest id wins ties; `current` is kept unless beaten by the tolerance.
ActionId greedy_action(const ControlledMdp& mdp, const ExpectationOracle& oracle, StateIndex x,
                       const ActionId* current, double tolerance, double* q_out = nullptr);

PiReport exact_policy_iteration(const ControlledMdp& mdp, Policy initial = {},
                                const PiOptions& options = {});

/// Policy iteration on the representative states followed by one full greedy update.
PiReport moma_api(const ControlledMdp& mdp, const AggregationScheme& scheme, Policy initial = {},
                  const PiOptions& options = {});

struct BellmanResidual {
    std::vector<double> residual; ///< |T^pi W - W|
    std::vector<double> percent;  ///< 100 * residual / max(W, floor)
    double mean_percent = 0.0;
    double max_percent = 0.0;
    double max_residual = 0.0;
};

BellmanResidual bellman_residual(const ControlledMdp& mdp, const Policy& policy,
                                 std::span<const double> w);

/// Relative gaps |V_candidate - V*| / V*.
GapSummary optimality_gap_report(std::span<const double> v_star, std::span<const double> v_candidate);

/// max_x |min_a (c + alpha P^a V)(x) - V(x)|
double optimality_residual(const ControlledMdp& mdp, std::span<const double> v);

} // namespace moma
