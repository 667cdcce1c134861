#include "moma/control.hpp"

#include "moma/parallel.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <string_view>
#include <unordered_set>

namespace moma {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

class RowExpectation final : public ExpectationOracle {
  public:
    RowExpectation(const ControlledMdp& mdp, std::span<const double> f) : mdp_(mdp), f_(f) {}
    double expected(StateIndex x, ActionId a) const override {
        thread_local SparseRow row;
        row.clear();
        mdp_.transition(x, a, row);
        return row.dot(f_);
    }

  private:
    const ControlledMdp& mdp_;
    std::span<const double> f_;
};

std::size_t policy_hash(const Policy& p) {
    const std::string_view bytes(reinterpret_cast<const char*>(p.data()), p.size() * sizeof(ActionId));
    return std::hash<std::string_view>{}(bytes);
}

void check_policy(const ControlledMdp& mdp, std::span<const StateIndex> states, const Policy& p) {
    if (p.size() != states.size())
        throw DomainError("policy length does not match the state set");
    for (std::size_t k = 0; k < states.size(); ++k)
        if (p[k] >= mdp.action_count(states[k]))
            throw DomainError("policy action " + std::to_string(p[k]) + " is not available in state " +
                              std::to_string(states[k]));
}

std::vector<StateIndex> all_states(std::size_t n) {
    std::vector<StateIndex> s(n);
    for (std::size_t i = 0; i < n; ++i)
        s[i] = i;
    return s;
}

} // namespace

std::string ControlledMdp::action_label(StateIndex, ActionId a) const { return std::to_string(a); }

std::unique_ptr<ExpectationOracle> ControlledMdp::prepare(std::span<const double> f) const {
    return std::make_unique<RowExpectation>(*this, f);
}

TabularMdp::TabularMdp(StateLattice lattice, std::vector<std::vector<Action>> actions, double discount)
    : lattice_(std::move(lattice)), discount_(discount) {
    const std::size_t n = lattice_.size();
    if (actions.size() != n)
        throw DomainError("one action list per state required");
    if (!(discount > 0.0 && discount < 1.0))
        throw DomainError("discount must lie in (0,1)");
    offsets_.assign(1, 0);
    std::size_t total = 0;
    for (const auto& a : actions) {
        if (a.empty())
            throw DomainError("every state needs at least one action");
        total += a.size();
        offsets_.push_back(total);
    }
    RowStochasticMatrix::Builder b(total, n);
    SparseRow row;
    for (const auto& list : actions) {
        for (const auto& a : list) {
            if (!std::isfinite(a.cost) || a.cost < 0.0)
                throw DomainError("action costs must be finite and nonnegative");
            costs_.push_back(a.cost);
            row.clear();
            for (const auto& [y, p] : a.next) {
                if (y >= n)
                    throw DomainError("transition target out of range");
                row.add(static_cast<ColIndex>(y), p);
            }
            b.append_row(row, 1e-10);
        }
    }
    rows_ = std::move(b).build();
}

std::size_t TabularMdp::slot(StateIndex x, ActionId a) const {
    if (x >= lattice_.size() || a >= action_count(x))
        throw DomainError("state/action pair out of range");
    return offsets_[x] + a;
}

void TabularMdp::transition(StateIndex x, ActionId a, SparseRow& out) const {
    const auto r = rows_.row(slot(x, a));
    for (std::size_t k = 0; k < r.size(); ++k)
        out.add(r.cols[k], r.vals[k]);
}

LiftedMdp::LiftedMdp(const ControlledMdp& base, const AggregationScheme& scheme)
    : base_(base), scheme_(scheme) {
    if (scheme.G.n_rows() != base.size())
        throw DomainError("scheme was built for a different lattice");
}

void LiftedMdp::transition(StateIndex x, ActionId a, SparseRow& out) const {
    SparseRow row;
    base_.transition(x, a, row);
    const auto rep = scheme_.grid.rep_indices();
    for (const auto& [y, p] : row.entries()) {
        const auto g = scheme_.G.row(y);
        for (std::size_t k = 0; k < g.size(); ++k)
            out.add(static_cast<ColIndex>(rep[g.cols[k]]), p * g.vals[k]);
    }
}

RowStochasticMatrix policy_rows(const ControlledMdp& mdp, std::span<const StateIndex> states,
                                const Policy& policy) {
    check_policy(mdp, states, policy);
    // blocks bound the scratch rows; dense kernels make full materialization cost several GB
    constexpr std::size_t block = 512;
    std::vector<SparseRow> rows(std::min(block, states.size()));
    RowStochasticMatrix::Builder b(states.size(), mdp.size());
    for (std::size_t lo = 0; lo < states.size(); lo += block) {
        const std::size_t len = std::min(block, states.size() - lo);
        parallel_for(len, [&](std::size_t k) {
            rows[k].clear();
            mdp.transition(states[lo + k], policy[lo + k], rows[k]);
            rows[k].canonicalize();
        });
        for (std::size_t k = 0; k < len; ++k)
            b.append_row(rows[k], 1e-10);
    }
    return std::move(b).build();
}

MarkovRewardProcess induced_mrp(const ControlledMdp& mdp, const Policy& policy) {
    const auto states = all_states(mdp.size());
    auto p = policy_rows(mdp, states, policy);
    std::vector<double> c(mdp.size());
    parallel_for(mdp.size(), [&](std::size_t x) { c[x] = mdp.cost(x, policy[x]); });
    return MarkovRewardProcess(mdp.lattice(), std::move(p), std::move(c), mdp.discount());
}

ActionId greedy_action(const ControlledMdp& mdp, const ExpectationOracle& oracle, StateIndex x,
                       const ActionId* current, double tolerance, double* q_out) {
    const double alpha = mdp.discount();
    const std::size_t count = mdp.action_count(x);
    ActionId best = 0;
    double best_q = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < count; ++a) {
        const auto id = static_cast<ActionId>(a);
        const double q = mdp.cost(x, id) + alpha * oracle.expected(x, id);
        if (q < best_q) {
            best_q = q;
            best = id;
        }
    }
    if (current && *current != best) {
        const double q_cur = mdp.cost(x, *current) + alpha * oracle.expected(x, *current);
        if (q_cur <= best_q + tolerance * (1.0 + std::abs(best_q))) {
            best = *current;
            best_q = q_cur;
        }
    }
    if (q_out)
        *q_out = best_q;
    return best;
}

PiReport exact_policy_iteration(const ControlledMdp& mdp, Policy initial, const PiOptions& options) {
    const auto start = Clock::now();
    const std::size_t n = mdp.size();
    if (initial.empty())
        initial.assign(n, 0);
    check_policy(mdp, all_states(n), initial);

    PiReport rep;
    rep.policy = std::move(initial);
    std::unordered_set<std::size_t> seen{policy_hash(rep.policy)};
    while (true) {
        if (rep.iterations >= options.max_iterations) {
            rep.total_ms = ms_since(start);
            throw IterationLimitError("policy iteration hit the iteration cap", std::move(rep));
        }
        ++rep.iterations;
        IterationTiming t;

        auto t0 = Clock::now();
        const auto mrp = induced_mrp(mdp, rep.policy);
        t.compute_p_ms = ms_since(t0);

        t0 = Clock::now();
        rep.value = exact_value(mrp, options.solve);
        t.evaluation_ms = ms_since(t0);

        t0 = Clock::now();
        const auto oracle = mdp.prepare(rep.value);
        Policy next(n);
        parallel_for(n, [&](std::size_t x) {
            next[x] = greedy_action(mdp, *oracle, x, &rep.policy[x], options.improvement_tolerance);
        });
        t.update_ms = ms_since(t0);
        rep.timing.push_back(t);

        if (next == rep.policy) {
            rep.converged = true;
            break;
        }
        if (!seen.insert(policy_hash(next)).second)
            throw NumericalError("policy iteration revisited a policy", 0.0);
        rep.policy = std::move(next);
    }
    rep.total_ms = ms_since(start);
    return rep;
}

PiReport moma_api(const ControlledMdp& mdp, const AggregationScheme& scheme, Policy initial,
                  const PiOptions& options) {
    const auto start = Clock::now();
    const std::size_t n = mdp.size();
    if (scheme.G.n_rows() != n)
        throw DomainError("scheme was built for a different lattice");
    const auto reps = scheme.grid.rep_indices();
    const std::size_t l_count = reps.size();
    if (initial.empty())
        initial.assign(l_count, 0);
    check_policy(mdp, reps, initial);

    PiReport rep;
    rep.rep_policy = std::move(initial);
    std::unordered_set<std::size_t> seen{policy_hash(rep.rep_policy)};
    std::vector<double> w;
    while (true) {
        if (rep.iterations >= options.max_iterations) {
            rep.total_ms = ms_since(start);
            throw IterationLimitError("MoMa policy iteration hit the iteration cap", std::move(rep));
        }
        ++rep.iterations;
        IterationTiming t;

        auto t0 = Clock::now();
        const auto p_bar = policy_rows(mdp, reps, rep.rep_policy);
        std::vector<double> uc(l_count);
        for (std::size_t l = 0; l < l_count; ++l)
            uc[l] = mdp.cost(reps[l], rep.rep_policy[l]);
        t.compute_p_ms = ms_since(t0);

        t0 = Clock::now();
        rep.R = solve_aggregate(p_bar, scheme.G, uc, mdp.discount());
        t.evaluation_ms = ms_since(t0);

        t0 = Clock::now();
        w = scheme.G.apply(rep.R);
        const auto oracle = mdp.prepare(w);
        Policy next(l_count);
        parallel_for(l_count, [&](std::size_t l) {
            next[l] = greedy_action(mdp, *oracle, reps[l], &rep.rep_policy[l],
                                    options.improvement_tolerance);
        });
        t.update_ms = ms_since(t0);
        rep.timing.push_back(t);

        if (next == rep.rep_policy) {
            rep.converged = true;
            break;
        }
        if (!seen.insert(policy_hash(next)).second)
            throw NumericalError("restricted policy iteration revisited a policy", 0.0);
        rep.rep_policy = std::move(next);
    }

    // full update against W = G R; representative states keep their settled action on ties
    const auto t0 = Clock::now();
    std::vector<const ActionId*> seed(n, nullptr);
    for (std::size_t l = 0; l < l_count; ++l)
        seed[reps[l]] = &rep.rep_policy[l];
    const auto oracle = mdp.prepare(w);
    rep.policy.assign(n, 0);
    rep.value.assign(n, 0.0);
    parallel_for(n, [&](std::size_t x) {
        rep.policy[x] = greedy_action(mdp, *oracle, x, seed[x], options.improvement_tolerance,
                                      &rep.value[x]);
    });
    rep.full_update_ms = ms_since(t0);
    rep.total_ms = ms_since(start);
    return rep;
}

BellmanResidual bellman_residual(const ControlledMdp& mdp, const Policy& policy,
                                 std::span<const double> w) {
    const std::size_t n = mdp.size();
    if (w.size() != n)
        throw DomainError("bellman_residual: value length mismatch");
    check_policy(mdp, all_states(n), policy);
    const auto oracle = mdp.prepare(w);
    BellmanResidual out;
    out.residual.resize(n);
    out.percent.resize(n);
    parallel_for(n, [&](std::size_t x) {
        const double tw = mdp.cost(x, policy[x]) + mdp.discount() * oracle->expected(x, policy[x]);
        out.residual[x] = std::abs(tw - w[x]);
        out.percent[x] = 100.0 * out.residual[x] / std::max(w[x], kGapFloor);
    });
    double sum = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
        sum += out.percent[x];
        out.max_percent = std::max(out.max_percent, out.percent[x]);
        out.max_residual = std::max(out.max_residual, out.residual[x]);
    }
    out.mean_percent = n ? sum / static_cast<double>(n) : 0.0;
    return out;
}

GapSummary optimality_gap_report(std::span<const double> v_star, std::span<const double> v_candidate) {
    return gap_summary(v_star, v_candidate);
}

double optimality_residual(const ControlledMdp& mdp, std::span<const double> v) {
    const auto oracle = mdp.prepare(v);
    std::vector<double> r(mdp.size());
    parallel_for(mdp.size(), [&](std::size_t x) {
        double q = 0.0;
        greedy_action(mdp, *oracle, x, nullptr, 0.0, &q);
        r[x] = std::abs(q - v[x]);
    });
    return max_abs(r);
}

} // namespace moma
