#include "moma/aggregation.hpp"
#include "moma/control.hpp"
#include "moma/errors.hpp"
#include "moma/evaluation.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace moma;

namespace {

// Two states, two actions. In state 0: stay at cost 2 or move to 1 at cost 3.
// In state 1: stay at cost 1 or move to 0 at cost 0.
TabularMdp toy(double alpha) {
    using A = TabularMdp::Action;
    std::vector<std::vector<A>> acts(2);
    acts[0] = {A{2.0, {{0, 1.0}}}, A{3.0, {{1, 1.0}}}};
    acts[1] = {A{1.0, {{1, 1.0}}}, A{0.0, {{0, 1.0}}}};
    return TabularMdp(StateLattice({0}, {1}), std::move(acts), alpha);
}

} // namespace

TEST(TabularMdp, Validation) {
    using A = TabularMdp::Action;
    StateLattice lat({0}, {1});
    EXPECT_THROW(TabularMdp(lat, {{A{1.0, {{0, 1.0}}}}}, 0.9), DomainError);
    EXPECT_THROW(TabularMdp(lat, {{A{1.0, {{0, 1.0}}}}, {}}, 0.9), DomainError);
    EXPECT_THROW(TabularMdp(lat, {{A{-1.0, {{0, 1.0}}}}, {A{1.0, {{1, 1.0}}}}}, 0.9), DomainError);
    EXPECT_THROW(TabularMdp(lat, {{A{1.0, {{5, 1.0}}}}, {A{1.0, {{1, 1.0}}}}}, 0.9), DomainError);
    EXPECT_THROW(TabularMdp(lat, {{A{1.0, {{0, 0.5}}}}, {A{1.0, {{1, 1.0}}}}}, 0.9), DomainError);
}

TEST(InducedMrp, SingleActionIsUnderlyingChain) {
    const auto rc = oracle::random_chain(StateLattice({0}, {20}), 3, 0.9);
    oracle::RandomMdp m{rc.lattice, {}, 0.9};
    for (std::size_t x = 0; x < rc.P.size(); ++x)
        m.actions.push_back({{rc.cost[x], rc.P[x]}});
    const auto mdp = m.build();
    const auto mrp = induced_mrp(mdp, Policy(21, 0));
    EXPECT_LT(oracle::sup_diff(mrp.P.to_dense(), rc.mrp().P.to_dense()), 1e-15);
    EXPECT_EQ(mrp.cost, rc.cost);
    const auto pi = exact_policy_iteration(mdp);
    EXPECT_EQ(pi.iterations, 1);
    EXPECT_LT(oracle::sup_diff(pi.value, oracle::discounted_value(rc.P, rc.cost, 0.9)), 1e-9);
    EXPECT_THROW(induced_mrp(mdp, Policy(21, 1)), DomainError);
}

TEST(ExactPi, TwoStateToy) {
    // enumerate the four stationary policies by hand
    const auto mdp = toy(0.9);
    std::vector<double> best(2, INFINITY);
    for (ActionId a0 = 0; a0 < 2; ++a0)
        for (ActionId a1 = 0; a1 < 2; ++a1) {
            const auto v = exact_value(induced_mrp(mdp, Policy{a0, a1}));
            best[0] = std::min(best[0], v[0]);
            best[1] = std::min(best[1], v[1]);
        }
    const auto pi = exact_policy_iteration(mdp);
    EXPECT_TRUE(pi.converged);
    EXPECT_NEAR(pi.value[0], best[0], 1e-10);
    EXPECT_NEAR(pi.value[1], best[1], 1e-10);
    // moving from 0 costs 3 then earns 1 per period at state 1: cheaper than staying at 2
    EXPECT_EQ(pi.policy, (Policy{1, 0}));
    EXPECT_LT(optimality_residual(mdp, pi.value), 1e-8);
}

TEST(ExactPi, RandomMdpsMatchValueIteration) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto m = oracle::random_mdp(StateLattice({0, 0}, {7, 7}), 40 + seed, 0.9);
        const auto mdp = m.build();
        const auto pi = exact_policy_iteration(mdp);
        EXPECT_LT(oracle::sup_diff(pi.value, oracle::optimal_value(m)), 1e-8);
        EXPECT_LT(optimality_residual(mdp, pi.value), 1e-8);
    }
}

TEST(ExactPi, IterationCap) {
    const auto m = oracle::random_mdp(StateLattice({0, 0}, {7, 7}), 3, 0.9);
    const auto mdp = m.build();
    PiOptions opt;
    opt.max_iterations = 1;
    try {
        exact_policy_iteration(mdp, {}, opt);
        FAIL() << "expected the cap to trigger";
    } catch (const IterationLimitError& e) {
        EXPECT_EQ(e.last().iterations, 1);
        EXPECT_EQ(e.last().policy.size(), mdp.size());
    }
}

TEST(GreedyAction, TiesLowestIdAndKeepCurrent) {
    using A = TabularMdp::Action;
    std::vector<std::vector<A>> acts(1);
    acts[0] = {A{1.0, {{0, 1.0}}}, A{1.0, {{0, 1.0}}}, A{2.0, {{0, 1.0}}}};
    const TabularMdp mdp(StateLattice({0}, {0}), std::move(acts), 0.5);
    const std::vector<double> f{0.0};
    const auto oracle = mdp.prepare(f);
    EXPECT_EQ(greedy_action(mdp, *oracle, 0, nullptr, 1e-10), 0u);
    const ActionId cur = 1;
    EXPECT_EQ(greedy_action(mdp, *oracle, 0, &cur, 1e-10), 1u);
    const ActionId bad = 2;
    EXPECT_EQ(greedy_action(mdp, *oracle, 0, &bad, 1e-10), 0u);
}

TEST(MomaApi, IdentitySchemeIsExactPi) {
    const auto m = oracle::random_mdp(StateLattice({0, 0}, {6, 6}), 8, 0.9);
    const auto mdp = m.build();
    const auto s = identity_scheme(mdp.lattice());
    const auto api = moma_api(mdp, s);
    const auto pi = exact_policy_iteration(mdp);
    EXPECT_EQ(api.policy, pi.policy);
    EXPECT_LT(oracle::sup_diff(api.R, pi.value), 1e-8);
    EXPECT_EQ(api.iterations, pi.iterations);
}

TEST(MomaApi, RestrictedFixedPoint) {
    const auto m = oracle::random_mdp(StateLattice({0}, {60}), 9, 0.9);
    const auto mdp = m.build();
    const auto s = make_scheme(mdp.lattice(), 0.45);
    const auto api = moma_api(mdp, s);
    ASSERT_TRUE(api.converged);
    // R solves R(k) = min_a [c + alpha P^a G R](x_k) at the representatives
    const auto w = s.G.apply(api.R);
    for (std::size_t l = 0; l < s.meta_count(); ++l) {
        const auto x = s.grid.rep_index(l);
        double best = INFINITY;
        for (const auto& [c, row] : m.actions[x]) {
            double q = c;
            for (std::size_t y = 0; y < row.size(); ++y)
                q += m.alpha * row[y] * w[y];
            best = std::min(best, q);
        }
        EXPECT_NEAR(api.R[l], best, 1e-8 * (1 + best));
    }
    // the full-update value is min_a Q against W at every state
    for (std::size_t x = 0; x < mdp.size(); x += 5) {
        double best = INFINITY;
        for (const auto& [c, row] : m.actions[x]) {
            double q = c;
            for (std::size_t y = 0; y < row.size(); ++y)
                q += m.alpha * row[y] * w[y];
            best = std::min(best, q);
        }
        EXPECT_NEAR(api.value[x], best, 1e-9 * (1 + best));
    }
}

TEST(LiftedMdp, RowsArePGU) {
    const auto m = oracle::random_mdp(StateLattice({0}, {30}), 4, 0.9);
    const auto mdp = m.build();
    const auto s = make_scheme(mdp.lattice(), 0.45);
    const LiftedMdp lifted(mdp, s);
    const auto gu = oracle::matmul(oracle::dense(s.G), oracle::dense(s.U));
    for (std::size_t x = 0; x < mdp.size(); ++x)
        for (ActionId a = 0; a < mdp.action_count(x); ++a) {
            SparseRow r;
            lifted.transition(x, a, r);
            r.canonicalize();
            std::vector<double> got(mdp.size(), 0.0);
            for (const auto& [c, v] : r.entries())
                got[c] = v;
            std::vector<double> ref(mdp.size(), 0.0);
            for (std::size_t y = 0; y < mdp.size(); ++y)
                for (std::size_t z = 0; z < mdp.size(); ++z)
                    ref[z] += m.actions[x][a].second[y] * gu[y][z];
            ASSERT_LT(oracle::sup_diff(got, ref), 1e-14);
        }
}

TEST(BellmanResidual, FixedPointAndZero) {
    const auto m = oracle::random_mdp(StateLattice({0}, {25}), 6, 0.9);
    const auto mdp = m.build();
    Policy pol(mdp.size());
    for (std::size_t x = 0; x < pol.size(); ++x)
        pol[x] = static_cast<ActionId>(x % 3);
    const auto v = exact_value(induced_mrp(mdp, pol));
    EXPECT_LT(bellman_residual(mdp, pol, v).max_residual, 1e-8);
    const auto z = bellman_residual(mdp, pol, std::vector<double>(mdp.size(), 0.0));
    for (std::size_t x = 0; x < pol.size(); ++x)
        EXPECT_DOUBLE_EQ(z.residual[x], mdp.cost(x, pol[x]));
}

TEST(OptimalityGap, Basics) {
    const auto m = oracle::random_mdp(StateLattice({0}, {25}), 7, 0.9);
    const auto mdp = m.build();
    const auto pi = exact_policy_iteration(mdp);
    const auto self = optimality_gap_report(pi.value, pi.value);
    EXPECT_DOUBLE_EQ(self.max_rel, 0.0);
    const auto v0 = exact_value(induced_mrp(mdp, Policy(mdp.size(), 0)));
    for (std::size_t x = 0; x < v0.size(); ++x)
        EXPECT_GE(v0[x], pi.value[x] - 1e-9);
    EXPECT_GE(optimality_gap_report(pi.value, v0).mean_rel, 0.0);
}

TEST(Inequalities, OptDeltaAndBackToDelta2) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const auto m = oracle::random_mdp(seed % 2 ? StateLattice({0}, {80}) : StateLattice({0, 0}, {9, 9}),
                                          900 + seed, seed % 3 ? 0.9 : 0.8);
        const auto mdp = m.build();
        const auto s = make_scheme(mdp.lattice(), 0.45);
        const auto v_star = oracle::optimal_value(m);
        // sister MDP with P^a G U, solved by value iteration
        const auto gu = oracle::matmul(oracle::dense(s.G), oracle::dense(s.U));
        const auto sister = oracle::compose_kernels(m, gu);
        const auto vt_star = oracle::optimal_value(sister);
        const auto pi_star = oracle::greedy(m, v_star);
        const auto pit_star = oracle::greedy(sister, vt_star);
        auto delta = [&](const std::vector<std::size_t>& pol, const std::vector<double>& f) {
            return oracle::policy_delta(m, sister, pol, f);
        };
        const double alpha = m.alpha;
        const double gap = oracle::sup_diff(v_star, vt_star);
        EXPECT_LE(gap, alpha / (1 - alpha) * (delta(pi_star, v_star) + delta(pit_star, vt_star)) + 1e-8);
        const auto interp = [&](const std::vector<double>& f) { return oracle::sup_diff(f, oracle::matvec(gu, f)); };
        EXPECT_LE(gap, (interp(v_star) + interp(vt_star)) / (1 - alpha) + 1e-8);
        // library lifted MDP agrees with the dense sister
        const auto lib = exact_policy_iteration(LiftedMdp(mdp, s));
        EXPECT_LT(oracle::sup_diff(lib.value, vt_star), 1e-7);
    }
}
