#include "moma/aggregation.hpp"
#include "moma/benchmarks.hpp"
#include "moma/evaluation.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace moma;

namespace {

std::vector<double> aggregate_oracle(const oracle::RandomChain& rc, const AggregationScheme& s) {
    return oracle::aggregate_value(rc.P, rc.cost, rc.alpha, oracle::dense(s.G), oracle::dense(s.U));
}

} // namespace

TEST(AggregateValue, IdentitySchemeGivesValue) {
    const auto rc = oracle::random_chain(StateLattice({0, 0}, {7, 7}), 1, 0.9);
    const auto mrp = rc.mrp();
    EXPECT_LT(oracle::sup_diff(aggregate_value(mrp, identity_scheme(mrp.lattice)),
                               oracle::discounted_value(rc.P, rc.cost, 0.9)),
              1e-9);
}

TEST(AggregateValue, ExampleOne) {
    const auto mrp = build_simple_rw(20, true, 0.9);
    const auto s = scheme_from_grid(mrp.lattice, CoarseGrid::from_axes(mrp.lattice, {AxisGrid{{0, 20}}}, 0.45));
    const auto r = aggregate_value(mrp, s);
    EXPECT_NEAR(r[0], 0.0, 1e-10);
    EXPECT_NEAR(r[1], 200.0, 1e-9);
}

TEST(AggregateValue, EqualsRestrictedLiftedValue) {
    const auto rc = oracle::random_chain(StateLattice({0, 0}, {9, 9}), 77, 0.9);
    const auto mrp = rc.mrp();
    const auto s = make_scheme(mrp.lattice, 0.45);
    const auto r = aggregate_value(mrp, s);
    EXPECT_LT(oracle::sup_diff(r, aggregate_oracle(rc, s)), 1e-9);
    // value of the materialized sister chain, restricted to representatives
    const auto pt = oracle::matmul(oracle::matmul(rc.P, oracle::dense(s.G)), oracle::dense(s.U));
    const auto vt = oracle::discounted_value(pt, rc.cost, 0.9);
    EXPECT_LT(oracle::sup_diff(r, oracle::matvec(oracle::dense(s.U), vt)), 1e-9);
}

TEST(MomaEvaluate, ExampleOneExact) {
    const auto mrp = build_simple_rw(20, true, 0.9);
    const auto s = scheme_from_grid(mrp.lattice, CoarseGrid::from_axes(mrp.lattice, {AxisGrid{{0, 20}}}, 0.45));
    const auto rep = moma_evaluate(mrp, s);
    ASSERT_TRUE(rep.V_exact.has_value());
    EXPECT_LE(rep.gaps->max_abs, 1e-8);
    EXPECT_LE(rep.lift_consistency, 1e-9);
}

TEST(MomaEvaluate, ConstantCost) {
    auto rc = oracle::random_chain(StateLattice({0, 0}, {15, 15}), 3, 0.95);
    rc.cost.assign(rc.cost.size(), 1.0);
    const auto mrp = rc.mrp();
    const auto rep = moma_evaluate(mrp, make_scheme(mrp.lattice, 0.45));
    for (double v : rep.V_moma)
        EXPECT_NEAR(v, 20.0, 1e-9);
}

TEST(MomaEvaluate, LiftFormulaAndReport) {
    const auto rc = oracle::random_chain(StateLattice({-5, 0}, {10, 10}), 12, 0.9);
    const auto mrp = rc.mrp();
    const auto s = make_scheme(mrp.lattice, 0.45);
    const auto rep = moma_evaluate(mrp, s);
    const auto r = aggregate_oracle(rc, s);
    std::vector<double> vt = oracle::matvec(oracle::matmul(rc.P, oracle::dense(s.G)), r);
    for (std::size_t x = 0; x < vt.size(); ++x)
        vt[x] = rc.cost[x] + 0.9 * vt[x];
    EXPECT_LT(oracle::sup_diff(rep.V_moma, vt), 1e-9);
    const auto v = oracle::discounted_value(rc.P, rc.cost, 0.9);
    double mean = 0.0, mx = 0.0;
    for (std::size_t x = 0; x < v.size(); ++x) {
        const double g = std::abs(v[x] - vt[x]) / std::max(v[x], kGapFloor);
        mean += g / static_cast<double>(v.size());
        mx = std::max(mx, g);
    }
    EXPECT_NEAR(rep.gaps->mean_rel, mean, 1e-9);
    EXPECT_NEAR(rep.gaps->max_rel, mx, 1e-9);
    EXPECT_LE(rep.lift_consistency, 1e-9);
    EXPECT_GE(rep.time_solve_ms, 0.0);
}

TEST(MomaEvaluate, WithoutExact) {
    const auto mrp = oracle::random_chain(StateLattice({0}, {40}), 4, 0.9).mrp();
    EvaluationOptions opt;
    opt.compute_exact = false;
    const auto rep = moma_evaluate(mrp, make_scheme(mrp.lattice, 0.45), opt);
    EXPECT_FALSE(rep.V_exact.has_value());
    EXPECT_FALSE(rep.gaps.has_value());
}

TEST(GapSummary, FloorAtZero) {
    const auto g = gap_summary(std::vector<double>{0.0, 2.0}, std::vector<double>{0.0, 3.0});
    EXPECT_DOUBLE_EQ(g.rel_gap[0], 0.0);
    EXPECT_DOUBLE_EQ(g.rel_gap[1], 0.5);
    EXPECT_DOUBLE_EQ(g.mean_rel, 0.25);
    EXPECT_DOUBLE_EQ(g.max_abs, 1.0);
    const auto h = gap_summary(std::vector<double>{0.0}, std::vector<double>{1e-12});
    EXPECT_DOUBLE_EQ(h.rel_gap[0], 1.0);
}

TEST(Interpolation, AffineAndRepresentatives) {
    StateLattice lat({-6, 0}, {14, 9});
    const auto s = make_scheme(lat, 0.45);
    std::vector<double> aff(lat.size()), bumpy(lat.size());
    for (std::size_t x = 0; x < lat.size(); ++x) {
        aff[x] = 2.0 * lat.coord(x, 0) - 0.5 * lat.coord(x, 1) + 3.0;
        bumpy[x] = std::sin(0.7 * static_cast<double>(x));
    }
    EXPECT_LT(interpolation_residuals(aff, s).sup, 1e-10);
    const auto res = interpolation_residuals(bumpy, s);
    for (std::size_t l = 0; l < s.meta_count(); ++l)
        EXPECT_LT(res.per_state[s.grid.rep_index(l)], 1e-15);
    EXPECT_GT(res.sup, 0.0);
}

TEST(BackToDelta, IdentityAndExampleOne) {
    const auto rc = oracle::random_chain(StateLattice({0}, {20}), 9, 0.9);
    const auto mrp = rc.mrp();
    const auto id = backtodelta_check(mrp, identity_scheme(mrp.lattice));
    EXPECT_LT(id.lhs, 1e-9);
    EXPECT_LT(id.rhs, 1e-9);
    const auto rw = build_simple_rw(20, true, 0.9);
    const auto s = scheme_from_grid(rw.lattice, CoarseGrid::from_axes(rw.lattice, {AxisGrid{{0, 20}}}, 0.45));
    const auto c = backtodelta_check(rw, s);
    EXPECT_LT(c.lhs, 1e-8);
    EXPECT_GE(c.rhs, 0.0);
}

TEST(BackToDelta, RandomChains) {
    const double alphas[] = {0.8, 0.9, 0.99};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto lat = seed % 2 ? StateLattice({0}, {150}) : StateLattice({-4, 0}, {9, 12});
        const auto rc = oracle::random_chain(lat, 500 + seed, alphas[seed % 3]);
        const auto mrp = rc.mrp();
        const auto s = make_scheme(lat, seed % 2 ? 0.45 : 1.0 / 3.0);
        const auto v = oracle::discounted_value(rc.P, rc.cost, rc.alpha);
        const auto r = aggregate_oracle(rc, s);
        auto vt = oracle::matvec(oracle::matmul(rc.P, oracle::dense(s.G)), r);
        for (std::size_t x = 0; x < vt.size(); ++x)
            vt[x] = rc.cost[x] + rc.alpha * vt[x];
        const auto gd = oracle::dense(s.G);
        const auto ud = oracle::dense(s.U);
        const double lhs = oracle::sup_diff(v, vt);
        const double rhs = (oracle::sup_diff(v, oracle::matvec(gd, oracle::matvec(ud, v))) +
                           oracle::sup_diff(vt, oracle::matvec(gd, oracle::matvec(ud, vt)))) /
                          (1 - rc.alpha);
        EXPECT_GE(rhs - lhs, -1e-8);
        const auto lib = backtodelta_check(mrp, s);
        EXPECT_GE(lib.slack(), -1e-8);
        EXPECT_NEAR(lib.lhs, lhs, 1e-7 * (1 + lhs));
    }
}
