#include "moma/errors.hpp"
#include "moma/grid.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace moma;

using V = std::vector<Coord>;

TEST(AxisGrid, ShortAxis) {
    EXPECT_EQ(axis_grid(0, 3, 0.45).values, (V{0, 1, 3}));
    EXPECT_EQ(axis_grid(0, 3, 0.35).values, (V{0, 1, 3}));
}

TEST(AxisGrid, SquareRootSpacing) {
    EXPECT_EQ(axis_grid(0, 20, 0.5).values, (V{0, 1, 3, 6, 10, 15, 20}));
}

TEST(AxisGrid, MirroredAboutZero) {
    EXPECT_EQ(axis_grid(-6, 6, 0.5).values, (V{-6, -3, -1, 0, 1, 3, 6}));
}

TEST(AxisGrid, MatchesRecursionReference) {
    for (double s : {1.0 / 3.0, 0.4, 0.45, 0.5})
        for (auto [lo, hi] : std::vector<std::pair<Coord, Coord>>{{0, 20}, {0, 80}, {-30, 40}, {-50, 120}, {3, 40}, {-40, -3}})
            EXPECT_EQ(axis_grid(lo, hi, s).values, oracle::axis_points(lo, hi, s)) << lo << " " << hi << " " << s;
}

TEST(AxisGrid, Invariants) {
    for (double s : {1.0 / 3.0, 0.45})
        for (auto [lo, hi] : std::vector<std::pair<Coord, Coord>>{{0, 40}, {-30, 40}, {5, 90}, {-7, -1}, {2, 2}}) {
            const auto g = axis_grid(lo, hi, s);
            EXPECT_EQ(g.front(), lo);
            EXPECT_EQ(g.back(), hi);
            if (lo <= 0 && 0 <= hi)
                EXPECT_NE(g.find(0), g.size());
            for (std::size_t k = 1; k < g.size(); ++k) {
                const Coord gap = g.values[k] - g.values[k - 1];
                EXPECT_GE(gap, 1);
                const Coord v = std::min(std::abs(g.values[k]), std::abs(g.values[k - 1]));
                if (k + 1 < g.size() && k > 1)
                    EXPECT_LE(gap, static_cast<Coord>(std::ceil(std::pow(static_cast<double>(v), s))) + 1);
            }
        }
}

TEST(AxisGrid, Errors) {
    EXPECT_THROW(axis_grid(0, 10, 0.0), DomainError);
    EXPECT_THROW(axis_grid(0, 10, 1.0), DomainError);
    EXPECT_THROW(axis_grid(5, 1, 0.5), DomainError);
}

TEST(AxisGrid, BracketAndFind) {
    const auto g = axis_grid(0, 20, 0.5);
    EXPECT_EQ(g.bracket(0), 0u);
    EXPECT_EQ(g.bracket(4), 2u);
    EXPECT_EQ(g.bracket(20), g.size() - 2);
    EXPECT_EQ(g.find(6), 3u);
    EXPECT_EQ(g.find(7), g.size());
}

TEST(AxisGrid, OriginShiftAndMultiplier) {
    const auto g = axis_grid(0, 42, 0.45, 12);
    EXPECT_NE(g.find(12), g.size());
    EXPECT_EQ(g.front(), 0);
    EXPECT_EQ(g.back(), 42);
    const auto coarse = axis_grid(0, 80, 0.45);
    const auto fine = axis_grid(0, 80, 0.45, 0, std::pow(0.01, 0.25));
    EXPECT_GT(fine.size(), coarse.size());
}

TEST(BuildGrid, SmallSquare) {
    StateLattice lat({0, 0}, {3, 3});
    const auto g = build_grid(lat, 0.45);
    EXPECT_EQ(g.meta_count(), 9u);
    std::vector<V> reps;
    for (std::size_t l = 0; l < 9; ++l)
        reps.emplace_back(g.rep_state(l).begin(), g.rep_state(l).end());
    EXPECT_EQ(reps.front(), (V{0, 0}));
    EXPECT_EQ(reps[1], (V{0, 1}));
    EXPECT_EQ(reps[3], (V{1, 0}));
    EXPECT_EQ(reps.back(), (V{3, 3}));
}

TEST(BuildGrid, TinySpansAreFull) {
    StateLattice lat({0, -1}, {2, 1});
    const auto g = build_grid(lat, 0.45);
    EXPECT_EQ(g.meta_count(), lat.size());
    EXPECT_TRUE(g.is_identity());
}

TEST(BuildGrid, MetaIndexBijection) {
    StateLattice lat({-5, 0, 2}, {9, 12, 30});
    const auto g = build_grid(lat, 0.4);
    std::size_t expect = 1;
    for (std::size_t i = 0; i < 3; ++i)
        expect *= g.axis(i).size();
    EXPECT_EQ(g.meta_count(), expect);
    for (std::size_t l = 0; l < g.meta_count(); ++l) {
        const auto k = g.multi_index(l);
        ASSERT_EQ(g.meta_index(k), l);
        EXPECT_EQ(lat.to_coords(g.rep_index(l)), V(g.rep_state(l).begin(), g.rep_state(l).end()));
    }
}

TEST(BuildGrid, CountBound) {
    for (std::size_t d = 1; d <= 3; ++d)
        for (Coord span : {20, 40, 80})
            for (double s : {1.0 / 3.0, 0.45}) {
                const auto lat = StateLattice::cube(d, 0, span);
                const auto g = build_grid(lat, s);
                const double bound = std::pow(std::sqrt(2.0) / (1 - s), d) * std::pow(lat.size(), 1 - s);
                EXPECT_NEAR(meta_count_bound(lat, s), bound, 1e-9 * bound);
                EXPECT_LE(static_cast<double>(g.meta_count()), bound);
                EXPECT_LE(g.meta_count(), lat.size());
            }
}

TEST(BoundFormula, Examples) {
    EXPECT_NEAR(meta_count_bound(StateLattice({0}, {20}), 0.5), 2 * std::sqrt(2.0) * std::sqrt(21.0), 1e-12);
    EXPECT_NEAR(meta_count_bound(StateLattice({0, 0}, {20, 20}), 0.5), 168.0, 1e-9);
}

TEST(BuildU, SelectsRepresentatives) {
    StateLattice lat({0}, {3});
    const auto g = build_grid(lat, 0.45);
    const auto u = build_U(g, lat);
    EXPECT_DOUBLE_EQ(u.at(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(u.at(1, 1), 1.0);
    EXPECT_DOUBLE_EQ(u.at(2, 3), 1.0);
    EXPECT_EQ(u.nnz(), 3u);
    const auto full = full_grid(lat);
    const auto uf = build_U(full, lat);
    for (std::size_t i = 0; i < 4; ++i)
        EXPECT_DOUBLE_EQ(uf.at(i, i), 1.0);
}

TEST(FromAxes, Validates) {
    StateLattice lat({0}, {20});
    EXPECT_NO_THROW(CoarseGrid::from_axes(lat, {AxisGrid{{0, 20}}}, 0.45));
    EXPECT_THROW(CoarseGrid::from_axes(lat, {AxisGrid{{0, 19}}}, 0.45), DomainError);
    EXPECT_THROW(CoarseGrid::from_axes(lat, {AxisGrid{{0, 5, 5, 20}}}, 0.45), DomainError);
    EXPECT_THROW(CoarseGrid::from_axes(lat, {}, 0.45), DomainError);
}
