#include "moma/benchmarks.hpp"
#include "moma/chain.hpp"
#include "moma/errors.hpp"

#include "oracles.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>

using namespace moma;

TEST(Mrp, ValidatesInputs) {
    StateLattice lat({0}, {1});
    const auto p = RowStochasticMatrix::identity(2);
    EXPECT_THROW(MarkovRewardProcess(lat, p, {1.0}, 0.9), DomainError);
    EXPECT_THROW(MarkovRewardProcess(lat, p, {1.0, -1.0}, 0.9), DomainError);
    EXPECT_THROW(MarkovRewardProcess(lat, p, {1.0, 1.0}, 1.0), DomainError);
    EXPECT_THROW(MarkovRewardProcess(lat, RowStochasticMatrix::identity(3), {1, 1, 1}, 0.5), DomainError);
}

TEST(ExactValue, ConstantCost) {
    auto rc = oracle::random_chain(StateLattice({0, 0}, {6, 6}), 2, 0.8);
    rc.cost.assign(rc.cost.size(), 1.0);
    const auto v = exact_value(rc.mrp());
    for (double x : v)
        EXPECT_NEAR(x, 5.0, 1e-10);
}

TEST(ExactValue, SimpleRandomWalkIsLinear) {
    const auto mrp = build_simple_rw(20, true, 0.9);
    const auto v = exact_value(mrp);
    for (std::size_t x = 0; x <= 20; ++x)
        EXPECT_NEAR(v[x], static_cast<double>(x) / 0.1, 1e-9);
}

TEST(ExactValue, MatchesPowerSeries) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto rc = oracle::random_chain(StateLattice({0}, {49}), seed, 0.9);
        const auto v = exact_value(rc.mrp());
        EXPECT_LT(oracle::sup_diff(v, oracle::power_series_value(rc.P, rc.cost, 0.9)), 1e-8);
    }
    const auto rc = oracle::random_chain(StateLattice({0, 0}, {13, 13}), 9, 0.95);
    EXPECT_LT(oracle::sup_diff(exact_value(rc.mrp()), oracle::power_series_value(rc.P, rc.cost, 0.95)), 1e-8);
}

TEST(Apply, SimpleWalkPreservesCoordinate) {
    const auto mrp = build_simple_rw(20);
    std::vector<double> f(21);
    for (std::size_t i = 0; i <= 20; ++i)
        f[i] = static_cast<double>(i);
    const auto pf = moma::apply(mrp.P, f);
    for (std::size_t x = 0; x <= 20; ++x)
        EXPECT_NEAR(pf[x], f[x], 1e-14);
}

TEST(LocalMoments, SimpleWalk) {
    const auto m = local_moments(build_simple_rw(20));
    for (std::size_t x = 1; x < 20; ++x) {
        EXPECT_NEAR(m.mu_at(x)[0], 0.0, 1e-15);
        EXPECT_NEAR(m.sigma2_at(x)[0], 1.0, 1e-15);
    }
}

TEST(LocalMoments, TwoPointChain) {
    const std::int64_t n = 20;
    const auto mrp = build_two_point_chain(n);
    const auto m = local_moments(mrp);
    for (std::int64_t x = 0; x <= n; ++x) {
        const double xd = static_cast<double>(x);
        EXPECT_NEAR(m.mu_at(x)[0], 0.0, 1e-12);
        EXPECT_NEAR(m.sigma2_at(x)[0], n * xd - xd * xd, 1e-9);
    }
}

TEST(LocalMoments, DeterministicShift) {
    StateLattice lat({0, 0}, {3, 3});
    RowStochasticMatrix::Builder b(lat.size(), lat.size());
    SparseRow r;
    for (std::size_t x = 0; x < lat.size(); ++x) {
        auto c = lat.to_coords(x);
        c[0] = std::min<Coord>(c[0] + 1, 3);
        r.clear();
        r.add(static_cast<ColIndex>(lat.to_index(c)), 1.0);
        b.append_row(r);
    }
    MarkovRewardProcess mrp(lat, std::move(b).build(), std::vector<double>(lat.size(), 0.0), 0.5);
    const auto m = local_moments(mrp);
    const auto x = lat.to_index(std::vector<Coord>{1, 2});
    EXPECT_DOUBLE_EQ(m.mu_at(x)[0], 1.0);
    EXPECT_DOUBLE_EQ(m.mu_at(x)[1], 0.0);
    const auto s = m.sigma2_at(x);
    EXPECT_DOUBLE_EQ(s[0], 1.0);
    EXPECT_DOUBLE_EQ(s[1] + s[2] + s[3], 0.0);
}

TEST(LocalMoments, CovarianceIsPsd) {
    const auto rc = oracle::random_chain(StateLattice({0, 0}, {8, 8}), 13, 0.9);
    const auto m = local_moments(rc.mrp());
    for (std::size_t x = 0; x < rc.P.size(); ++x) {
        Eigen::Matrix2d c;
        const auto mu = m.mu_at(x);
        const auto s = m.sigma2_at(x);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                c(i, j) = s[i * 2 + j] - mu[i] * mu[j];
        EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(c).eigenvalues().minCoeff(), -1e-10);
    }
}

TEST(MaxJump, Examples) {
    StateLattice lat({0}, {5});
    MarkovRewardProcess id(lat, RowStochasticMatrix::identity(6), std::vector<double>(6, 0.0), 0.5);
    for (std::size_t x = 0; x < 6; ++x)
        EXPECT_DOUBLE_EQ(max_jump(id, x), 0.0);
    const auto rw = build_simple_rw(20);
    EXPECT_DOUBLE_EQ(max_jump(rw, 7), 1.0);
    const auto tp = build_two_point_chain(20);
    EXPECT_DOUBLE_EQ(max_jump(tp, 7), 13.0);
    EXPECT_EQ(max_jumps(tp).size(), 21u);
}

TEST(ScaledValue, ReducesAndMatchesOracle) {
    const auto rc = oracle::random_chain(StateLattice({0}, {29}), 17, 0.9);
    const auto mrp = rc.mrp();
    EXPECT_LT(oracle::sup_diff(scaled_value(mrp, 0.0), exact_value(mrp)), 1e-12);
    std::vector<double> ce(rc.cost.size());
    for (std::size_t x = 0; x < ce.size(); ++x)
        ce[x] = rc.cost[x] / std::pow(1.0 + static_cast<double>(x), 0.5);
    EXPECT_LT(oracle::sup_diff(scaled_value(mrp, 0.5), oracle::power_series_value(rc.P, ce, 0.9)), 1e-8);
    auto zero = rc;
    zero.cost.assign(zero.cost.size(), 0.0);
    EXPECT_LT(max_abs(scaled_value(zero.mrp(), 0.7)), 1e-15);
    EXPECT_THROW(scaled_value(mrp, 1.5), DomainError);
}

TEST(MStep, PowerAndDiscount) {
    const auto rc = oracle::random_chain(StateLattice({0}, {19}), 23, 0.9);
    const auto mrp = rc.mrp();
    const auto one = m_step_chain(mrp, 1);
    EXPECT_DOUBLE_EQ(one.discount, 0.9);
    EXPECT_LT(oracle::sup_diff(one.P.to_dense(), mrp.P.to_dense()), 1e-15);
    const auto two = m_step_chain(mrp, 2);
    EXPECT_NEAR(two.discount, 0.81, 1e-15);
    // two-step enumeration: convolve each row with the rows it reaches
    for (std::size_t x = 0; x < rc.P.size(); ++x) {
        std::vector<double> row(rc.P.size(), 0.0);
        for (std::size_t y = 0; y < rc.P.size(); ++y)
            for (std::size_t z = 0; z < rc.P.size(); ++z)
                row[z] += rc.P[x][y] * rc.P[y][z];
        double sum = 0.0;
        for (std::size_t z = 0; z < rc.P.size(); ++z) {
            ASSERT_NEAR(two.P.at(x, z), row[z], 1e-14);
            sum += two.P.at(x, z);
        }
        EXPECT_NEAR(sum, 1.0, 1e-10);
    }
    EXPECT_THROW(m_step_chain(mrp, 0), DomainError);
    EXPECT_THROW(m_step_chain(mrp, 3, 5), ResourceError);
}

TEST(MStep, PermutationOrder) {
    StateLattice lat({0}, {2});
    RowStochasticMatrix p = RowStochasticMatrix::from_dense(3, 3, std::vector<double>{0, 1, 0, 0, 0, 1, 1, 0, 0});
    MarkovRewardProcess mrp(lat, p, {1, 2, 3}, 0.9);
    const auto three = m_step_chain(mrp, 3);
    for (std::size_t i = 0; i < 3; ++i)
        EXPECT_DOUBLE_EQ(three.P.at(i, i), 1.0);
}

// Independent check of the m-step identity with dense solves.
double mstep_violation_oracle(const oracle::RandomChain& rc, int m) {
    oracle::Dense pm = rc.P;
    std::vector<oracle::Dense> powers{rc.P};
    for (int k = 1; k < m; ++k) {
        pm = oracle::matmul(pm, rc.P);
        powers.push_back(pm);
    }
    const auto vm = oracle::discounted_value(pm, rc.cost, std::pow(rc.alpha, m));
    const auto v = oracle::discounted_value(rc.P, rc.cost, rc.alpha);
    double worst = 0.0;
    for (std::size_t x = 0; x < v.size(); ++x) {
        double num = v[x], den = 1.0;
        for (int k = 1; k < m; ++k) {
            const double ak = std::pow(rc.alpha, k);
            double e = 0.0;
            for (std::size_t y = 0; y < v.size(); ++y)
                e += powers[k - 1][x][y] * vm[y];
            num -= ak * (e - vm[x]);
            den += ak;
        }
        worst = std::max(worst, std::abs(vm[x] - num / den));
    }
    return worst;
}

TEST(MStep, IdentityHolds) {
    const auto a = oracle::random_chain(StateLattice({0}, {19}), 31, 0.9);
    EXPECT_LE(verify_mstep_identity(a.mrp(), 1), 1e-12);
    EXPECT_LE(verify_mstep_identity(a.mrp(), 2), 1e-8);
    EXPECT_LE(mstep_violation_oracle(a, 2), 1e-8);
    const auto b = oracle::random_chain(StateLattice({0}, {19}), 32, 0.95);
    EXPECT_LE(verify_mstep_identity(b.mrp(), 3), 1e-8);
    EXPECT_LE(mstep_violation_oracle(b, 3), 1e-8);
}

TEST(Delta, Examples) {
    const auto rc = oracle::random_chain(StateLattice({0}, {15}), 5, 0.9);
    const auto mrp = rc.mrp();
    std::vector<double> f(16);
    for (std::size_t i = 0; i < 16; ++i)
        f[i] = std::cos(static_cast<double>(i));
    EXPECT_DOUBLE_EQ(sup_delta(mrp.P, mrp.P, f), 0.0);
    const auto other = oracle::random_chain(StateLattice({0}, {15}), 6, 0.9).mrp();
    EXPECT_LT(sup_delta(mrp.P, other.P, std::vector<double>(16, 3.0)), 1e-14);
    const auto prof = delta_f(mrp.P, other.P, f);
    double sup = 0.0;
    for (std::size_t x = 0; x < 16; ++x) {
        const double ref = std::abs(oracle::matvec(rc.P, f)[x] - oracle::matvec(oracle::dense(other.P), f)[x]);
        EXPECT_NEAR(prof.per_state[x], ref, 1e-14);
        EXPECT_NEAR(delta_at(mrp.P, other.P, f, x), ref, 1e-14);
        sup = std::max(sup, ref);
    }
    EXPECT_NEAR(prof.sup, sup, 1e-14);
    // simple walk vs two-point chain share first moments
    const auto rw = build_simple_rw(20), tp = build_two_point_chain(20);
    std::vector<double> id(21);
    for (std::size_t i = 0; i <= 20; ++i)
        id[i] = static_cast<double>(i);
    EXPECT_LT(sup_delta(rw.P, tp.P, id), 1e-12);
}

TEST(Lemma1, RandomPairs) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const double alpha = seed % 2 ? 0.9 : 0.8;
        auto a = oracle::random_chain(StateLattice({0}, {40}), 100 + seed, alpha);
        auto b = oracle::random_chain(StateLattice({0}, {40}), 200 + seed, alpha);
        b.cost = a.cost;
        const auto va = oracle::discounted_value(a.P, a.cost, alpha);
        const auto vb = oracle::discounted_value(b.P, b.cost, alpha);
        const auto ma = a.mrp(), mb = b.mrp();
        const double bound = alpha / (1 - alpha) * (sup_delta(ma.P, mb.P, va) + sup_delta(ma.P, mb.P, vb));
        EXPECT_LE(oracle::sup_diff(va, vb), bound + 1e-8);
    }
}

TEST(CoordinateTable, Layout) {
    StateLattice lat({-1, 2}, {1, 3});
    const auto t = coordinate_table(lat);
    ASSERT_EQ(t.size(), lat.size() * 2);
    EXPECT_DOUBLE_EQ(t[0], -1.0);
    EXPECT_DOUBLE_EQ(t[1], 2.0);
    EXPECT_DOUBLE_EQ(t[2 * 5], 1.0);
    EXPECT_DOUBLE_EQ(t[2 * 5 + 1], 3.0);
}
