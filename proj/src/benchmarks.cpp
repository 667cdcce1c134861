#include "moma/benchmarks.hpp"

#include "moma/errors.hpp"
#include "moma/parallel.hpp"

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/poisson.hpp>

#include <cmath>
#include <functional>
#include <random>
#include <sstream>

namespace moma {

namespace {

template <class T> void require_size(const std::vector<T>& v, std::size_t n, const char* what) {
    if (v.size() != n)
        throw DomainError(std::string(what) + " must have one entry per dimension");
}

class TableOracle final : public ExpectationOracle {
  public:
    using Lookup = std::function<StateIndex(StateIndex, ActionId)>;
    TableOracle(std::vector<double> table, Lookup lookup)
        : table_(std::move(table)), lookup_(std::move(lookup)) {}
    double expected(StateIndex x, ActionId a) const override { return table_[lookup_(x, a)]; }

  private:
    std::vector<double> table_;
    Lookup lookup_;
};

} // namespace

std::vector<double> separable_expectation(std::span<const double> f,
                                          std::span<const std::size_t> extents,
                                          std::span<const RowStochasticMatrix> kernels) {
    const std::size_t d = extents.size();
    if (kernels.size() != d)
        throw DomainError("one kernel per axis required");
    std::size_t total = 1;
    for (std::size_t e : extents)
        total *= e;
    if (f.size() != total)
        throw DomainError("function does not match the box extents");

    std::vector<std::size_t> shape(extents.begin(), extents.end());
    std::vector<double> cur(f.begin(), f.end());
    for (std::size_t axis = 0; axis < d; ++axis) {
        const auto& k = kernels[axis];
        if (k.n_cols() != shape[axis])
            throw DomainError("kernel columns do not match the axis extent");
        std::size_t outer = 1, inner = 1;
        for (std::size_t i = 0; i < axis; ++i)
            outer *= shape[i];
        for (std::size_t i = axis + 1; i < d; ++i)
            inner *= shape[i];
        const std::size_t e = shape[axis];
        const std::size_t m = k.n_rows();
        std::vector<double> next(outer * m * inner, 0.0);
        parallel_for(outer * m, [&](std::size_t om) {
            const std::size_t o = om / m, z = om % m;
            double* dst = &next[(o * m + z) * inner];
            const auto row = k.row(z);
            for (std::size_t t = 0; t < row.size(); ++t) {
                const double p = row.vals[t];
                const double* src = &cur[(o * e + row.cols[t]) * inner];
                for (std::size_t in = 0; in < inner; ++in)
                    dst[in] += p * src[in];
            }
        });
        cur = std::move(next);
        shape[axis] = m;
    }
    return cur;
}

// ---------------------------------------------------------------- presets

JrpParams jrp_small() {
    JrpParams p;
    p.demand = {{0, 5}, {0, 3}};
    p.holding = {1, 1};
    p.backorder = {19, 19};
    p.minor = {40, 10};
    p.major = 75;
    p.truck_capacity = 6;
    p.lower = {-30, -30};
    p.upper = {40, 40};
    p.discount = 0.99;
    p.grid_origin = {1, 1};
    return p;
}

JrpParams jrp_large() {
    JrpParams p;
    p.demand = {{15, 25}, {5, 15}};
    p.holding = {7, 1};
    p.backorder = {19, 19};
    p.minor = {40, 10};
    p.major = 400;
    p.truck_capacity = 33;
    p.lower = {-50, -50};
    p.upper = {120, 120};
    p.discount = 0.99;
    p.widen_orders = true;
    p.grid_origin = {1, 1};
    return p;
}

HospitalParams hospital2() {
    HospitalParams p;
    p.arrival = {3.5, 2.8};
    p.service = {0.25, 0.35};
    p.beds = {12, 12};
    p.holding = {5, 5};
    p.overflow = {{0, 5}, {1, 0}};
    p.cap = {42, 42};
    p.discount = 0.99;
    p.grid_origin = {12, 12};
    return p;
}

HospitalParams hospital3(double load) {
    HospitalParams p;
    p.service = {0.4, 0.6, 0.1};
    p.beds = {10, 10, 10};
    for (std::size_t j = 0; j < 3; ++j)
        p.arrival.push_back(load * static_cast<double>(p.beds[j]) * p.service[j]);
    p.holding = {10, 2, 6};
    p.overflow = {{0, 5, 2}, {3, 0, 7}, {7, 9, 0}};
    p.cap = {24, 24, 24};
    p.discount = 0.99;
    p.grid_origin = {10, 10, 10};
    return p;
}

HospitalParams hospital4() {
    HospitalParams p;
    p.arrival = {0.32, 1.68, 0.4, 0.48};
    p.service = {0.2, 0.7, 0.5, 0.3};
    p.beds = {2, 3, 1, 2};
    p.holding = {10, 2, 6, 6};
    p.overflow = {{0, 5, 2, 1}, {7, 0, 1, 2}, {7, 9, 0, 3}, {1, 2, 3, 0}};
    p.cap = {14, 15, 13, 14};
    p.discount = 0.99;
    p.grid_origin = {0, 0, 0, 0};
    return p;
}

// ---------------------------------------------------------------- JRP

JrpMdp::JrpMdp(JrpParams params) : params_(std::move(params)) {
    const std::size_t n = params_.demand.size();
    if (n == 0)
        throw DomainError("at least one item required");
    require_size(params_.holding, n, "holding");
    require_size(params_.backorder, n, "backorder");
    require_size(params_.minor, n, "minor");
    require_size(params_.lower, n, "lower");
    require_size(params_.upper, n, "upper");
    if (params_.truck_capacity < 1)
        throw DomainError("truck capacity must be at least 1");
    if (!(params_.discount > 0.0 && params_.discount < 1.0))
        throw DomainError("discount must lie in (0,1)");
    if (params_.major < 0.0)
        throw DomainError("costs must be nonnegative");
    for (std::size_t i = 0; i < n; ++i) {
        const auto& d = params_.demand[i];
        if (d.lo < 0 || d.hi < d.lo)
            throw DomainError("demand bounds must satisfy 0 <= lo <= hi");
        if (params_.holding[i] < 0 || params_.backorder[i] < 0 || params_.minor[i] < 0)
            throw DomainError("costs must be nonnegative");
    }
    lattice_ = StateLattice(params_.lower, params_.upper);
    std::vector<Coord> post_upper = params_.upper;
    if (params_.widen_orders)
        for (std::size_t i = 0; i < n; ++i)
            post_upper[i] += params_.demand[i].lo;
    post_ = StateLattice(params_.lower, post_upper);

    for (std::size_t i = 0; i < n; ++i) {
        const Coord lo = params_.lower[i];
        const auto& dem = params_.demand[i];
        const double p = 1.0 / static_cast<double>(dem.hi - dem.lo + 1);
        RowStochasticMatrix::Builder b(post_.extent(i), lattice_.extent(i));
        std::vector<double> stage(post_.extent(i), 0.0);
        SparseRow row;
        for (std::size_t zi = 0; zi < post_.extent(i); ++zi) {
            const Coord z = lo + static_cast<Coord>(zi);
            row.clear();
            for (std::int64_t d = dem.lo; d <= dem.hi; ++d) {
                const Coord y = std::max(lo, z - d);
                if (y > params_.upper[i])
                    throw DomainError("order widening exceeds the inventory cap");
                row.add(static_cast<ColIndex>(y - lo), p);
                const double yd = static_cast<double>(y);
                stage[zi] += p * (params_.holding[i] * std::max(yd, 0.0) +
                                  params_.backorder[i] * std::max(-yd, 0.0));
            }
            b.append_row(row);
        }
        kernels_.push_back(std::move(b).build());
        stage_cost_.push_back(std::move(stage));
    }
}

std::int64_t JrpMdp::max_order(StateIndex x, std::size_t i) const {
    return params_.upper[i] - lattice_.coord(x, i) + (params_.widen_orders ? params_.demand[i].lo : 0);
}

std::size_t JrpMdp::action_count(StateIndex x) const {
    std::size_t c = 1;
    for (std::size_t i = 0; i < lattice_.dims(); ++i)
        c *= static_cast<std::size_t>(max_order(x, i) + 1);
    return c;
}

std::vector<std::int64_t> JrpMdp::order_of(StateIndex x, ActionId a) const {
    if (a >= action_count(x))
        throw DomainError("action id out of range");
    const std::size_t n = lattice_.dims();
    std::vector<std::int64_t> q(n);
    std::size_t rest = a;
    for (std::size_t i = n; i-- > 0;) {
        const auto radix = static_cast<std::size_t>(max_order(x, i) + 1);
        q[i] = static_cast<std::int64_t>(rest % radix);
        rest /= radix;
    }
    return q;
}

ActionId JrpMdp::action_of(StateIndex x, std::span<const std::int64_t> q) const {
    if (q.size() != lattice_.dims())
        throw DomainError("order vector has wrong length");
    std::size_t a = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const auto qmax = max_order(x, i);
        if (q[i] < 0 || q[i] > qmax)
            throw DomainError("order quantity infeasible");
        a = a * static_cast<std::size_t>(qmax + 1) + static_cast<std::size_t>(q[i]);
    }
    return static_cast<ActionId>(a);
}

StateIndex JrpMdp::post_index(StateIndex x, ActionId a, double* order_cost) const {
    const std::size_t n = lattice_.dims();
    std::size_t rest = a;
    std::size_t idx = 0;
    std::int64_t total = 0;
    double fixed = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        const auto radix = static_cast<std::size_t>(max_order(x, i) + 1);
        const auto q = static_cast<std::int64_t>(rest % radix);
        rest /= radix;
        const Coord z = lattice_.coord(x, i) + q;
        idx += static_cast<std::size_t>(z - params_.lower[i]) * post_.stride(i);
        total += q;
        if (q > 0)
            fixed += params_.minor[i];
        if (order_cost)
            *order_cost += stage_cost_[i][static_cast<std::size_t>(z - params_.lower[i])];
    }
    if (rest != 0)
        throw DomainError("action id out of range");
    if (order_cost) {
        const auto trucks = (total + params_.truck_capacity - 1) / params_.truck_capacity;
        *order_cost += fixed + params_.major * static_cast<double>(trucks);
    }
    return idx;
}

double JrpMdp::cost(StateIndex x, ActionId a) const {
    double c = 0.0;
    post_index(x, a, &c);
    return c;
}

void JrpMdp::transition(StateIndex x, ActionId a, SparseRow& out) const {
    const StateIndex z = post_index(x, a, nullptr);
    const std::size_t n = lattice_.dims();
    // product of per-item rows
    std::vector<std::pair<std::size_t, double>> acc{{0, 1.0}};
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = kernels_[i].row((z / post_.stride(i)) % post_.extent(i));
        std::vector<std::pair<std::size_t, double>> next;
        next.reserve(acc.size() * row.size());
        for (const auto& [idx, p] : acc)
            for (std::size_t k = 0; k < row.size(); ++k)
                next.emplace_back(idx + row.cols[k] * lattice_.stride(i), p * row.vals[k]);
        acc = std::move(next);
    }
    for (const auto& [idx, p] : acc)
        out.add(static_cast<ColIndex>(idx), p);
}

std::string JrpMdp::action_label(StateIndex x, ActionId a) const {
    const auto q = order_of(x, a);
    std::ostringstream s;
    s << "q=(";
    for (std::size_t i = 0; i < q.size(); ++i)
        s << (i ? "," : "") << q[i];
    s << ")";
    return s.str();
}

std::unique_ptr<ExpectationOracle> JrpMdp::prepare(std::span<const double> f) const {
    if (f.size() != lattice_.size())
        throw DomainError("function length does not match the lattice");
    std::vector<std::size_t> ext(lattice_.dims());
    for (std::size_t i = 0; i < ext.size(); ++i)
        ext[i] = lattice_.extent(i);
    auto table = separable_expectation(f, ext, kernels_);
    return std::make_unique<TableOracle>(
        std::move(table), [this](StateIndex x, ActionId a) { return post_index(x, a, nullptr); });
}

// ---------------------------------------------------------------- hospital

HospitalMdp::HospitalMdp(HospitalParams params) : params_(std::move(params)) {
    const std::size_t J = params_.arrival.size();
    if (J == 0)
        throw DomainError("at least one ward required");
    require_size(params_.service, J, "service");
    require_size(params_.beds, J, "beds");
    require_size(params_.holding, J, "holding");
    require_size(params_.cap, J, "cap");
    require_size(params_.overflow, J, "overflow");
    if (!(params_.discount > 0.0 && params_.discount < 1.0))
        throw DomainError("discount must lie in (0,1)");
    for (std::size_t j = 0; j < J; ++j) {
        require_size(params_.overflow[j], J, "overflow row");
        if (!(params_.service[j] > 0.0 && params_.service[j] <= 1.0))
            throw DomainError("service probabilities must lie in (0,1]");
        if (!(params_.arrival[j] > 0.0))
            throw DomainError("arrival rates must be positive");
        if (params_.beds[j] < 0 || params_.cap[j] < params_.beds[j])
            throw DomainError("caps must satisfy 0 <= N_j <= u_j");
        if (params_.cap[j] - params_.beds[j] > 255 || params_.beds[j] > 255)
            throw DomainError("queue and bed counts above 255 are not supported");
        if (params_.holding[j] < 0)
            throw DomainError("costs must be nonnegative");
        for (std::size_t i = 0; i < J; ++i)
            if (i != j && params_.overflow[j][i] < 0)
                throw DomainError("costs must be nonnegative");
    }
    lattice_ = StateLattice(std::vector<Coord>(J, 0), params_.cap);

    // per-ward kernels: departures Binomial(min(z, N), p), then Poisson arrivals, clamped at u
    for (std::size_t j = 0; j < J; ++j) {
        const Coord u = params_.cap[j];
        const boost::math::poisson_distribution<double> arrivals(params_.arrival[j]);
        RowStochasticMatrix::Builder b(static_cast<std::size_t>(u + 1), static_cast<std::size_t>(u + 1));
        SparseRow row;
        for (Coord z = 0; z <= u; ++z) {
            row.clear();
            const auto busy = static_cast<unsigned>(std::min<Coord>(z, params_.beds[j]));
            const boost::math::binomial_distribution<double> departures(busy, params_.service[j]);
            for (unsigned d = 0; d <= busy; ++d) {
                const double pd = boost::math::pdf(departures, d);
                const Coord base = z - static_cast<Coord>(d);
                for (Coord k = 0; base + k < u; ++k)
                    row.add(static_cast<ColIndex>(base + k),
                            pd * boost::math::pdf(arrivals, static_cast<double>(k)));
                const double tail =
                    u - base == 0 ? 1.0
                                  : boost::math::cdf(boost::math::complement(
                                        arrivals, static_cast<double>(u - base - 1)));
                row.add(static_cast<ColIndex>(u), pd * tail);
            }
            b.append_row(row);
        }
        kernels_.push_back(std::move(b).build());
    }

    // action enumeration: overflow pairs (i, j), i != j, lexicographic, each count ascending
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < J; ++i)
        for (std::size_t j = 0; j < J; ++j)
            if (i != j)
                pairs.emplace_back(i, j);
    const std::size_t np = pairs.size();

    offsets_.assign(1, 0);
    StateVec x(J);
    std::vector<std::int64_t> out_rem(J), in_rem(J), u(np);
    for (StateIndex s = 0; s < lattice_.size(); ++s) {
        lattice_.to_coords(s, x);
        for (std::size_t j = 0; j < J; ++j) {
            out_rem[j] = std::max<std::int64_t>(0, x[j] - params_.beds[j]);
            in_rem[j] = std::max<std::int64_t>(0, params_.beds[j] - x[j]);
        }
        auto emit = [&]() {
            std::vector<std::int64_t> out(J, 0), in(J, 0);
            double c = 0.0;
            for (std::size_t k = 0; k < np; ++k) {
                const auto [i, j] = pairs[k];
                out[i] += u[k];
                in[j] += u[k];
                c += params_.overflow[i][j] * static_cast<double>(u[k]);
                overflow_.push_back(static_cast<std::uint8_t>(u[k]));
            }
            StateIndex z = 0;
            for (std::size_t i = 0; i < J; ++i) {
                c += params_.holding[i] *
                     static_cast<double>(std::max<std::int64_t>(0, x[i] - out[i] - params_.beds[i]));
                z += static_cast<std::size_t>(x[i] - out[i] + in[i]) * lattice_.stride(i);
            }
            costs_.push_back(c);
            post_.push_back(z);
        };
        auto rec = [&](auto&& self, std::size_t k) -> void {
            if (k == np) {
                emit();
                return;
            }
            const auto [i, j] = pairs[k];
            const std::int64_t top = std::min(out_rem[i], in_rem[j]);
            for (std::int64_t v = 0; v <= top; ++v) {
                u[k] = v;
                out_rem[i] -= v;
                in_rem[j] -= v;
                self(self, k + 1);
                out_rem[i] += v;
                in_rem[j] += v;
            }
            u[k] = 0;
        };
        rec(rec, 0);
        offsets_.push_back(costs_.size());
    }
}

std::size_t HospitalMdp::slot(StateIndex x, ActionId a) const {
    if (x >= lattice_.size() || a >= offsets_[x + 1] - offsets_[x])
        throw DomainError("state/action pair out of range");
    return offsets_[x] + a;
}

std::vector<std::int64_t> HospitalMdp::overflow_of(StateIndex x, ActionId a) const {
    const std::size_t J = lattice_.dims();
    const std::size_t np = J * (J - 1);
    const std::size_t base = slot(x, a) * np;
    std::vector<std::int64_t> m(J * J, 0);
    std::size_t k = 0;
    for (std::size_t i = 0; i < J; ++i)
        for (std::size_t j = 0; j < J; ++j)
            if (i != j)
                m[i * J + j] = overflow_[base + k++];
    return m;
}

void HospitalMdp::transition(StateIndex x, ActionId a, SparseRow& out) const {
    const StateIndex z = post_[slot(x, a)];
    std::vector<std::pair<std::size_t, double>> acc{{0, 1.0}};
    for (std::size_t j = 0; j < lattice_.dims(); ++j) {
        const auto row = kernels_[j].row(static_cast<std::size_t>(lattice_.coord(z, j)));
        std::vector<std::pair<std::size_t, double>> next;
        next.reserve(acc.size() * row.size());
        for (const auto& [idx, p] : acc)
            for (std::size_t k = 0; k < row.size(); ++k) {
                const double q = p * row.vals[k];
                if (q > 0.0)
                    next.emplace_back(idx + row.cols[k] * lattice_.stride(j), q);
            }
        acc = std::move(next);
    }
    out.reserve(out.size() + acc.size());
    for (const auto& [idx, p] : acc)
        out.add(static_cast<ColIndex>(idx), p);
}

std::string HospitalMdp::action_label(StateIndex x, ActionId a) const {
    const auto m = overflow_of(x, a);
    const std::size_t J = lattice_.dims();
    std::ostringstream s;
    bool any = false;
    for (std::size_t i = 0; i < J; ++i)
        for (std::size_t j = 0; j < J; ++j)
            if (m[i * J + j] > 0) {
                s << (any ? " " : "") << "u" << i + 1 << j + 1 << "=" << m[i * J + j];
                any = true;
            }
    return any ? s.str() : "none";
}

std::unique_ptr<ExpectationOracle> HospitalMdp::prepare(std::span<const double> f) const {
    if (f.size() != lattice_.size())
        throw DomainError("function length does not match the lattice");
    std::vector<std::size_t> ext(lattice_.dims());
    for (std::size_t i = 0; i < ext.size(); ++i)
        ext[i] = lattice_.extent(i);
    auto table = separable_expectation(f, ext, kernels_);
    return std::make_unique<TableOracle>(
        std::move(table), [this](StateIndex x, ActionId a) { return post_[slot(x, a)]; });
}

// ---------------------------------------------------------------- random walks

MarkovRewardProcess build_simple_rw(std::int64_t n, bool absorbing, double alpha) {
    if (n < 2)
        throw DomainError("random walk needs n >= 2");
    StateLattice lat({0}, {n});
    RowStochasticMatrix::Builder b(lat.size(), lat.size());
    SparseRow row;
    std::vector<double> c(lat.size());
    for (std::int64_t x = 0; x <= n; ++x) {
        row.clear();
        if (x == 0)
            row.add(absorbing ? 0 : 1, 1.0);
        else if (x == n)
            row.add(static_cast<ColIndex>(absorbing ? n : n - 1), 1.0);
        else {
            row.add(static_cast<ColIndex>(x - 1), 0.5);
            row.add(static_cast<ColIndex>(x + 1), 0.5);
        }
        b.append_row(row);
        c[static_cast<std::size_t>(x)] = static_cast<double>(x);
    }
    return MarkovRewardProcess(lat, std::move(b).build(), std::move(c), alpha);
}

MarkovRewardProcess build_two_point_chain(std::int64_t n, double alpha) {
    if (n < 2)
        throw DomainError("two-point chain needs n >= 2");
    StateLattice lat({0}, {n});
    RowStochasticMatrix::Builder b(lat.size(), lat.size());
    SparseRow row;
    std::vector<double> c(lat.size());
    for (std::int64_t x = 0; x <= n; ++x) {
        row.clear();
        const double up = static_cast<double>(x) / static_cast<double>(n);
        if (up < 1.0)
            row.add(0, 1.0 - up);
        if (up > 0.0)
            row.add(static_cast<ColIndex>(n), up);
        b.append_row(row);
        c[static_cast<std::size_t>(x)] = static_cast<double>(x);
    }
    return MarkovRewardProcess(lat, std::move(b).build(), std::move(c), alpha);
}

double seeded_uniform(std::uint64_t seed, std::uint64_t counter) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32)};
    std::mt19937_64 gen(seq);
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

MarkovRewardProcess build_reflecting_rw(std::int64_t n, std::uint64_t seed, double alpha) {
    if (n < 3)
        throw DomainError("reflecting walk needs n >= 3");
    StateLattice lat({1}, {n});
    RowStochasticMatrix::Builder b(lat.size(), lat.size());
    SparseRow row;
    std::vector<double> c(lat.size());
    for (std::int64_t i = 1; i <= n; ++i) {
        row.clear();
        const auto idx = static_cast<ColIndex>(i - 1);
        if (i == 1)
            row.add(1, 1.0);
        else if (i == n)
            row.add(idx - 1, 1.0);
        else {
            const double up = 0.5 - 0.1 * seeded_uniform(seed, static_cast<std::uint64_t>(i));
            row.add(idx - 1, 1.0 - up);
            row.add(idx + 1, up);
        }
        b.append_row(row);
        c[idx] = static_cast<double>(i * i);
    }
    return MarkovRewardProcess(lat, std::move(b).build(), std::move(c), alpha);
}

} // namespace moma
