#include "moma/linalg.hpp"

#include "moma/errors.hpp"
#include "moma/parallel.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <string>

namespace moma {
class DiscountedOperator;
}

namespace Eigen::internal {
template <>
struct traits<moma::DiscountedOperator> : public traits<Eigen::SparseMatrix<double, Eigen::RowMajor, int>> {};
} // namespace Eigen::internal

namespace moma {

// I - aP applied straight from the CSR arrays, so large systems are not copied
class DiscountedOperator : public Eigen::EigenBase<DiscountedOperator> {
  public:
    using Scalar = double;
    using RealScalar = double;
    using StorageIndex = int;
    enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic, IsRowMajor = true };

    DiscountedOperator(const RowStochasticMatrix& p, double alpha) : p_(p), alpha_(alpha) {}
    Eigen::Index rows() const { return static_cast<Eigen::Index>(p_.n_rows()); }
    Eigen::Index cols() const { return static_cast<Eigen::Index>(p_.n_cols()); }

    template <typename Rhs>
    Eigen::Product<DiscountedOperator, Rhs, Eigen::AliasFreeProduct> operator*(const Eigen::MatrixBase<Rhs>& x) const {
        return Eigen::Product<DiscountedOperator, Rhs, Eigen::AliasFreeProduct>(*this, x.derived());
    }

    double diagonal(std::size_t r) const {
        const auto row = p_.row(r);
        for (std::size_t k = 0; k < row.size(); ++k)
            if (row.cols[k] == r)
                return 1.0 - alpha_ * row.vals[k];
        return 1.0;
    }

    template <typename Dest, typename Rhs>
    void add_to(Dest& dst, const Rhs& x, double scale) const {
        const auto n = static_cast<std::size_t>(rows());
        parallel_for(n, [&](std::size_t r) {
            const auto row = p_.row(r);
            double acc = 0.0;
            for (std::size_t k = 0; k < row.size(); ++k)
                acc += row.vals[k] * x.coeff(static_cast<Eigen::Index>(row.cols[k]));
            const auto i = static_cast<Eigen::Index>(r);
            dst.coeffRef(i) += scale * (x.coeff(i) - alpha_ * acc);
        });
    }

  private:
    const RowStochasticMatrix& p_;
    double alpha_;
};

class JacobiPreconditioner {
  public:
    JacobiPreconditioner() = default;
    template <typename M>
    explicit JacobiPreconditioner(const M& m) { compute(m); }
    template <typename M>
    JacobiPreconditioner& analyzePattern(const M&) { return *this; }
    template <typename M>
    JacobiPreconditioner& factorize(const M& m) { return compute(m); }
    template <typename M>
    JacobiPreconditioner& compute(const M& m) {
        inv_.resize(m.rows());
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            const double d = m.diagonal(static_cast<std::size_t>(r));
            inv_[r] = d != 0.0 ? 1.0 / d : 1.0;
        }
        return *this;
    }
    template <typename R>
    Eigen::VectorXd solve(const Eigen::MatrixBase<R>& b) const { return inv_.cwiseProduct(b); }
    Eigen::ComputationInfo info() const { return Eigen::Success; }

  private:
    Eigen::VectorXd inv_;
};

} // namespace moma

namespace Eigen::internal {
template <typename Rhs>
struct generic_product_impl<moma::DiscountedOperator, Rhs, SparseShape, DenseShape, GemvProduct>
    : generic_product_impl_base<moma::DiscountedOperator, Rhs,
                                generic_product_impl<moma::DiscountedOperator, Rhs>> {
    using Scalar = typename Product<moma::DiscountedOperator, Rhs>::Scalar;
    template <typename Dest>
    static void scaleAndAddTo(Dest& dst, const moma::DiscountedOperator& lhs, const Rhs& rhs, const Scalar& alpha) {
        lhs.add_to(dst, rhs, alpha);
    }
};
} // namespace Eigen::internal

namespace moma {

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

SpMat discounted_operator(const RowStochasticMatrix& p, double alpha) {
    if (p.nnz() + p.n_rows() > static_cast<std::size_t>(std::numeric_limits<int>::max()))
        throw ResourceError("system too large for the sparse solver");
    const int n = static_cast<int>(p.n_rows());
    SpMat a(n, n);
    Eigen::VectorXi per_row(n);
    for (int r = 0; r < n; ++r)
        per_row[r] = static_cast<int>(p.row(r).size()) + 1;
    a.reserve(per_row);
    for (int r = 0; r < n; ++r) {
        const auto row = p.row(r);
        bool diag_done = false;
        for (std::size_t k = 0; k < row.size(); ++k) {
            const int c = static_cast<int>(row.cols[k]);
            if (!diag_done && c >= r) {
                if (c == r) {
                    a.insert(r, c) = 1.0 - alpha * row.vals[k];
                    diag_done = true;
                    continue;
                }
                a.insert(r, r) = 1.0;
                diag_done = true;
            }
            a.insert(r, c) = -alpha * row.vals[k];
        }
        if (!diag_done)
            a.insert(r, r) = 1.0;
    }
    a.makeCompressed();
    return a;
}

} // namespace

double max_abs(std::span<const double> v) noexcept {
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

double discounted_residual(const RowStochasticMatrix& p, double alpha, std::span<const double> v,
                           std::span<const double> rhs) {
    const auto pv = p.apply(v);
    double r = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        r = std::max(r, std::abs(v[i] - alpha * pv[i] - rhs[i]));
    return r;
}

std::vector<double> solve_discounted(const RowStochasticMatrix& p, double alpha,
                                     std::span<const double> rhs, const SolveOptions& options,
                                     SolveStats* stats) {
    const std::size_t n = p.n_rows();
    if (p.n_cols() != n || rhs.size() != n)
        throw DomainError("solve_discounted: dimension mismatch");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("discount must lie in (0,1)");

    const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(n));
    const double target = 1e-9 * (1.0 + max_abs(rhs));
    SolveStats local;

    Eigen::VectorXd x;
    if (n <= options.direct_max_states) {
        const SpMat a = discounted_operator(p, alpha);
        Eigen::SparseLU<Eigen::SparseMatrix<double, Eigen::ColMajor, int>> lu;
        const Eigen::SparseMatrix<double, Eigen::ColMajor, int> ac = a;
        lu.compute(ac);
        if (lu.info() != Eigen::Success)
            throw NumericalError("sparse LU factorization failed", std::numeric_limits<double>::infinity());
        x = lu.solve(b);
        for (int step = 0; step < options.refinement_steps; ++step) {
            const Eigen::VectorXd r = b - a * x;
            if (r.lpNorm<Eigen::Infinity>() <= 1e-3 * target)
                break;
            x += lu.solve(r);
        }
        local.direct = true;
    } else {
        const DiscountedOperator a(p, alpha);
        Eigen::BiCGSTAB<DiscountedOperator, JacobiPreconditioner> solver;
        solver.setTolerance(options.tolerance);
        solver.setMaxIterations(options.max_iterations);
        solver.compute(a);
        x = solver.solve(b);
        local.iterations = static_cast<int>(solver.iterations());
        for (int step = 0; step < options.refinement_steps; ++step) {
            const Eigen::VectorXd r = b - a * x;
            if (r.lpNorm<Eigen::Infinity>() <= 1e-2 * target)
                break;
            x += solver.solve(r);
            local.iterations += static_cast<int>(solver.iterations());
        }
    }

    std::vector<double> v(x.data(), x.data() + n);
    local.residual = discounted_residual(p, alpha, v, rhs);
    if (stats)
        *stats = local;
    if (!std::isfinite(local.residual) || local.residual > target)
        throw NumericalError("discounted solve did not reach tolerance", local.residual);
    return v;
}

std::vector<double> solve_dense(const Eigen::MatrixXd& a, std::span<const double> b,
                                double tolerance, double* residual_out) {
    const auto n = a.rows();
    if (a.cols() != n || static_cast<Eigen::Index>(b.size()) != n)
        throw DomainError("solve_dense: dimension mismatch");
    const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), n);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    Eigen::VectorXd x = lu.solve(rhs);
    x += lu.solve(Eigen::VectorXd(rhs - a * x));
    const double residual = (a * x - rhs).lpNorm<Eigen::Infinity>();
    if (residual_out)
        *residual_out = residual;
    if (!x.allFinite() || !std::isfinite(residual) ||
        residual > tolerance * (1.0 + rhs.lpNorm<Eigen::Infinity>()))
        throw NumericalError("dense solve failed (singular or ill-conditioned system)", residual);
    return std::vector<double>(x.data(), x.data() + n);
}

} // namespace moma
