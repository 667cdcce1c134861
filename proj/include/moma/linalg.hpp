#pragma once

#include "moma/sparse.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace moma {

struct SolveOptions {
    /// Relative residual target for the Krylov solver.
    double tolerance = 1e-12;
    int max_iterations = 20000;
    /// Systems with at most this many unknowns are factorized directly.
    std::size_t direct_max_states = 4096;
    int refinement_steps = 4;
};

struct SolveStats {
    int iterations = 0;
    double residual = 0.0; ///< max-norm residual of the returned solution
    bool direct = false;
};

/**
 * Solves (I - alpha P) v = rhs.
 *
 * Small systems use sparse LU, larger ones BiCGSTAB with a Jacobi
 * preconditioner followed by iterative refinement. The result satisfies
 * |(I - alpha P)v - rhs|_inf <= 1e-9 (1 + |rhs|_inf) or NumericalError is thrown.
 */
std::vector<double> solve_discounted(const RowStochasticMatrix& p, double alpha,
                                     std::span<const double> rhs, const SolveOptions& options = {},
                                     SolveStats* stats = nullptr);

/// max_x |(v - alpha P v)(x) - rhs(x)|
double discounted_residual(const RowStochasticMatrix& p, double alpha, std::span<const double> v,
                           std::span<const double> rhs);

/// Dense LU with partial pivoting and one refinement step.
/// Throws NumericalError when the residual exceeds tolerance * (1 + |b|_inf).
std::vector<double> solve_dense(const Eigen::MatrixXd& a, std::span<const double> b,
                                double tolerance = 1e-10, double* residual_out = nullptr);

double max_abs(std::span<const double> v) noexcept;

} // namespace moma
