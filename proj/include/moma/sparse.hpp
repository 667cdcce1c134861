#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace moma {

using ColIndex = std::uint32_t;

/// Scratch buffer for one sparse row; entries may arrive unsorted and with repeats.
class SparseRow {
  public:
    void clear() noexcept { entries_.clear(); }
    void add(ColIndex col, double value) { entries_.emplace_back(col, value); }
    void reserve(std::size_t n) { entries_.reserve(n); }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    /// Sort by column and merge repeated columns.
    void canonicalize();

    // Probabilities below this are dropped before the row is renormalized.
    static constexpr double drop_threshold = 1e-15;

    /// Drop tiny entries and rescale to sum one. Throws DomainError when the
    /// row is not a probability vector to within `tolerance`.
    void normalize(double tolerance = 1e-9);

    double dot(std::span<const double> f) const noexcept {
        double s = 0.0;
        for (const auto& [c, v] : entries_)
            s += v * f[c];
        return s;
    }

    std::span<const std::pair<ColIndex, double>> entries() const noexcept { return entries_; }

  private:
    std::vector<std::pair<ColIndex, double>> entries_;
};

/// Read-only view of one row of a CSR matrix.
struct RowView {
    std::span<const ColIndex> cols;
    std::span<const double> vals;

    std::size_t size() const noexcept { return cols.size(); }
    double dot(std::span<const double> f) const noexcept {
        double s = 0.0;
        for (std::size_t k = 0; k < cols.size(); ++k)
            s += vals[k] * f[cols[k]];
        return s;
    }
};

/**
 * Sparse row-major (CSR) matrix whose rows are probability distributions.
 *
 * Invariants, enforced at construction: entries nonnegative, column indices
 * strictly increasing in each row, each row sums to one within 1e-12.
 * Used for transition matrices P, the disaggregation matrix U, the
 * aggregation matrix G, row slices of P and their products.
 */
class RowStochasticMatrix {
  public:
    static constexpr double row_sum_tolerance = 1e-12;
    static constexpr std::size_t unlimited = std::numeric_limits<std::size_t>::max();

    /// Appends rows in order; every row is canonicalized and normalized.
    class Builder {
      public:
        Builder(std::size_t n_rows, std::size_t n_cols);
        void reserve(std::size_t nnz);
        void append_row(SparseRow& row, double tolerance = 1e-9);
        std::size_t rows_appended() const noexcept { return row_ptr_.size() - 1; }
        RowStochasticMatrix build() &&;

      private:
        std::size_t n_rows_;
        std::size_t n_cols_;
        std::vector<std::size_t> row_ptr_;
        std::vector<ColIndex> cols_;
        std::vector<double> vals_;
    };

    RowStochasticMatrix() = default;

    static RowStochasticMatrix identity(std::size_t n);
    /// Binary matrix with row r having a single one at column `columns[r]`.
    static RowStochasticMatrix selection(std::size_t n_cols, std::span<const std::size_t> columns);
    /// Takes ownership of raw CSR arrays after checking every invariant. No renormalization.
    static RowStochasticMatrix from_csr(std::size_t n_rows, std::size_t n_cols,
                                        std::vector<std::size_t> row_ptr,
                                        std::vector<ColIndex> cols, std::vector<double> vals);
    /// From dense row-major storage; used by tests and small examples.
    static RowStochasticMatrix from_dense(std::size_t n_rows, std::size_t n_cols,
                                          std::span<const double> values);

    std::size_t n_rows() const noexcept { return n_rows_; }
    std::size_t n_cols() const noexcept { return n_cols_; }
    std::size_t nnz() const noexcept { return vals_.size(); }

    RowView row(std::size_t r) const noexcept {
        const auto b = row_ptr_[r], e = row_ptr_[r + 1];
        return {std::span<const ColIndex>(cols_).subspan(b, e - b),
                std::span<const double>(vals_).subspan(b, e - b)};
    }
    double at(std::size_t r, std::size_t c) const noexcept;

    /// (P f)(x) = sum_y p_xy f(y). Parallel over rows; bitwise independent of thread count.
    std::vector<double> apply(std::span<const double> f) const;
    void apply(std::span<const double> f, std::span<double> out) const;

    /// Rows `rows[0], rows[1], ...` as a new matrix.
    RowStochasticMatrix row_slice(std::span<const std::size_t> rows) const;

    std::vector<double> to_dense() const;

    std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
    std::span<const ColIndex> col_indices() const noexcept { return cols_; }
    std::span<const double> values() const noexcept { return vals_; }

  private:
    std::size_t n_rows_ = 0;
    std::size_t n_cols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<ColIndex> cols_;
    std::vector<double> vals_;
};

/// Sparse product A * B. Throws ResourceError when the result would exceed nnz_budget.
RowStochasticMatrix multiply(const RowStochasticMatrix& a, const RowStochasticMatrix& b,
                             std::size_t nnz_budget = RowStochasticMatrix::unlimited);

} // namespace moma
