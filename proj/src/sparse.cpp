#include "moma/sparse.hpp"

#include "moma/errors.hpp"
#include "moma/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace moma {

void SparseRow::canonicalize() {
    if (entries_.size() > 1 &&
        !std::is_sorted(entries_.begin(), entries_.end(),
                        [](const auto& a, const auto& b) { return a.first < b.first; })) {
        std::stable_sort(entries_.begin(), entries_.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
    }
    std::size_t out = 0;
    for (std::size_t k = 0; k < entries_.size(); ++k) {
        if (out > 0 && entries_[out - 1].first == entries_[k].first)
            entries_[out - 1].second += entries_[k].second;
        else
            entries_[out++] = entries_[k];
    }
    entries_.resize(out);
}

void SparseRow::normalize(double tolerance) {
    double total = 0.0;
    for (const auto& [c, v] : entries_) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw DomainError("probability entry is negative or not finite");
        total += v;
    }
    if (std::abs(total - 1.0) > tolerance)
        throw DomainError("row sums to " + std::to_string(total) + ", not one");

    const std::size_t before = entries_.size();
    std::erase_if(entries_, [](const auto& e) { return e.second < drop_threshold; });
    double kept = 0.0;
    for (const auto& e : entries_)
        kept += e.second;
    if (kept <= 0.0)
        throw DomainError("row has no mass after dropping tiny entries");
    // rows already normalized up to summation rounding are left untouched so
    // that export/import round trips are bit-exact
    if (entries_.size() != before || std::abs(kept - 1.0) > 64 * std::numeric_limits<double>::epsilon())
        for (auto& e : entries_)
            e.second /= kept;
}

RowStochasticMatrix::Builder::Builder(std::size_t n_rows, std::size_t n_cols)
    : n_rows_(n_rows), n_cols_(n_cols) {
    if (n_cols > std::numeric_limits<ColIndex>::max())
        throw DomainError("too many columns for 32-bit column indices");
    row_ptr_.reserve(n_rows + 1);
    row_ptr_.push_back(0);
}

void RowStochasticMatrix::Builder::reserve(std::size_t nnz) {
    cols_.reserve(nnz);
    vals_.reserve(nnz);
}

void RowStochasticMatrix::Builder::append_row(SparseRow& row, double tolerance) {
    if (rows_appended() >= n_rows_)
        throw DomainError("too many rows appended");
    row.canonicalize();
    row.normalize(tolerance);
    for (const auto& [c, v] : row.entries()) {
        if (c >= n_cols_)
            throw DomainError("column index " + std::to_string(c) + " out of range");
        cols_.push_back(c);
        vals_.push_back(v);
    }
    row_ptr_.push_back(cols_.size());
}

RowStochasticMatrix RowStochasticMatrix::Builder::build() && {
    if (rows_appended() != n_rows_)
        throw DomainError("expected " + std::to_string(n_rows_) + " rows, got " +
                          std::to_string(rows_appended()));
    cols_.shrink_to_fit();
    vals_.shrink_to_fit();
    RowStochasticMatrix m;
    m.n_rows_ = n_rows_;
    m.n_cols_ = n_cols_;
    m.row_ptr_ = std::move(row_ptr_);
    m.cols_ = std::move(cols_);
    m.vals_ = std::move(vals_);
    return m;
}

RowStochasticMatrix RowStochasticMatrix::identity(std::size_t n) {
    std::vector<std::size_t> cols(n);
    for (std::size_t i = 0; i < n; ++i)
        cols[i] = i;
    return selection(n, cols);
}

RowStochasticMatrix RowStochasticMatrix::selection(std::size_t n_cols,
                                                   std::span<const std::size_t> columns) {
    RowStochasticMatrix m;
    m.n_rows_ = columns.size();
    m.n_cols_ = n_cols;
    m.row_ptr_.resize(columns.size() + 1);
    m.cols_.resize(columns.size());
    m.vals_.assign(columns.size(), 1.0);
    for (std::size_t r = 0; r < columns.size(); ++r) {
        if (columns[r] >= n_cols)
            throw DomainError("selected column out of range");
        m.row_ptr_[r] = r;
        m.cols_[r] = static_cast<ColIndex>(columns[r]);
    }
    m.row_ptr_[columns.size()] = columns.size();
    return m;
}

RowStochasticMatrix RowStochasticMatrix::from_csr(std::size_t n_rows, std::size_t n_cols,
                                                  std::vector<std::size_t> row_ptr,
                                                  std::vector<ColIndex> cols,
                                                  std::vector<double> vals) {
    if (row_ptr.size() != n_rows + 1 || row_ptr.front() != 0 || row_ptr.back() != cols.size() ||
        cols.size() != vals.size())
        throw DomainError("from_csr: inconsistent array sizes");
    for (std::size_t r = 0; r < n_rows; ++r) {
        if (row_ptr[r + 1] < row_ptr[r])
            throw DomainError("from_csr: row pointers decrease");
        double total = 0.0;
        for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
            if (cols[k] >= n_cols || (k > row_ptr[r] && cols[k] <= cols[k - 1]))
                throw DomainError("from_csr: column indices must be in range and increasing");
            if (!(vals[k] >= 0.0) || !std::isfinite(vals[k]))
                throw DomainError("from_csr: negative or non-finite entry");
            total += vals[k];
        }
        if (std::abs(total - 1.0) > row_sum_tolerance)
            throw DomainError("from_csr: row " + std::to_string(r) + " sums to " +
                              std::to_string(total));
    }
    RowStochasticMatrix m;
    m.n_rows_ = n_rows;
    m.n_cols_ = n_cols;
    m.row_ptr_ = std::move(row_ptr);
    m.cols_ = std::move(cols);
    m.vals_ = std::move(vals);
    return m;
}

RowStochasticMatrix RowStochasticMatrix::from_dense(std::size_t n_rows, std::size_t n_cols,
                                                    std::span<const double> values) {
    if (values.size() != n_rows * n_cols)
        throw DomainError("dense matrix has wrong number of entries");
    Builder b(n_rows, n_cols);
    SparseRow row;
    for (std::size_t r = 0; r < n_rows; ++r) {
        row.clear();
        for (std::size_t c = 0; c < n_cols; ++c)
            if (values[r * n_cols + c] != 0.0)
                row.add(static_cast<ColIndex>(c), values[r * n_cols + c]);
        b.append_row(row);
    }
    return std::move(b).build();
}

double RowStochasticMatrix::at(std::size_t r, std::size_t c) const noexcept {
    const auto view = row(r);
    const auto it = std::lower_bound(view.cols.begin(), view.cols.end(), static_cast<ColIndex>(c));
    if (it == view.cols.end() || *it != c)
        return 0.0;
    return view.vals[static_cast<std::size_t>(it - view.cols.begin())];
}

std::vector<double> RowStochasticMatrix::apply(std::span<const double> f) const {
    std::vector<double> out(n_rows_);
    apply(f, out);
    return out;
}

void RowStochasticMatrix::apply(std::span<const double> f, std::span<double> out) const {
    if (f.size() != n_cols_ || out.size() != n_rows_)
        throw DomainError("apply: dimension mismatch");
    parallel_for(n_rows_, [&](std::size_t r) { out[r] = row(r).dot(f); });
}

RowStochasticMatrix RowStochasticMatrix::row_slice(std::span<const std::size_t> rows) const {
    RowStochasticMatrix m;
    m.n_rows_ = rows.size();
    m.n_cols_ = n_cols_;
    m.row_ptr_.assign(1, 0);
    for (std::size_t r : rows) {
        if (r >= n_rows_)
            throw DomainError("row_slice: row out of range");
        const auto view = row(r);
        m.cols_.insert(m.cols_.end(), view.cols.begin(), view.cols.end());
        m.vals_.insert(m.vals_.end(), view.vals.begin(), view.vals.end());
        m.row_ptr_.push_back(m.cols_.size());
    }
    return m;
}

std::vector<double> RowStochasticMatrix::to_dense() const {
    std::vector<double> out(n_rows_ * n_cols_, 0.0);
    for (std::size_t r = 0; r < n_rows_; ++r) {
        const auto view = row(r);
        for (std::size_t k = 0; k < view.size(); ++k)
            out[r * n_cols_ + view.cols[k]] = view.vals[k];
    }
    return out;
}

RowStochasticMatrix multiply(const RowStochasticMatrix& a, const RowStochasticMatrix& b,
                             std::size_t nnz_budget) {
    if (a.n_cols() != b.n_rows())
        throw DomainError("multiply: inner dimensions differ");
    const std::size_t n = a.n_rows();
    std::vector<SparseRow> rows(n);
    std::vector<std::size_t> row_nnz(n, 0);

    parallel_for_chunked(n, [&](std::size_t begin, std::size_t end) {
        std::vector<double> acc(b.n_cols(), 0.0);
        std::vector<char> seen(b.n_cols(), 0);
        std::vector<ColIndex> touched;
        for (std::size_t r = begin; r < end; ++r) {
            touched.clear();
            const auto ar = a.row(r);
            for (std::size_t k = 0; k < ar.size(); ++k) {
                const auto br = b.row(ar.cols[k]);
                for (std::size_t j = 0; j < br.size(); ++j) {
                    const ColIndex c = br.cols[j];
                    if (!seen[c]) {
                        seen[c] = 1;
                        touched.push_back(c);
                    }
                    acc[c] += ar.vals[k] * br.vals[j];
                }
            }
            std::sort(touched.begin(), touched.end());
            rows[r].reserve(touched.size());
            for (ColIndex c : touched) {
                rows[r].add(c, acc[c]);
                acc[c] = 0.0;
                seen[c] = 0;
            }
            row_nnz[r] = touched.size();
        }
    });

    std::size_t total = 0;
    for (std::size_t r = 0; r < n; ++r) {
        total += row_nnz[r];
        if (total > nnz_budget)
            throw ResourceError("sparse product exceeds nnz budget of " +
                                std::to_string(nnz_budget));
    }
    RowStochasticMatrix::Builder builder(n, b.n_cols());
    builder.reserve(total);
    for (auto& row : rows) {
        builder.append_row(row);
        row = SparseRow{};
    }
    return std::move(builder).build();
}

} // namespace moma
