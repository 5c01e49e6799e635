#include "mlmc/sparse_matrix.hpp"

#include "mlmc/errors.hpp"

#include <algorithm>
#include <string>

namespace mlmc {

SparseMatrix::SparseMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_offsets,
                           std::vector<index_t> col_indices, std::vector<double> values)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
    if (row_offsets_.size() != n_rows_ + 1 || row_offsets_.front() != 0) {
        throw ValidationError("row_offsets must have n_rows+1 entries starting at 0");
    }
    if (row_offsets_.back() != values_.size() || col_indices_.size() != values_.size()) {
        throw ValidationError("row_offsets, col_indices and values disagree on the number of entries");
    }
    for (std::size_t i = 0; i < n_rows_; ++i) {
        if (row_offsets_[i + 1] < row_offsets_[i]) {
            throw ValidationError("row_offsets decreases at row " + std::to_string(i));
        }
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
            if (col_indices_[k] >= n_cols_) {
                throw ValidationError("column index out of range in row " + std::to_string(i));
            }
            if (k > row_offsets_[i] && col_indices_[k] <= col_indices_[k - 1]) {
                throw ValidationError("column indices not strictly increasing in row " + std::to_string(i));
            }
            if (values_[k] == 0.0) {
                throw ValidationError("explicit zero stored in row " + std::to_string(i));
            }
        }
    }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t n_rows, std::size_t n_cols, std::vector<Triplet> entries) {
    for (const auto& e : entries) {
        if (e.row >= n_rows || e.col >= n_cols) {
            throw ValidationError("triplet (" + std::to_string(e.row) + ", " + std::to_string(e.col) +
                                  ") outside a " + std::to_string(n_rows) + "x" + std::to_string(n_cols) + " matrix");
        }
    }
    std::sort(entries.begin(), entries.end(),
              [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });

    std::vector<std::size_t> offsets(n_rows + 1, 0);
    std::vector<index_t> cols;
    std::vector<double> vals;
    cols.reserve(entries.size());
    vals.reserve(entries.size());
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto& e = entries[k];
        if (k > 0 && entries[k - 1].row == e.row && entries[k - 1].col == e.col) {
            throw ValidationError("duplicate entry (" + std::to_string(e.row) + ", " + std::to_string(e.col) + ")");
        }
        if (e.value == 0.0) continue;
        cols.push_back(e.col);
        vals.push_back(e.value);
        ++offsets[e.row + 1];
    }
    for (std::size_t i = 0; i < n_rows; ++i) offsets[i + 1] += offsets[i];
    return SparseMatrix(n_rows, n_cols, std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix SparseMatrix::from_dense(std::size_t n_rows, std::size_t n_cols, std::span<const double> dense) {
    if (dense.size() != n_rows * n_cols) {
        throw DimensionError("dense buffer has " + std::to_string(dense.size()) + " values, expected " +
                             std::to_string(n_rows * n_cols));
    }
    std::vector<std::size_t> offsets(n_rows + 1, 0);
    std::vector<index_t> cols;
    std::vector<double> vals;
    for (std::size_t i = 0; i < n_rows; ++i) {
        for (std::size_t j = 0; j < n_cols; ++j) {
            const double v = dense[i * n_cols + j];
            if (v == 0.0) continue;
            cols.push_back(static_cast<index_t>(j));
            vals.push_back(v);
        }
        offsets[i + 1] = vals.size();
    }
    return SparseMatrix(n_rows, n_cols, std::move(offsets), std::move(cols), std::move(vals));
}

double SparseMatrix::at(std::size_t i, std::size_t j) const noexcept {
    const auto cols = row_cols(i);
    const auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<index_t>(j));
    if (it == cols.end() || *it != j) return 0.0;
    return values_[row_offsets_[i] + static_cast<std::size_t>(it - cols.begin())];
}

std::vector<double> SparseMatrix::diagonal() const {
    if (!is_square()) throw DimensionError("diagonal of a non-square matrix");
    std::vector<double> d(n_rows_, 0.0);
    for (std::size_t i = 0; i < n_rows_; ++i) d[i] = at(i, i);
    return d;
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
    if (x.size() != n_cols_) throw DimensionError("multiply: vector length does not match column count");
    std::vector<double> y(n_rows_, 0.0);
    for (std::size_t i = 0; i < n_rows_; ++i) {
        double acc = 0.0;
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) acc += values_[k] * x[col_indices_[k]];
        y[i] = acc;
    }
    return y;
}

std::vector<double> SparseMatrix::to_dense() const {
    std::vector<double> dense(n_rows_ * n_cols_, 0.0);
    for (std::size_t i = 0; i < n_rows_; ++i) {
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
            dense[i * n_cols_ + col_indices_[k]] = values_[k];
        }
    }
    return dense;
}

SparseMatrix SparseMatrix::scale_rows(std::span<const double> factors) const {
    if (factors.size() != n_rows_) throw DimensionError("scale_rows: factor count does not match row count");
    std::vector<double> vals(values_);
    for (std::size_t i = 0; i < n_rows_; ++i) {
        for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) vals[k] *= factors[i];
    }
    return SparseMatrix(n_rows_, n_cols_, row_offsets_, col_indices_, std::move(vals));
}

SparseMatrix transpose(const SparseMatrix& a) {
    const std::size_t rows = a.n_cols();
    std::vector<std::size_t> offsets(rows + 1, 0);
    for (const index_t c : a.col_indices()) ++offsets[c + 1];
    for (std::size_t i = 0; i < rows; ++i) offsets[i + 1] += offsets[i];

    std::vector<index_t> cols(a.nnz());
    std::vector<double> vals(a.nnz());
    std::vector<std::size_t> next(offsets.begin(), offsets.end() - 1);
    // Walking source rows in order keeps destination columns sorted.
    for (std::size_t i = 0; i < a.n_rows(); ++i) {
        const auto rc = a.row_cols(i);
        const auto rv = a.row_values(i);
        for (std::size_t k = 0; k < rc.size(); ++k) {
            const std::size_t slot = next[rc[k]]++;
            cols[slot] = static_cast<index_t>(i);
            vals[slot] = rv[k];
        }
    }
    return SparseMatrix(rows, a.n_rows(), std::move(offsets), std::move(cols), std::move(vals));
}

} // namespace mlmc
