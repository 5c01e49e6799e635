#pragma once

#include "mlmc/sparse_matrix.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace mlmc {

/// Row classification of a candidate generator matrix.
struct ValidationReport {
    bool ok = true;                          ///< no row has a positive diagonal
    std::vector<index_t> bad_diagonal_rows;  ///< a_ii > 0
    std::vector<index_t> absorbing_rows;     ///< every off-diagonal entry is zero
    std::vector<index_t> zero_diagonal_rows; ///< a_ii == 0 (or not stored)
};

/// Jump-chain data of the continuous-time walk associated with a generator A.
///
/// Row i sojourns with rate |d_i| and then jumps to jump_cols[k] with
/// probability jump_prob[k], multiplying the path weight by
/// jump_factor[k] = w_i * g_ij. The entries of row i live in
/// [row_offsets[i], row_offsets[i+1]). Cumulative probabilities end at exactly
/// 1.0 on every row that has entries.
///
/// Two kinds of absorbing row exist: d_i < 0 with no off-diagonal entries
/// (a path that leaves it loses all weight) and d_i == 0 with no off-diagonal
/// entries (the path never leaves).
struct ChainKernel {
    std::size_t n = 0;
    std::vector<double> d;
    std::vector<double> w;
    std::vector<std::size_t> row_offsets;
    std::vector<index_t> jump_cols;
    std::vector<double> jump_prob;
    std::vector<double> row_cum;
    std::vector<std::int8_t> jump_signs;
    std::vector<double> jump_factor;

    bool is_absorbing(std::size_t i) const noexcept { return row_offsets[i] == row_offsets[i + 1]; }

    std::span<const double> cum(std::size_t i) const noexcept {
        return {row_cum.data() + row_offsets[i], row_offsets[i + 1] - row_offsets[i]};
    }
    std::span<const index_t> cols(std::size_t i) const noexcept {
        return {jump_cols.data() + row_offsets[i], row_offsets[i + 1] - row_offsets[i]};
    }
    std::span<const std::int8_t> signs(std::size_t i) const noexcept {
        return {jump_signs.data() + row_offsets[i], row_offsets[i + 1] - row_offsets[i]};
    }
    std::span<const double> probs(std::size_t i) const noexcept {
        return {jump_prob.data() + row_offsets[i], row_offsets[i + 1] - row_offsets[i]};
    }
};

/// Classifies every row of A. Throws DimensionError when A is not square.
ValidationReport validate_generator(const SparseMatrix& a);

/// Splits A into diagonal rates, transition probabilities, jump signs and
/// weight magnitudes w_i = sum_j |m_ij| / |d_i|.
///
/// Rejects (ValidationError) a positive diagonal, a zero diagonal on a row
/// that still has off-diagonal coupling, and any absorbing row unless
/// `allow_absorbing` is set.
ChainKernel decompose(const SparseMatrix& a, bool allow_absorbing = false);

/// m_ij = |d_i| * w_i * q_ij * g_ij, i.e. A with its diagonal removed.
SparseMatrix reconstruct_offdiagonal(const ChainKernel& k);

} // namespace mlmc
