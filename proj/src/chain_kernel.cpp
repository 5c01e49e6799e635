#include "mlmc/chain_kernel.hpp"

#include "mlmc/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace mlmc {

ValidationReport validate_generator(const SparseMatrix& a) {
    if (!a.is_square()) {
        throw DimensionError("generator must be square, got " + std::to_string(a.n_rows()) + "x" +
                             std::to_string(a.n_cols()));
    }
    ValidationReport report;
    for (std::size_t i = 0; i < a.n_rows(); ++i) {
        double diag = 0.0;
        bool coupled = false;
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (cols[k] == i) {
                diag = vals[k];
            } else {
                coupled = true;
            }
        }
        const auto row = static_cast<index_t>(i);
        if (diag > 0.0) report.bad_diagonal_rows.push_back(row);
        if (diag == 0.0) report.zero_diagonal_rows.push_back(row);
        if (!coupled) report.absorbing_rows.push_back(row);
    }
    report.ok = report.bad_diagonal_rows.empty();
    return report;
}

ChainKernel decompose(const SparseMatrix& a, bool allow_absorbing) {
    const ValidationReport report = validate_generator(a);
    if (!report.ok) {
        throw ValidationError("generator has a positive diagonal entry in row " +
                              std::to_string(report.bad_diagonal_rows.front()));
    }

    const std::size_t n = a.n_rows();
    ChainKernel k;
    k.n = n;
    k.d.assign(n, 0.0);
    k.w.assign(n, 0.0);
    k.row_offsets.assign(n + 1, 0);
    const std::size_t off_nnz = a.nnz() - (n - report.zero_diagonal_rows.size());
    k.jump_cols.reserve(off_nnz);
    k.jump_prob.reserve(off_nnz);
    k.row_cum.reserve(off_nnz);
    k.jump_signs.reserve(off_nnz);
    k.jump_factor.reserve(off_nnz);

    for (std::size_t i = 0; i < n; ++i) {
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        double diag = 0.0;
        double abs_sum = 0.0;
        for (std::size_t j = 0; j < cols.size(); ++j) {
            if (cols[j] == i) {
                diag = vals[j];
            } else {
                abs_sum += std::abs(vals[j]);
            }
        }
        k.d[i] = diag;

        if (abs_sum == 0.0) {
            if (!allow_absorbing) {
                throw ValidationError("row " + std::to_string(i) +
                                      " has no off-diagonal entries (absorbing); pass allow_absorbing to accept it");
            }
            k.row_offsets[i + 1] = k.jump_cols.size();
            continue;
        }
        if (diag == 0.0) {
            throw ValidationError("row " + std::to_string(i) +
                                  " has a zero diagonal but nonzero off-diagonal entries; no sojourn rate exists");
        }

        const double rate = -diag;
        k.w[i] = abs_sum / rate;
        double cum = 0.0;
        for (std::size_t j = 0; j < cols.size(); ++j) {
            if (cols[j] == i) continue;
            const double q = std::abs(vals[j]) / abs_sum;
            const std::int8_t g = vals[j] >= 0.0 ? 1 : -1;
            cum += q;
            k.jump_cols.push_back(cols[j]);
            k.jump_prob.push_back(q);
            k.row_cum.push_back(cum);
            k.jump_signs.push_back(g);
            k.jump_factor.push_back(g * k.w[i]);
        }
        // The accumulated total may miss 1 by rounding; pin it so every draw in
        // [0,1) lands in some cell.
        const double slack = 4.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(cols.size());
        if (std::abs(cum - 1.0) > slack) {
            throw ValidationError("transition probabilities of row " + std::to_string(i) + " do not sum to 1");
        }
        k.row_cum.back() = 1.0;
        k.row_offsets[i + 1] = k.jump_cols.size();
    }
    return k;
}

SparseMatrix reconstruct_offdiagonal(const ChainKernel& k) {
    std::vector<index_t> cols(k.jump_cols);
    std::vector<double> vals(k.jump_cols.size());
    for (std::size_t i = 0; i < k.n; ++i) {
        const double scale = std::abs(k.d[i]) * k.w[i];
        for (std::size_t e = k.row_offsets[i]; e < k.row_offsets[i + 1]; ++e) {
            vals[e] = scale * k.jump_prob[e] * k.jump_signs[e];
        }
    }
    return SparseMatrix(k.n, k.n, k.row_offsets, std::move(cols), std::move(vals));
}

} // namespace mlmc
