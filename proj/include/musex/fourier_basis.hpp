// Copyright 2026 The musex Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "grid.hpp"

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace musex {

using Complex = std::complex<double>;

/// 2D frequency pair of a DFT basis function over an M x N window.
struct BasisIndex {
    std::size_t row = 0;  ///< k_row in [0, M)
    std::size_t col = 0;  ///< k_col in [0, N)

    std::size_t flatten(std::size_t cols) const noexcept { return row * cols + col; }
    static BasisIndex unflatten(std::size_t k, std::size_t cols) noexcept { return {k / cols, k % cols}; }

    bool operator==(const BasisIndex &) const = default;
};

namespace detail {

inline std::vector<Complex> unit_roots(std::size_t count)
{
    std::vector<Complex> roots(count);
    for (std::size_t t = 0; t < count; ++t) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(count);
        roots[t] = {std::cos(angle), std::sin(angle)};
    }
    return roots;
}

/// X[kr,kc] = sum_{m,n} x[m,n] * exp(-j 2pi (kr m / M + kc n / N)), evaluated
/// row-then-column by direct summation.
inline std::vector<Complex> analysis_sum(std::span<const double> x, std::size_t rows, std::size_t cols,
                                         std::span<const Complex> row_roots, std::span<const Complex> col_roots)
{
    std::vector<Complex> partial(rows * cols, Complex{});
    for (std::size_t m = 0; m < rows; ++m) {
        const double *row = x.data() + m * cols;
        Complex *out = partial.data() + m * cols;
        for (std::size_t n = 0; n < cols; ++n) {
            const double v = row[n];
            if (v == 0.0) {
                continue;
            }
            std::size_t phase = 0;
            for (std::size_t kc = 0; kc < cols; ++kc) {
                out[kc] += v * std::conj(col_roots[phase]);
                phase += n;
                if (phase >= cols) {
                    phase %= cols;
                }
            }
        }
    }
    std::vector<Complex> spectrum(rows * cols, Complex{});
    for (std::size_t m = 0; m < rows; ++m) {
        const Complex *in = partial.data() + m * cols;
        std::size_t phase = 0;
        for (std::size_t kr = 0; kr < rows; ++kr) {
            const Complex twiddle = std::conj(row_roots[phase]);
            Complex *out = spectrum.data() + kr * cols;
            for (std::size_t kc = 0; kc < cols; ++kc) {
                out[kc] += in[kc] * twiddle;
            }
            phase += m;
            if (phase >= rows) {
                phase %= rows;
            }
        }
    }
    return spectrum;
}

} // namespace detail

/// phi_k[m,n] = exp(+j 2pi (k_row m / M + k_col n / N)).
inline Complex evaluate_basis(std::size_t rows, std::size_t cols, BasisIndex k, std::size_t m, std::size_t n)
{
    if (k.row >= rows || k.col >= cols || m >= rows || n >= cols) {
        throw std::out_of_range("evaluate_basis: index out of range");
    }
    const double phase = static_cast<double>((k.row * m) % rows) / static_cast<double>(rows) +
                         static_cast<double>((k.col * n) % cols) / static_cast<double>(cols);
    const double angle = 2.0 * std::numbers::pi * phase;
    return {std::cos(angle), std::sin(angle)};
}

/**
 * Indexed 2D DFT dictionary over a weighted window.
 *
 * Holds the weighted norms used as projection denominators, the conjugate
 * partner of every index, and the DFT of the weights (Gram entries between
 * any two basis functions are read from it).
 */
class FourierDictionary {
  public:
    FourierDictionary(const DataArea &area, const WeightMatrix &weights)
        : rows_(area.rows()), cols_(area.cols()), row_roots_(detail::unit_roots(rows_)),
          col_roots_(detail::unit_roots(cols_))
    {
        detail::require(weights.rows() == rows_ && weights.cols() == cols_, "dictionary: weight shape mismatch");
        const std::size_t count = rows_ * cols_;
        weight_spectrum_ = detail::analysis_sum(weights.values().values(), rows_, cols_, row_roots_, col_roots_);

        const double norm = weights.total();
        if (!(norm > 0.0)) {
            throw NumericError("dictionary: total weight is not positive");
        }
        weighted_norms_.assign(count, norm);

        pair_of_.resize(count);
        for (std::size_t kr = 0; kr < rows_; ++kr) {
            for (std::size_t kc = 0; kc < cols_; ++kc) {
                const std::size_t pr = (rows_ - kr) % rows_;
                const std::size_t pc = (cols_ - kc) % cols_;
                pair_of_[kr * cols_ + kc] = pr * cols_ + pc;
            }
        }
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return rows_ * cols_; }

    std::span<const double> weighted_norms() const noexcept { return weighted_norms_; }
    double weighted_norm(std::size_t k) const noexcept { return weighted_norms_[k]; }
    std::size_t pair_of(std::size_t k) const noexcept { return pair_of_[k]; }
    bool is_self_paired(std::size_t k) const noexcept { return pair_of_[k] == k; }
    /// The lower-indexed member of each conjugate pair represents the pair.
    bool is_representative(std::size_t k) const noexcept { return k <= pair_of_[k]; }

    BasisIndex index(std::size_t k) const noexcept { return BasisIndex::unflatten(k, cols_); }

    /// Table-driven basis evaluation; agrees with evaluate_basis.
    Complex basis(std::size_t k, std::size_t m, std::size_t n) const noexcept
    {
        const BasisIndex b = index(k);
        return row_roots_[(b.row * m) % rows_] * col_roots_[(b.col * n) % cols_];
    }

    /// sum_{(m,n)} conj(phi_a) * phi_b * w
    Complex gram(std::size_t a, std::size_t b) const noexcept
    {
        const BasisIndex ia = index(a);
        const BasisIndex ib = index(b);
        const std::size_t fr = (ia.row + rows_ - ib.row) % rows_;
        const std::size_t fc = (ia.col + cols_ - ib.col) % cols_;
        return weight_spectrum_[fr * cols_ + fc];
    }

    std::span<const Complex> row_roots() const noexcept { return row_roots_; }
    std::span<const Complex> col_roots() const noexcept { return col_roots_; }

  private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<Complex> row_roots_;
    std::vector<Complex> col_roots_;
    std::vector<Complex> weight_spectrum_;
    std::vector<double> weighted_norms_;
    std::vector<std::size_t> pair_of_;
};

inline FourierDictionary build_dictionary(const DataArea &area, const WeightMatrix &weights)
{
    return FourierDictionary(area, weights);
}

/**
 * Weighted projection of a real residual onto every basis function:
 * p_k = sum(r * conj(phi_k) * w) / weighted_norm(k).
 *
 * Non-representative entries are written as the exact conjugate of their
 * partner, so p[pair_of(k)] == conj(p[k]) holds bit for bit.
 */
inline std::vector<Complex> project_all(const Grid<double> &residual, const WeightMatrix &weights,
                                        const FourierDictionary &dict)
{
    detail::require(residual.rows() == dict.rows() && residual.cols() == dict.cols() &&
                        weights.rows() == dict.rows() && weights.cols() == dict.cols(),
                    "project_all: dimension mismatch");
    std::vector<double> weighted(residual.size());
    for (std::size_t i = 0; i < weighted.size(); ++i) {
        weighted[i] = residual[i] * weights[i];
    }
    std::vector<Complex> p =
        detail::analysis_sum(weighted, dict.rows(), dict.cols(), dict.row_roots(), dict.col_roots());
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (dict.is_representative(k)) {
            p[k] /= dict.weighted_norm(k);
        }
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (dict.is_self_paired(k)) {
            p[k].imag(0.0);
        } else if (!dict.is_representative(k)) {
            p[k] = std::conj(p[dict.pair_of(k)]);
        }
    }
    return p;
}

} // namespace musex
