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

#include "fourier_basis.hpp"
#include "grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace musex {

/// Accumulated expansion coefficients and the materialized real model g.
struct SparseModel {
    std::map<std::size_t, Complex> coefficients;  ///< keyed by flattened index; pairs stored with conjugates
    Grid<double> model;

    /// Recomputes Re(sum c_k phi_k) from the stored coefficients.
    Grid<double> synthesize(const FourierDictionary &dict) const
    {
        Grid<double> out(dict.rows(), dict.cols(), 0.0);
        for (const auto &[k, c] : coefficients) {
            for (std::size_t m = 0; m < dict.rows(); ++m) {
                for (std::size_t n = 0; n < dict.cols(); ++n) {
                    out(m, n) += (c * dict.basis(k, m, n)).real();
                }
            }
        }
        return out;
    }
};

struct IterationRecord {
    int iteration = 0;                   ///< 1-based
    std::vector<BasisIndex> selected;    ///< one representative per conjugate pair
    std::vector<Complex> updates;        ///< coefficient update applied to each representative
    double residual_energy = 0.0;        ///< weighted, after the update
    std::optional<double> psnr_db;       ///< Lost samples vs. a reference, if one was supplied
    std::optional<double> lost_sse;      ///< squared error behind psnr_db
    bool singular_fallback = false;
};

struct IterationTrace {
    double initial_energy = 0.0;
    std::vector<IterationRecord> records;
};

struct ExtrapolationState {
    SparseModel model;
    Grid<double> residual;
};

/// Empty model; residual equals the samples on Support and zero on Lost.
inline ExtrapolationState fse_init(const DataArea &area)
{
    ExtrapolationState state;
    state.model.model = Grid<double>(area.rows(), area.cols(), 0.0);
    state.residual = Grid<double>(area.rows(), area.cols(), 0.0);
    for (std::size_t i = 0; i < area.size(); ++i) {
        if (area.is_support(i)) {
            state.residual[i] = area.samples()[i];
        }
    }
    return state;
}

/// 8-bit output quantization: round half away from zero, clamp to [0, 255].
inline double quantize_sample(double v) noexcept
{
    if (!(v > 0.0)) {
        return 0.0;
    }
    return std::min(255.0, std::round(v));
}

/// Squared error of the quantized model against a reference over Lost samples.
inline double lost_region_sse(const DataArea &area, const Grid<double> &model, const Grid<double> &reference)
{
    double sse = 0.0;
    for (std::size_t i = 0; i < area.size(); ++i) {
        if (area.is_lost(i)) {
            const double e = quantize_sample(model[i]) - reference[i];
            sse += e * e;
        }
    }
    return sse;
}

/// Perfect reconstructions are reported as +infinity.
inline double psnr_from_mse(double mse) noexcept
{
    if (mse <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

namespace detail {

/**
 * Adds the selected coefficient updates (and their conjugate partners) to the
 * model and removes the same real signal from the residual on Support.
 */
inline void apply_updates(ExtrapolationState &state, const DataArea &area, const FourierDictionary &dict,
                          std::span<const std::size_t> selected, std::span<const Complex> updates)
{
    const std::size_t rows = dict.rows();
    const std::size_t cols = dict.cols();
    Grid<double> delta(rows, cols, 0.0);
    std::vector<Complex> row_factor(rows);
    for (std::size_t s = 0; s < selected.size(); ++s) {
        const std::size_t k = selected[s];
        const Complex c = updates[s];
        const BasisIndex b = dict.index(k);
        const double scale = dict.is_self_paired(k) ? 1.0 : 2.0;
        for (std::size_t m = 0; m < rows; ++m) {
            row_factor[m] = scale * c * dict.row_roots()[(b.row * m) % rows];
        }
        for (std::size_t m = 0; m < rows; ++m) {
            for (std::size_t n = 0; n < cols; ++n) {
                delta(m, n) += (row_factor[m] * dict.col_roots()[(b.col * n) % cols]).real();
            }
        }
        state.model.coefficients[k] += c;
        if (!dict.is_self_paired(k)) {
            state.model.coefficients[dict.pair_of(k)] += std::conj(c);
        }
    }
    for (std::size_t i = 0; i < delta.size(); ++i) {
        state.model.model[i] += delta[i];
        state.residual[i] = area.is_support(i) ? state.residual[i] - delta[i] : 0.0;
    }
}

inline void annotate_quality(IterationRecord &record, const DataArea &area, const ExtrapolationState &state,
                             const Grid<double> *reference)
{
    if (reference == nullptr || area.lost_count() == 0) {
        return;
    }
    const double sse = lost_region_sse(area, state.model.model, *reference);
    record.lost_sse = sse;
    record.psnr_db = psnr_from_mse(sse / static_cast<double>(area.lost_count()));
}

} // namespace detail

} // namespace musex
