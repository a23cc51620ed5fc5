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

// Multiple Selection Extrapolation.
//
// Each iteration selects up to n_bf conjugate pairs whose single-function
// energy decrement exceeds tau times the best one, projects the residual
// jointly onto the subspace they span, and applies gamma times the joint
// coefficients in one update.

#include "fourier_basis.hpp"
#include "fse.hpp"
#include "grid.hpp"
#include "sparse_model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace musex {

struct CandidateSet {
    std::vector<std::size_t> indices;  ///< flattened, by decreasing decrement then ascending index
    std::vector<double> decrements;

    std::size_t size() const noexcept { return indices.size(); }
    bool empty() const noexcept { return indices.empty(); }
};

/**
 * gamma^2 * |p_k|^2 * norm_k per pair (doubled for non-self-paired pairs).
 *
 * Only the representative of each pair carries a value; the partner slot is
 * zero so a pair can never be selected twice.
 */
inline std::vector<double> hypothetical_decrements(std::span<const Complex> projections,
                                                   const FourierDictionary &dict, double gamma)
{
    detail::require(projections.size() == dict.size(), "hypothetical_decrements: projection count mismatch");
    std::vector<double> out(projections.size(), 0.0);
    const double g2 = gamma * gamma;
    for (std::size_t k = 0; k < projections.size(); ++k) {
        if (dict.is_representative(k)) {
            out[k] = g2 * pair_objective(projections, dict, k);
        }
    }
    return out;
}

/**
 * Members k satisfy d_k > tau * max(d) and d_k >= the n_bf-th largest
 * decrement. Ties at the cap boundary keep the lowest indices.
 */
inline CandidateSet select_candidates(std::span<const double> decrements, double tau, int n_bf)
{
    detail::require(n_bf >= 1, "select_candidates: n_bf must be at least 1");
    detail::require(!decrements.empty(), "select_candidates: no decrements");
    const double peak = *std::max_element(decrements.begin(), decrements.end());
    detail::require(peak > 0.0, "select_candidates: all decrements are zero");

    std::vector<std::size_t> order(decrements.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t take = std::min(order.size(), static_cast<std::size_t>(n_bf));
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (decrements[a] != decrements[b]) {
                              return decrements[a] > decrements[b];
                          }
                          return a < b;
                      });

    CandidateSet set;
    const double threshold = tau * peak;
    for (std::size_t i = 0; i < take; ++i) {
        const std::size_t k = order[i];
        if (decrements[k] > threshold) {
            set.indices.push_back(k);
            set.decrements.push_back(decrements[k]);
        }
    }
    return set;
}

/**
 * Real form of the Hermitian normal equations over the selected functions.
 *
 * Unknowns are the real parts of every coefficient followed by the imaginary
 * parts of the non-self-paired ones (self-paired functions are real, so their
 * coefficients are constrained real).
 */
struct NormalSystem {
    std::size_t dimension = 0;
    std::vector<double> matrix;  ///< row-major, dimension x dimension
    std::vector<double> rhs;
    std::vector<std::size_t> imaginary_slot;  ///< per member: row of its imaginary unknown, or npos

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    double at(std::size_t r, std::size_t c) const noexcept { return matrix[r * dimension + c]; }
};

inline NormalSystem assemble_normal_system(std::span<const Complex> projections, const FourierDictionary &dict,
                                           const CandidateSet &set)
{
    const std::size_t n = set.size();
    NormalSystem sys;
    sys.imaginary_slot.assign(n, NormalSystem::npos);
    std::size_t dim = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (!dict.is_self_paired(set.indices[i])) {
            sys.imaginary_slot[i] = dim++;
        }
    }
    sys.dimension = dim;
    sys.matrix.assign(dim * dim, 0.0);
    sys.rhs.assign(dim, 0.0);

    auto put = [&](std::size_t r, std::size_t c, double v) {
        sys.matrix[r * dim + c] = v;
        sys.matrix[c * dim + r] = v;
    };
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ki = set.indices[i];
        const Complex rhs = dict.weighted_norm(ki) * projections[ki];
        sys.rhs[i] = rhs.real();
        if (sys.imaginary_slot[i] != NormalSystem::npos) {
            sys.rhs[sys.imaginary_slot[i]] = rhs.imag();
        }
        for (std::size_t j = i; j < n; ++j) {
            const Complex g = (i == j) ? Complex(dict.weighted_norm(ki), 0.0) : dict.gram(ki, set.indices[j]);
            const std::size_t bi = sys.imaginary_slot[i];
            const std::size_t bj = sys.imaginary_slot[j];
            // Re rows: A a - B b = Re(rhs); Im rows: B a + A b = Im(rhs).
            put(i, j, g.real());
            if (bj != NormalSystem::npos) {
                put(i, bj, -g.imag());
            }
            if (bi != NormalSystem::npos) {
                // Entry (b_i, a_j) of the Hermitian fold is B_ij.
                put(bi, j, g.imag());
            }
            if (bi != NormalSystem::npos && bj != NormalSystem::npos) {
                put(bi, bj, g.real());
            }
        }
    }
    return sys;
}

struct SubspaceSolution {
    std::vector<Complex> coefficients;  ///< one per member of the candidate set
    bool singular_fallback = false;
};

namespace detail {

/// Relative pivot floor below which the normal system is treated as singular.
inline constexpr double kPivotFloor = 1e-10;

/// In-place Cholesky solve; false when a pivot falls under the floor.
inline bool cholesky_solve(std::vector<double> a, std::vector<double> &b, std::size_t n)
{
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        max_diag = std::max(max_diag, a[i * n + i]);
    }
    if (!(max_diag > 0.0)) {
        return false;
    }
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) {
            d -= a[j * n + k] * a[j * n + k];
        }
        if (!(d > kPivotFloor * max_diag)) {
            return false;
        }
        const double l = std::sqrt(d);
        a[j * n + j] = l;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / l;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) {
            s -= a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    return true;
}

} // namespace detail

/**
 * Jointly projects the residual onto the selected functions.
 *
 * `projections` are the single-function projections of the residual (as from
 * project_all); the right-hand side of the normal equations is norm_k * p_k.
 * A single member returns its projection unchanged. A singular system falls
 * back to the single-function projections and sets singular_fallback.
 */
inline SubspaceSolution solve_subspace(std::span<const Complex> projections, const FourierDictionary &dict,
                                       const CandidateSet &set)
{
    detail::require(!set.empty(), "solve_subspace: empty candidate set");
    SubspaceSolution out;
    out.coefficients.reserve(set.size());
    if (set.size() == 1) {
        out.coefficients.push_back(projections[set.indices[0]]);
        return out;
    }
    NormalSystem sys = assemble_normal_system(projections, dict, set);
    std::vector<double> x = sys.rhs;
    if (!detail::cholesky_solve(sys.matrix, x, sys.dimension)) {
        out.singular_fallback = true;
        for (std::size_t k : set.indices) {
            out.coefficients.push_back(projections[k]);
        }
        return out;
    }
    for (std::size_t i = 0; i < set.size(); ++i) {
        const std::size_t bi = sys.imaginary_slot[i];
        out.coefficients.emplace_back(x[i], bi == NormalSystem::npos ? 0.0 : x[bi]);
    }
    return out;
}

/// Same as above, computing the needed projections directly from the residual.
inline SubspaceSolution solve_subspace(const Grid<double> &residual, const WeightMatrix &weights,
                                       const FourierDictionary &dict, const CandidateSet &set)
{
    detail::require(residual.rows() == dict.rows() && residual.cols() == dict.cols(),
                    "solve_subspace: dimension mismatch");
    std::vector<Complex> p(dict.size(), Complex{});
    for (std::size_t k : set.indices) {
        Complex sum{};
        for (std::size_t m = 0; m < dict.rows(); ++m) {
            for (std::size_t n = 0; n < dict.cols(); ++n) {
                sum += residual(m, n) * weights(m, n) * std::conj(dict.basis(k, m, n));
            }
        }
        p[k] = sum / dict.weighted_norm(k);
        if (dict.is_self_paired(k)) {
            p[k].imag(0.0);
        }
    }
    return solve_subspace(p, dict, set);
}

inline IterationRecord muse_step(ExtrapolationState &state, const DataArea &area, const WeightMatrix &weights,
                                 const FourierDictionary &dict, const ExtrapolationConfig &config)
{
    const std::vector<Complex> p = project_all(state.residual, weights, dict);
    const std::vector<double> decrements = hypothetical_decrements(p, dict, config.gamma);

    IterationRecord record;
    if (*std::max_element(decrements.begin(), decrements.end()) > 0.0) {
        const CandidateSet set = select_candidates(decrements, config.tau, config.n_bf);
        const SubspaceSolution solution = solve_subspace(p, dict, set);
        std::vector<Complex> updates;
        updates.reserve(set.size());
        for (const Complex &c : solution.coefficients) {
            updates.push_back(config.gamma * c);
        }
        detail::apply_updates(state, area, dict, set.indices, updates);
        for (std::size_t k : set.indices) {
            record.selected.push_back(dict.index(k));
        }
        record.updates = std::move(updates);
        record.singular_fallback = solution.singular_fallback;
    }
    record.residual_energy = weighted_energy(state.residual, weights);
    return record;
}

inline RunResult muse_run(const DataArea &area, const WeightMatrix &weights, const FourierDictionary &dict,
                          const ExtrapolationConfig &config, const Grid<double> *reference = nullptr)
{
    config.validate();
    detail::require(config.iterations >= 1, "muse_run: iterations must be at least 1");
    ExtrapolationState state = fse_init(area);
    IterationTrace trace;
    trace.initial_energy = weighted_energy(state.residual, weights);
    trace.records.reserve(static_cast<std::size_t>(config.iterations));
    for (int nu = 1; nu <= config.iterations; ++nu) {
        IterationRecord record = muse_step(state, area, weights, dict, config);
        record.iteration = nu;
        detail::annotate_quality(record, area, state, reference);
        trace.records.push_back(std::move(record));
    }
    return {std::move(state.model), std::move(trace)};
}

} // namespace musex
