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

// Frequency Selective Extrapolation: one conjugate pair per iteration, with
// the coefficient update shrunk by gamma to compensate for the loss of
// orthogonality on the support area.

#include "fourier_basis.hpp"
#include "grid.hpp"
#include "sparse_model.hpp"

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace musex {

struct RunResult {
    SparseModel model;
    IterationTrace trace;
};

/// Energy a pair removes when fitted alone: |p_k|^2 * norm_k, doubled for pairs.
inline double pair_objective(std::span<const Complex> projections, const FourierDictionary &dict, std::size_t k)
{
    const double magnitude = std::norm(projections[k]) * dict.weighted_norm(k);
    return dict.is_self_paired(k) ? magnitude : 2.0 * magnitude;
}

/// Index maximizing the pair objective; ties go to the smallest flattened index.
inline BasisIndex fse_select(std::span<const Complex> projections, const FourierDictionary &dict)
{
    detail::require(projections.size() == dict.size(), "fse_select: projection count mismatch");
    std::size_t best = 0;
    double best_value = pair_objective(projections, dict, 0);
    for (std::size_t k = 1; k < projections.size(); ++k) {
        const double value = pair_objective(projections, dict, k);
        if (value > best_value) {
            best = k;
            best_value = value;
        }
    }
    return dict.index(best);
}

inline IterationRecord fse_step(ExtrapolationState &state, const DataArea &area, const WeightMatrix &weights,
                                const FourierDictionary &dict, const ExtrapolationConfig &config)
{
    const std::vector<Complex> p = project_all(state.residual, weights, dict);
    const BasisIndex u = fse_select(p, dict);
    const std::size_t k = u.flatten(dict.cols());

    IterationRecord record;
    if (pair_objective(p, dict, k) > 0.0) {
        const std::array<std::size_t, 1> selected{k};
        const std::array<Complex, 1> updates{config.gamma * p[k]};
        detail::apply_updates(state, area, dict, selected, updates);
        record.selected.push_back(u);
        record.updates.push_back(updates[0]);
    }
    record.residual_energy = weighted_energy(state.residual, weights);
    return record;
}

inline RunResult fse_run(const DataArea &area, const WeightMatrix &weights, const FourierDictionary &dict,
                         const ExtrapolationConfig &config, const Grid<double> *reference = nullptr)
{
    config.validate();
    detail::require(config.iterations >= 1, "fse_run: iterations must be at least 1");
    ExtrapolationState state = fse_init(area);
    IterationTrace trace;
    trace.initial_energy = weighted_energy(state.residual, weights);
    trace.records.reserve(static_cast<std::size_t>(config.iterations));
    for (int nu = 1; nu <= config.iterations; ++nu) {
        IterationRecord record = fse_step(state, area, weights, dict, config);
        record.iteration = nu;
        detail::annotate_quality(record, area, state, reference);
        trace.records.push_back(std::move(record));
    }
    return {std::move(state.model), std::move(trace)};
}

} // namespace musex
