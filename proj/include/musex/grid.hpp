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

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace musex {

/**
 * Dense row-major 2D array.
 *
 * Index (m, n) addresses row m and column n. Throughout the library a window
 * of M x N samples has M rows and N columns.
 */
template <typename T>
class Grid {
  public:
    Grid() = default;
    Grid(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill)
    {
    }
    Grid(std::size_t rows, std::size_t cols, std::vector<T> values)
        : rows_(rows), cols_(cols), data_(std::move(values))
    {
        detail::require(data_.size() == rows_ * cols_, "Grid: value count does not match extents");
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T &operator()(std::size_t m, std::size_t n) noexcept { return data_[m * cols_ + n]; }
    const T &operator()(std::size_t m, std::size_t n) const noexcept { return data_[m * cols_ + n]; }
    T &operator[](std::size_t i) noexcept { return data_[i]; }
    const T &operator[](std::size_t i) const noexcept { return data_[i]; }

    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }

    auto begin() noexcept { return data_.begin(); }
    auto end() noexcept { return data_.end(); }
    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

    bool same_shape(const auto &other) const noexcept
    {
        return rows_ == other.rows() && cols_ == other.cols();
    }

    bool operator==(const Grid &) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

enum class Sample : std::uint8_t { Support, Lost };

/**
 * The extrapolation window: sample values plus the Support/Lost partition.
 *
 * Support samples must lie in [0, 255]. Values at Lost positions are zeroed on
 * construction so they cannot leak into any later computation.
 */
class DataArea {
  public:
    DataArea(Grid<double> samples, Grid<Sample> mask) : samples_(std::move(samples)), mask_(std::move(mask))
    {
        detail::require(samples_.rows() > 0 && samples_.cols() > 0, "DataArea: empty window");
        detail::require(samples_.same_shape(mask_), "DataArea: samples and mask differ in shape");
        std::size_t support = 0;
        for (std::size_t i = 0; i < samples_.size(); ++i) {
            if (mask_[i] == Sample::Lost) {
                samples_[i] = 0.0;
                continue;
            }
            ++support;
            const double v = samples_[i];
            detail::require(std::isfinite(v) && v >= 0.0 && v <= 255.0,
                            "DataArea: support sample outside [0, 255]");
        }
        detail::require(support > 0, "DataArea: no support samples");
        support_count_ = support;
    }

    std::size_t rows() const noexcept { return samples_.rows(); }
    std::size_t cols() const noexcept { return samples_.cols(); }
    std::size_t size() const noexcept { return samples_.size(); }
    std::size_t support_count() const noexcept { return support_count_; }
    std::size_t lost_count() const noexcept { return size() - support_count_; }

    const Grid<double> &samples() const noexcept { return samples_; }
    const Grid<Sample> &mask() const noexcept { return mask_; }
    bool is_support(std::size_t i) const noexcept { return mask_[i] == Sample::Support; }
    bool is_lost(std::size_t i) const noexcept { return mask_[i] == Sample::Lost; }

  private:
    Grid<double> samples_;
    Grid<Sample> mask_;
    std::size_t support_count_ = 0;
};

/// Non-negative weights over the window; zero on every Lost sample.
class WeightMatrix {
  public:
    WeightMatrix(const DataArea &area, Grid<double> values) : values_(std::move(values))
    {
        detail::require(values_.same_shape(area.samples()), "WeightMatrix: shape mismatch");
        bool any_positive = false;
        for (std::size_t i = 0; i < values_.size(); ++i) {
            detail::require(std::isfinite(values_[i]) && values_[i] >= 0.0, "WeightMatrix: negative weight");
            if (area.is_lost(i)) {
                values_[i] = 0.0;
            }
            any_positive = any_positive || values_[i] > 0.0;
        }
        detail::require(any_positive, "WeightMatrix: all support weights are zero");
    }

    std::size_t rows() const noexcept { return values_.rows(); }
    std::size_t cols() const noexcept { return values_.cols(); }
    const Grid<double> &values() const noexcept { return values_; }
    double operator()(std::size_t m, std::size_t n) const noexcept { return values_(m, n); }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    double total() const noexcept
    {
        double sum = 0.0;
        for (double v : values_) {
            sum += v;
        }
        return sum;
    }

  private:
    Grid<double> values_;
};

struct ExtrapolationConfig {
    double gamma = 0.2;    ///< orthogonality deficiency compensation, (0, 1]
    double rho_hat = 0.8;  ///< isotropic decay, (0, 1)
    int iterations = 200;  ///< zero is only meaningful to the concealment driver
    double tau = 0.9;      ///< energy fraction threshold, [0, 1)
    int n_bf = 5;          ///< max conjugate pairs per iteration

    void validate() const
    {
        detail::require(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0, 1]");
        detail::require(rho_hat > 0.0 && rho_hat < 1.0, "rho_hat must lie in (0, 1)");
        detail::require(iterations >= 0, "iterations must be non-negative");
        detail::require(tau >= 0.0 && tau < 1.0, "tau must lie in [0, 1)");
        detail::require(n_bf >= 1, "n_bf must be at least 1");
    }
};

/**
 * Isotropic exponential weighting centred on the window.
 *
 * rho[m,n] = rho_hat ^ sqrt((m - (M-1)/2)^2 + (n - (N-1)/2)^2), evaluated at
 * the exact (possibly fractional) centre, masked to zero on Lost samples.
 */
inline WeightMatrix build_isotropic_weights(const DataArea &area, double rho_hat)
{
    detail::require(rho_hat > 0.0 && rho_hat < 1.0, "rho_hat must lie in (0, 1)");
    const double cm = (static_cast<double>(area.rows()) - 1.0) / 2.0;
    const double cn = (static_cast<double>(area.cols()) - 1.0) / 2.0;
    Grid<double> w(area.rows(), area.cols(), 0.0);
    for (std::size_t m = 0; m < area.rows(); ++m) {
        for (std::size_t n = 0; n < area.cols(); ++n) {
            if (area.mask()(m, n) == Sample::Lost) {
                continue;
            }
            const double dm = static_cast<double>(m) - cm;
            const double dn = static_cast<double>(n) - cn;
            w(m, n) = std::pow(rho_hat, std::sqrt(dm * dm + dn * dn));
        }
    }
    return WeightMatrix(area, std::move(w));
}

/// Multiplies each weight by a per-sample confidence factor in [0, 1].
inline WeightMatrix apply_confidence(const DataArea &area, const WeightMatrix &weights,
                                     const Grid<double> &confidence)
{
    detail::require(confidence.same_shape(weights.values()), "confidence: shape mismatch");
    Grid<double> scaled = weights.values();
    for (std::size_t i = 0; i < scaled.size(); ++i) {
        detail::require(confidence[i] >= 0.0 && confidence[i] <= 1.0, "confidence must lie in [0, 1]");
        scaled[i] *= confidence[i];
    }
    return WeightMatrix(area, std::move(scaled));
}

/// Sum of residual^2 * w over the whole window.
inline double weighted_energy(const Grid<double> &residual, const Grid<double> &weights)
{
    detail::require(residual.same_shape(weights), "weighted_energy: dimension mismatch");
    double energy = 0.0;
    for (std::size_t i = 0; i < residual.size(); ++i) {
        energy += residual[i] * residual[i] * weights[i];
    }
    return energy;
}

inline double weighted_energy(const Grid<double> &residual, const WeightMatrix &weights)
{
    return weighted_energy(residual, weights.values());
}

} // namespace musex
