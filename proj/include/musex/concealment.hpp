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
#include "fse.hpp"
#include "grid.hpp"
#include "muse.hpp"
#include "sparse_model.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace musex {

/// 8-bit grayscale image.
using Image = Grid<std::uint8_t>;

enum class Method { Fse, Muse };

inline const char *to_string(Method method) noexcept { return method == Method::Fse ? "fse" : "muse"; }

/// Rectangle in image coordinates.
struct Block {
    std::size_t row = 0;
    std::size_t col = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
};

/**
 * Regular grid of square loss blocks.
 *
 * Blocks start at `offset` and repeat every `spacing` samples while they fit
 * inside the image. The support frame around each block is `frame` samples.
 */
struct LossPattern {
    std::size_t block_size = 16;
    std::size_t spacing = 64;
    std::size_t offset_row = 24;
    std::size_t offset_col = 24;
    std::size_t frame = 16;

    /// No block's support frame overlaps another block.
    bool isolated() const noexcept { return spacing >= block_size + frame; }

    void validate() const
    {
        detail::require(block_size >= 1, "loss pattern: block size must be positive");
        detail::require(spacing >= 1, "loss pattern: spacing must be positive");
        detail::require(spacing >= block_size, "loss pattern: blocks overlap (spacing < block size)");
    }

    std::vector<Block> blocks(std::size_t image_rows, std::size_t image_cols) const
    {
        validate();
        std::vector<Block> out;
        for (std::size_t r = offset_row; r + block_size <= image_rows; r += spacing) {
            for (std::size_t c = offset_col; c + block_size <= image_cols; c += spacing) {
                out.push_back({r, c, block_size, block_size});
            }
        }
        return out;
    }

    Grid<Sample> mask(std::size_t image_rows, std::size_t image_cols) const
    {
        Grid<Sample> m(image_rows, image_cols, Sample::Support);
        for (const Block &b : blocks(image_rows, image_cols)) {
            for (std::size_t r = b.row; r < b.row + b.rows; ++r) {
                for (std::size_t c = b.col; c < b.col + b.cols; ++c) {
                    m(r, c) = Sample::Lost;
                }
            }
        }
        return m;
    }
};

/// Window placement of a block: the block plus its frame, clipped to the image.
struct Window {
    std::size_t row = 0;
    std::size_t col = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
};

inline Window window_for(const Block &block, std::size_t frame, std::size_t image_rows, std::size_t image_cols)
{
    if (block.rows == 0 || block.cols == 0 || block.row + block.rows > image_rows ||
        block.col + block.cols > image_cols) {
        throw std::out_of_range("block lies outside the image");
    }
    Window w;
    w.row = block.row >= frame ? block.row - frame : 0;
    w.col = block.col >= frame ? block.col - frame : 0;
    const std::size_t bottom = std::min(image_rows, block.row + block.rows + frame);
    const std::size_t right = std::min(image_cols, block.col + block.cols + frame);
    w.rows = bottom - w.row;
    w.cols = right - w.col;
    return w;
}

/**
 * Copies the window around `block` out of the image. The block is Lost, and so
 * is any window pixel marked Lost in the optional image-wide `loss` mask.
 */
inline DataArea extract_window(const Image &image, const Block &block, std::size_t frame,
                               const Grid<Sample> *loss = nullptr)
{
    const Window w = window_for(block, frame, image.rows(), image.cols());
    Grid<double> samples(w.rows, w.cols, 0.0);
    Grid<Sample> mask(w.rows, w.cols, Sample::Support);
    for (std::size_t r = 0; r < w.rows; ++r) {
        for (std::size_t c = 0; c < w.cols; ++c) {
            const std::size_t ir = w.row + r;
            const std::size_t ic = w.col + c;
            const bool lost = (ir >= block.row && ir < block.row + block.rows && ic >= block.col &&
                               ic < block.col + block.cols) ||
                              (loss != nullptr && (*loss)(ir, ic) == Sample::Lost);
            mask(r, c) = lost ? Sample::Lost : Sample::Support;
            samples(r, c) = image(ir, ic);
        }
    }
    return DataArea(std::move(samples), std::move(mask));
}

inline DataArea extract_window(const Image &image, const LossPattern &pattern, std::size_t block_id)
{
    const std::vector<Block> blocks = pattern.blocks(image.rows(), image.cols());
    if (block_id >= blocks.size()) {
        throw std::out_of_range("extract_window: no such block");
    }
    const Grid<Sample> loss = pattern.mask(image.rows(), image.cols());
    return extract_window(image, blocks[block_id], pattern.frame, &loss);
}

/// PSNR with peak 255 over the masked (Lost) pixels; +infinity when identical.
inline double psnr(const Image &reference, const Image &test, const Grid<Sample> &mask)
{
    detail::require(reference.same_shape(test) && reference.same_shape(mask), "psnr: dimension mismatch");
    double sse = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        if (mask[i] != Sample::Lost) {
            continue;
        }
        const double e = static_cast<double>(reference[i]) - static_cast<double>(test[i]);
        sse += e * e;
        ++count;
    }
    detail::require(count > 0, "psnr: empty mask");
    return psnr_from_mse(sse / static_cast<double>(count));
}

/// Smallest 1-based iteration whose PSNR reaches (final PSNR - delta).
inline int saturation_iterations(std::span<const double> curve, double delta = 0.25)
{
    detail::require(!curve.empty(), "saturation_iterations: empty curve");
    const double target = curve.back() - delta;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (curve[i] >= target) {
            return static_cast<int>(i) + 1;
        }
    }
    return static_cast<int>(curve.size());
}

struct BlockReport {
    std::size_t block_id = 0;
    Block block;
    std::size_t lost_count = 0;
    std::optional<double> psnr_db;  ///< final, quantized, against the reference
    std::optional<double> lost_sse;
    IterationTrace trace;
    double wall_seconds = 0.0;
};

struct ConcealmentReport {
    std::vector<BlockReport> blocks;
    std::optional<double> aggregate_psnr_db;  ///< pooled over all Lost samples
    std::vector<double> psnr_curve;           ///< pooled PSNR after each iteration
    double wall_seconds = 0.0;
};

struct ConcealmentOptions {
    Method method = Method::Muse;
    ExtrapolationConfig config;
    const Image *reference = nullptr;  ///< enables PSNR tracking
    unsigned jobs = 1;
};

namespace detail {

struct BlockJob {
    Block block;
    DataArea area;
    std::optional<Grid<double>> confidence;
};

struct BlockOutcome {
    Grid<double> model;
    IterationTrace trace;
    double wall_seconds = 0.0;
};

inline Grid<double> reference_window(const Image &reference, const Window &w)
{
    Grid<double> out(w.rows, w.cols, 0.0);
    for (std::size_t r = 0; r < w.rows; ++r) {
        for (std::size_t c = 0; c < w.cols; ++c) {
            out(r, c) = reference(w.row + r, w.col + c);
        }
    }
    return out;
}

inline BlockOutcome run_block(const DataArea &area, const std::optional<Grid<double>> &confidence,
                              const ConcealmentOptions &options, const Grid<double> *reference)
{
    const auto start = std::chrono::steady_clock::now();
    WeightMatrix weights = build_isotropic_weights(area, options.config.rho_hat);
    if (confidence) {
        weights = apply_confidence(area, weights, *confidence);
    }
    BlockOutcome out;
    if (options.config.iterations == 0) {
        out.model = Grid<double>(area.rows(), area.cols(), 0.0);
    } else {
        const FourierDictionary dict = build_dictionary(area, weights);
        RunResult result = options.method == Method::Fse ? fse_run(area, weights, dict, options.config, reference)
                                                         : muse_run(area, weights, dict, options.config, reference);
        out.model = std::move(result.model.model);
        out.trace = std::move(result.trace);
    }
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

/// Lost pixels of `area` placed at `w` are written back quantized.
inline void write_back(Image &image, const Window &w, const DataArea &area, const Block &block,
                       const Grid<double> &model)
{
    for (std::size_t r = 0; r < w.rows; ++r) {
        for (std::size_t c = 0; c < w.cols; ++c) {
            const std::size_t ir = w.row + r;
            const std::size_t ic = w.col + c;
            const bool in_block =
                ir >= block.row && ir < block.row + block.rows && ic >= block.col && ic < block.col + block.cols;
            if (in_block && area.mask()(r, c) == Sample::Lost) {
                image(ir, ic) = static_cast<std::uint8_t>(quantize_sample(model(r, c)));
            }
        }
    }
}

inline void finalize_report(ConcealmentReport &report, const ConcealmentOptions &options)
{
    if (options.reference == nullptr) {
        return;
    }
    double sse = 0.0;
    std::size_t count = 0;
    for (const BlockReport &b : report.blocks) {
        sse += b.lost_sse.value_or(0.0);
        count += b.lost_count;
    }
    if (count == 0) {
        return;
    }
    report.aggregate_psnr_db = psnr_from_mse(sse / static_cast<double>(count));
    const auto iterations = static_cast<std::size_t>(options.config.iterations);
    report.psnr_curve.assign(iterations, 0.0);
    for (std::size_t nu = 0; nu < iterations; ++nu) {
        double pooled = 0.0;
        for (const BlockReport &b : report.blocks) {
            if (nu < b.trace.records.size()) {
                pooled += b.trace.records[nu].lost_sse.value_or(0.0);
            }
        }
        report.psnr_curve[nu] = psnr_from_mse(pooled / static_cast<double>(count));
    }
}

template <typename Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn &&fn)
{
    const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (std::thread &t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

} // namespace detail

/**
 * Conceals every block of an isolated loss pattern independently.
 *
 * Patterns whose frames overlap other blocks are rejected.
 *
 * Support pixels are copied bit for bit; Lost pixels receive the quantized
 * model. Blocks run on up to `options.jobs` threads and the result does not
 * depend on the thread count.
 */
inline Image conceal_image(const Image &image, const LossPattern &pattern, const ConcealmentOptions &options,
                           ConcealmentReport &report)
{
    options.config.validate();
    detail::require(pattern.isolated(), "conceal_image: pattern is not isolated; use conceal_sequential");
    if (options.reference != nullptr) {
        detail::require(options.reference->same_shape(image), "conceal_image: reference dimension mismatch");
    }
    const auto start = std::chrono::steady_clock::now();
    const std::vector<Block> blocks = pattern.blocks(image.rows(), image.cols());
    const Grid<Sample> loss = pattern.mask(image.rows(), image.cols());

    // Lost pixels must not reach any window, so they are blanked up front.
    Image output = image;
    for (std::size_t i = 0; i < output.size(); ++i) {
        if (loss[i] == Sample::Lost) {
            output[i] = 0;
        }
    }

    report = ConcealmentReport{};
    report.blocks.resize(blocks.size());
    std::vector<Grid<double>> models(blocks.size());
    const Image source = output;
    detail::parallel_for(blocks.size(), options.jobs, [&](std::size_t id) {
        const Block &block = blocks[id];
        const Window w = window_for(block, pattern.frame, image.rows(), image.cols());
        DataArea area = [&] {
            try {
                return extract_window(source, block, pattern.frame, &loss);
            } catch (const std::exception &e) {
                throw std::runtime_error("block " + std::to_string(id) + ": " + e.what());
            }
        }();
        std::optional<Grid<double>> truth;
        if (options.reference != nullptr) {
            truth = detail::reference_window(*options.reference, w);
        }
        detail::BlockOutcome outcome = detail::run_block(area, std::nullopt, options, truth ? &*truth : nullptr);
        BlockReport &br = report.blocks[id];
        br.block_id = id;
        br.block = block;
        br.lost_count = area.lost_count();
        if (truth) {
            br.lost_sse = lost_region_sse(area, outcome.model, *truth);
            br.psnr_db = psnr_from_mse(*br.lost_sse / static_cast<double>(area.lost_count()));
        }
        br.trace = std::move(outcome.trace);
        br.wall_seconds = outcome.wall_seconds;
        models[id] = std::move(outcome.model);
    });

    for (std::size_t id = 0; id < blocks.size(); ++id) {
        const Block &block = blocks[id];
        const Window w = window_for(block, pattern.frame, image.rows(), image.cols());
        const DataArea area = extract_window(source, block, pattern.frame, &loss);
        detail::write_back(output, w, area, block, models[id]);
    }
    detail::finalize_report(report, options);
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return output;
}

/**
 * Conceals an arbitrary loss mask tile by tile.
 *
 * Each 4-connected loss region is split into block_size tiles anchored at the
 * region's bounding box; regions and tiles are processed in raster order.
 * Already concealed pixels join later windows as Support with their weight
 * multiplied by `concealed_weight`.
 */
inline Image conceal_sequential(const Image &image, const Grid<Sample> &loss, const ConcealmentOptions &options,
                                double concealed_weight, std::size_t block_size, std::size_t frame,
                                ConcealmentReport &report)
{
    options.config.validate();
    detail::require(loss.same_shape(image), "conceal_sequential: mask dimension mismatch");
    detail::require(concealed_weight >= 0.0 && concealed_weight <= 1.0,
                    "concealed_weight must lie in [0, 1]");
    detail::require(block_size >= 1, "conceal_sequential: block size must be positive");
    if (options.reference != nullptr) {
        detail::require(options.reference->same_shape(image), "conceal_sequential: reference dimension mismatch");
    }
    const auto start = std::chrono::steady_clock::now();
    const std::size_t rows = image.rows();
    const std::size_t cols = image.cols();

    enum class State : std::uint8_t { Known, Lost, Concealed };
    Grid<State> state(rows, cols, State::Known);
    Image output = image;
    for (std::size_t i = 0; i < loss.size(); ++i) {
        if (loss[i] == Sample::Lost) {
            state[i] = State::Lost;
            output[i] = 0;
        }
    }

    // Tiles, in raster order of each region's first pixel.
    std::vector<Block> tiles;
    Grid<std::uint8_t> visited(rows, cols, 0);
    std::vector<std::size_t> stack;
    for (std::size_t start_i = 0; start_i < loss.size(); ++start_i) {
        if (loss[start_i] != Sample::Lost || visited[start_i]) {
            continue;
        }
        std::size_t r0 = rows, c0 = cols, r1 = 0, c1 = 0;
        stack.push_back(start_i);
        visited[start_i] = 1;
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            const std::size_t r = i / cols;
            const std::size_t c = i % cols;
            r0 = std::min(r0, r);
            c0 = std::min(c0, c);
            r1 = std::max(r1, r);
            c1 = std::max(c1, c);
            auto visit = [&](std::size_t j) {
                if (loss[j] == Sample::Lost && !visited[j]) {
                    visited[j] = 1;
                    stack.push_back(j);
                }
            };
            if (r > 0) visit(i - cols);
            if (r + 1 < rows) visit(i + cols);
            if (c > 0) visit(i - 1);
            if (c + 1 < cols) visit(i + 1);
        }
        for (std::size_t tr = r0; tr <= r1; tr += block_size) {
            for (std::size_t tc = c0; tc <= c1; tc += block_size) {
                Block t{tr, tc, std::min(block_size, r1 + 1 - tr), std::min(block_size, c1 + 1 - tc)};
                bool any = false;
                for (std::size_t r = t.row; r < t.row + t.rows && !any; ++r) {
                    for (std::size_t c = t.col; c < t.col + t.cols; ++c) {
                        if (state(r, c) == State::Lost) {
                            any = true;
                            break;
                        }
                    }
                }
                if (any) {
                    tiles.push_back(t);
                }
            }
        }
    }

    report = ConcealmentReport{};
    report.blocks.reserve(tiles.size());
    for (std::size_t id = 0; id < tiles.size(); ++id) {
        const Block &tile = tiles[id];
        const Window w = window_for(tile, frame, rows, cols);
        Grid<double> samples(w.rows, w.cols, 0.0);
        Grid<Sample> mask(w.rows, w.cols, Sample::Support);
        Grid<double> confidence(w.rows, w.cols, 1.0);
        bool any_concealed = false;
        for (std::size_t r = 0; r < w.rows; ++r) {
            for (std::size_t c = 0; c < w.cols; ++c) {
                const State s = state(w.row + r, w.col + c);
                samples(r, c) = output(w.row + r, w.col + c);
                if (s == State::Lost) {
                    mask(r, c) = Sample::Lost;
                } else if (s == State::Concealed) {
                    confidence(r, c) = concealed_weight;
                    any_concealed = true;
                }
            }
        }
        DataArea area = [&] {
            try {
                return DataArea(std::move(samples), std::move(mask));
            } catch (const std::exception &e) {
                throw std::runtime_error("block " + std::to_string(id) + ": " + e.what());
            }
        }();
        std::optional<Grid<double>> truth;
        if (options.reference != nullptr) {
            truth = detail::reference_window(*options.reference, w);
        }
        const std::optional<Grid<double>> conf = any_concealed ? std::optional(std::move(confidence)) : std::nullopt;
        detail::BlockOutcome outcome = detail::run_block(area, conf, options, truth ? &*truth : nullptr);

        BlockReport br;
        br.block_id = id;
        br.block = tile;
        std::size_t written = 0;
        double sse = 0.0;
        for (std::size_t r = 0; r < w.rows; ++r) {
            for (std::size_t c = 0; c < w.cols; ++c) {
                const std::size_t ir = w.row + r;
                const std::size_t ic = w.col + c;
                const bool in_tile =
                    ir >= tile.row && ir < tile.row + tile.rows && ic >= tile.col && ic < tile.col + tile.cols;
                if (in_tile && state(ir, ic) == State::Lost) {
                    const double v = quantize_sample(outcome.model(r, c));
                    output(ir, ic) = static_cast<std::uint8_t>(v);
                    state(ir, ic) = State::Concealed;
                    ++written;
                    if (truth) {
                        const double e = v - (*truth)(r, c);
                        sse += e * e;
                    }
                }
            }
        }
        br.lost_count = written;
        if (truth) {
            br.lost_sse = sse;
            br.psnr_db = psnr_from_mse(sse / static_cast<double>(written));
        }
        br.trace = std::move(outcome.trace);
        br.wall_seconds = outcome.wall_seconds;
        report.blocks.push_back(std::move(br));
    }
    if (options.reference != nullptr) {
        double sse = 0.0;
        std::size_t count = 0;
        for (const BlockReport &b : report.blocks) {
            sse += b.lost_sse.value_or(0.0);
            count += b.lost_count;
        }
        if (count > 0) {
            report.aggregate_psnr_db = psnr_from_mse(sse / static_cast<double>(count));
        }
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return output;
}

} // namespace musex
