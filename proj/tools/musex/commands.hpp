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

#include <musex/concealment.hpp>

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace musex::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kIo = 2, kNumeric = 3 };

class UsageError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr const char *kTraceSchema = "# musex-trace v1";
inline constexpr const char *kTraceHeader = "block_id,iteration,selected_count,residual_energy,psnr_db";

Method parse_method(const std::string &name);

/// printf("%.9g"), with "inf"/"-inf"/"nan" spelled out.
std::string format_real(double value);

struct PatternArgs {
    std::size_t width = 512;
    std::size_t height = 512;
    LossPattern pattern;
    bool allow_contiguous = false;
    std::string output;
};

/// Writes the pattern as a 0/255 mask image; returns the number of blocks.
std::size_t cmd_pattern(const PatternArgs &args);

/// Everything needed to reproduce one concealment run.
struct RunManifest {
    std::string input;
    std::optional<std::string> reference;
    std::optional<std::string> mask;  ///< mask image; otherwise `pattern` is used
    LossPattern pattern;
    bool allow_contiguous = false;
    Method method = Method::Muse;
    ExtrapolationConfig config;
    double concealed_weight = 0.5;
    std::string output;
    std::optional<std::string> trace;
    std::optional<std::string> report;
    std::uint64_t seed = 0;
    unsigned jobs = 1;

    static RunManifest from_json(const nlohmann::json &j);
    nlohmann::json to_json() const;
};

RunManifest load_manifest(const std::string &path);

struct ConcealOutcome {
    Image image;
    ConcealmentReport report;
};

/// Runs a manifest and writes the image, trace and report it names.
ConcealOutcome cmd_conceal(const RunManifest &manifest);

void write_trace_csv(std::ostream &out, const ConcealmentReport &report);
nlohmann::json report_json(const RunManifest &manifest, const ConcealmentReport &report);

struct SweepPoint {
    double tau = 0.9;
    int n_bf = 5;
};

/// "0.9:5,0.75:5" -> {(0.9,5),(0.75,5)}
std::vector<SweepPoint> parse_sweep(const std::string &text);

struct BenchArgs {
    std::string corpus;  ///< directory of .pgm/.png images; may be empty with `synthetic`
    std::string output_dir;
    std::vector<SweepPoint> sweep{{0.9, 5}};
    ExtrapolationConfig config;
    LossPattern pattern;
    unsigned jobs = 1;
    int synthetic = 0;  ///< number of generated images when no corpus is given
    std::size_t synthetic_size = 128;
    std::uint64_t seed = 0;
};

struct BenchRow {
    std::string image;
    Method method = Method::Fse;
    std::optional<SweepPoint> point;  ///< MuSE rows only
    int iterations = 0;
    int saturation_iterations = 0;
    double saturation_psnr_db = 0.0;  ///< PSNR at the saturation iteration
    double final_psnr_db = 0.0;
    std::optional<double> ratio;  ///< FSE / MuSE saturation iterations, MuSE rows only
    std::vector<double> curve;
};

/// Deterministic smooth test images with edges, driven only by `seed`.
std::vector<Image> synthetic_corpus(int count, std::size_t size, std::uint64_t seed);

/// Runs FSE once and MuSE per sweep point for every corpus image; writes
/// summary.csv and one curve file per row into output_dir.
std::vector<BenchRow> cmd_bench(const BenchArgs &args);

/// Full command-line entry point; returns the process exit code.
int run(int argc, const char *const *argv);

} // namespace musex::cli
