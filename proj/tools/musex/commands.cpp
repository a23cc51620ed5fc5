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

#include "commands.hpp"

#include "image_io.hpp"

#include <musex/errors.hpp>
#include <musex/pgm.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

namespace musex::cli {

namespace fs = std::filesystem;

Method parse_method(const std::string &name)
{
    if (name == "fse") {
        return Method::Fse;
    }
    if (name == "muse") {
        return Method::Muse;
    }
    throw UsageError("unknown method '" + name + "' (expected fse or muse)");
}

std::string format_real(double value)
{
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return buf;
}

std::size_t cmd_pattern(const PatternArgs &args)
{
    if (args.width == 0 || args.height == 0) {
        throw UsageError("pattern: image dimensions must be positive");
    }
    if (args.pattern.block_size > args.width || args.pattern.block_size > args.height) {
        throw UsageError("pattern: block does not fit into the image");
    }
    if (!args.pattern.isolated() && !args.allow_contiguous) {
        throw UsageError("pattern: spacing " + std::to_string(args.pattern.spacing) +
                         " leaves blocks inside each other's support frame; pass --allow-contiguous to accept");
    }
    const auto blocks = args.pattern.blocks(args.height, args.width);
    pgm::write_file(args.output, pgm::image_from_mask(args.pattern.mask(args.height, args.width)));
    return blocks.size();
}

RunManifest RunManifest::from_json(const nlohmann::json &j)
{
    RunManifest m;
    m.input = j.value("input", std::string{});
    if (j.contains("reference") && !j["reference"].is_null()) {
        m.reference = j["reference"].get<std::string>();
    }
    if (j.contains("mask") && !j["mask"].is_null()) {
        m.mask = j["mask"].get<std::string>();
    }
    if (j.contains("pattern")) {
        const auto &p = j["pattern"];
        m.pattern.block_size = p.value("block_size", m.pattern.block_size);
        m.pattern.spacing = p.value("spacing", m.pattern.spacing);
        m.pattern.offset_row = p.value("offset_row", m.pattern.offset_row);
        m.pattern.offset_col = p.value("offset_col", m.pattern.offset_col);
        m.pattern.frame = p.value("frame", m.pattern.frame);
        m.allow_contiguous = p.value("allow_contiguous", false);
    }
    m.method = parse_method(j.value("method", std::string{"muse"}));
    if (j.contains("config")) {
        const auto &c = j["config"];
        m.config.gamma = c.value("gamma", m.config.gamma);
        m.config.rho_hat = c.value("rho_hat", m.config.rho_hat);
        m.config.iterations = c.value("iterations", m.config.iterations);
        m.config.tau = c.value("tau", m.config.tau);
        m.config.n_bf = c.value("n_bf", m.config.n_bf);
    }
    m.concealed_weight = j.value("concealed_weight", m.concealed_weight);
    m.output = j.value("output", std::string{});
    if (j.contains("trace") && !j["trace"].is_null()) {
        m.trace = j["trace"].get<std::string>();
    }
    if (j.contains("report") && !j["report"].is_null()) {
        m.report = j["report"].get<std::string>();
    }
    m.seed = j.value("seed", std::uint64_t{0});
    m.jobs = j.value("jobs", 1u);
    return m;
}

nlohmann::json RunManifest::to_json() const
{
    nlohmann::json j;
    j["input"] = input;
    j["reference"] = reference ? nlohmann::json(*reference) : nlohmann::json(nullptr);
    j["mask"] = mask ? nlohmann::json(*mask) : nlohmann::json(nullptr);
    j["pattern"] = {{"block_size", pattern.block_size}, {"spacing", pattern.spacing},
                    {"offset_row", pattern.offset_row}, {"offset_col", pattern.offset_col},
                    {"frame", pattern.frame},           {"allow_contiguous", allow_contiguous}};
    j["method"] = to_string(method);
    j["config"] = {{"gamma", config.gamma},           {"rho_hat", config.rho_hat}, {"iterations", config.iterations},
                   {"tau", config.tau},               {"n_bf", config.n_bf}};
    j["concealed_weight"] = concealed_weight;
    j["output"] = output;
    j["trace"] = trace ? nlohmann::json(*trace) : nlohmann::json(nullptr);
    j["report"] = report ? nlohmann::json(*report) : nlohmann::json(nullptr);
    j["seed"] = seed;
    j["jobs"] = jobs;
    return j;
}

RunManifest load_manifest(const std::string &path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open manifest " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception &e) {
        throw IoError("manifest " + path + ": " + e.what());
    } 
    try {
        return RunManifest::from_json(j);
    } catch (const nlohmann::json::exception &e) {
        throw UsageError("manifest " + path + ": " + e.what());
    }
}

void write_trace_csv(std::ostream &out, const ConcealmentReport &report)
{
    out << kTraceSchema << '\n' << kTraceHeader << '\n';
    for (const BlockReport &block : report.blocks) {
        for (const IterationRecord &r : block.trace.records) {
            out << block.block_id << ',' << r.iteration << ',' << r.selected.size() << ','
                << format_real(r.residual_energy) << ',';
            if (r.psnr_db) {
                out << format_real(*r.psnr_db);
            }
            out << '\n';
        }
    }
}

namespace {

nlohmann::json real_or_string(double v)
{
    if (std::isfinite(v)) {
        return v;
    }
    return format_real(v);
}

std::vector<double> block_curve(const BlockReport &block)
{
    std::vector<double> curve;
    for (const IterationRecord &r : block.trace.records) {
        if (!r.psnr_db) {
            return {};
        }
        curve.push_back(*r.psnr_db);
    }
    return curve;
}

void write_text_file(const std::string &path, const std::string &content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out << content;
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

void check_shape(const Image &a, const Grid<Sample> &b, const std::string &what)
{
    if (!a.same_shape(b)) {
        throw IoError(what + " dimensions do not match the input image");
    }
}

} // namespace

nlohmann::json report_json(const RunManifest &manifest, const ConcealmentReport &report)
{
    nlohmann::json j;
    j["manifest"] = manifest.to_json();
    j["block_count"] = report.blocks.size();
    j["aggregate_psnr_db"] = report.aggregate_psnr_db ? real_or_string(*report.aggregate_psnr_db) : nullptr;
    j["wall_seconds"] = report.wall_seconds;
    if (!report.psnr_curve.empty()) {
        std::vector<double> curve = report.psnr_curve;
        j["saturation_iterations"] = saturation_iterations(curve);
    }
    nlohmann::json blocks = nlohmann::json::array();
    for (const BlockReport &b : report.blocks) {
        nlohmann::json e;
        e["block_id"] = b.block_id;
        e["row"] = b.block.row;
        e["col"] = b.block.col;
        e["lost_count"] = b.lost_count;
        e["psnr_db"] = b.psnr_db ? real_or_string(*b.psnr_db) : nullptr;
        const std::vector<double> curve = block_curve(b);
        e["saturation_iterations"] = curve.empty() ? nlohmann::json(nullptr) : nlohmann::json(saturation_iterations(curve));
        e["singular_fallbacks"] = std::count_if(b.trace.records.begin(), b.trace.records.end(),
                                                [](const IterationRecord &r) { return r.singular_fallback; });
        e["wall_seconds"] = b.wall_seconds;
        blocks.push_back(std::move(e));
    }
    j["blocks"] = std::move(blocks);
    return j;
}

ConcealOutcome cmd_conceal(const RunManifest &manifest)
{
    if (manifest.input.empty()) {
        throw UsageError("conceal: no input image");
    }
    if (manifest.output.empty()) {
        throw UsageError("conceal: no output path");
    }
    manifest.config.validate();
    if (manifest.jobs == 0) {
        throw UsageError("conceal: --jobs must be at least 1");
    }

    const Image input = io::read_image(manifest.input);
    std::optional<Image> reference;
    if (manifest.reference) {
        reference = io::read_image(*manifest.reference);
        if (!reference->same_shape(input)) {
            throw IoError("reference dimensions do not match the input image");
        }
    }

    ConcealmentOptions options;
    options.method = manifest.method;
    options.config = manifest.config;
    options.reference = reference ? &*reference : nullptr;
    options.jobs = manifest.jobs;

    ConcealOutcome outcome;
    if (manifest.mask) {
        const Grid<Sample> mask = pgm::mask_from_image(io::read_image(*manifest.mask));
        check_shape(input, mask, "mask");
        outcome.image = conceal_sequential(input, mask, options, manifest.concealed_weight,
                                           manifest.pattern.block_size, manifest.pattern.frame, outcome.report);
    } else if (manifest.pattern.isolated()) {
        outcome.image = conceal_image(input, manifest.pattern, options, outcome.report);
    } else if (manifest.allow_contiguous) {
        const Grid<Sample> mask = manifest.pattern.mask(input.rows(), input.cols());
        outcome.image = conceal_sequential(input, mask, options, manifest.concealed_weight,
                                           manifest.pattern.block_size, manifest.pattern.frame, outcome.report);
    } else {
        throw UsageError("conceal: pattern is not isolated; pass --allow-contiguous to conceal it sequentially");
    }

    for (const BlockReport &b : outcome.report.blocks) {
        for (const IterationRecord &r : b.trace.records) {
            if (!std::isfinite(r.residual_energy)) {
                throw NumericError("block " + std::to_string(b.block_id) + ": non-finite residual energy");
            }
        }
    }

    pgm::write_file(manifest.output, outcome.image);
    if (manifest.trace) {
        std::ostringstream csv;
        write_trace_csv(csv, outcome.report);
        write_text_file(*manifest.trace, csv.str());
    }
    if (manifest.report) {
        write_text_file(*manifest.report, report_json(manifest, outcome.report).dump(2) + "\n");
    }
    return outcome;
}

std::vector<SweepPoint> parse_sweep(const std::string &text)
{
    std::vector<SweepPoint> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw UsageError("sweep entry '" + item + "' is not tau:n_bf");
        }
        SweepPoint p;
        try {
            std::size_t used = 0;
            p.tau = std::stod(item.substr(0, colon), &used);
            p.n_bf = std::stoi(item.substr(colon + 1));
        } catch (const std::exception &) {
            throw UsageError("sweep entry '" + item + "' is not tau:n_bf");
        }
        if (!(p.tau >= 0.0 && p.tau < 1.0) || p.n_bf < 1) {
            throw UsageError("sweep entry '" + item + "' is out of range");
        }
        out.push_back(p);
    }
    if (out.empty()) {
        throw UsageError("empty sweep");
    }
    return out;
}

namespace {

// Uniform double in [0, 1) from the raw generator output, independent of the
// standard library's distribution implementations.
double unit(std::mt19937_64 &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

} // namespace

std::vector<Image> synthetic_corpus(int count, std::size_t size, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<Image> images;
    for (int i = 0; i < count; ++i) {
        struct Wave {
            double amp, fr, fc, phase;
        };
        struct Edge {
            double nx, ny, offset, step;
        };
        std::vector<Wave> waves(6);
        for (Wave &w : waves) {
            w = {10.0 + 30.0 * unit(rng), 0.08 * unit(rng), 0.08 * unit(rng), 2.0 * std::numbers::pi * unit(rng)};
        }
        std::vector<Edge> edges(3);
        for (Edge &e : edges) {
            const double angle = 2.0 * std::numbers::pi * unit(rng);
            e = {std::cos(angle), std::sin(angle), static_cast<double>(size) * (unit(rng) - 0.5),
                 80.0 * (unit(rng) - 0.5)};
        }
        Image img(size, size, 0);
        const double half = static_cast<double>(size) / 2.0;
        for (std::size_t r = 0; r < size; ++r) {
            for (std::size_t c = 0; c < size; ++c) {
                double v = 128.0;
                for (const Wave &w : waves) {
                    v += w.amp * std::cos(2.0 * std::numbers::pi * (w.fr * r + w.fc * c) + w.phase);
                }
                for (const Edge &e : edges) {
                    if (e.nx * (r - half) + e.ny * (c - half) > e.offset) {
                        v += e.step;
                    }
                }
                img(r, c) = static_cast<std::uint8_t>(quantize_sample(v));
            }
        }
        images.push_back(std::move(img));
    }
    return images;
}

namespace {

std::vector<std::pair<std::string, Image>> load_corpus(const BenchArgs &args)
{
    std::vector<std::pair<std::string, Image>> corpus;
    if (!args.corpus.empty()) {
        if (!fs::is_directory(args.corpus)) {
            throw IoError("corpus directory not found: " + args.corpus);
        }
        std::vector<fs::path> files;
        for (const auto &entry : fs::directory_iterator(args.corpus)) {
            const auto ext = entry.path().extension().string();
            if (entry.is_regular_file() && (ext == ".pgm" || ext == ".png")) {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const fs::path &p : files) {
            corpus.emplace_back(p.stem().string(), io::read_image(p.string()));
        }
    } else {
        const auto images = synthetic_corpus(args.synthetic, args.synthetic_size, args.seed);
        for (std::size_t i = 0; i < images.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "synthetic_%03zu", i);
            corpus.emplace_back(name, images[i]);
        }
    }
    if (corpus.empty()) {
        throw UsageError("bench: empty corpus");
    }
    return corpus;
}

BenchRow bench_run(const std::string &name, const Image &image, Method method, const ExtrapolationConfig &config,
                   const BenchArgs &args)
{
    ConcealmentOptions options;
    options.method = method;
    options.config = config;
    options.reference = &image;
    options.jobs = args.jobs;
    ConcealmentReport report;
    conceal_image(image, args.pattern, options, report);
    if (report.psnr_curve.empty()) {
        throw UsageError("bench: image " + name + " has no loss blocks under the pattern");
    }
    BenchRow row;
    row.image = name;
    row.method = method;
    row.iterations = config.iterations;
    row.curve = report.psnr_curve;
    row.saturation_iterations = saturation_iterations(row.curve);
    row.saturation_psnr_db = row.curve[static_cast<std::size_t>(row.saturation_iterations) - 1];
    row.final_psnr_db = row.curve.back();
    return row;
}

std::string curve_file_name(const BenchRow &row)
{
    std::string name = row.image + "_" + to_string(row.method);
    if (row.point) {
        name += "_tau" + format_real(row.point->tau) + "_nbf" + std::to_string(row.point->n_bf);
    }
    return name + ".csv";
}

} // namespace

std::vector<BenchRow> cmd_bench(const BenchArgs &args)
{
    args.config.validate();
    if (args.config.iterations < 1) {
        throw UsageError("bench: iterations must be at least 1");
    }
    if (!args.pattern.isolated()) {
        throw UsageError("bench: the loss pattern must be isolated");
    }
    if (args.output_dir.empty()) {
        throw UsageError("bench: no output directory");
    }
    const auto corpus = load_corpus(args);
    fs::create_directories(fs::path(args.output_dir) / "curves");

    std::vector<BenchRow> rows;
    for (const auto &[name, image] : corpus) {
        std::cerr << "bench: " << name << " fse\n";
        BenchRow fse = bench_run(name, image, Method::Fse, args.config, args);
        const int fse_sat = fse.saturation_iterations;
        rows.push_back(std::move(fse));
        for (const SweepPoint &point : args.sweep) {
            std::cerr << "bench: " << name << " muse tau=" << point.tau << " n_bf=" << point.n_bf << "\n";
            ExtrapolationConfig config = args.config;
            config.tau = point.tau;
            config.n_bf = point.n_bf;
            BenchRow muse = bench_run(name, image, Method::Muse, config, args);
            muse.point = point;
            muse.ratio = static_cast<double>(fse_sat) / static_cast<double>(muse.saturation_iterations);
            rows.push_back(std::move(muse));
        }
    }

    std::ostringstream summary;
    summary << "# musex-bench v1\n"
            << "image,method,tau,n_bf,iterations,saturation_iterations,saturation_psnr_db,final_psnr_db,"
               "ratio_fse_over_muse\n";
    for (const BenchRow &row : rows) {
        summary << row.image << ',' << to_string(row.method) << ','
                << (row.point ? format_real(row.point->tau) : "") << ','
                << (row.point ? std::to_string(row.point->n_bf) : "") << ',' << row.iterations << ','
                << row.saturation_iterations << ',' << format_real(row.saturation_psnr_db) << ','
                << format_real(row.final_psnr_db) << ',' << (row.ratio ? format_real(*row.ratio) : "") << '\n';

        std::ostringstream curve;
        curve << "iteration,psnr_db\n";
        for (std::size_t i = 0; i < row.curve.size(); ++i) {
            curve << i + 1 << ',' << format_real(row.curve[i]) << '\n';
        }
        write_text_file((fs::path(args.output_dir) / "curves" / curve_file_name(row)).string(), curve.str());
    }
    write_text_file((fs::path(args.output_dir) / "summary.csv").string(), summary.str());
    return rows;
}

namespace {

void add_config_flags(CLI::App &app, ExtrapolationConfig &config)
{
    app.add_option("--iterations", config.iterations, "iteration count")->capture_default_str();
    app.add_option("--gamma", config.gamma, "orthogonality deficiency compensation")->capture_default_str();
    app.add_option("--rho-hat", config.rho_hat, "isotropic weight decay")->capture_default_str();
    app.add_option("--tau", config.tau, "energy fraction threshold (muse)")->capture_default_str();
    app.add_option("--n-bf", config.n_bf, "max basis function pairs per iteration (muse)")->capture_default_str();
}

void add_pattern_flags(CLI::App &app, LossPattern &pattern)
{
    app.add_option("--block-size", pattern.block_size, "loss block edge")->capture_default_str();
    app.add_option("--spacing", pattern.spacing, "distance between block origins")->capture_default_str();
    app.add_option("--offset-row", pattern.offset_row, "row of the first block")->capture_default_str();
    app.add_option("--offset-col", pattern.offset_col, "column of the first block")->capture_default_str();
    app.add_option("--frame", pattern.frame, "support frame width")->capture_default_str();
}

} // namespace

int run(int argc, const char *const *argv)
{
    CLI::App app{"Block loss concealment by frequency selective extrapolation (fse) and multiple selection "
                 "extrapolation (muse)"};
    app.require_subcommand(1);

    PatternArgs pattern_args;
    CLI::App *pattern_cmd = app.add_subcommand("pattern", "write an isolated block loss mask (0 = lost)");
    pattern_cmd->add_option("--width", pattern_args.width, "image width")->capture_default_str();
    pattern_cmd->add_option("--height", pattern_args.height, "image height")->capture_default_str();
    add_pattern_flags(*pattern_cmd, pattern_args.pattern);
    pattern_cmd->add_flag("--allow-contiguous", pattern_args.allow_contiguous, "accept non-isolated blocks");
    pattern_cmd->add_option("-o,--output", pattern_args.output, "mask image path (PGM)")->required();

    // Flags explicitly given on the command line override the manifest.
    RunManifest flags;
    std::string manifest_path;
    std::string method_name = "muse";
    std::string reference, mask, trace, report;
    CLI::App *conceal_cmd = app.add_subcommand("conceal", "conceal lost blocks in an image");
    conceal_cmd->add_option("--manifest", manifest_path, "JSON run manifest");
    auto *o_input = conceal_cmd->add_option("-i,--input", flags.input, "input image (PGM or PNG)");
    auto *o_reference = conceal_cmd->add_option("--reference", reference, "undamaged image for PSNR");
    auto *o_mask = conceal_cmd->add_option("--mask", mask, "loss mask image (0 = lost); overrides the pattern");
    auto *o_output = conceal_cmd->add_option("-o,--output", flags.output, "concealed image (PGM)");
    auto *o_trace = conceal_cmd->add_option("--trace", trace, "per-iteration trace CSV");
    auto *o_report = conceal_cmd->add_option("--report", report, "JSON report");
    auto *o_method = conceal_cmd->add_option("--method", method_name, "fse or muse")->check(CLI::IsMember({"fse", "muse"}));
    auto *o_cw = conceal_cmd->add_option("--concealed-weight", flags.concealed_weight,
                                         "weight factor for already concealed pixels");
    auto *o_jobs = conceal_cmd->add_option("--jobs", flags.jobs, "worker threads");
    auto *o_seed = conceal_cmd->add_option("--seed", flags.seed, "recorded in the manifest");
    auto *o_contig = conceal_cmd->add_flag("--allow-contiguous", flags.allow_contiguous,
                                           "conceal non-isolated patterns sequentially");
    add_config_flags(*conceal_cmd, flags.config);
    add_pattern_flags(*conceal_cmd, flags.pattern);

    BenchArgs bench_args;
    std::string sweep = "0.9:5";
    CLI::App *bench_cmd = app.add_subcommand("bench", "FSE vs. MuSE saturation benchmark over a corpus");
    bench_cmd->add_option("--corpus", bench_args.corpus, "directory of .pgm/.png images");
    bench_cmd->add_option("--synthetic", bench_args.synthetic, "generate this many images instead of a corpus");
    bench_cmd->add_option("--synthetic-size", bench_args.synthetic_size, "edge of generated images")
        ->capture_default_str();
    bench_cmd->add_option("--seed", bench_args.seed, "seed for generated images")->capture_default_str();
    bench_cmd->add_option("-o,--output", bench_args.output_dir, "output directory")->required();
    bench_cmd->add_option("--sweep", sweep, "comma separated tau:n_bf list")->capture_default_str();
    bench_cmd->add_option("--jobs", bench_args.jobs, "worker threads")->capture_default_str();
    add_config_flags(*bench_cmd, bench_args.config);
    add_pattern_flags(*bench_cmd, bench_args.pattern);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*pattern_cmd) {
            const std::size_t n = cmd_pattern(pattern_args);
            std::cout << n << " loss blocks\n";
            return kOk;
        }
        if (*conceal_cmd) {
            RunManifest m = manifest_path.empty() ? RunManifest{} : load_manifest(manifest_path);
            auto given = [](const CLI::Option *o) { return o->count() > 0; };
            if (given(o_input)) m.input = flags.input;
            if (given(o_output)) m.output = flags.output;
            if (given(o_reference)) m.reference = reference;
            if (given(o_mask)) m.mask = mask;
            if (given(o_trace)) m.trace = trace;
            if (given(o_report)) m.report = report;
            if (given(o_method)) m.method = parse_method(method_name);
            if (given(o_cw)) m.concealed_weight = flags.concealed_weight;
            if (given(o_jobs)) m.jobs = flags.jobs;
            if (given(o_seed)) m.seed = flags.seed;
            if (given(o_contig)) m.allow_contiguous = flags.allow_contiguous;
            for (const char *name : {"--iterations", "--gamma", "--rho-hat", "--tau", "--n-bf"}) {
                if (conceal_cmd->get_option(name)->count() == 0) {
                    continue;
                }
                const std::string n = name;
                if (n == "--iterations") m.config.iterations = flags.config.iterations;
                if (n == "--gamma") m.config.gamma = flags.config.gamma;
                if (n == "--rho-hat") m.config.rho_hat = flags.config.rho_hat;
                if (n == "--tau") m.config.tau = flags.config.tau;
                if (n == "--n-bf") m.config.n_bf = flags.config.n_bf;
            }
            for (const char *name : {"--block-size", "--spacing", "--offset-row", "--offset-col", "--frame"}) {
                if (conceal_cmd->get_option(name)->count() == 0) {
                    continue;
                }
                const std::string n = name;
                if (n == "--block-size") m.pattern.block_size = flags.pattern.block_size;
                if (n == "--spacing") m.pattern.spacing = flags.pattern.spacing;
                if (n == "--offset-row") m.pattern.offset_row = flags.pattern.offset_row;
                if (n == "--offset-col") m.pattern.offset_col = flags.pattern.offset_col;
                if (n == "--frame") m.pattern.frame = flags.pattern.frame;
            }
            const ConcealOutcome outcome = cmd_conceal(m);
            if (outcome.report.aggregate_psnr_db) {
                std::cout << "aggregate PSNR " << format_real(*outcome.report.aggregate_psnr_db) << " dB\n";
            }
            std::cout << outcome.report.blocks.size() << " blocks in " << format_real(outcome.report.wall_seconds)
                      << " s\n";
            return kOk;
        }
        if (*bench_cmd) {
            bench_args.sweep = parse_sweep(sweep);
            if (bench_args.corpus.empty() && bench_args.synthetic <= 0) {
                throw UsageError("bench: give --corpus or --synthetic");
            }
            const auto rows = cmd_bench(bench_args);
            std::cout << rows.size() << " rows written to " << bench_args.output_dir << "\n";
            return kOk;
        }
    } catch (const IoError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const NumericError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumeric;
    } catch (const std::invalid_argument &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::out_of_range &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const fs::filesystem_error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumeric;
    }
    return kUsage;
}

} // namespace musex::cli
