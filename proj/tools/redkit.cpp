/*
 * Copyright (C) 2026 The redkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// redkit command-line driver.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "redkit/bound_engine.hpp"
#include "redkit/equivalence.hpp"
#include "redkit/generator.hpp"
#include "redkit/onnx_bridge.hpp"
#include "redkit/reducer.hpp"
#include "redkit/simplifier.hpp"
#include "redkit/spec_io.hpp"
#include "redkit/verify.hpp"

namespace {

using namespace redkit;

enum Exit : int {
    ok = 0,
    negative = 1,  // unknown verdict, networks differ
    usage = 2,
    unsupported = 3,
    internal = 4,
    parse = 5,
    generation = 6,
};

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::unsupported: return unsupported;
        case ErrorKind::parse: return parse;
        case ErrorKind::generation: return generation;
        case ErrorKind::contract:
        case ErrorKind::structural:
        case ErrorKind::construction:
        case ErrorKind::internal: return internal;
    }
    return internal;
}

struct RunConfig {
    std::string model_path;
    std::string other_path;
    std::string vnnlib_path;
    std::string center_path;
    double eps = -1.0;
    std::string clip;
    std::optional<std::size_t> label;
    std::string method = "crown";
    std::string alpha = "adaptive";
    std::uint64_t seed = 0;
    double timeout_s = 60.0;
    std::size_t max_splits = std::numeric_limits<std::size_t>::max();
    std::string out_path;
    std::string report_path;
    bool float32 = false;
    std::size_t samples = 1000;
    double tolerance = 1e-6;
    std::size_t repeats = 5;
    GeneratorConfig gen;
};

BoundOptions bound_options(const RunConfig& cfg) {
    BoundOptions o;
    o.method = cfg.method == "interval" ? BoundMethod::interval : BoundMethod::crown;
    o.alpha = cfg.alpha == "zero" ? AlphaRule::zero : cfg.alpha == "one" ? AlphaRule::one : AlphaRule::adaptive;
    return o;
}

/// Writes to --out when given, else stdout.
class Sink {
  public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) fail(ErrorKind::contract, "cannot write '" + path + "'");
        }
    }
    std::ostream& os() { return file_ ? *file_ : std::cout; }

  private:
    std::unique_ptr<std::ofstream> file_;
};

Network load_model(const std::string& path) {
    ImportResult r = load_onnx(path);
    for (const auto& op : r.report.experimental_ops) std::cerr << "warning: experimental operator encoding: " << op << '\n';
    return std::move(r.net);
}

std::optional<std::pair<double, double>> parse_clip(const std::string& s) {
    if (s.empty()) return std::nullopt;
    Vector v = parse_center(s);
    if (v.size() != 2) fail(ErrorKind::parse, "--clip expects lo,hi");
    return std::make_pair(v[0], v[1]);
}

/// Sequential chain for `net`, simplifying when needed.
AffineChain as_chain(const Network& net, const std::optional<Box>& box) {
    if (is_sequential(net)) return to_chain(net);
    SimplifyOptions opt;
    opt.input_box = box;
    return to_chain(simplify(net, opt));
}

PropertySpec load_property(const RunConfig& cfg, const Network& net) {
    bool from_file = !cfg.vnnlib_path.empty(), from_ball = !cfg.center_path.empty();
    if (from_file == from_ball) fail(ErrorKind::contract, "give exactly one of --vnnlib or --center/--eps");
    if (from_file) return read_vnnlib(cfg.vnnlib_path);
    if (cfg.eps < 0.0) fail(ErrorKind::contract, "--center needs a non-negative --eps");
    Vector center = parse_center(read_file(cfg.center_path));
    Box box = epsilon_ball(center, cfg.eps, parse_clip(cfg.clip));
    std::size_t label = cfg.label ? *cfg.label : static_cast<std::size_t>(argmax(forward(net, center)));
    return robustness_spec(std::move(box), net.output_width(), label);
}

int cmd_reduce(const RunConfig& cfg) {
    Network net = load_model(cfg.model_path);
    PropertySpec spec = load_property(cfg, net);
    if (cfg.out_path.empty()) fail(ErrorKind::contract, "reduce needs --out");
    AffineChain chain = as_chain(net, spec.box);
    ReduceOptions opt;
    opt.bounds = bound_options(cfg);
    ReductionResult res = reduce_network(chain, spec.box, opt);
    ExportOptions eo;
    eo.dtype = cfg.float32 ? OnnxFloat::float32 : OnnxFloat::float64;
    write_file(cfg.out_path, export_onnx(res.chain, eo));
    std::string report = cfg.report_path.empty() ? cfg.out_path + ".report.csv" : cfg.report_path;
    std::ofstream rep(report);
    if (!rep) fail(ErrorKind::contract, "cannot write '" + report + "'");
    res.report.write_csv(rep);
    std::cout << "relu_before,relu_after,ratio,seconds\n"
              << res.report.relu_before << ',' << res.report.relu_after << ',' << std::setprecision(4)
              << res.report.ratio() << ',' << res.report.seconds << '\n';
    return ok;
}

int cmd_gen(const RunConfig& cfg) {
    if (cfg.out_path.empty()) fail(ErrorKind::contract, "gen needs --out BASE");
    GeneratedNetwork g = generate_network(cfg.gen);
    ExportOptions eo;
    eo.dtype = cfg.float32 ? OnnxFloat::float32 : OnnxFloat::float64;
    write_file(cfg.out_path + ".onnx", export_onnx(g.chain, eo));
    std::ofstream side(cfg.out_path + ".stability.csv");
    g.write_sidecar(side);
    std::size_t label = static_cast<std::size_t>(argmax(forward(g.chain, g.box.center())));
    PropertySpec spec = robustness_spec(g.box, g.chain.output_width(), label);
    std::ofstream prop(cfg.out_path + ".vnnlib");
    prop << to_vnnlib(spec);
    std::cout << "wrote " << cfg.out_path << ".{onnx,stability.csv,vnnlib}; planted " << g.planted_count() << " of "
              << g.chain.relu_neurons() << " hidden neurons\n";
    return ok;
}

int cmd_stats(const RunConfig& cfg) {
    ImportResult r = load_onnx(cfg.model_path);
    const Network& net = r.net;
    Sink sink(cfg.out_path);
    auto& os = sink.os();
    os << "key,value\n";
    os << "layers," << net.size() << '\n';
    os << "linear_layers," << net.count(LayerKind::linear) << '\n';
    os << "relu_layers," << net.count(LayerKind::relu) << '\n';
    os << "sum_layers," << net.count(LayerKind::sum) << '\n';
    os << "relu_neurons," << net.relu_neurons() << '\n';
    os << "input_width," << net.input_width() << '\n';
    os << "output_width," << net.output_width() << '\n';
    os << "input_shape," << to_string(r.report.input_shape) << '\n';
    os << "sequential," << (is_sequential(net) ? "yes" : "no") << '\n';
    os << "maxpool_gadgets," << r.report.maxpool_gadgets << '\n';
    std::string ops;
    for (const auto& op : r.report.supported_ops) ops += (ops.empty() ? "" : " ") + op;
    os << "operators," << ops << '\n';
    return ok;
}

int cmd_bounds(const RunConfig& cfg) {
    Network net = load_model(cfg.model_path);
    PropertySpec spec = load_property(cfg, net);
    AffineChain chain = as_chain(net, spec.box);
    BoundsTable t = compute_bounds(chain, spec.box, bound_options(cfg));
    Sink sink(cfg.out_path);
    auto& os = sink.os();
    os << std::setprecision(17) << "layer,neuron,lower,upper\n";
    for (std::size_t k = 0; k < t.layers.size(); ++k) {
        std::string name = k + 1 == t.layers.size() ? "output" : std::to_string(k);
        for (std::size_t i = 0; i < t.layers[k].size(); ++i) {
            auto j = static_cast<Eigen::Index>(i);
            os << name << ',' << i << ',' << t.layers[k].lower[j] << ',' << t.layers[k].upper[j] << '\n';
        }
    }
    return ok;
}

int cmd_equiv(const RunConfig& cfg) {
    if (cfg.other_path.empty()) fail(ErrorKind::contract, "equiv needs --other");
    Network a = load_model(cfg.model_path);
    Network b = load_model(cfg.other_path);
    PropertySpec spec = load_property(cfg, a);
    if (a.input_width() != b.input_width() || a.output_width() != b.output_width())
        fail(ErrorKind::contract, "networks have different input or output widths");
    EquivReport r = sample_equivalence(a, b, spec.box, cfg.samples, cfg.seed);
    Sink sink(cfg.out_path);
    sink.os() << "samples,max_abs_diff,argmax_mismatches,within_tolerance\n"
              << r.samples << ',' << std::setprecision(6) << r.max_abs_diff << ',' << r.argmax_mismatches << ','
              << (r.within(cfg.tolerance) ? "yes" : "no") << '\n';
    return r.within(cfg.tolerance) ? ok : negative;
}

VerifyOptions verify_options(const RunConfig& cfg) {
    VerifyOptions o;
    o.bounds = bound_options(cfg);
    o.timeout_s = cfg.timeout_s;
    o.max_splits = cfg.max_splits;
    return o;
}

std::string property_name(const RunConfig& cfg) {
    const std::string& p = cfg.vnnlib_path.empty() ? cfg.center_path : cfg.vnnlib_path;
    return p.substr(p.find_last_of('/') == std::string::npos ? 0 : p.find_last_of('/') + 1);
}

int cmd_verify(const RunConfig& cfg) {
    Network net = load_model(cfg.model_path);
    PropertySpec spec = load_property(cfg, net);
    AffineChain chain = as_chain(net, spec.box);
    Verdict v = bab_verify(chain, spec, verify_options(cfg));
    Sink sink(cfg.out_path);
    sink.os() << "property,verdict,time_s,splits,bound\n"
              << property_name(cfg) << ',' << to_string(v.status) << ',' << std::setprecision(6) << v.wall_time << ','
              << v.splits_used << ',' << v.bound_achieved << '\n';
    return v.status == VerifyStatus::verified ? ok : negative;
}

int cmd_bench(const RunConfig& cfg) {
    Network net = load_model(cfg.model_path);
    PropertySpec spec = load_property(cfg, net);
    AffineChain original = as_chain(net, spec.box);
    AffineChain reduced;
    if (cfg.other_path.empty()) {
        ReduceOptions ro;
        ro.bounds = bound_options(cfg);
        reduced = reduce_network(original, spec.box, ro).chain;
    } else {
        reduced = as_chain(load_model(cfg.other_path), spec.box);
    }
    BenchResult r = bench_pair(original, reduced, spec, cfg.repeats, verify_options(cfg), cfg.tolerance);
    Sink sink(cfg.out_path);
    auto& os = sink.os();
    std::string prop = property_name(cfg);
    os << "property,net_variant,verdict,time_s,splits\n" << std::setprecision(6);
    os << prop << ",original," << to_string(r.original.verdict.status) << ',' << r.original.median_time << ','
       << r.original.verdict.splits_used << '\n';
    os << prop << ",reduced," << to_string(r.reduced.verdict.status) << ',' << r.reduced.median_time << ','
       << r.reduced.verdict.splits_used << '\n';
    std::cerr << "speedup " << r.speedup << (r.agree ? "" : " (verdicts disagree)") << '\n';
    if (!r.agree) fail(ErrorKind::internal, "bench: reduced network verdict is weaker than the original");
    return ok;
}

void property_flags(CLI::App* app, RunConfig& cfg) {
    app->add_option("--vnnlib", cfg.vnnlib_path, "VNNLIB property file")->check(CLI::ExistingFile);
    app->add_option("--center", cfg.center_path,
                    "center point: one value per line, or one comma-separated row (a header row is skipped)")
        ->check(CLI::ExistingFile);
    app->add_option("--eps", cfg.eps, "L-inf radius around --center")->check(CLI::NonNegativeNumber);
    app->add_option("--clip", cfg.clip, "clip the ball to lo,hi (e.g. 0,1)");
    app->add_option("--label", cfg.label, "true class for --center (default: prediction at the center)");
}

void bound_flags(CLI::App* app, RunConfig& cfg) {
    app->add_option("--method", cfg.method, "bound method")->check(CLI::IsMember({"interval", "crown"}));
    app->add_option("--alpha", cfg.alpha, "CROWN lower relaxation slope")->check(CLI::IsMember({"adaptive", "zero", "one"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"redkit: exact ReLU network reduction and verification harness"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto* reduce = app.add_subcommand("reduce", "simplify and reduce a model over an input box; writes ONNX + report");
    reduce->add_option("--model", cfg.model_path, "ONNX model")->required()->check(CLI::ExistingFile);
    property_flags(reduce, cfg);
    bound_flags(reduce, cfg);
    reduce->add_option("--out", cfg.out_path, "reduced ONNX path")->required();
    reduce->add_option("--report", cfg.report_path, "per-layer CSV (default: OUT.report.csv)");
    reduce->add_flag("--float32", cfg.float32, "store weights as float32 instead of float64");

    auto* gen = app.add_subcommand("gen", "generate a random network with planted stable neurons");
    gen->add_option("--layers", cfg.gen.layers, "hidden ReLU layers")->check(CLI::PositiveNumber);
    gen->add_option("--width", cfg.gen.width, "neurons per hidden layer")->check(CLI::PositiveNumber);
    gen->add_option("--input-dim", cfg.gen.input_dim)->check(CLI::PositiveNumber);
    gen->add_option("--output-dim", cfg.gen.output_dim)->check(CLI::PositiveNumber);
    gen->add_option("--stable-fraction", cfg.gen.stable_fraction)->check(CLI::Range(0.0, 1.0));
    gen->add_option("--margin", cfg.gen.margin)->check(CLI::PositiveNumber);
    gen->add_option("--seed", cfg.gen.seed);
    gen->add_option("--out", cfg.out_path, "output base path")->required();
    gen->add_flag("--float32", cfg.float32, "store weights as float32 instead of float64");

    auto* stats = app.add_subcommand("stats", "layer and neuron counts of a model");
    stats->add_option("--model", cfg.model_path)->required()->check(CLI::ExistingFile);
    stats->add_option("--out", cfg.out_path);

    auto* bounds = app.add_subcommand("bounds", "pre-activation bounds as CSV");
    bounds->add_option("--model", cfg.model_path)->required()->check(CLI::ExistingFile);
    property_flags(bounds, cfg);
    bound_flags(bounds, cfg);
    bounds->add_option("--out", cfg.out_path);

    auto* equiv = app.add_subcommand("equiv", "sample-based equivalence of two models on a box");
    equiv->add_option("--model", cfg.model_path)->required()->check(CLI::ExistingFile);
    equiv->add_option("--other", cfg.other_path)->required()->check(CLI::ExistingFile);
    property_flags(equiv, cfg);
    equiv->add_option("--samples", cfg.samples);
    equiv->add_option("--seed", cfg.seed);
    equiv->add_option("--tolerance", cfg.tolerance);
    equiv->add_option("--out", cfg.out_path);

    auto* verify = app.add_subcommand("verify", "bound-based verification with ReLU splitting");
    verify->add_option("--model", cfg.model_path)->required()->check(CLI::ExistingFile);
    property_flags(verify, cfg);
    bound_flags(verify, cfg);
    verify->add_option("--timeout", cfg.timeout_s)->check(CLI::PositiveNumber);
    verify->add_option("--max-splits", cfg.max_splits);
    verify->add_option("--out", cfg.out_path);

    auto* bench = app.add_subcommand("bench", "time verification on a model and its reduction");
    bench->add_option("--model", cfg.model_path)->required()->check(CLI::ExistingFile);
    bench->add_option("--reduced", cfg.other_path, "reduced model (default: reduce --model now)")->check(CLI::ExistingFile);
    property_flags(bench, cfg);
    bound_flags(bench, cfg);
    bench->add_option("--timeout", cfg.timeout_s)->check(CLI::PositiveNumber);
    bench->add_option("--max-splits", cfg.max_splits);
    bench->add_option("--repeats", cfg.repeats)->check(CLI::PositiveNumber);
    bench->add_option("--tolerance", cfg.tolerance);
    bench->add_option("--out", cfg.out_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? ok : usage;
    }

    try {
        if (*reduce) return cmd_reduce(cfg);
        if (*gen) return cmd_gen(cfg);
        if (*stats) return cmd_stats(cfg);
        if (*bounds) return cmd_bounds(cfg);
        if (*equiv) return cmd_equiv(cfg);
        if (*verify) return cmd_verify(cfg);
        if (*bench) return cmd_bench(cfg);
    } catch (const Error& e) {
        std::cerr << "redkit: " << to_string(e.kind()) << ": " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "redkit: internal error: " << e.what() << '\n';
        return internal;
    }
    return usage;
}
