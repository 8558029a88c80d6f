#include "fmci/cli.hpp"

#include "fmci/ci.hpp"
#include "fmci/csv.hpp"
#include "fmci/errors.hpp"
#include "fmci/mc.hpp"
#include "fmci/specfun.hpp"
#include "fmci/sketch.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <memory>
#include <ostream>
#include <string_view>

namespace fmci::cli {
namespace {

using Json = nlohmann::ordered_json;

constexpr std::size_t kReadChunk = 1 << 16;
constexpr std::size_t kBatchTokens = 1 << 16;

// Exit with a specific code and message.
struct Failure {
    int code;
    std::string message;
};

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Failure{kUsage, "--alpha must lie in (0,1)"};
    }
}

sketch::SketchParams make_params(unsigned r0, unsigned c0, unsigned z0) {
    sketch::SketchParams p{r0, c0, z0};
    try {
        sketch::validate(p);
    } catch (const ConfigError& e) {
        throw Failure{kUsage, e.what()};
    }
    return p;
}

// Splits newline-delimited tokens out of a stream and hands them over in
// batches. An unterminated final line is a token; a trailing newline does
// not start another one.
class TokenReader {
public:
    template <class Sink>
    std::uint64_t read(std::istream& in, Sink&& sink) {
        std::vector<char> buf(kReadChunk);
        std::uint64_t count = 0;
        while (in) {
            in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
            const auto got = static_cast<std::size_t>(in.gcount());
            std::size_t start = 0;
            for (std::size_t i = 0; i < got; ++i) {
                if (buf[i] != '\n') continue;
                pending_.append(buf.data() + start, i - start);
                batch_.push_back(std::move(pending_));
                pending_.clear();
                ++count;
                start = i + 1;
                if (batch_.size() >= kBatchTokens) flush(sink);
            }
            pending_.append(buf.data() + start, got - start);
        }
        if (in.bad()) throw Failure{kIo, "read error"};
        if (!pending_.empty()) {
            batch_.push_back(std::move(pending_));
            pending_.clear();
            ++count;
        }
        flush(sink);
        return count;
    }

private:
    template <class Sink>
    void flush(Sink&& sink) {
        if (batch_.empty()) return;
        std::vector<std::string_view> views(batch_.begin(), batch_.end());
        sink(std::span<const std::string_view>(views));
        batch_.clear();
    }

    std::string pending_;
    std::vector<std::string> batch_;
};

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Failure{kIo, "cannot open " + path};
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    if (f.bad()) throw Failure{kIo, "read error on " + path};
    return bytes;
}

sketch::Sketch load_sketch(const std::string& path) {
    const auto bytes = read_file(path);
    try {
        return sketch::deserialize(bytes);
    } catch (const FormatError& e) {
        throw Failure{kIo, path + ": " + e.what()};
    }
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Failure{kIo, "cannot write " + path};
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    f.flush();
    if (!f) throw Failure{kIo, "write error on " + path};
}

// Output sink: a file, or `fallback` when the path is empty or "-".
class Output {
public:
    Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
            if (!*file_) throw Failure{kIo, "cannot write " + path};
            stream_ = file_.get();
        }
    }
    std::ostream& stream() { return *stream_; }
    void finish() {
        stream_->flush();
        if (!*stream_) throw Failure{kIo, "write error"};
    }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
};

struct BuildArgs {
    unsigned r0 = 4, c0 = 4, z0 = 4;
    std::string out;
    std::vector<std::string> inputs;
};

int cmd_build(const BuildArgs& a, std::istream& in, std::ostream& err) {
    const auto params = make_params(a.r0, a.c0, a.z0);
    sketch::Sketch sk(params);
    auto sink = [&](std::span<const std::string_view> tokens) {
        sk.merge_from(sketch::build_parallel(params, tokens));
    };
    std::uint64_t tokens = 0;
    if (a.inputs.empty()) {
        tokens = TokenReader().read(in, sink);
    } else {
        for (const auto& path : a.inputs) {
            if (path == "-") {
                tokens += TokenReader().read(in, sink);
                continue;
            }
            std::ifstream f(path, std::ios::binary);
            if (!f) throw Failure{kIo, "cannot open " + path};
            tokens += TokenReader().read(f, sink);
        }
    }
    write_file(a.out, sketch::serialize(sk));
    err << "tokens: " << tokens << '\n';
    if (sk.warnings() > 0) err << "warning: " << sk.warnings() << " hash capacity events\n";
    return kOk;
}

int cmd_merge(const std::string& out, const std::vector<std::string>& inputs) {
    sketch::Sketch acc = load_sketch(inputs.front());
    for (std::size_t i = 1; i < inputs.size(); ++i) {
        try {
            acc.merge_from(load_sketch(inputs[i]));
        } catch (const MergeError& e) {
            throw Failure{kIncompatible, inputs[i] + ": " + e.what()};
        }
    }
    write_file(out, sketch::serialize(acc));
    return kOk;
}

ci::IntervalSpec make_spec(const std::string& mode, double alpha, double split) {
    if (mode == "upper") return ci::OneSidedUpper{alpha};
    if (mode == "lower") return ci::OneSidedLower{alpha};
    if (mode == "two-sided") {
        if (!(split > 0.0 && split < 1.0)) throw Failure{kUsage, "--split must lie in (0,1)"};
        return ci::TwoSided{alpha, split};
    }
    return ci::TwoSidedMinLen{alpha};
}

int cmd_query(const std::string& path, double alpha, const std::string& mode, double split,
              std::ostream& out) {
    check_alpha(alpha);
    const auto spec = make_spec(mode, alpha, split);
    const auto sk = load_sketch(path);
    const auto r = ci::interval(sk.query(), sk.params(), spec);
    Json j;
    j["lower"] = number_or_null(r.interval.lower);
    j["upper"] = number_or_null(r.interval.upper);
    j["alpha"] = alpha;
    j["mean_y"] = r.mean_y;
    j["h_d"] = r.plan.h.h_d;
    j["h_u"] = r.plan.h.h_u;
    j["p0"] = r.p0;
    j["a0"] = r.a0;
    out << j.dump(2) << '\n';
    return kOk;
}

int cmd_plan(double alpha, unsigned r0, unsigned c0, bool minlen, std::ostream& out) {
    check_alpha(alpha);
    const auto params = make_params(r0, c0, 0);
    const double a0 = static_cast<double>(params.registers());
    const ci::IntervalSpec spec =
        minlen ? ci::IntervalSpec(ci::TwoSidedMinLen{alpha}) : ci::IntervalSpec(ci::TwoSided{alpha});
    const auto plan = ci::plan_interval(spec, a0);
    Json j;
    j["alpha"] = alpha;
    j["a0"] = a0;
    j["h_d"] = plan.h.h_d;
    j["h_u"] = plan.h.h_u;
    j["p_plus"] = plan.p.p_plus;
    j["p_minus"] = plan.p.p_minus;
    out << j.dump(2) << '\n';
    return kOk;
}

struct ValidateArgs {
    std::string suite;
    std::uint64_t seed = 1;
    std::uint64_t samples = 0;  // 0: suite default
    std::string csv;
    unsigned r0 = 4, c0 = 4, z0 = 4;
    std::uint64_t f0 = 500;
    double alpha = 0.95;
    std::string mode = "upper";
    bool serial = false;
};

int validate_pvalues(const ValidateArgs& a, std::ostream& out) {
    mc::McConfig cfg;
    cfg.params = make_params(a.r0, a.c0, a.z0);
    cfg.f0 = a.f0;
    cfg.alpha = a.alpha;
    cfg.samples = a.samples == 0 ? 10000 : a.samples;
    cfg.seed = a.seed;
    cfg.exec = a.serial ? mc::Exec::serial : mc::Exec::parallel;
    const auto r = mc::simulate_pvalues(cfg);
    csv::write_row(out, {"side", "r0", "c0", "z0", "f0", "alpha", "x", "samples", "seed", "mean",
                         "stddev", "ci3sigma_lo", "ci3sigma_hi", "analytic_value", "max",
                         "dominated", "boundary_hits"});
    auto row = [&](std::string_view side, double x, const mc::McReport& m) {
        csv::write_row(out, {csv::field(side), csv::field(std::uint64_t{a.r0}),
                             csv::field(std::uint64_t{a.c0}), csv::field(std::uint64_t{a.z0}),
                             csv::field(a.f0), csv::field(a.alpha), csv::field(x),
                             csv::field(m.samples), csv::field(m.seed), csv::field(m.mean),
                             csv::field(m.stddev), csv::field(m.ci3sigma_lo),
                             csv::field(m.ci3sigma_hi), csv::field(m.analytic_value),
                             csv::field(m.max), csv::field(m.dominated),
                             csv::field(m.boundary_hits)});
    };
    row("plus", r.x_d, r.plus);
    row("minus", r.x_u, r.minus);
    return r.plus.dominated && r.minus.dominated ? kOk : kValidationFailed;
}

int validate_coverage(const ValidateArgs& a, std::ostream& out) {
    mc::McConfig cfg;
    cfg.params = make_params(a.r0, a.c0, a.z0);
    cfg.f0 = a.f0;
    cfg.alpha = a.alpha;
    cfg.samples = a.samples == 0 ? 2000 : a.samples;
    cfg.seed = a.seed;
    cfg.exec = a.serial ? mc::Exec::serial : mc::Exec::parallel;
    const auto m = mc::coverage_experiment(cfg, make_spec(a.mode, a.alpha, 0.5));
    csv::write_row(out, {"mode", "r0", "c0", "z0", "f0", "alpha", "samples", "seed", "mean",
                         "stddev", "ci3sigma_lo", "ci3sigma_hi", "analytic_value"});
    csv::write_row(out, {csv::field(a.mode), csv::field(std::uint64_t{a.r0}),
                         csv::field(std::uint64_t{a.c0}), csv::field(std::uint64_t{a.z0}),
                         csv::field(a.f0), csv::field(a.alpha), csv::field(m.samples),
                         csv::field(m.seed), csv::field(m.mean), csv::field(m.stddev),
                         csv::field(m.ci3sigma_lo), csv::field(m.ci3sigma_hi),
                         csv::field(m.analytic_value)});
    return m.ci3sigma_hi >= a.alpha ? kOk : kValidationFailed;
}

int validate_gumbel(const ValidateArgs& a, std::ostream& out) {
    const std::vector<std::uint64_t> f0_grid = {100, 10000, 1000000};
    std::vector<double> s_grid;
    for (int k = 0; k <= 4; ++k) s_grid.push_back(0.1 * k * specfun::ln2);
    const auto rows = mc::gumbel_mgf_check(f0_grid, s_grid, a.samples == 0 ? 10000 : a.samples,
                                           a.seed, a.serial ? mc::Exec::serial : mc::Exec::parallel);
    csv::write_row(out, {"f0", "s", "samples", "seed", "mean", "stddev", "ci3sigma_lo",
                         "ci3sigma_hi", "analytic_value", "limit"});
    bool ok = true;
    for (const auto& r : rows) {
        csv::write_row(out, {csv::field(r.f0), csv::field(r.s), csv::field(r.report.samples),
                             csv::field(r.report.seed), csv::field(r.report.mean),
                             csv::field(r.report.stddev), csv::field(r.report.ci3sigma_lo),
                             csv::field(r.report.ci3sigma_hi),
                             csv::field(r.report.analytic_value), csv::field(r.limit)});
        ok = ok && r.report.ci3sigma_lo <= r.limit && r.report.analytic_value <= r.limit;
    }
    return ok ? kOk : kValidationFailed;
}

int cmd_validate(const ValidateArgs& a, std::ostream& out) {
    check_alpha(a.alpha);
    Output sink(a.csv, out);
    int code = kOk;
    if (a.suite == "pvalues") {
        code = validate_pvalues(a, sink.stream());
    } else if (a.suite == "coverage") {
        code = validate_coverage(a, sink.stream());
    } else {
        code = validate_gumbel(a, sink.stream());
    }
    sink.finish();
    return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
    CLI::App app{"Distinct-count sketches with exact confidence intervals", "fmci"};
    app.require_subcommand(1);
    const std::vector<std::string> modes = {"upper", "lower", "two-sided", "two-sided-minlen"};

    BuildArgs build;
    auto* build_cmd = app.add_subcommand("build", "Build a sketch from newline-delimited tokens");
    build_cmd->add_option("--r0", build.r0, "log2 of the number of rows")->capture_default_str();
    build_cmd->add_option("--c0", build.c0, "number of columns")->capture_default_str();
    build_cmd->add_option("--z0", build.z0, "mantissa bits per register")->capture_default_str();
    build_cmd->add_option("--out", build.out, "output sketch file")->required();
    build_cmd->add_option("inputs", build.inputs, "input files ('-' or none: standard input)");

    std::string merge_out;
    std::vector<std::string> merge_inputs;
    auto* merge_cmd = app.add_subcommand("merge", "Merge sketch files");
    merge_cmd->add_option("--out", merge_out, "output sketch file")->required();
    merge_cmd->add_option("inputs", merge_inputs, "sketch files")->required()->expected(2, -1);

    std::string query_file;
    double query_alpha = 0.95;
    double query_split = 0.5;
    std::string query_mode = "two-sided";
    auto* query_cmd = app.add_subcommand("query", "Confidence interval for F0 from a sketch");
    query_cmd->add_option("--alpha", query_alpha, "confidence level")->capture_default_str();
    query_cmd->add_option("--mode", query_mode, "interval shape")
        ->check(CLI::IsMember(modes))
        ->capture_default_str();
    query_cmd->add_option("--split", query_split, "share of 1-alpha on the lower side (two-sided)")
        ->capture_default_str();
    query_cmd->add_option("file", query_file, "sketch file")->required();

    double plan_alpha = 0.95;
    unsigned plan_r0 = 4, plan_c0 = 4;
    bool plan_minlen = false;
    auto* plan_cmd = app.add_subcommand("plan", "Half-widths and tail probabilities");
    plan_cmd->add_option("--alpha", plan_alpha, "confidence level")->capture_default_str();
    plan_cmd->add_option("--r0", plan_r0, "log2 of the number of rows")->capture_default_str();
    plan_cmd->add_option("--c0", plan_c0, "number of columns")->capture_default_str();
    plan_cmd->add_flag("--minlen", plan_minlen, "minimize h_d + h_u instead of an equal split");

    ValidateArgs val;
    auto* val_cmd = app.add_subcommand("validate", "Monte Carlo validation suites");
    val_cmd->add_option("--suite", val.suite, "pvalues, coverage or gumbel")
        ->required()
        ->check(CLI::IsMember({"pvalues", "coverage", "gumbel"}));
    val_cmd->add_option("--seed", val.seed, "RNG seed")->capture_default_str();
    val_cmd->add_option("--samples", val.samples,
                        "sample count (default 10000; 2000 for coverage)");
    val_cmd->add_option("--csv", val.csv, "CSV output file ('-' or none: standard output)");
    val_cmd->add_option("--r0", val.r0)->capture_default_str();
    val_cmd->add_option("--c0", val.c0)->capture_default_str();
    val_cmd->add_option("--z0", val.z0)->capture_default_str();
    val_cmd->add_option("--f0", val.f0, "true distinct count")->capture_default_str();
    val_cmd->add_option("--alpha", val.alpha, "confidence level")->capture_default_str();
    val_cmd->add_option("--mode", val.mode, "interval shape (coverage)")
        ->check(CLI::IsMember(modes))
        ->capture_default_str();
    val_cmd->add_flag("--serial", val.serial, "run the serial reference path");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (build_cmd->parsed()) return cmd_build(build, in, err);
        if (merge_cmd->parsed()) return cmd_merge(merge_out, merge_inputs);
        if (query_cmd->parsed()) return cmd_query(query_file, query_alpha, query_mode, query_split, out);
        if (plan_cmd->parsed()) return cmd_plan(plan_alpha, plan_r0, plan_c0, plan_minlen, out);
        return cmd_validate(val, out);
    } catch (const Failure& f) {
        err << "fmci: " << f.message << '\n';
        return f.code;
    } catch (const std::exception& e) {
        err << "fmci: " << e.what() << '\n';
        return kUsage;
    }
}

}  // namespace fmci::cli
