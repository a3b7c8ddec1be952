#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hdoe/bench.hpp"
#include "hdoe/design.hpp"
#include "hdoe/error.hpp"
#include "hdoe/generators.hpp"
#include "hdoe/metrics.hpp"
#include "hdoe/runner.hpp"
#include "hdoe/space_document.hpp"

namespace {

/// Bad flag values or missing mandatory flags detected after parsing.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::uint64_t seed = 0;
    CLI::Option* seed_opt = nullptr;
    bool quiet = false;

    std::uint64_t require_seed(const std::string& sub) const {
        if (seed_opt->count() == 0) throw UsageError(sub + ": --seed is required");
        return seed;
    }
    void info(const std::string& msg) const {
        if (!quiet) std::cerr << msg << '\n';
    }
};

hdoe::AlgorithmId algorithm_arg(const std::string& text) {
    try {
        return hdoe::parse_algorithm(text);
    } catch (const hdoe::Error& e) {
        throw UsageError(e.what());
    }
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::string number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::optional<double> try_metric(auto&& f) {
    try {
        return f();
    } catch (const hdoe::UndefinedMetric&) {
        return std::nullopt;
    }
}

struct GenerateArgs {
    std::string space;
    std::string algo;
    std::size_t n = 0;
    std::optional<std::size_t> maxpro_iters;
    std::optional<std::size_t> tsfd_iters;
    bool force_coverage = false;
};

void add_generate_flags(CLI::App* sub, GenerateArgs& a) {
    sub->add_option("--space", a.space, "Space document path or built-in name")->required();
    sub->add_option("--algo", a.algo, "Algorithm id, e.g. fss-lhd-vp or tt-lhd-mp")->required();
    sub->add_option("--n", a.n, "Number of design points")->required()->check(CLI::PositiveNumber);
    sub->add_option("--maxpro-iters", a.maxpro_iters, "MaxPro annealing iterations (enables -MP)");
    sub->add_option("--tsfd-iters", a.tsfd_iters, "Swap budget per TSFD call");
    sub->add_flag("--force-coverage", a.force_coverage, "Give every full-sub-space at least one point");
}

hdoe::Design generate_design(const GenerateArgs& a, std::uint64_t seed) {
    auto space = hdoe::load_space(a.space);
    hdoe::GenConfig cfg;
    cfg.algorithm = algorithm_arg(a.algo);
    if (a.maxpro_iters) cfg.algorithm.maxpro = true;
    cfg.n = a.n;
    cfg.seed = seed;
    cfg.force_coverage = a.force_coverage;
    cfg.maxpro_iterations = a.maxpro_iters;
    cfg.tsfd_iterations = a.tsfd_iters;
    return hdoe::generate(space, cfg);
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Space-filling designs over optional and hierarchical parameter spaces", "hdoe"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    Globals g;
    g.seed_opt = app.add_option("--seed", g.seed, "Random seed (required by randomized subcommands)");
    app.add_flag("-q,--quiet", g.quiet, "Suppress informational messages");

    // generate
    GenerateArgs gen;
    std::string gen_out;
    auto* generate = app.add_subcommand("generate", "Generate a design and write it as CSV");
    add_generate_flags(generate, gen);
    generate->add_option("--out", gen_out, "Output CSV; provenance goes to <out>.json")->required();

    // measure
    std::string m_space, m_design, m_format = "csv";
    double m_p = 2.0;
    bool m_force = false;
    auto* measure = app.add_subcommand("measure", "Evaluate the design metrics of a CSV design");
    measure->add_option("--space", m_space, "Space document path or built-in name")->required();
    measure->add_option("--design", m_design, "Design CSV")->required();
    measure->add_option("--format", m_format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    measure->add_option("--p", m_p, "Exponent of the interpoint distance")->check(CLI::Range(1.0, 1e9));
    measure->add_flag("--force-coverage", m_force, "Targets use forced coverage");

    // enumerate-fss
    std::string e_space;
    bool e_alloc = false;
    auto* enumerate = app.add_subcommand("enumerate-fss", "List the full-sub-spaces of a space");
    enumerate->add_option("--space", e_space, "Space document path or built-in name")->required();
    enumerate->add_flag("--allocation", e_alloc, "Append the allocation fraction of each full-sub-space");

    // run
    GenerateArgs run_gen;
    std::string r_cmd, r_out;
    std::size_t r_parallel = 1, r_retries = 0;
    double r_timeout = 0.0;
    auto* run = app.add_subcommand("run", "Generate a design and evaluate a command on every point");
    add_generate_flags(run, run_gen);
    run->add_option("--cmd", r_cmd, "Shell command reading one JSON point on stdin")->required();
    run->add_option("--parallelism", r_parallel, "Concurrent commands")->check(CLI::PositiveNumber);
    run->add_option("--timeout", r_timeout, "Seconds per point (0 = no limit)")->check(CLI::NonNegativeNumber);
    run->add_option("--retries", r_retries, "Extra attempts for failed points");
    run->add_option("--out", r_out, "Dataset CSV")->required();

    // bench
    std::string b_spaces = "basic,simple,modest,complex", b_algos, b_out;
    std::vector<std::size_t> b_sizes;
    std::size_t b_reps = 10, b_threads = 0;
    std::optional<std::size_t> b_maxpro, b_tsfd;
    auto* bench = app.add_subcommand("bench", "Benchmark algorithms on built-in or custom spaces");
    bench->add_option("--spaces", b_spaces, "Comma-separated space names or paths");
    bench->add_option("--reps", b_reps, "Replications per cell")->check(CLI::PositiveNumber);
    bench->add_option("--algos", b_algos, "Comma-separated algorithm ids (default: all twelve)");
    bench->add_option("--sizes", b_sizes, "Design sizes used for every space (default: per-space sizes)")
        ->delimiter(',');
    bench->add_option("--threads", b_threads, "Worker threads (0 = hardware concurrency)");
    bench->add_option("--maxpro-iters", b_maxpro, "MaxPro annealing iterations for -MP variants");
    bench->add_option("--tsfd-iters", b_tsfd, "Swap budget per TSFD call");
    bench->add_option("--out-dir", b_out, "Report directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (generate->parsed()) {
        const auto x = generate_design(gen, g.require_seed("generate"));
        hdoe::write_csv(x, std::filesystem::path(gen_out));
        std::ofstream side(gen_out + ".json", std::ios::binary);
        if (!side) throw hdoe::Error("cannot write " + gen_out + ".json");
        side << hdoe::provenance_json(x) << '\n';
        g.info("wrote " + std::to_string(x.rows()) + " points to " + gen_out);
    } else if (measure->parsed()) {
        auto space = hdoe::load_space(m_space);
        const auto x = hdoe::read_csv(std::filesystem::path(m_design), space);
        const auto targets = hdoe::allocate_counts(hdoe::fss_allocation(*space), x.rows(), m_force).counts;
        const auto idis = try_metric([&] { return hdoe::min_interpoint_distance(x, m_p); });
        const auto adis = try_metric([&] { return hdoe::avg_min_projection_distance(x); });
        const auto sd = hdoe::star_discrepancy_null(x);
        const double ocov = hdoe::opt_coverage(x);
        const double wdsr = hdoe::weighted_fss_discrepancy(x, targets);
        const auto mp = try_metric([&] { return hdoe::maxpro(x); });
        const std::size_t ad = hdoe::allocation_difference(x, targets);
        if (m_format == "json") {
            nlohmann::ordered_json j;
            j["ocov"] = ocov;
            j["idis"] = idis ? nlohmann::ordered_json(*idis) : nlohmann::ordered_json(nullptr);
            j["adis"] = adis ? nlohmann::ordered_json(*adis) : nlohmann::ordered_json(nullptr);
            j["sdsr"] = sd.value;
            j["sdsr_estimate"] = sd.estimate;
            j["wdsr"] = wdsr;
            if (!mp) j["maxpro"] = nullptr;
            else j["maxpro"] = std::isinf(*mp) ? nlohmann::ordered_json("inf") : nlohmann::ordered_json(*mp);
            j["alloc_diff"] = ad;
            std::cout << j.dump(2) << '\n';
        } else {
            std::cout << "ocov,idis,adis,sdsr,sdsr_estimate,wdsr,maxpro,alloc_diff\n"
                      << number(ocov) << ',' << (idis ? number(*idis) : "") << ',' << (adis ? number(*adis) : "")
                      << ',' << number(sd.value) << ',' << (sd.estimate ? "true" : "false") << ',' << number(wdsr)
                      << ',' << (mp ? number(*mp) : "") << ',' << ad << '\n';
        }
    } else if (enumerate->parsed()) {
        auto space = hdoe::load_space(e_space);
        const auto fractions = hdoe::fss_allocation(*space);
        for (const auto& [fss, frac] : fractions) {
            std::cout << '{' << hdoe::to_string(fss, *space) << '}';
            if (e_alloc) std::cout << '\t' << number(frac);
            std::cout << '\n';
        }
    } else if (run->parsed()) {
        const auto x = generate_design(run_gen, g.require_seed("run"));
        hdoe::RunnerConfig cfg;
        cfg.command = r_cmd;
        cfg.parallelism = r_parallel;
        cfg.timeout = std::chrono::milliseconds(static_cast<long long>(std::llround(r_timeout * 1000.0)));
        cfg.retries = r_retries;
        const auto data = hdoe::run_experiment(x, cfg);
        hdoe::write_dataset_csv(data, std::filesystem::path(r_out));
        std::size_t ok = 0;
        for (const auto& r : data.results) ok += r.status == hdoe::PointStatus::ok;
        g.info(std::to_string(ok) + " of " + std::to_string(data.results.size()) + " points ok; wrote " + r_out);
    } else if (bench->parsed()) {
        hdoe::BenchConfig cfg;
        cfg.base_seed = g.require_seed("bench");
        cfg.spaces = split_list(b_spaces);
        if (cfg.spaces.empty()) throw UsageError("bench: --spaces is empty");
        if (!b_algos.empty()) {
            cfg.algorithms.clear();
            for (const auto& id : split_list(b_algos)) cfg.algorithms.push_back(algorithm_arg(id));
        }
        for (const auto& s : cfg.spaces) {
            if (!b_sizes.empty()) cfg.sizes[s] = b_sizes;
            else if (!hdoe::is_builtin_space(s)) throw UsageError("bench: --sizes is required for space '" + s + "'");
        }
        cfg.replications = b_reps;
        cfg.threads = b_threads;
        cfg.maxpro_iterations = b_maxpro;
        cfg.tsfd_iterations = b_tsfd;
        const auto report = hdoe::run_benchmark(cfg);
        hdoe::emit_report(report, b_out);
        for (const auto& w : report.warnings) g.info("warning: " + w);
        g.info("wrote rankings.csv, normalized.csv and raw.csv to " + b_out);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\nRun with --help for usage.\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
