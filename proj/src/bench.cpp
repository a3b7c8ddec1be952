#include "hdoe/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "hdoe/error.hpp"
#include "hdoe/space_document.hpp"

namespace hdoe {

namespace {

std::uint64_t fnv1a(std::uint64_t h, std::string_view bytes) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::optional<double> try_metric(auto&& f) {
    try {
        return f();
    } catch (const UndefinedMetric&) {
        return std::nullopt;
    }
}

std::optional<double> record_value(const BenchRecord& r, RankedMetric m) {
    switch (m) {
        case RankedMetric::idis: return r.idis;
        case RankedMetric::adis: return r.adis;
        case RankedMetric::sdsr: return r.sdsr;
        case RankedMetric::wdsr: return r.wdsr;
    }
    return std::nullopt;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, const std::string& space, std::size_t n,
                          const AlgorithmId& algorithm, std::size_t replication) {
    AlgorithmId seed_owner = algorithm;
    seed_owner.maxpro = false;
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = fnv1a(h, space);
    h = fnv1a(h, "/" + std::to_string(n) + "/" + seed_owner.id() + "/" + std::to_string(replication));
    return splitmix64(base ^ h);
}

std::string to_string(RankedMetric m) {
    switch (m) {
        case RankedMetric::idis: return "idis";
        case RankedMetric::adis: return "adis";
        case RankedMetric::sdsr: return "sdsr";
        case RankedMetric::wdsr: return "wdsr";
    }
    return "?";
}

bool higher_is_better(RankedMetric m) { return m == RankedMetric::idis || m == RankedMetric::adis; }

std::vector<double> rank_values(const std::vector<double>& values, bool higher_better) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return higher_better ? values[a] > values[b] : values[a] < values[b];
    });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

BenchReport run_benchmark(const BenchConfig& cfg) {
    if (cfg.algorithms.empty()) throw Error("benchmark needs at least one algorithm");
    if (cfg.replications == 0) throw Error("benchmark needs at least one replication");

    BenchReport report;
    report.algorithms = cfg.algorithms;

    struct Task {
        std::shared_ptr<const FlatSpace> space;
        std::map<Fss, std::size_t> targets;
        BenchRecord record;
    };
    std::vector<Task> tasks;
    for (const auto& name : cfg.spaces) {
        auto space = load_space(name);
        auto sizes_it = cfg.sizes.find(name);
        const std::vector<std::size_t> sizes =
            sizes_it != cfg.sizes.end() ? sizes_it->second : default_sizes(name);
        for (std::size_t n : sizes) {
            report.cells.push_back({name, n});
            const auto targets = allocate_counts(fss_allocation(*space), n, false).counts;
            for (const auto& algo : cfg.algorithms)
                for (std::size_t r = 0; r < cfg.replications; ++r) {
                    BenchRecord rec;
                    rec.space = name;
                    rec.n = n;
                    rec.algorithm = algo;
                    rec.replication = r;
                    rec.seed = derive_seed(cfg.base_seed, name, n, algo, r);
                    tasks.push_back({space, targets, std::move(rec)});
                }
        }
    }

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= tasks.size()) return;
            try {
                Task& task = tasks[t];
                BenchRecord& rec = task.record;
                GenConfig gen;
                gen.algorithm = rec.algorithm;
                gen.n = rec.n;
                gen.seed = rec.seed;
                gen.tsfd_iterations = cfg.tsfd_iterations;
                gen.maxpro_iterations = cfg.maxpro_iterations;
                const Design x = generate(task.space, gen);
                rec.ocov = opt_coverage(x);
                rec.idis = try_metric([&] { return min_interpoint_distance(x); });
                rec.adis = try_metric([&] { return avg_min_projection_distance(x); });
                const auto sd = star_discrepancy_null(x);
                rec.sdsr = sd.value;
                rec.sdsr_estimate = sd.estimate;
                rec.wdsr = weighted_fss_discrepancy(x, task.targets);
                rec.maxpro = maxpro(x);
                rec.alloc_diff = allocation_difference(x, task.targets);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next = tasks.size();
            }
        }
    };
    std::size_t threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, std::max<std::size_t>(1, tasks.size()));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    report.raw.reserve(tasks.size());
    for (auto& task : tasks) report.raw.push_back(std::move(task.record));

    const std::size_t na = cfg.algorithms.size();
    const std::size_t reps = cfg.replications;
    for (std::size_t c = 0; c < report.cells.size(); ++c) {
        const BenchCell& cell = report.cells[c];
        const BenchRecord* base = &report.raw[c * na * reps];
        std::vector<double> alloc(na, 0.0);
        for (std::size_t a = 0; a < na; ++a) {
            for (std::size_t r = 0; r < reps; ++r) alloc[a] += static_cast<double>(base[a * reps + r].alloc_diff);
            alloc[a] /= static_cast<double>(reps);
        }
        report.alloc_means[cell] = alloc;

        for (RankedMetric m : kRankedMetrics) {
            std::vector<std::optional<double>> means(na);
            bool complete = true;
            for (std::size_t a = 0; a < na; ++a) {
                double sum = 0.0;
                bool defined = true;
                for (std::size_t r = 0; r < reps; ++r) {
                    const auto v = record_value(base[a * reps + r], m);
                    if (!v) {
                        defined = false;
                        break;
                    }
                    sum += *v;
                }
                if (defined) means[a] = sum / static_cast<double>(reps);
                else complete = false;
            }
            report.means[cell][m] = means;
            if (!complete) {
                report.warnings.push_back(to_string(m) + " undefined for some design in " + cell.space + " n=" +
                                          std::to_string(cell.n) + "; cell left out of its ranking");
                continue;
            }
            std::vector<double> values;
            for (const auto& v : means) values.push_back(*v);
            report.cell_ranks[cell][m] = rank_values(values, higher_is_better(m));
        }
    }

    for (RankedMetric m : kRankedMetrics) {
        std::vector<double> avg(na, 0.0);
        std::size_t used = 0;
        for (const auto& cell : report.cells) {
            auto it = report.cell_ranks[cell].find(m);
            if (it == report.cell_ranks[cell].end()) continue;
            for (std::size_t a = 0; a < na; ++a) avg[a] += it->second[a];
            ++used;
        }
        if (used > 0)
            for (double& v : avg) v /= static_cast<double>(used);
        else
            std::fill(avg.begin(), avg.end(), std::numeric_limits<double>::quiet_NaN());
        report.rankings[m] = avg;
    }
    return report;
}

std::string rankings_csv(const BenchReport& report) {
    std::ostringstream out;
    out << "algorithm";
    for (RankedMetric m : kRankedMetrics) out << ',' << to_string(m);
    out << '\n';
    for (std::size_t a = 0; a < report.algorithms.size(); ++a) {
        out << report.algorithms[a].label();
        for (RankedMetric m : kRankedMetrics) {
            const double v = report.rankings.at(m)[a];
            out << ',' << (std::isnan(v) ? std::string() : fmt("%.4f", v));
        }
        out << '\n';
    }
    return out.str();
}

std::string normalized_csv(const BenchReport& report) {
    std::ostringstream out;
    out << "space,n,algorithm,metric,mean,normalized\n";
    auto emit = [&](const BenchCell& cell, const std::string& metric, const std::vector<std::optional<double>>& means,
                    bool higher_better) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto& v : means)
            if (v) {
                lo = std::min(lo, *v);
                hi = std::max(hi, *v);
            }
        for (std::size_t a = 0; a < means.size(); ++a) {
            out << cell.space << ',' << cell.n << ',' << report.algorithms[a].label() << ',' << metric << ',';
            if (!means[a]) {
                out << ",\n";
                continue;
            }
            const double v = *means[a];
            double norm = 1.0;
            if (hi > lo) norm = higher_better ? (v - lo) / (hi - lo) : (hi - v) / (hi - lo);
            out << fmt("%.17g", v) << ',' << fmt("%.6f", norm) << '\n';
        }
    };
    for (const auto& cell : report.cells) {
        for (RankedMetric m : kRankedMetrics) emit(cell, to_string(m), report.means.at(cell).at(m), higher_is_better(m));
        const auto& alloc = report.alloc_means.at(cell);
        emit(cell, "alloc_diff", std::vector<std::optional<double>>(alloc.begin(), alloc.end()), false);
    }
    return out.str();
}

std::string raw_csv(const BenchReport& report) {
    std::ostringstream out;
    out << "space,n,algorithm,replication,seed,ocov,idis,adis,sdsr,sdsr_estimate,wdsr,maxpro,alloc_diff\n";
    auto opt = [](const std::optional<double>& v) { return v ? fmt("%.17g", *v) : std::string(); };
    for (const auto& r : report.raw) {
        out << r.space << ',' << r.n << ',' << r.algorithm.label() << ',' << r.replication << ',' << r.seed << ','
            << fmt("%.17g", r.ocov) << ',' << opt(r.idis) << ',' << opt(r.adis) << ',' << fmt("%.17g", r.sdsr) << ','
            << (r.sdsr_estimate ? "true" : "false") << ',' << fmt("%.17g", r.wdsr) << ',' << fmt("%.17g", r.maxpro)
            << ',' << r.alloc_diff << '\n';
    }
    return out.str();
}

void emit_report(const BenchReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto write = [&](const char* name, const std::string& body) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw Error("cannot write " + (dir / name).string());
        f << body;
    };
    write("rankings.csv", rankings_csv(report));
    write("normalized.csv", normalized_csv(report));
    write("raw.csv", raw_csv(report));
}

}  // namespace hdoe
