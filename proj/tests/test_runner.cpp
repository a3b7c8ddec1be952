#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <sstream>

#include <unistd.h>

#include "hdoe/bench.hpp"
#include "hdoe/generators.hpp"
#include "hdoe/runner.hpp"
#include "support/oracles.hpp"

using namespace hdoe;
using namespace std::chrono_literals;

namespace {

Design small_design() {
    auto space = oracle::space_from_json(R"({"dimensions": [
        {"id": "a", "kind": "continuous", "lb": 0, "ub": 1},
        {"id": "b", "kind": "continuous", "lb": 0, "ub": 1, "nullable": true},
        {"id": "c", "kind": "categorical", "value_set": ["red", "blue"]}]})");
    return Design(space, 3,
                  {Cell::real(0.125), Cell::null(), Cell::level(1),
                   Cell::real(0.5), Cell::real(0.75), Cell::level(0),
                   Cell::real(0.875), Cell::real(0.25), Cell::level(1)});
}

std::string dataset_csv(const RunDataset& d) {
    std::ostringstream out;
    write_dataset_csv(d, out);
    return out.str();
}

/// Echoes the value of "a" back as "y".
const std::string kEchoA = R"(sed 's/.*"a":\([^,}]*\).*/{"y":\1}/')";

}  // namespace

TEST(PointJson, NullsLabelsAndParents) {
    const Design x = small_design();
    EXPECT_EQ(point_json(x, 0).dump(), R"({"a":0.125,"b":null,"c":"blue"})");
    EXPECT_EQ(point_json(x, 1).dump(), R"({"a":0.5,"b":0.75,"c":"red"})");

    auto space = std::make_shared<const FlatSpace>(builtin_space("simple"));
    GenConfig cfg;
    cfg.algorithm = parse_algorithm("fss-lhd");
    cfg.n = 20;
    cfg.seed = 1;
    const Design y = generate(space, cfg);
    for (std::size_t i = 0; i < y.rows(); ++i) {
        const auto j = point_json(y, i);
        if (y.at(i, 2).is_null()) EXPECT_TRUE(j["x3"].is_null());
        else EXPECT_EQ(j["x3"], 1);
    }
}

TEST(RunPoint, ParsesJsonObject) {
    const PointResult r = run_point(kEchoA, R"({"a":0.5,"b":null})", 0ms);
    EXPECT_EQ(r.status, PointStatus::ok);
    EXPECT_EQ(r.outputs, (nlohmann::json{{"y", 0.5}}));
}

TEST(RunPoint, StatusesForBadCommands) {
    EXPECT_EQ(run_point("echo '[1, 2]'", "{}", 0ms).status, PointStatus::malformed);
    EXPECT_EQ(run_point("echo not json", "{}", 0ms).status, PointStatus::malformed);
    EXPECT_EQ(run_point("echo '{\"y\":1}'; exit 3", "{}", 0ms).status, PointStatus::failed);
    EXPECT_EQ(run_point("/nonexistent/program", "{}", 0ms).status, PointStatus::failed);
    const PointResult ignored_input = run_point("echo '{\"y\":1}'", std::string(1 << 20, 'x'), 0ms);
    EXPECT_EQ(ignored_input.status, PointStatus::ok);
}

TEST(RunPoint, TimeoutKillsTheProcessGroup) {
    const auto start = std::chrono::steady_clock::now();
    const PointResult r = run_point("sleep 5 | cat; echo '{}'", "{}", 200ms);
    EXPECT_EQ(r.status, PointStatus::timeout);
    EXPECT_LT(std::chrono::steady_clock::now() - start, 3s);
}

TEST(RunExperiment, PerPointStatusesInRowOrder) {
    RunnerConfig cfg;
    cfg.command = R"(read line; case "$line" in *0.125*) sleep 5;; *0.875*) echo oops;; esac; echo "$line" | )" + kEchoA;
    cfg.timeout = 300ms;
    const RunDataset d = run_experiment(small_design(), cfg);
    ASSERT_EQ(d.results.size(), 3u);
    EXPECT_EQ(d.results[0].status, PointStatus::timeout);
    EXPECT_EQ(d.results[1].status, PointStatus::ok);
    EXPECT_EQ(d.results[2].status, PointStatus::malformed);
    EXPECT_EQ(dataset_csv(d), "a,b,c,y,status\n"
                              "0.125,,blue,,timeout\n"
                              "0.5,0.75,red,0.5,ok\n"
                              "0.875,0.25,blue,,malformed\n");
}

TEST(RunExperiment, ParallelismDoesNotChangeTheDataset) {
    auto space = std::make_shared<const FlatSpace>(builtin_space("modest"));
    GenConfig g;
    g.algorithm = parse_algorithm("fss-lhd-vp");
    g.n = 16;
    g.seed = 3;
    const Design x = generate(space, g);
    RunnerConfig cfg;
    cfg.command = R"(sed 's/.*"x1":\([^,}]*\).*/{"y":\1,"z":"t"}/')";
    const std::string serial = dataset_csv(run_experiment(x, cfg));
    cfg.parallelism = 4;
    EXPECT_EQ(dataset_csv(run_experiment(x, cfg)), serial);
}

TEST(RunExperiment, RetriesCountAttempts) {
    const auto dir = std::filesystem::temp_directory_path() / ("hdoe_retry_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    const std::string counter = (dir / "count").string();
    auto space = oracle::space_from_json(R"({"dimensions": [{"id": "a", "kind": "continuous", "lb": 0, "ub": 1}]})");
    const Design x(space, 1, {Cell::real(0.5)});
    RunnerConfig cfg;
    cfg.command = "n=$(cat " + counter + " 2>/dev/null || echo 0); n=$((n+1)); echo $n > " + counter +
                  "; [ $n -ge 3 ] && echo '{\"ok\":1}' || exit 1";

    cfg.retries = 1;
    PointResult r = run_experiment(x, cfg).results[0];
    EXPECT_EQ(r.status, PointStatus::failed);
    EXPECT_EQ(r.attempts, 2u);

    std::filesystem::remove(counter);
    cfg.retries = 5;
    r = run_experiment(x, cfg).results[0];
    EXPECT_EQ(r.status, PointStatus::ok);
    EXPECT_EQ(r.attempts, 3u);
    std::filesystem::remove_all(dir);
}
