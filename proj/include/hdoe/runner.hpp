#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hdoe/design.hpp"

namespace hdoe {

/// Outcome of evaluating one design point.
enum class PointStatus { ok, timeout, failed, malformed };
std::string to_string(PointStatus s);

struct RunnerConfig {
    /// Shell command run through /bin/sh -c once per point.
    std::string command;
    std::size_t parallelism = 1;
    /// Per-attempt wall clock limit; zero disables it.
    std::chrono::milliseconds timeout{0};
    /// Extra attempts for points that did not finish with status ok.
    std::size_t retries = 0;
};

struct PointResult {
    PointStatus status = PointStatus::failed;
    /// The JSON object printed by the command (empty unless status is ok).
    nlohmann::json outputs = nlohmann::json::object();
    std::string message;
    std::size_t attempts = 0;
};

/// JSON object for one design row: dimension id to value, null for Null.
/// Composite dimensions map to 1 and variants to their branch index.
nlohmann::ordered_json point_json(const Design& x, std::size_t row);

/// Runs `command` once with `input` on stdin and interprets its stdout.
PointResult run_point(const std::string& command, const std::string& input,
                      std::chrono::milliseconds timeout);

struct RunDataset {
    Design design;
    /// One result per design row, in row order.
    std::vector<PointResult> results;
};

/// Evaluates every design row with cfg.command, `parallelism` points at a time.
RunDataset run_experiment(const Design& x, const RunnerConfig& cfg);

/// Input columns, then the sorted union of output keys, then the status.
void write_dataset_csv(const RunDataset& data, std::ostream& out);
void write_dataset_csv(const RunDataset& data, const std::filesystem::path& path);

}  // namespace hdoe
