#include "hdoe/runner.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "hdoe/error.hpp"

namespace hdoe {

namespace {

using Clock = std::chrono::steady_clock;

class Fd {
public:
    Fd() = default;
    explicit Fd(int fd) : fd_(fd) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    ~Fd() { reset(); }
    int get() const { return fd_; }
    void reset() {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }

private:
    int fd_ = -1;
};

[[noreturn]] void sys_fail(const char* what) { throw Error(std::string(what) + ": " + std::strerror(errno)); }

int remaining_ms(Clock::time_point deadline, bool unlimited) {
    if (unlimited) return -1;
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    return left > 0 ? static_cast<int>(left) : 0;
}

std::string cell_text(const nlohmann::json& v) {
    if (v.is_null()) return {};
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        return buf;
    }
    return v.dump();
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

}  // namespace

std::string to_string(PointStatus s) {
    switch (s) {
        case PointStatus::ok: return "ok";
        case PointStatus::timeout: return "timeout";
        case PointStatus::failed: return "failed";
        case PointStatus::malformed: return "malformed";
    }
    return "?";
}

nlohmann::ordered_json point_json(const Design& x, std::size_t row) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    const auto& space = x.space();
    for (std::size_t k = 0; k < x.cols(); ++k) {
        const FlatDimension& dim = space.dim(k);
        const Cell& c = x.at(row, k);
        if (c.is_null()) {
            obj[dim.id] = nullptr;
        } else if (dim.kind == DimKind::continuous) {
            obj[dim.id] = c.value();
        } else if (dim.kind == DimKind::categorical) {
            obj[dim.id] = dim.labels[c.level_index()];
        } else if (dim.kind == DimKind::discrete) {
            obj[dim.id] = dim.values[c.level_index()];
        } else {
            obj[dim.id] = static_cast<long long>(dim.values[c.level_index()]);
        }
    }
    return obj;
}

PointResult run_point(const std::string& command, const std::string& input, std::chrono::milliseconds timeout) {
    PointResult result;
    int in_pair[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, in_pair) != 0) sys_fail("socketpair");
    Fd in_parent(in_pair[0]), in_child(in_pair[1]);
    int out_pipe[2];
    if (::pipe2(out_pipe, O_CLOEXEC) != 0) sys_fail("pipe");
    Fd out_parent(out_pipe[0]), out_child(out_pipe[1]);

    const char* argv[] = {"sh", "-c", command.c_str(), nullptr};
    const pid_t pid = ::fork();
    if (pid < 0) sys_fail("fork");
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(in_child.get(), STDIN_FILENO);
        ::dup2(out_child.get(), STDOUT_FILENO);
        const int devnull = ::open("/dev/null", O_WRONLY);
        if (devnull >= 0) ::dup2(devnull, STDERR_FILENO);
        ::execv("/bin/sh", const_cast<char* const*>(argv));
        ::_exit(127);
    }
    ::setpgid(pid, pid);
    in_child.reset();
    out_child.reset();

    const bool unlimited = timeout.count() <= 0;
    const auto deadline = Clock::now() + timeout;

    // The payload is one small JSON line; a command that ignores stdin just
    // closes the socket and the send fails quietly.
    const std::string payload = input + "\n";
    std::size_t sent = 0;
    while (sent < payload.size()) {
        const ssize_t w = ::send(in_parent.get(), payload.data() + sent, payload.size() - sent, MSG_NOSIGNAL);
        if (w < 0) {
            if (errno == EINTR) continue;
            break;
        }
        sent += static_cast<std::size_t>(w);
    }
    ::shutdown(in_parent.get(), SHUT_WR);

    std::string out;
    bool timed_out = false;
    char buf[4096];
    for (;;) {
        pollfd pfd{out_parent.get(), POLLIN, 0};
        const int pr = ::poll(&pfd, 1, remaining_ms(deadline, unlimited));
        if (pr < 0) {
            if (errno == EINTR) continue;
            sys_fail("poll");
        }
        if (pr == 0) {
            timed_out = true;
            break;
        }
        const ssize_t r = ::read(out_parent.get(), buf, sizeof buf);
        if (r < 0) {
            if (errno == EINTR) continue;
            sys_fail("read");
        }
        if (r == 0) break;
        out.append(buf, static_cast<std::size_t>(r));
    }

    int status = 0;
    if (!timed_out) {
        // stdout is closed; give the process the rest of the budget to exit.
        for (;;) {
            const pid_t w = ::waitpid(pid, &status, WNOHANG);
            if (w == pid) break;
            if (w < 0 && errno != EINTR) sys_fail("waitpid");
            if (!unlimited && Clock::now() >= deadline) {
                timed_out = true;
                break;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(1));
        }
    }
    if (timed_out) {
        ::kill(-pid, SIGKILL);
        ::kill(pid, SIGKILL);
        while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
        }
        result.status = PointStatus::timeout;
        result.message = "timed out after " + std::to_string(timeout.count()) + " ms";
        return result;
    }

    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        result.status = PointStatus::failed;
        result.message = WIFEXITED(status) ? "exit status " + std::to_string(WEXITSTATUS(status))
                                           : "killed by signal " + std::to_string(WTERMSIG(status));
        return result;
    }
    auto parsed = nlohmann::json::parse(out, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
        result.status = PointStatus::malformed;
        result.message = "stdout is not a JSON object";
        return result;
    }
    result.status = PointStatus::ok;
    result.outputs = std::move(parsed);
    return result;
}

RunDataset run_experiment(const Design& x, const RunnerConfig& cfg) {
    if (cfg.command.empty()) throw Error("runner command is empty");
    RunDataset data{x, std::vector<PointResult>(x.rows())};
    std::vector<std::string> inputs;
    for (std::size_t i = 0; i < x.rows(); ++i) inputs.push_back(point_json(x, i).dump());

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= inputs.size()) return;
            try {
                PointResult r;
                std::size_t attempts = 0;
                do {
                    r = run_point(cfg.command, inputs[i], cfg.timeout);
                    ++attempts;
                } while (r.status != PointStatus::ok && attempts <= cfg.retries);
                r.attempts = attempts;
                data.results[i] = std::move(r);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = inputs.size();
            }
        }
    };
    const std::size_t threads = std::max<std::size_t>(1, std::min(cfg.parallelism, inputs.size()));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);
    return data;
}

void write_dataset_csv(const RunDataset& data, std::ostream& out) {
    const Design& x = data.design;
    std::set<std::string> keys;
    for (const auto& r : data.results)
        for (const auto& item : r.outputs.items()) keys.insert(item.key());
    for (std::size_t k = 0; k < x.cols(); ++k) out << (k ? "," : "") << csv_field(x.space().dim(k).id);
    for (const auto& key : keys) out << ',' << csv_field(key);
    out << ",status\n";
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t k = 0; k < x.cols(); ++k)
            out << (k ? "," : "") << csv_field(format_cell(x.at(i, k), x.space().dim(k)));
        const auto& r = data.results[i];
        for (const auto& key : keys) {
            out << ',';
            auto it = r.outputs.find(key);
            if (it != r.outputs.end()) out << csv_field(cell_text(*it));
        }
        out << ',' << to_string(r.status) << '\n';
    }
}

void write_dataset_csv(const RunDataset& data, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    write_dataset_csv(data, f);
}

}  // namespace hdoe
