#include "schedopt/protocol.hpp"

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <fcntl.h>
#include <iostream>
#include <poll.h>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

namespace schedopt {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json configuration_to_json(const SearchSpace& space, const Configuration& cfg) {
    ordered_json out = ordered_json::object();
    for (std::size_t i = 0; i < space.dimension(); ++i) {
        const auto& name = space.parameter(i).name();
        std::visit([&](const auto& v) { out[name] = v; }, cfg.values[i]);
    }
    return out;
}

Configuration configuration_from_json(const SearchSpace& space, const json& object) {
    if (!object.is_object()) throw ValidationError("configuration must be an object");
    Configuration cfg;
    for (const auto& p : space.parameters()) {
        auto it = object.find(p.name());
        if (it == object.end()) throw ValidationError("configuration is missing '" + p.name() + "'");
        const json& v = *it;
        std::optional<Value> value;
        switch (p.kind()) {
            case ParameterKind::real:
            case ParameterKind::ordinal:
                if (v.is_number()) value = v.get<double>();
                break;
            case ParameterKind::integer:
                if (v.is_number_integer()) value = v.get<std::int64_t>();
                break;
            case ParameterKind::categorical:
                if (v.is_string()) value = v.get<std::string>();
                break;
            case ParameterKind::permutation:
                if (v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number_integer(); }))
                    value = v.get<Permutation>();
                break;
        }
        if (!value || !p.contains(*value))
            throw ValidationError("configuration value for '" + p.name() + "' is not in its domain: " + v.dump());
        cfg.values.push_back(std::move(*value));
    }
    return cfg;
}

std::string evaluate_request(const SearchSpace& space, const Configuration& cfg) {
    ordered_json msg;
    msg["type"] = "evaluate";
    msg["configuration"] = configuration_to_json(space, cfg);
    return msg.dump();
}

std::string terminate_request() { return ordered_json{{"type", "terminate"}}.dump(); }

EvaluationResult parse_response(std::string_view line) {
    json msg = json::parse(line.begin(), line.end(), nullptr, /*allow_exceptions=*/false);
    if (msg.is_discarded()) throw ProtocolError("malformed response: " + std::string(line));
    if (!msg.is_object()) throw ProtocolError("response is not an object: " + std::string(line));
    auto feasible = msg.find("feasible");
    if (feasible == msg.end() || !feasible->is_boolean())
        throw ProtocolError("response needs a boolean 'feasible': " + std::string(line));
    EvaluationResult result;
    result.feasible = feasible->get<bool>();
    auto objective = msg.find("objective");
    if (result.feasible) {
        if (objective == msg.end() || !objective->is_number())
            throw ProtocolError("feasible response needs a numeric 'objective': " + std::string(line));
        result.objective = objective->get<double>();
    }
    return result;
}

namespace {

void close_fd(int& fd) {
    if (fd >= 0) ::close(fd);
    fd = -1;
}

}  // namespace

ExternalEvaluator::ExternalEvaluator(SearchSpace space, std::vector<std::string> command, double timeout_seconds)
    : space_(std::move(space)), command_(std::move(command)), timeout_(timeout_seconds) {
    if (command_.empty()) throw ValidationError("evaluator command is empty");
    if (!(timeout_ > 0.0)) throw ValidationError("evaluator timeout must be positive");
    // A child that dies mid-write must surface as an error, not kill us.
    std::signal(SIGPIPE, SIG_IGN);
    spawn();
}

ExternalEvaluator::~ExternalEvaluator() {
    try {
        shutdown();
    } catch (...) {
    }
}

void ExternalEvaluator::spawn() {
    int in[2], out[2], status[2];
    if (::pipe2(in, O_CLOEXEC) != 0 || ::pipe2(out, O_CLOEXEC) != 0 || ::pipe2(status, O_CLOEXEC) != 0)
        throw Error(std::string("pipe: ") + std::strerror(errno));

    std::vector<char*> argv;
    for (auto& arg : command_) argv.push_back(arg.data());
    argv.push_back(nullptr);

    const pid_t pid = ::fork();
    if (pid < 0) throw Error(std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
        ::dup2(in[0], STDIN_FILENO);
        ::dup2(out[1], STDOUT_FILENO);
        ::execvp(argv[0], argv.data());
        const int err = errno;
        [[maybe_unused]] auto n = ::write(status[1], &err, sizeof err);
        ::_exit(127);
    }
    ::close(in[0]);
    ::close(out[1]);
    ::close(status[1]);
    int err = 0;
    ssize_t n;
    do n = ::read(status[0], &err, sizeof err);
    while (n < 0 && errno == EINTR);
    ::close(status[0]);
    if (n == static_cast<ssize_t>(sizeof err)) {
        ::close(in[1]);
        ::close(out[0]);
        ::waitpid(pid, nullptr, 0);
        throw ProtocolError("cannot start evaluator '" + command_.front() + "': " + std::strerror(err));
    }
    pid_ = pid;
    to_child_ = in[1];
    from_child_ = out[0];
    buffer_.clear();
}

void ExternalEvaluator::kill_child() {
    close_fd(to_child_);
    close_fd(from_child_);
    if (pid_ > 0) {
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, nullptr, 0);
    }
    pid_ = -1;
}

void ExternalEvaluator::send(const std::string& line) {
    const std::string data = line + '\n';
    std::size_t done = 0;
    while (done < data.size()) {
        const ssize_t n = ::write(to_child_, data.data() + done, data.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError(std::string("evaluator closed its input: ") + std::strerror(errno));
        }
        done += static_cast<std::size_t>(n);
    }
}

std::optional<std::string> ExternalEvaluator::receive() {
    using clock = std::chrono::steady_clock;
    const auto deadline = clock::now() + std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(timeout_));
    for (;;) {
        if (auto pos = buffer_.find('\n'); pos != std::string::npos) {
            std::string line = buffer_.substr(0, pos);
            buffer_.erase(0, pos + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return line;
        }
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
        if (left <= 0) return std::nullopt;
        pollfd pfd{from_child_, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left, 1 << 30)));
        if (ready < 0) {
            if (errno == EINTR) continue;
            throw Error(std::string("poll: ") + std::strerror(errno));
        }
        if (ready == 0) continue;
        char chunk[4096];
        const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError(std::string("reading from evaluator: ") + std::strerror(errno));
        }
        if (n == 0) throw ProtocolError("evaluator exited before answering");
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

EvaluationResult ExternalEvaluator::evaluate(const Configuration& cfg) {
    if (pid_ < 0) spawn();
    send(evaluate_request(space_, cfg));
    auto line = receive();
    if (!line) {
        ++timeouts_;
        std::cerr << "schedopt: warning: evaluation timed out after " << timeout_
                  << " s; recorded as infeasible and restarting the evaluator\n";
        kill_child();
        spawn();
        return {std::nullopt, false};
    }
    return parse_response(*line);
}

void ExternalEvaluator::shutdown() {
    if (pid_ < 0) return;
    try {
        send(terminate_request());
    } catch (const ProtocolError&) {
        // The child is already gone; reaping below still applies.
    }
    close_fd(to_child_);
    // Give the child a moment to exit on its own before forcing it.
    for (int i = 0; i < 200; ++i) {
        const pid_t r = ::waitpid(pid_, nullptr, WNOHANG);
        if (r == pid_ || r < 0) {
            pid_ = -1;
            close_fd(from_child_);
            return;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    kill_child();
}

}  // namespace schedopt
