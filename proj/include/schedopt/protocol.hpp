#pragma once

#include <string>
#include <string_view>
#include <sys/types.h>
#include <vector>

#include <json.hpp>

#include "schedopt/engine.hpp"
#include "schedopt/space.hpp"

namespace schedopt {

/// Default per-evaluation timeout, in seconds.
inline constexpr double kDefaultEvaluationTimeout = 600.0;

/// {<name>: <value>, ...} in parameter order; permutations become integer
/// arrays, categoricals their label, integers JSON integers.
nlohmann::ordered_json configuration_to_json(const SearchSpace& space, const Configuration& cfg);
/// Inverse of configuration_to_json. Throws ValidationError on missing names
/// or out-of-domain values.
Configuration configuration_from_json(const SearchSpace& space, const nlohmann::json& object);

/// {"type":"evaluate","configuration":{...}} as one line, without the newline.
std::string evaluate_request(const SearchSpace& space, const Configuration& cfg);
/// {"type":"terminate"}
std::string terminate_request();

/// Decodes {"objective": <number>, "feasible": <bool>}. The objective may be
/// absent (and is ignored) when feasible is false. Throws ProtocolError on
/// anything else.
EvaluationResult parse_response(std::string_view line);

/// Evaluates configurations in a long-lived child process speaking the
/// line-oriented protocol over its standard input and output.
///
/// The child is spawned once. If an evaluation exceeds the timeout the child
/// is killed, the evaluation is reported infeasible with a warning on stderr,
/// and a fresh child is started for the next request. A malformed response
/// or a child that exits early raises ProtocolError. The terminate request is
/// always sent when the evaluator is shut down or destroyed.
class ExternalEvaluator : public Evaluator {
public:
    ExternalEvaluator(SearchSpace space, std::vector<std::string> command,
                      double timeout_seconds = kDefaultEvaluationTimeout);
    ~ExternalEvaluator() override;

    ExternalEvaluator(const ExternalEvaluator&) = delete;
    ExternalEvaluator& operator=(const ExternalEvaluator&) = delete;

    EvaluationResult evaluate(const Configuration& cfg) override;

    /// Sends terminate and reaps the child. Idempotent.
    void shutdown();

    std::size_t timeouts() const { return timeouts_; }

private:
    void spawn();
    void kill_child();
    void send(const std::string& line);
    /// A full line, or nullopt on timeout. Throws ProtocolError on EOF.
    std::optional<std::string> receive();

    SearchSpace space_;
    std::vector<std::string> command_;
    double timeout_;
    pid_t pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
    std::size_t timeouts_ = 0;
};

}  // namespace schedopt
