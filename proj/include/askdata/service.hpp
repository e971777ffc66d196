#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "askdata/common.hpp"
#include "askdata/pipeline.hpp"
#include "askdata/sql/parser.hpp"

namespace askdata {

struct TurnRecord {
    /// What the user typed.
    std::string question;
    /// What the pipeline answered (a resumed question after a clarification).
    std::string asked;
    nlohmann::json outcome;
    std::int64_t timestamp_ns = 0;
};

struct PendingClarification {
    ClarificationRequest request;
    std::string original_question;

    nlohmann::json to_json() const;
    static PendingClarification from_json(const nlohmann::json& j);
};

struct Session {
    std::string session_id;
    std::string user_id;
    std::string domain_id;
    std::vector<TurnRecord> turns;
    std::optional<ExecutionResult> cached_result;
    std::optional<PendingClarification> pending_clarification;
    SessionContext context;

    nlohmann::json to_json() const;
};

struct FeedbackResult {
    bool accepted = false;
    /// False when the same correction was already stored.
    bool inserted = false;
    std::string demonstration_id;
    std::string question;
    std::vector<sql::SqlDiagnostic> diagnostics;

    nlohmann::json to_json() const;
};

struct ServiceOptions {
    /// Directory of per-session append-only logs; empty disables them.
    std::string log_dir;
    /// Memory file rewritten after each accepted correction; empty skips it.
    std::string memory_path;
};

/// Sessions over one pipeline. Sessions run concurrently; a session takes
/// one turn at a time and rejects a concurrent one with Busy.
class Service {
public:
    Service(std::shared_ptr<Pipeline> pipeline, ServiceOptions options = {},
            std::shared_ptr<const Clock> clock = steady_clock());

    /// Throws UnknownDomain.
    std::string create_session(const std::string& user_id, const std::string& domain_id);

    /// A pending clarification is consumed by this message: a parameter
    /// value from the acceptable set (or a formula) resumes the original
    /// question; anything else is asked as a new question. Throws NotFound,
    /// Forbidden (another user's session) or Busy.
    TurnOutcome post_message(const std::string& session_id, const std::string& user_id, const std::string& question,
                             std::size_t* turn_index = nullptr);

    /// Stores the corrected SQL under the turn's completed question when it
    /// validates clean. Throws NotFound, Forbidden, Busy, or InvalidArgument
    /// for a turn index out of range.
    FeedbackResult post_feedback(const std::string& session_id, const std::string& user_id, std::size_t turn_index,
                                 const std::string& corrected_sql);

    /// Throws NotFound.
    PipelineTrace get_trace(const std::string& trace_id) const;
    /// Snapshot; throws NotFound.
    Session session(const std::string& session_id) const;
    std::size_t session_count() const;
    Pipeline& pipeline() { return *pipeline_; }

    /// Replays every log of the log directory. Returns sessions restored.
    std::size_t recover();

private:
    struct Slot {
        std::mutex turn_mutex;
        Session session;
    };

    std::shared_ptr<Slot> slot(const std::string& session_id) const;
    void append_log(const std::string& session_id, const nlohmann::json& event) const;

    std::shared_ptr<Pipeline> pipeline_;
    ServiceOptions options_;
    std::shared_ptr<const Clock> clock_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Slot>> sessions_;
    std::map<std::string, PipelineTrace> traces_;
    std::uint64_t created_ = 0;
    mutable std::mutex log_mutex_;
};

}  // namespace askdata
