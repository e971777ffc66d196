#include "askdata/service.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "askdata/augment.hpp"
#include "askdata/error.hpp"
#include "askdata/sql/lineage.hpp"

namespace askdata {

namespace {

nlohmann::json context_to_json(const SessionContext& c) {
    nlohmann::json j{{"trace_scope", c.trace_scope},
                     {"turn", c.turn},
                     {"history", c.history},
                     {"last_question", c.last_question},
                     {"knowledge", c.knowledge},
                     {"resolved_parameters", c.resolved_parameters}};
    j["last_sql"] = c.last_sql ? nlohmann::json(*c.last_sql) : nlohmann::json(nullptr);
    j["last_result"] = c.last_result ? c.last_result->to_json() : nlohmann::json(nullptr);
    return j;
}

SessionContext context_from_json(const nlohmann::json& j) {
    SessionContext c;
    c.trace_scope = j.at("trace_scope").get<std::string>();
    c.turn = j.at("turn").get<std::size_t>();
    c.history = j.at("history").get<std::vector<std::string>>();
    c.last_question = j.at("last_question").get<std::string>();
    c.knowledge = j.at("knowledge").get<std::map<std::string, std::string>>();
    c.resolved_parameters = j.at("resolved_parameters").get<std::map<std::string, std::string>>();
    if (!j.at("last_sql").is_null()) c.last_sql = j["last_sql"].get<std::string>();
    if (!j.at("last_result").is_null()) c.last_result = ExecutionResult::from_json(j["last_result"]);
    return c;
}

std::optional<std::string> acceptable_value(const ClarificationRequest& request, const std::string& answer) {
    std::string a = trim(answer);
    for (const auto& v : request.acceptable_values) {
        if (iequals(v, a)) return v;
    }
    return std::nullopt;
}

}  // namespace

nlohmann::json PendingClarification::to_json() const {
    return {{"request", request.to_json()}, {"original_question", original_question}};
}

PendingClarification PendingClarification::from_json(const nlohmann::json& j) {
    PendingClarification p;
    const auto& r = j.at("request");
    p.request.kind = r.at("kind").get<std::string>();
    p.request.subject = r.at("subject").get<std::string>();
    p.request.acceptable_values = r.at("acceptable_values").get<std::vector<std::string>>();
    p.request.message = r.at("message").get<std::string>();
    p.original_question = j.at("original_question").get<std::string>();
    return p;
}

nlohmann::json Session::to_json() const {
    nlohmann::json turns_json = nlohmann::json::array();
    for (const auto& t : turns) {
        turns_json.push_back(
            {{"question", t.question}, {"asked", t.asked}, {"outcome", t.outcome}, {"timestamp_ns", t.timestamp_ns}});
    }
    nlohmann::json j{{"session_id", session_id}, {"user_id", user_id}, {"domain_id", domain_id}, {"turns", turns_json}};
    j["cached_result"] = cached_result ? cached_result->to_json() : nlohmann::json(nullptr);
    j["pending_clarification"] = pending_clarification ? pending_clarification->to_json() : nlohmann::json(nullptr);
    return j;
}

nlohmann::json FeedbackResult::to_json() const {
    nlohmann::json j{{"accepted", accepted}, {"question", question}};
    if (accepted) {
        j["demonstration_id"] = demonstration_id;
        j["inserted"] = inserted;
    }
    j["diagnostics"] = nlohmann::json::array();
    for (const auto& d : diagnostics) {
        j["diagnostics"].push_back({{"kind", std::string(sql::to_string(d.kind))}, {"message", d.message()}});
    }
    return j;
}

Service::Service(std::shared_ptr<Pipeline> pipeline, ServiceOptions options, std::shared_ptr<const Clock> clock)
    : pipeline_(std::move(pipeline)), options_(std::move(options)), clock_(std::move(clock)) {
    if (!options_.log_dir.empty()) std::filesystem::create_directories(options_.log_dir);
}

std::shared_ptr<Service::Slot> Service::slot(const std::string& session_id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw Error(ErrorKind::NotFound, "session " + session_id);
    return it->second;
}

void Service::append_log(const std::string& session_id, const nlohmann::json& event) const {
    if (options_.log_dir.empty()) return;
    std::lock_guard lock(log_mutex_);
    auto path = std::filesystem::path(options_.log_dir) / (session_id + ".jsonl");
    std::ofstream out(path, std::ios::app);
    if (!out) throw Error(ErrorKind::Io, "cannot append to " + path.string());
    out << event.dump() << '\n';
}

std::string Service::create_session(const std::string& user_id, const std::string& domain_id) {
    if (!pipeline_->catalog().has_domain(domain_id)) throw Error(ErrorKind::UnknownDomain, domain_id);
    if (trim(user_id).empty()) throw Error(ErrorKind::InvalidArgument, "user id is empty");
    auto s = std::make_shared<Slot>();
    {
        std::lock_guard lock(mutex_);
        std::string id;
        do {
            id = hex_digest(user_id + "\x1f" + domain_id + "\x1f" + std::to_string(++created_));
        } while (sessions_.count(id));
        s->session.session_id = id;
        s->session.user_id = user_id;
        s->session.domain_id = domain_id;
        s->session.context.trace_scope = id;
        sessions_[id] = s;
    }
    append_log(s->session.session_id,
               {{"event", "create"}, {"session_id", s->session.session_id}, {"user_id", user_id},
                {"domain_id", domain_id}});
    return s->session.session_id;
}

TurnOutcome Service::post_message(const std::string& session_id, const std::string& user_id,
                                  const std::string& question, std::size_t* turn_index) {
    auto s = slot(session_id);
    std::unique_lock turn_lock(s->turn_mutex, std::try_to_lock);
    if (!turn_lock.owns_lock()) throw Error(ErrorKind::Busy, "session " + session_id + " has a turn in flight");
    Session& session = s->session;
    if (session.user_id != user_id) throw Error(ErrorKind::Forbidden, "session belongs to another user");
    if (trim(question).empty()) throw Error(ErrorKind::InvalidArgument, "question is empty");

    std::string asked = question;
    std::string original = question;
    if (session.pending_clarification) {
        PendingClarification pending = *session.pending_clarification;
        session.pending_clarification.reset();
        const auto& request = pending.request;
        if (request.kind == "parameter") {
            if (auto value = acceptable_value(request, question)) {
                session.context.resolved_parameters[request.subject] = *value;
                original = pending.original_question;
                asked = original + " (" + request.subject + ": " + *value + ")";
            }
        } else if (request.kind == "formula") {
            session.context.knowledge[request.subject] = trim(question);
            original = asked = pending.original_question;
        }
    }

    TurnOutcome outcome = pipeline_->run(session.user_id, session.domain_id, session.context, asked);
    TurnRecord record{question, asked, outcome.to_json(), clock_->now().count()};
    session.turns.push_back(record);
    if (turn_index) *turn_index = session.turns.size() - 1;
    if (outcome.kind == OutcomeKind::Answer && outcome.result) session.cached_result = outcome.result;
    if (outcome.kind == OutcomeKind::Clarification && outcome.clarification) {
        session.pending_clarification = PendingClarification{*outcome.clarification, original};
    }
    {
        std::lock_guard lock(mutex_);
        traces_[outcome.trace.trace_id] = outcome.trace;
    }
    nlohmann::json event{{"event", "turn"},
                         {"turn_index", session.turns.size() - 1},
                         {"question", record.question},
                         {"asked", record.asked},
                         {"timestamp_ns", record.timestamp_ns},
                         {"outcome", record.outcome},
                         {"trace", outcome.trace.to_json()},
                         {"context", context_to_json(session.context)}};
    event["pending_clarification"] =
        session.pending_clarification ? session.pending_clarification->to_json() : nlohmann::json(nullptr);
    append_log(session_id, event);
    return outcome;
}

FeedbackResult Service::post_feedback(const std::string& session_id, const std::string& user_id,
                                      std::size_t turn_index, const std::string& corrected_sql) {
    auto s = slot(session_id);
    std::unique_lock turn_lock(s->turn_mutex, std::try_to_lock);
    if (!turn_lock.owns_lock()) throw Error(ErrorKind::Busy, "session " + session_id + " has a turn in flight");
    const Session& session = s->session;
    if (session.user_id != user_id) throw Error(ErrorKind::Forbidden, "session belongs to another user");
    if (turn_index >= session.turns.size()) {
        throw Error(ErrorKind::InvalidArgument, "no turn " + std::to_string(turn_index));
    }
    const auto& outcome = session.turns[turn_index].outcome;
    FeedbackResult result;
    result.question = outcome.value("completed_question", "");
    if (result.question.empty()) result.question = session.turns[turn_index].asked;

    const Catalog& catalog = pipeline_->catalog();
    result.diagnostics = sql::validate(corrected_sql, catalog.domain_dialect(session.domain_id), catalog);
    if (result.diagnostics.empty()) {
        MemoryStore& store = pipeline_->store();
        auto demo = prepare_demonstration({result.question, corrected_sql, session.domain_id}, Origin::Feedback,
                                          catalog);
        std::size_t before = store.size();
        result.demonstration_id = store.upsert(std::move(demo));
        result.inserted = store.size() > before;
        result.accepted = true;
        if (!options_.memory_path.empty()) store.save(options_.memory_path);
    }
    append_log(session_id, {{"event", "feedback"},
                            {"turn_index", turn_index},
                            {"corrected_sql", corrected_sql},
                            {"submitted_by", user_id},
                            {"result", result.to_json()}});
    return result;
}

PipelineTrace Service::get_trace(const std::string& trace_id) const {
    std::lock_guard lock(mutex_);
    auto it = traces_.find(trace_id);
    if (it == traces_.end()) throw Error(ErrorKind::NotFound, "trace " + trace_id);
    return it->second;
}

Session Service::session(const std::string& session_id) const {
    auto s = slot(session_id);
    std::lock_guard turn_lock(s->turn_mutex);
    return s->session;
}

std::size_t Service::session_count() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

std::size_t Service::recover() {
    if (options_.log_dir.empty() || !std::filesystem::exists(options_.log_dir)) return 0;
    std::vector<std::filesystem::path> logs;
    for (const auto& entry : std::filesystem::directory_iterator(options_.log_dir)) {
        if (entry.path().extension() == ".jsonl") logs.push_back(entry.path());
    }
    std::sort(logs.begin(), logs.end());
    std::size_t restored = 0;
    for (const auto& path : logs) {
        auto s = std::make_shared<Slot>();
        Session& session = s->session;
        std::ifstream in(path);
        std::string line;
        std::vector<PipelineTrace> traces;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            auto e = nlohmann::json::parse(line);
            const auto& kind = e.at("event");
            if (kind == "create") {
                session.session_id = e.at("session_id").get<std::string>();
                session.user_id = e.at("user_id").get<std::string>();
                session.domain_id = e.at("domain_id").get<std::string>();
                session.context.trace_scope = session.session_id;
            } else if (kind == "turn") {
                TurnRecord t{e.at("question").get<std::string>(), e.at("asked").get<std::string>(), e.at("outcome"),
                             e.at("timestamp_ns").get<std::int64_t>()};
                session.turns.push_back(t);
                if (t.outcome.value("kind", "") == "answer" && !t.outcome["result"].is_null()) {
                    session.cached_result = ExecutionResult::from_json(t.outcome["result"]);
                }
                session.context = context_from_json(e.at("context"));
                session.pending_clarification.reset();
                if (!e.at("pending_clarification").is_null()) {
                    session.pending_clarification = PendingClarification::from_json(e["pending_clarification"]);
                }
                traces.push_back(PipelineTrace::from_json(e.at("trace")));
            }
        }
        if (session.session_id.empty()) continue;
        std::lock_guard lock(mutex_);
        for (auto& t : traces) traces_[t.trace_id] = std::move(t);
        sessions_[session.session_id] = s;
        ++created_;
        ++restored;
    }
    return restored;
}

}  // namespace askdata
