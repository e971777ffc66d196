#include "askdata/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <sstream>

#include "askdata/common.hpp"
#include "askdata/error.hpp"
#include "askdata/planner.hpp"
#include "askdata/resultgen.hpp"
#include "askdata/sql/canonical.hpp"
#include "askdata/sql/lineage.hpp"
#include "askdata/sql/parser.hpp"
#include "askdata/synthesizer.hpp"

namespace askdata {

namespace {

double fraction(std::size_t count, std::size_t n) { return n == 0 ? 0.0 : static_cast<double>(count) / n; }

std::string percent(double f) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(1) << f * 100.0;
    return out.str();
}

std::string signed_points(double pp) {
    std::ostringstream out;
    out << std::showpos << std::fixed << std::setprecision(1) << pp;
    return out.str();
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

// Aligned text table, first column left-aligned.
std::string render_table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> widths;
    for (const auto& row : rows) {
        if (widths.size() < row.size()) widths.resize(row.size(), 0);
        for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
    }
    std::string out;
    for (const auto& row : rows) {
        std::string line;
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) line += "  ";
            line += pad(row[i], widths[i]);
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line + "\n";
    }
    return out;
}

std::optional<double> as_number(const Cell& c) {
    if (c.is_number()) return c.get<double>();
    if (c.is_boolean()) return c.get<bool>() ? 1.0 : 0.0;
    return std::nullopt;
}

bool same_cell(const Cell& a, const Cell& b) {
    auto x = as_number(a);
    auto y = as_number(b);
    if (x && y) {
        double scale = std::max({1.0, std::fabs(*x), std::fabs(*y)});
        return std::fabs(*x - *y) <= 1e-9 * scale;
    }
    if (x || y) return false;
    return a == b;
}

// Sort key used only to line rows up; equality is decided by same_cell.
std::string cell_key(const Cell& c) {
    if (auto v = as_number(c)) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "n:%.9g", *v);
        return buf;
    }
    if (c.is_null()) return "z:";
    return "s:" + c.get<std::string>();
}

std::string row_key(const Row& r) {
    std::string key;
    for (const auto& c : r) key += cell_key(c) + '\x1f';
    return key;
}

bool same_row(const Row& a, const Row& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!same_cell(a[i], b[i])) return false;
    }
    return true;
}

std::vector<Row> sorted_rows(const std::vector<Row>& rows) {
    std::vector<std::pair<std::string, const Row*>> keyed;
    keyed.reserve(rows.size());
    for (const auto& r : rows) keyed.emplace_back(row_key(r), &r);
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Row> out;
    out.reserve(rows.size());
    for (const auto& [k, r] : keyed) out.push_back(*r);
    return out;
}

ExecutionResult run_gold(Connection& db, const std::string& gold) {
    try {
        return db.execute(gold, std::numeric_limits<std::size_t>::max());
    } catch (const Error& e) {
        throw Error(ErrorKind::GoldExecutionFailed, e.what());
    }
}

std::optional<ExecutionResult> run_pred(Connection& db, const std::string& pred) {
    if (trim(pred).empty()) return std::nullopt;
    try {
        return db.execute(pred, std::numeric_limits<std::size_t>::max());
    } catch (const Error&) {
        return std::nullopt;
    }
}

}  // namespace

std::vector<MetricSample> read_dataset(std::string_view jsonl, Dialect dialect) {
    std::vector<MetricSample> out;
    std::size_t line_no = 0;
    for (const auto& line : split(jsonl, '\n')) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto where = "dataset line " + std::to_string(line_no);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::InvalidArgument, where + ": " + e.what());
        }
        MetricSample s;
        for (const char* key : {"question", "gold_sql", "db_fixture"}) {
            if (!j.contains(key) || !j[key].is_string()) {
                throw Error(ErrorKind::InvalidArgument, where + ": missing " + key);
            }
        }
        s.question = j["question"].get<std::string>();
        s.gold_sql = j["gold_sql"].get<std::string>();
        s.db_fixture = j["db_fixture"].get<std::string>();
        s.domain_id = j.value("domain_id", "");
        s.pred_sql = j.value("pred_sql", "");
        auto parsed = sql::parse(s.gold_sql, dialect);
        if (!parsed) throw Error(ErrorKind::InvalidArgument, where + ": gold_sql: " + parsed.diagnostic().message());
        out.push_back(std::move(s));
    }
    return out;
}

nlohmann::json to_json(const MetricSample& s) {
    nlohmann::json j{{"question", s.question}, {"gold_sql", s.gold_sql}, {"db_fixture", s.db_fixture}};
    if (!s.domain_id.empty()) j["domain_id"] = s.domain_id;
    if (!s.pred_sql.empty()) j["pred_sql"] = s.pred_sql;
    return j;
}

void FixtureSet::add(const std::string& name, std::string script) {
    std::lock_guard lock(mutex_);
    scripts_[name] = std::move(script);
    open_.erase(name);
}

void FixtureSet::add_directory(const std::string& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".sql") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) add(f.filename().string(), read_file(f.string()));
}

bool FixtureSet::has(const std::string& name) const {
    std::lock_guard lock(mutex_);
    return scripts_.count(name) > 0;
}

std::shared_ptr<Connection> FixtureSet::connection(const std::string& name) {
    std::lock_guard lock(mutex_);
    if (auto it = open_.find(name); it != open_.end()) return it->second;
    auto it = scripts_.find(name);
    if (it == scripts_.end()) throw Error(ErrorKind::NotFound, "fixture " + name);
    auto conn = std::make_shared<EmbeddedConnection>();
    conn->execute_script(it->second);
    open_[name] = conn;
    return conn;
}

bool em(const std::string& pred, const std::string& gold, Dialect dialect) {
    auto p = sql::canonical_form(pred, dialect);
    if (!p) return false;
    auto g = sql::canonical_form(gold, dialect);
    return g && *p == *g;
}

bool has_top_level_order_by(const std::string& sql, Dialect dialect) {
    auto parsed = sql::parse(sql, dialect);
    return parsed && parsed.statement().query && !parsed.statement().query->order_by.empty();
}

bool ex_compare(const ExecutionResult& a, const ExecutionResult& b, bool ordered) {
    if (a.columns.size() != b.columns.size() || a.rows.size() != b.rows.size()) return false;
    if (ordered) {
        for (std::size_t i = 0; i < a.rows.size(); ++i) {
            if (!same_row(a.rows[i], b.rows[i])) return false;
        }
        return true;
    }
    auto x = sorted_rows(a.rows);
    auto y = sorted_rows(b.rows);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!same_row(x[i], y[i])) return false;
    }
    return true;
}

bool ex(const std::string& pred, const std::string& gold, Connection& db) {
    auto gold_result = run_gold(db, gold);
    auto pred_result = run_pred(db, pred);
    if (!pred_result) return false;
    return ex_compare(*pred_result, gold_result, has_top_level_order_by(gold, db.dialect()));
}

bool parse_judge_answer(std::string_view text) {
    std::string t = trim(text);
    while (!t.empty() && (t.back() == '.' || t.back() == '!')) t.pop_back();
    t = to_lower(trim(t));
    if (t == "yes") return true;
    if (t == "no") return false;
    throw Error(ErrorKind::LlmMalformedOutput, "judge must answer Yes or No");
}

HaVerdict ha(const std::string& pred, const std::string& gold, const std::string& question, Connection& db,
             LlmGateway& llm) {
    auto gold_result = run_gold(db, gold);
    HaVerdict v;
    auto pred_result = run_pred(db, pred);
    if (!pred_result) return v;
    try {
        v.reference_answer = text_analysis(llm, question, gold_result);
        v.candidate_answer = text_analysis(llm, question, *pred_result);
        v.correct = llm.ask(prompts::kHaJudge,
                            {{"question", question},
                             {"reference_answer", v.reference_answer},
                             {"candidate_answer", v.candidate_answer}},
                            [](const std::string& text) { return parse_judge_answer(text); });
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::LlmMalformedOutput) throw;
        v.correct = false;
        v.flagged = true;
    }
    return v;
}

std::string_view to_string(Difficulty d) {
    switch (d) {
        case Difficulty::Easy: return "easy";
        case Difficulty::Medium: return "medium";
        case Difficulty::Challenging: return "challenging";
    }
    return "easy";
}

Difficulty difficulty_label(int total) {
    if (total <= 4) return Difficulty::Easy;
    if (total <= 6) return Difficulty::Medium;
    return Difficulty::Challenging;
}

nlohmann::json DifficultyRating::to_json() const {
    return {{"question_comprehension", dims[0]},
            {"external_knowledge", dims[1]},
            {"data_complexity", dims[2]},
            {"sql_complexity", dims[3]},
            {"total", total},
            {"label", std::string(to_string(label))}};
}

DifficultyRating parse_difficulty(std::string_view text) {
    auto j = nlohmann::json::parse(extract_fenced(text, "json"));
    static const char* keys[] = {"question_comprehension", "external_knowledge", "data_complexity",
                                 "sql_complexity"};
    DifficultyRating r;
    r.total = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        if (!j.contains(keys[i]) || !j[keys[i]].is_number_integer()) {
            throw Error(ErrorKind::LlmMalformedOutput, std::string("missing ") + keys[i]);
        }
        int v = j[keys[i]].get<int>();
        if (v < 1 || v > 3) throw Error(ErrorKind::LlmMalformedOutput, std::string(keys[i]) + " outside 1..3");
        r.dims[i] = v;
        r.total += v;
    }
    r.label = difficulty_label(r.total);
    return r;
}

DifficultyRating difficulty(const std::string& question, const std::string& sql, LlmGateway& llm) {
    return llm.ask(prompts::kDifficultyRater, {{"question", question}, {"sql", sql}},
                   [](const std::string& text) { return parse_difficulty(text); });
}

nlohmann::json SampleVerdict::to_json() const {
    nlohmann::json j{{"index", index}, {"question", question}, {"pred_sql", pred_sql}, {"em", em}, {"ex", ex}};
    if (ha) j["ha"] = *ha;
    if (ha_flagged) j["ha_flagged"] = true;
    if (gold_failed) j["gold_failed"] = true;
    if (!note.empty()) j["note"] = note;
    if (kernel_included) j["kernel_included"] = true;
    if (diagnostics_before_reflection) j["diagnostics_before_reflection"] = diagnostics_before_reflection;
    if (reflected) j["reflected"] = true;
    if (reflection_repaired) j["reflection_repaired"] = true;
    return j;
}

std::size_t MetricReport::gold_failures() const {
    return static_cast<std::size_t>(
        std::count_if(samples.begin(), samples.end(), [](const SampleVerdict& v) { return v.gold_failed; }));
}

bool MetricReport::reconciles() const {
    if (n + gold_failures() != samples.size()) return false;
    std::size_t em_count = 0, ex_count = 0, ha_count = 0;
    for (const auto& v : samples) {
        if (v.gold_failed) continue;
        em_count += v.em;
        ex_count += v.ex;
        ha_count += v.ha.value_or(false);
    }
    auto in_range = [](double f) { return f >= 0.0 && f <= 1.0; };
    if (!in_range(em) || !in_range(ex) || (ha && !in_range(*ha))) return false;
    return em == fraction(em_count, n) && ex == fraction(ex_count, n) && (!ha || *ha == fraction(ha_count, n));
}

nlohmann::json MetricReport::to_json() const {
    nlohmann::json j{{"label", label}, {"n", n}, {"em", em}, {"ex", ex}, {"gold_failures", gold_failures()}};
    j["ha"] = ha ? nlohmann::json(*ha) : nlohmann::json(nullptr);
    j["samples"] = nlohmann::json::array();
    for (const auto& v : samples) j["samples"].push_back(v.to_json());
    return j;
}

MetricReport evaluate(const std::vector<MetricSample>& samples, FixtureSet& fixtures, const MetricOptions& options,
                      LlmGateway* llm, std::string label) {
    if (options.ha && !llm) throw Error(ErrorKind::InvalidArgument, "ha needs a model");
    MetricReport report;
    report.label = std::move(label);
    std::size_t em_count = 0, ex_count = 0, ha_count = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        SampleVerdict v;
        v.index = i;
        v.question = s.question;
        v.pred_sql = s.pred_sql;
        auto db = fixtures.connection(s.db_fixture);
        try {
            v.em = em(s.pred_sql, s.gold_sql, options.dialect);
            v.ex = ex(s.pred_sql, s.gold_sql, *db);
            if (options.ha) {
                auto h = ha(s.pred_sql, s.gold_sql, s.question, *db, *llm);
                v.ha = h.correct;
                v.ha_flagged = h.flagged;
            }
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::GoldExecutionFailed) throw;
            v = SampleVerdict{};
            v.index = i;
            v.question = s.question;
            v.pred_sql = s.pred_sql;
            v.gold_failed = true;
            v.note = e.what();
            report.samples.push_back(std::move(v));
            continue;
        }
        ++report.n;
        em_count += v.em;
        ex_count += v.ex;
        ha_count += v.ha.value_or(false);
        report.samples.push_back(std::move(v));
    }
    report.em = fraction(em_count, report.n);
    report.ex = fraction(ex_count, report.n);
    if (options.ha) report.ha = fraction(ha_count, report.n);
    return report;
}

SampleVerdict predict(const MetricSample& sample, const MemoryStore* store, const GenerationConfig& config,
                      const Catalog& catalog, LlmGateway& llm) {
    SampleVerdict v;
    v.question = sample.question;
    try {
        Dialect dialect = catalog.domain_dialect(sample.domain_id);
        auto schemas = catalog.domain_schemas(sample.domain_id);
        GenerationContext ctx;
        ctx.dialect = dialect;
        ctx.question = sample.question;
        ctx.schema_info = describe_schemas(schemas);
        ctx.token_budget = config.token_budget;
        if (store && config.k > 0) {
            auto bundle = hybrid_recall(config.slot_features ? &llm : nullptr, *store, sample.question,
                                        sample.domain_id, config.k);
            ctx.examples = std::move(bundle.examples);
            ctx.kernel_id = bundle.kernel_id;
            v.kernel_included = bundle.kernel_included;
        }
        std::string sql = generate_sql(llm, ctx);
        v.pred_sql = sql;
        auto diagnostics = sql::validate(sql, dialect, catalog);
        v.diagnostics_before_reflection = diagnostics.size();
        if (config.reflection && !diagnostics.empty()) {
            v.reflected = true;
            try {
                auto outcome = reflect(llm, sample.question, sql, diagnostics, ctx.schema_info, dialect, catalog,
                                       config.max_reflection_rounds);
                v.pred_sql = outcome.sql;
                v.reflection_repaired = true;
            } catch (const ReflectionFailedError& e) {
                v.note = e.what();
            }
        }
    } catch (const Error& e) {
        v.note = e.what();
    }
    return v;
}

std::string_view to_string(Arm arm) {
    switch (arm) {
        case Arm::ZeroShot: return "zero_shot";
        case Arm::ER: return "ER";
        case Arm::ER_SA: return "ER_SA";
        case Arm::ER_D2N: return "ER_D2N";
    }
    return "zero_shot";
}

Arm parse_arm(std::string_view text) {
    for (Arm a : {Arm::ZeroShot, Arm::ER, Arm::ER_SA, Arm::ER_D2N}) {
        if (iequals(text, to_string(a))) return a;
    }
    throw Error(ErrorKind::InvalidArgument, "unknown arm " + std::string(text));
}

namespace {

MetricReport predict_and_score(const std::string& label, const std::vector<MetricSample>& dataset,
                               const MemoryStore* store, const GenerationConfig& config, EvalEnvironment& env) {
    std::vector<MetricSample> predicted = dataset;
    std::vector<SampleVerdict> generation;
    for (auto& s : predicted) {
        auto v = predict(s, store, config, env.catalog, env.llm);
        s.pred_sql = v.pred_sql;
        generation.push_back(std::move(v));
    }
    auto report = evaluate(predicted, env.fixtures, env.metrics, &env.llm, label);
    for (std::size_t i = 0; i < report.samples.size(); ++i) {
        auto& out = report.samples[i];
        const auto& g = generation[i];
        out.kernel_included = g.kernel_included;
        out.diagnostics_before_reflection = g.diagnostics_before_reflection;
        out.reflected = g.reflected;
        out.reflection_repaired = g.reflection_repaired;
        if (out.note.empty()) out.note = g.note;
    }
    return report;
}

std::vector<std::string> report_row(const MetricReport& r, bool with_ha) {
    std::vector<std::string> row{r.label, std::to_string(r.n), percent(r.em), percent(r.ex)};
    if (with_ha) row.push_back(r.ha ? percent(*r.ha) : "-");
    return row;
}

}  // namespace

AblationTable run_ablation(const std::vector<MetricSample>& dataset, const std::vector<Arm>& arms,
                           const ArmStores& stores, const GenerationConfig& config, EvalEnvironment& env) {
    AblationTable table;
    for (Arm arm : arms) {
        const MemoryStore* store = nullptr;
        GenerationConfig arm_config = config;
        switch (arm) {
            case Arm::ZeroShot: arm_config.k = 0; break;
            case Arm::ER: store = stores.seed.get(); break;
            case Arm::ER_SA: store = stores.semantic.get(); break;
            case Arm::ER_D2N: store = stores.d2n.get(); break;
        }
        if (arm != Arm::ZeroShot && !store) {
            throw Error(ErrorKind::InvalidArgument, "no store for arm " + std::string(to_string(arm)));
        }
        table.rows.push_back(predict_and_score(std::string(to_string(arm)), dataset, store, arm_config, env));
    }
    return table;
}

nlohmann::json AblationTable::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json row{{"arm", r.label}, {"n", r.n}, {"em", r.em}, {"ex", r.ex}};
        if (r.ha) row["ha"] = *r.ha;
        rows_json.push_back(row);
    }
    return {{"rows", rows_json}};
}

std::string AblationTable::to_text() const {
    bool with_ha = std::any_of(rows.begin(), rows.end(), [](const MetricReport& r) { return r.ha.has_value(); });
    std::vector<std::vector<std::string>> cells{{"arm", "n", "EM%", "EX%"}};
    if (with_ha) cells[0].push_back("HA%");
    for (const auto& r : rows) cells.push_back(report_row(r, with_ha));
    return render_table(cells);
}

PairedReport paired_ablation(const std::string& feature, const std::vector<MetricSample>& dataset,
                             const MemoryStore* store, const GenerationConfig& with_config,
                             const GenerationConfig& without_config, EvalEnvironment& env) {
    PairedReport p;
    p.feature = feature;
    p.with = predict_and_score(feature + " w/", dataset, store, with_config, env);
    p.without = predict_and_score(feature + " w/o", dataset, store, without_config, env);
    p.em_diff = (p.with.em - p.without.em) * 100.0;
    p.ex_diff = (p.with.ex - p.without.ex) * 100.0;
    if (p.with.ha && p.without.ha) p.ha_diff = (*p.with.ha - *p.without.ha) * 100.0;
    return p;
}

PairedReport slot_ablation(const std::vector<MetricSample>& dataset, const MemoryStore& store,
                           GenerationConfig base, EvalEnvironment& env, bool enabled) {
    auto with = base;
    with.slot_features = enabled;
    auto without = base;
    without.slot_features = false;
    return paired_ablation("SFE", dataset, &store, with, without, env);
}

PairedReport reflection_ablation(const std::vector<MetricSample>& dataset, const MemoryStore* store,
                                 GenerationConfig base, EvalEnvironment& env, bool enabled) {
    auto with = base;
    with.reflection = enabled;
    auto without = base;
    without.reflection = false;
    return paired_ablation("reflection", dataset, store, with, without, env);
}

nlohmann::json PairedReport::to_json() const {
    auto row = [](const MetricReport& r) {
        nlohmann::json j{{"label", r.label}, {"n", r.n}, {"em", r.em}, {"ex", r.ex}};
        if (r.ha) j["ha"] = *r.ha;
        return j;
    };
    nlohmann::json diff{{"label", "DIFF"}, {"em", em_diff}, {"ex", ex_diff}};
    if (ha_diff) diff["ha"] = *ha_diff;
    return {{"feature", feature}, {"rows", {row(with), row(without), diff}}};
}

std::string PairedReport::to_text() const {
    bool with_ha = ha_diff.has_value();
    std::vector<std::vector<std::string>> cells{{"setting", "n", "EX%", "EM%"}};
    if (with_ha) cells[0].push_back("HA%");
    for (const auto* r : {&with, &without}) {
        std::vector<std::string> row{r->label, std::to_string(r->n), percent(r->ex), percent(r->em)};
        if (with_ha) row.push_back(percent(r->ha.value_or(0.0)));
        cells.push_back(std::move(row));
    }
    std::vector<std::string> diff{"DIFF", "", signed_points(ex_diff), signed_points(em_diff)};
    if (with_ha) diff.push_back(signed_points(*ha_diff));
    cells.push_back(std::move(diff));
    return render_table(cells);
}

nlohmann::json RecallExperiment::to_json() const {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : points) {
        pts.push_back({{"distractors", p.distractors}, {"hits", p.hits}, {"total", p.total}, {"recall", p.recall}});
    }
    return {{"generated_questions", generated_questions}, {"points", pts}};
}

std::string RecallExperiment::to_text() const {
    std::vector<std::vector<std::string>> cells{{"distractors", "hits", "total", "recall%"}};
    for (const auto& p : points) {
        cells.push_back({std::to_string(p.distractors), std::to_string(p.hits), std::to_string(p.total),
                         percent(p.recall)});
    }
    return render_table(cells);
}

RecallExperiment recall_experiment(const std::vector<RecallSeed>& seeds, const std::vector<SeedPair>& distractors,
                                   const std::vector<std::size_t>& counts, LlmGateway& llm,
                                   const RecallSetup& setup) {
    if (!setup.embedder) throw Error(ErrorKind::InvalidArgument, "recall experiment needs an embedder");
    for (auto c : counts) {
        if (c > distractors.size()) {
            throw Error(ErrorKind::InvalidArgument, "distractor count " + std::to_string(c) + " exceeds pool of " +
                                                        std::to_string(distractors.size()));
        }
    }
    Dialect dialect = setup.catalog.domain_dialect(setup.domain_id);
    if (setup.connection) {
        for (const auto& s : seeds) {
            try {
                setup.connection->execute(s.sql, 1);
            } catch (const Error& e) {
                throw Error(ErrorKind::InvalidArgument, "seed SQL does not execute: " + std::string(e.what()));
            }
        }
    }
    std::string table_info = describe_schemas(setup.catalog.domain_schemas(setup.domain_id));

    std::vector<Demonstration> generated;
    for (const auto& s : seeds) {
        for (auto& pair : sql2nl(llm, s.sql, table_info, setup.domain_id, dialect)) {
            generated.push_back(prepare_demonstration(pair, Origin::Sql2Nl, setup.catalog));
        }
    }
    std::vector<Demonstration> noise;
    for (auto pair : distractors) {
        pair.domain_id = setup.domain_id;
        noise.push_back(prepare_demonstration(pair, Origin::Seed, setup.catalog));
    }

    RecallExperiment out;
    out.generated_questions = generated.size();
    for (auto count : counts) {
        MemoryStore store(setup.embedder);
        for (const auto& d : generated) store.upsert(d);
        for (std::size_t i = 0; i < count; ++i) store.upsert(noise[i]);
        RecallPoint point;
        point.distractors = count;
        point.total = seeds.size();
        for (const auto& s : seeds) {
            auto hits = store.search(s.question, setup.k, setup.domain_id);
            bool found = std::any_of(hits.begin(), hits.end(), [&](const RecallHit& h) {
                return trim(h.demonstration.sql) == trim(s.sql);
            });
            point.hits += found;
        }
        point.recall = fraction(point.hits, point.total);
        out.points.push_back(point);
    }
    return out;
}

}  // namespace askdata
