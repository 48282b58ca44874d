#include "autofe/engine_json.hpp"
#include "autofe/text_format.hpp"

#include <cstdio>
#include <stdexcept>

namespace autofe::engine {

std::string_view decision_name(Decision d) {
    switch (d) {
        case Decision::Accepted: return "accepted";
        case Decision::Rejected: return "rejected";
        case Decision::Error: return "error";
    }
    return "error";
}

std::optional<Decision> parse_decision(std::string_view name) {
    if (name == "accepted") return Decision::Accepted;
    if (name == "rejected") return Decision::Rejected;
    if (name == "error") return Decision::Error;
    return std::nullopt;
}

std::string_view event_kind_name(EventKind kind) {
    switch (kind) {
        case EventKind::IterationStarted: return "iteration_started";
        case EventKind::CandidateReady: return "candidate_ready";
        case EventKind::DecisionRequired: return "decision_required";
        case EventKind::IterationFinished: return "iteration_finished";
        case EventKind::SessionFinished: return "session_finished";
    }
    return "";
}

Json metrics_json(const models::EvalMetrics& m) { return {{"roc_auc", m.roc_auc}, {"accuracy", m.accuracy}}; }

models::EvalMetrics metrics_from_json(const Json& j) {
    return {j.at("roc_auc").get<double>(), j.at("accuracy").get<double>()};
}

namespace {

Json metrics_list(const std::vector<models::EvalMetrics>& m) {
    Json a = Json::array();
    for (const auto& e : m) a.push_back(metrics_json(e));
    return a;
}

std::vector<models::EvalMetrics> metrics_list_from(const Json& j) {
    std::vector<models::EvalMetrics> out;
    for (const auto& e : j) out.push_back(metrics_from_json(e));
    return out;
}

}  // namespace

Json usage_json(const llm::UsageRecord& u) {
    return {{"prompt_tokens", u.prompt_tokens},
            {"completion_tokens", u.completion_tokens},
            {"estimated_cost", u.estimated_cost},
            {"latency", u.latency}};
}

llm::UsageRecord usage_from_json(const Json& j) {
    llm::UsageRecord u;
    u.prompt_tokens = j.at("prompt_tokens").get<std::size_t>();
    u.completion_tokens = j.at("completion_tokens").get<std::size_t>();
    u.estimated_cost = j.at("estimated_cost").get<double>();
    u.latency = j.at("latency").get<double>();
    return u;
}

Json outcome_json(const EvalOutcome& o) {
    return {{"before", metrics_list(o.before)},
            {"after", metrics_list(o.after)},
            {"mean_before", metrics_json(o.mean_before())},
            {"mean_after", metrics_json(o.mean_after())},
            {"mean_delta_auc", o.mean_delta_auc},
            {"mean_delta_acc", o.mean_delta_acc},
            {"decision_score", o.decision_score},
            {"recommended", o.recommended}};
}

EvalOutcome outcome_from_json(const Json& j) {
    return EvalOutcome::from_splits(metrics_list_from(j.at("before")), metrics_list_from(j.at("after")));
}

namespace {

std::string to_hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

Json record_json(const IterationRecord& r) {
    Json j;
    j["index"] = r.index;
    j["decision"] = decision_name(r.decision);
    j["human_override"] = r.human_override ? Json(*r.human_override) : Json(nullptr);
    j["note"] = r.note;
    j["prompt"] = r.prompt;
    j["response"] = r.response;
    j["code"] = r.code;
    j["script"] = r.script;
    j["usefulness"] = r.usefulness;
    j["extra_blocks"] = r.extra_blocks;
    j["outcome"] = r.outcome ? outcome_json(*r.outcome) : Json(nullptr);
    j["error"] = r.error ? Json(*r.error) : Json(nullptr);
    j["feedback"] = r.feedback;
    // Hex strings: JSON numbers lose precision above 2^53 in many readers.
    j["table_hash_before"] = to_hex(r.table_hash_before);
    j["table_hash_after"] = to_hex(r.table_hash_after);
    j["usage"] = usage_json(r.usage);
    j["wall_time"] = r.wall_time;
    return j;
}

IterationRecord record_from_json(const Json& j) {
    IterationRecord r;
    r.index = j.at("index").get<int>();
    auto d = parse_decision(j.at("decision").get<std::string>());
    if (!d) throw DataError("unknown decision in iteration record");
    r.decision = *d;
    if (!j.at("human_override").is_null()) r.human_override = j["human_override"].get<bool>();
    r.note = j.value("note", "");
    r.prompt = j.at("prompt").get<std::string>();
    r.response = j.at("response").get<std::string>();
    r.code = j.at("code").get<std::string>();
    r.script = j.at("script").get<std::string>();
    r.usefulness = j.at("usefulness").get<std::vector<std::string>>();
    r.extra_blocks = j.at("extra_blocks").get<std::size_t>();
    if (!j.at("outcome").is_null()) r.outcome = outcome_from_json(j["outcome"]);
    if (!j.at("error").is_null()) r.error = j["error"].get<std::string>();
    r.feedback = j.at("feedback").get<std::string>();
    r.table_hash_before = std::stoull(j.at("table_hash_before").get<std::string>(), nullptr, 16);
    r.table_hash_after = std::stoull(j.at("table_hash_after").get<std::string>(), nullptr, 16);
    r.usage = usage_from_json(j.at("usage"));
    r.wall_time = j.at("wall_time").get<double>();
    return r;
}

Json config_json(const SessionConfig& c) {
    const auto& m = c.model;
    const auto& l = c.llm;
    return {
        {"data_path", c.data_path.string()},
        {"description_path", c.description_path.string()},
        {"target", c.target},
        {"description", c.description},
        {"iterations", c.iterations},
        {"model",
         {{"kind", models::model_kind_name(m.kind)},
          {"l2", m.logistic.l2},
          {"max_iterations", m.logistic.max_iterations},
          {"tolerance", m.logistic.tolerance},
          {"n_trees", m.forest.n_trees},
          {"max_depth", m.forest.max_depth},
          {"min_leaf", m.forest.min_leaf},
          {"seed", m.seed}}},
        {"splits",
         {{"seed", c.splits.seed},
          {"n_splits", c.splits.n_splits},
          {"valid_fraction", c.splits.valid_fraction},
          {"stratified", c.splits.stratified}}},
        {"llm",
         {{"backend", l.backend == llm::BackendKind::Http ? "http" : "scripted"},
          {"endpoint", l.endpoint_url},
          {"model_name", l.model_name},
          {"temperature", l.temperature},
          {"max_response_tokens", l.max_response_tokens},
          {"request_timeout", l.request_timeout},
          {"max_retries", l.max_retries},
          {"backoff_initial", l.backoff_initial},
          {"api_key_env", l.api_key_env_var},
          {"playbook", l.playbook_path.string()}}},
        {"decision_mode", c.decision_mode == DecisionMode::Review ? "review" : "auto"},
        {"blinded", c.blinded},
        {"seed", c.seed},
        {"sample_fraction", c.sample_fraction},
    };
}

SessionConfig config_from_json(const Json& j) {
    SessionConfig c;
    c.data_path = j.at("data_path").get<std::string>();
    c.description_path = j.at("description_path").get<std::string>();
    c.target = j.at("target").get<std::string>();
    c.description = j.at("description").get<std::string>();
    c.iterations = j.at("iterations").get<int>();
    const auto& m = j.at("model");
    auto kind = models::parse_model_kind(m.at("kind").get<std::string>());
    if (!kind) throw DataError("unknown model kind in session config");
    c.model.kind = *kind;
    c.model.logistic.l2 = m.at("l2").get<double>();
    c.model.logistic.max_iterations = m.at("max_iterations").get<int>();
    c.model.logistic.tolerance = m.at("tolerance").get<double>();
    c.model.forest.n_trees = m.at("n_trees").get<int>();
    c.model.forest.max_depth = m.at("max_depth").get<int>();
    c.model.forest.min_leaf = m.at("min_leaf").get<int>();
    c.model.seed = m.at("seed").get<std::uint64_t>();
    const auto& s = j.at("splits");
    c.splits.seed = s.at("seed").get<std::uint64_t>();
    c.splits.n_splits = s.at("n_splits").get<std::size_t>();
    c.splits.valid_fraction = s.at("valid_fraction").get<double>();
    c.splits.stratified = s.at("stratified").get<bool>();
    const auto& l = j.at("llm");
    c.llm.backend = l.at("backend").get<std::string>() == "http" ? llm::BackendKind::Http : llm::BackendKind::Scripted;
    c.llm.endpoint_url = l.at("endpoint").get<std::string>();
    c.llm.model_name = l.at("model_name").get<std::string>();
    c.llm.temperature = l.at("temperature").get<double>();
    c.llm.max_response_tokens = l.at("max_response_tokens").get<int>();
    c.llm.request_timeout = l.at("request_timeout").get<double>();
    c.llm.max_retries = l.at("max_retries").get<int>();
    c.llm.backoff_initial = l.at("backoff_initial").get<double>();
    c.llm.api_key_env_var = l.at("api_key_env").get<std::string>();
    c.llm.playbook_path = l.at("playbook").get<std::string>();
    c.decision_mode = j.at("decision_mode").get<std::string>() == "review" ? DecisionMode::Review : DecisionMode::Auto;
    c.blinded = j.at("blinded").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.sample_fraction = j.at("sample_fraction").get<double>();
    return c;
}

Json baseline_json(const Session& s) {
    Json cols = Json::array();
    for (std::size_t i = 0; i < s.original_schema.columns.size(); ++i) {
        const auto& [name, dtype] = s.original_schema.columns[i];
        cols.push_back({{"name", name}, {"dtype", dtype_name(dtype)}, {"working_name", s.working_names.at(i)}});
    }
    return {{"splits", metrics_list(s.baseline)},
            {"mean", metrics_json(mean_metrics(s.baseline))},
            {"row_count", s.row_count},
            {"target", s.original_schema.target},
            {"columns", cols},
            {"stratification_downgraded", s.stratification_downgraded}};
}

namespace {

std::size_t count_decisions(const Session& s, Decision d) {
    std::size_t n = 0;
    for (const auto& r : s.iterations) n += r.decision == d;
    return n;
}

}  // namespace

Json report_json(const Session& s) {
    Json traj = Json::array();
    for (const auto& r : s.iterations) {
        Json t = {{"index", r.index}, {"decision", decision_name(r.decision)}};
        if (r.outcome) {
            t["roc_before"] = r.outcome->mean_before().roc_auc;
            t["roc_after"] = r.outcome->mean_after().roc_auc;
            t["acc_before"] = r.outcome->mean_before().accuracy;
            t["acc_after"] = r.outcome->mean_after().accuracy;
            t["decision_score"] = r.outcome->decision_score;
        }
        traj.push_back(t);
    }
    std::vector<llm::UsageRecord> usage;
    for (const auto& r : s.iterations) usage.push_back(r.usage);
    return {{"iterations", s.iterations.size()},
            {"accepted", count_decisions(s, Decision::Accepted)},
            {"rejected", count_decisions(s, Decision::Rejected)},
            {"errors", count_decisions(s, Decision::Error)},
            {"halted", s.halted},
            {"halt_reason", s.halt_reason},
            {"baseline", metrics_json(mean_metrics(s.baseline))},
            {"final", metrics_json(s.current_metrics())},
            {"trajectory", traj},
            {"usage", usage_json(llm::accumulate_usage(usage))}};
}

namespace {

std::string csv_field(const std::string& v) {
    if (v.find_first_of(",\"\n\r") == std::string::npos) return v;
    std::string out = "\"";
    for (char c : v) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string report_csv(const Session& s) {
    std::string out =
        "iteration,decision,human_override,roc_before,roc_after,acc_before,acc_after,delta_roc,delta_acc,"
        "decision_score,error\n";
    for (const auto& r : s.iterations) {
        out += std::to_string(r.index) + "," + std::string(decision_name(r.decision)) + ",";
        out += r.human_override ? (*r.human_override ? "accept" : "reject") : "";
        if (r.outcome) {
            const auto b = r.outcome->mean_before(), a = r.outcome->mean_after();
            for (double v : {b.roc_auc, a.roc_auc, b.accuracy, a.accuracy, r.outcome->mean_delta_auc,
                             r.outcome->mean_delta_acc, r.outcome->decision_score}) {
                out += "," + format_number_exact(v);
            }
        } else {
            out += ",,,,,,,";
        }
        out += "," + csv_field(r.error.value_or("")) + "\n";
    }
    return out;
}

const std::vector<std::string>& timing_fields() {
    static const std::vector<std::string> f = {"wall_time", "latency"};
    return f;
}

}  // namespace autofe::engine
