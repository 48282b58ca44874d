#include "autofe/api.hpp"

#include <httplib.h>

#include <algorithm>

namespace autofe::api {

Json event_json(const ApiEvent& e) {
    return {{"seq", e.seq}, {"kind", engine::event_kind_name(e.kind)}, {"iteration", e.iteration}, {"payload", e.payload}};
}

Json snapshot_json(const engine::IterationRecord& r, std::string_view status) {
    Json j = engine::record_json(r);
    j["status"] = status;
    return j;
}

// ---------------------------------------------------------------------------

engine::SessionHooks SessionMonitor::hooks() {
    engine::SessionHooks h;
    h.decisions = this;
    h.observer = [this](engine::EventKind k, const engine::IterationRecord& r) { on_event(k, r); };
    h.description_update = [this]() -> std::optional<std::string> {
        std::lock_guard lock(mu_);
        auto d = std::move(pending_description_);
        pending_description_.reset();
        if (d) description_ = *d;
        return d;
    };
    h.on_start = [this](const engine::Session& s) { on_start(s); };
    return h;
}

void SessionMonitor::on_start(const engine::Session& s) {
    std::lock_guard lock(mu_);
    config_ = engine::config_json(s.config);
    baseline_ = engine::baseline_json(s);
    description_ = s.config.description;
    status_ = "running";
    // Iterations restored from disk on resume.
    for (const auto& r : s.iterations) {
        iterations_[r.index] = snapshot_json(r, engine::decision_name(r.decision));
    }
    changed_.notify_all();
}

void SessionMonitor::load(const engine::Session& s) {
    on_start(s);
    std::lock_guard lock(mu_);
    for (const auto& r : s.iterations) {
        auto snap = snapshot_json(r, engine::decision_name(r.decision));
        push_event(engine::EventKind::IterationStarted, r.index, snap);
        if (r.outcome) push_event(engine::EventKind::CandidateReady, r.index, snap);
        push_event(engine::EventKind::IterationFinished, r.index, snap);
    }
    status_ = s.halted ? "halted" : "finished";
    halt_reason_ = s.halt_reason;
    push_event(engine::EventKind::SessionFinished, 0, {{"iterations", s.iterations.size()}});
}

void SessionMonitor::push_event(engine::EventKind kind, int iteration, Json payload) {
    ApiEvent e;
    e.seq = events_.size() + 1;
    e.kind = kind;
    e.iteration = iteration;
    e.payload = std::move(payload);
    events_.push_back(std::move(e));
    changed_.notify_all();
}

void SessionMonitor::on_event(engine::EventKind kind, const engine::IterationRecord& r) {
    std::lock_guard lock(mu_);
    using K = engine::EventKind;
    if (kind == K::SessionFinished) {
        status_ = "finished";
        push_event(kind, 0, {{"iterations", iterations_.size()}});
        return;
    }
    std::string_view status = "running";
    if (kind == K::DecisionRequired) {
        // Open for decisions before the event is visible to clients.
        status = "awaiting-decision";
        awaiting_ = r.index;
        verdict_.reset();
    }
    if (kind == K::IterationFinished) status = engine::decision_name(r.decision);
    auto snap = snapshot_json(r, status);
    iterations_[r.index] = snap;
    push_event(kind, r.index, std::move(snap));
}

Json SessionMonitor::session_json() const {
    std::lock_guard lock(mu_);
    std::vector<llm::UsageRecord> usage;
    for (const auto& [i, j] : iterations_) usage.push_back(engine::usage_from_json(j.at("usage")));
    return {{"status", status_},
            {"halt_reason", halt_reason_},
            {"config", config_},
            {"baseline", baseline_},
            {"description", description_},
            {"iterations", iterations_.size()},
            {"awaiting_decision", awaiting_ ? Json(*awaiting_) : Json(nullptr)},
            {"usage", engine::usage_json(llm::accumulate_usage(usage))}};
}

Json SessionMonitor::iterations_json() const {
    std::lock_guard lock(mu_);
    Json a = Json::array();
    for (const auto& [i, j] : iterations_) a.push_back(j);
    return a;
}

std::optional<Json> SessionMonitor::iteration_json(int index) const {
    std::lock_guard lock(mu_);
    auto it = iterations_.find(index);
    if (it == iterations_.end()) return std::nullopt;
    return it->second;
}

Json SessionMonitor::events_after(std::uint64_t after, std::chrono::milliseconds wait) const {
    std::unique_lock lock(mu_);
    changed_.wait_for(lock, wait, [&] { return events_.size() > after || status_ == "finished" || status_ == "halted"; });
    Json out = Json::array();
    for (std::size_t i = static_cast<std::size_t>(std::min<std::uint64_t>(after, events_.size())); i < events_.size();
         ++i) {
        out.push_back(event_json(events_[i]));
    }
    return {{"events", out}, {"last", events_.size()}, {"status", status_}};
}

SessionMonitor::DecisionResult SessionMonitor::decide(int index, bool accept, std::string note) {
    std::lock_guard lock(mu_);
    if (!awaiting_ || *awaiting_ != index || verdict_) return DecisionResult::Stale;
    verdict_ = Verdict{accept, std::move(note)};
    changed_.notify_all();
    return DecisionResult::Delivered;
}

void SessionMonitor::set_description(std::string text) {
    std::lock_guard lock(mu_);
    pending_description_ = std::move(text);
}

std::optional<int> SessionMonitor::awaiting() const {
    std::lock_guard lock(mu_);
    return awaiting_;
}

engine::DecisionChannel::Verdict SessionMonitor::await_decision(const engine::IterationRecord& candidate) {
    std::unique_lock lock(mu_);
    if (awaiting_ != candidate.index) {
        awaiting_ = candidate.index;
        verdict_.reset();
    }
    changed_.wait(lock, [&] { return verdict_.has_value() || status_ == "stopped"; });
    Verdict v = verdict_ ? *verdict_ : Verdict{false, "session stopped before a decision"};
    awaiting_.reset();
    verdict_.reset();
    return v;
}

void SessionMonitor::finish(bool halted, std::string reason) {
    std::lock_guard lock(mu_);
    status_ = halted ? "halted" : "finished";
    halt_reason_ = std::move(reason);
    changed_.notify_all();
}

void SessionMonitor::close() {
    std::lock_guard lock(mu_);
    status_ = "stopped";
    changed_.notify_all();
}

// ---------------------------------------------------------------------------

struct Server::Impl {
    httplib::Server http;
};

namespace {

void reply(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void error(httplib::Response& res, int status, const std::string& message) { reply(res, status, {{"error", message}}); }

const char* kIndexPage =
    "<!doctype html><html><head><meta charset=\"utf-8\"><title>autofe session</title></head><body>"
    "<h1>autofe session</h1><p>No dashboard bundle is installed. The JSON API is available:</p><ul>"
    "<li><a href=\"/api/session\">/api/session</a></li><li><a href=\"/api/iterations\">/api/iterations</a></li>"
    "<li><a href=\"/api/events?after=0&amp;wait=0\">/api/events</a></li></ul></body></html>";

}  // namespace

Server::Server(SessionMonitor& monitor, std::filesystem::path static_dir) : impl_(std::make_unique<Impl>()) {
    auto& http = impl_->http;
    SessionMonitor* m = &monitor;

    http.Get("/api/session", [m](const httplib::Request&, httplib::Response& res) { reply(res, 200, m->session_json()); });
    http.Get("/api/iterations",
             [m](const httplib::Request&, httplib::Response& res) { reply(res, 200, m->iterations_json()); });
    http.Get(R"(/api/iterations/(\d+))", [m](const httplib::Request& req, httplib::Response& res) {
        const int index = std::stoi(req.matches[1]);
        if (auto j = m->iteration_json(index)) return reply(res, 200, *j);
        error(res, 404, "no iteration " + std::to_string(index));
    });
    http.Get("/api/events", [this, m](const httplib::Request& req, httplib::Response& res) {
        std::uint64_t after = 0;
        auto wait = max_wait;
        try {
            if (req.has_param("after")) after = std::stoull(req.get_param_value("after"));
            if (req.has_param("wait")) {
                const double secs = std::stod(req.get_param_value("wait"));
                if (secs < 0) throw std::invalid_argument("negative wait");
                wait = std::min(max_wait, std::chrono::milliseconds(static_cast<long long>(secs * 1000.0)));
            }
        } catch (const std::exception&) {
            return error(res, 400, "after and wait must be non-negative numbers");
        }
        reply(res, 200, m->events_after(after, wait));
    });
    http.Post(R"(/api/iterations/(\d+)/decision)", [m](const httplib::Request& req, httplib::Response& res) {
        const int index = std::stoi(req.matches[1]);
        Json body = Json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object() || !body.contains("accept") || !body["accept"].is_boolean() ||
            (body.contains("note") && !body["note"].is_string())) {
            return error(res, 400, "expected {\"accept\": bool, \"note\": string}");
        }
        const bool accept = body["accept"].get<bool>();
        const auto result = m->decide(index, accept, body.value("note", ""));
        if (result == SessionMonitor::DecisionResult::Stale) {
            return error(res, 409, "stale decision: iteration " + std::to_string(index) + " is not awaiting a decision");
        }
        reply(res, 200, {{"iteration", index}, {"accept", accept}});
    });
    http.Post("/api/description", [m](const httplib::Request& req, httplib::Response& res) {
        Json body = Json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object() || !body.contains("text") || !body["text"].is_string()) {
            return error(res, 400, "expected {\"text\": string}");
        }
        m->set_description(body["text"].get<std::string>());
        reply(res, 200, {{"description", body["text"]}, {"applies_from", "next iteration"}});
    });

    if (!static_dir.empty() && std::filesystem::is_directory(static_dir)) {
        http.set_mount_point("/", static_dir.string());
    } else {
        http.Get("/", [](const httplib::Request&, httplib::Response& res) { res.set_content(kIndexPage, "text/html"); });
    }
}

Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
    int bound = port == 0 ? impl_->http.bind_to_any_port(host) : (impl_->http.bind_to_port(host, port) ? port : -1);
    if (bound <= 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void Server::listen() { impl_->http.listen_after_bind(); }

void Server::stop() {
    if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

void Server::wait_until_ready() { impl_->http.wait_until_ready(); }

}  // namespace autofe::api
