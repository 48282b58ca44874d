#pragma once

// HTTP/JSON view of a session for the review dashboard.
//
//   GET  /api/session                  config, baseline, status
//   GET  /api/iterations               iteration snapshots by index
//   GET  /api/iterations/{i}
//   GET  /api/events?after=n&wait=s    long poll for events with seq > n
//   POST /api/iterations/{i}/decision  {"accept": bool, "note": text}
//   POST /api/description              {"text": text}, used from the next prompt

#include "autofe/engine.hpp"
#include "autofe/engine_json.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace autofe::api {

using engine::Json;

struct ApiEvent {
    std::uint64_t seq = 0;  // 1-based, strictly increasing
    engine::EventKind kind = engine::EventKind::IterationStarted;
    int iteration = 0;
    Json payload;
};

Json event_json(const ApiEvent& e);

/// Iteration snapshot: the persisted record plus a "status" of accepted,
/// rejected, error, awaiting-decision or running.
Json snapshot_json(const engine::IterationRecord& r, std::string_view status);

/// Session state shared between the engine loop (writer) and HTTP handlers
/// (readers). Decisions and description edits are the only inbound writes.
class SessionMonitor : public engine::DecisionChannel {
public:
    enum class DecisionResult { Delivered, Stale };

    /// Hooks that feed this monitor; decisions route through it as well.
    engine::SessionHooks hooks();

    /// Fills the monitor from a finished session (read-only serving).
    void load(const engine::Session& session);

    Json session_json() const;
    Json iterations_json() const;
    std::optional<Json> iteration_json(int index) const;
    /// Events with seq > after. Blocks up to `wait` when there are none yet.
    Json events_after(std::uint64_t after, std::chrono::milliseconds wait) const;

    DecisionResult decide(int index, bool accept, std::string note);
    void set_description(std::string text);
    std::optional<int> awaiting() const;

    Verdict await_decision(const engine::IterationRecord& candidate) override;

    /// Marks the session finished and wakes every waiter.
    void finish(bool halted, std::string reason);
    /// Releases a pending decision wait with a rejection.
    void close();

private:
    void on_start(const engine::Session& s);
    void on_event(engine::EventKind kind, const engine::IterationRecord& r);
    void push_event(engine::EventKind kind, int iteration, Json payload);

    mutable std::mutex mu_;
    mutable std::condition_variable changed_;
    Json config_ = Json::object();
    Json baseline_ = Json::object();
    std::string description_;
    std::optional<std::string> pending_description_;
    std::map<int, Json> iterations_;
    std::vector<ApiEvent> events_;
    std::optional<int> awaiting_;
    std::optional<Verdict> verdict_;
    std::string status_ = "starting";
    std::string halt_reason_;
};

/// The HTTP server. Static files under `static_dir` are served at / when the
/// directory exists.
class Server {
public:
    Server(SessionMonitor& monitor, std::filesystem::path static_dir = {});
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds; port 0 picks a free port. Returns the bound port or throws.
    int bind(const std::string& host, int port);
    /// Serves until stop(). Call after bind().
    void listen();
    void stop();
    /// Waits until listen() accepts connections.
    void wait_until_ready();

    /// Upper bound on the long-poll wait.
    std::chrono::milliseconds max_wait{25000};

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace autofe::api
