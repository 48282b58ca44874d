#include "autofe/api.hpp"
#include "autofe/dataset.hpp"
#include "playbooks.hpp"
#include "schema_check.hpp"
#include "session_files.hpp"

#include <doctest.h>
#include <httplib.h>

#include <chrono>
#include <future>
#include <thread>

using namespace autofe;
using namespace autofe::api;
using engine::Json;

namespace {

testing::SchemaChecker& schemas() {
    static testing::SchemaChecker checker(AUTOFE_API_SCHEMA_DIR);
    return checker;
}

void check_schema(const std::string& ref, const Json& value) {
    const auto errors = schemas().check(ref, value);
    for (const auto& e : errors) MESSAGE(ref << " " << e);
    CHECK(errors.empty());
}

engine::SessionConfig review_config() {
    engine::SessionConfig c;
    c.target = "Class";
    c.description = "Board positions at the end of tic-tac-toe games; x moved first.";
    c.iterations = 2;
    c.seed = 1;
    c.splits.seed = 1;
    c.sample_fraction = 0.1;
    c.decision_mode = engine::DecisionMode::Review;
    return c;
}

/// Server on a loopback port, listening on its own thread.
struct LiveServer {
    Server server;
    int port;
    std::thread thread;
    explicit LiveServer(SessionMonitor& m, std::filesystem::path static_dir = {})
        : server(m, std::move(static_dir)), port(server.bind("127.0.0.1", 0)) {
        thread = std::thread([this] { server.listen(); });
        server.wait_until_ready();
    }
    ~LiveServer() {
        server.stop();
        thread.join();
    }
    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port);
        c.set_read_timeout(30, 0);
        return c;
    }
};

Json get_json(httplib::Client& c, const std::string& path, int expected_status = 200) {
    auto res = c.Get(path);
    REQUIRE(res);
    CHECK(res->status == expected_status);
    return Json::parse(res->body);
}

std::pair<int, Json> post_json(httplib::Client& c, const std::string& path, const std::string& body) {
    auto res = c.Post(path, body, "application/json");
    REQUIRE(res);
    return {res->status, Json::parse(res->body)};
}

/// Polls events until one of `kind` shows up; returns it.
Json wait_for(httplib::Client& c, std::uint64_t& after, const std::string& kind) {
    for (int attempt = 0; attempt < 50; ++attempt) {
        Json batch = get_json(c, "/api/events?after=" + std::to_string(after) + "&wait=5");
        check_schema("events.schema.json", batch);
        after = batch["last"].get<std::uint64_t>();
        for (const auto& e : batch["events"]) {
            if (e["kind"] == kind) return e;
        }
    }
    FAIL("no " << kind << " event");
    return {};
}

}  // namespace

TEST_CASE("review session driven over HTTP") {
    const Table board = gen_tictactoe();
    SessionMonitor monitor;
    LiveServer live(monitor);
    auto client = live.client();

    llm::ScriptedBackend backend(testing::tictactoe_playbook_o_first());
    auto run = std::async(std::launch::async,
                          [&] { return engine::run_session(review_config(), board, backend, monitor.hooks()); });

    std::uint64_t after = 0;
    Json first = wait_for(client, after, "decision_required");
    CHECK(first["iteration"] == 1);
    CHECK(first["payload"]["status"] == "awaiting-decision");
    CHECK(first["payload"]["outcome"]["recommended"] == true);

    Json session = get_json(client, "/api/session");
    check_schema("session.schema.json", session);
    CHECK(session["status"] == "running");
    CHECK(session["awaiting_decision"] == 1);
    CHECK(session["baseline"]["row_count"] == 95);
    check_schema("iteration.schema.json", get_json(client, "/api/iterations/1"));

    auto [wrong_status, wrong] = post_json(client, "/api/iterations/2/decision", R"({"accept": true})");
    CHECK(wrong_status == 409);
    check_schema("common.schema.json#/definitions/error", wrong);
    CHECK(wrong["error"] == "stale decision: iteration 2 is not awaiting a decision");

    for (const char* bad : {"", "[]", R"({"accept": "yes"})", R"({"accept": true, "note": 3})"}) {
        CHECK(post_json(client, "/api/iterations/1/decision", bad).first == 400);
    }

    const std::string request = R"({"text": "Final tic-tac-toe boards. Class says whether x won."})";
    check_schema("description.schema.json#/definitions/request", Json::parse(request));
    auto [desc_status, desc] = post_json(client, "/api/description", request);
    CHECK(desc_status == 200);
    check_schema("description.schema.json#/definitions/response", desc);
    CHECK(post_json(client, "/api/description", R"({"txt": 1})").first == 400);

    const std::string accept = R"({"accept": true, "note": "counts lines correctly"})";
    check_schema("decision.schema.json#/definitions/request", Json::parse(accept));
    auto [ok_status, ok] = post_json(client, "/api/iterations/1/decision", accept);
    CHECK(ok_status == 200);
    check_schema("decision.schema.json#/definitions/response", ok);
    CHECK(ok == Json{{"iteration", 1}, {"accept", true}});
    CHECK(post_json(client, "/api/iterations/1/decision", accept).first == 409);

    Json second = wait_for(client, after, "decision_required");
    CHECK(second["iteration"] == 2);
    CHECK(post_json(client, "/api/iterations/2/decision", R"({"accept": false})").first == 200);

    wait_for(client, after, "session_finished");
    const engine::Session s = run.get();

    Json iterations = get_json(client, "/api/iterations");
    check_schema("iterations.schema.json", iterations);
    REQUIRE(iterations.size() == 2);
    CHECK(iterations[0]["status"] == "accepted");
    CHECK(iterations[0]["human_override"] == true);
    CHECK(iterations[0]["note"] == "counts lines correctly");
    CHECK(iterations[1]["status"] == "rejected");
    CHECK(iterations[1]["human_override"] == false);
    CHECK(iterations[1]["table_hash_before"] == iterations[1]["table_hash_after"]);
    CHECK(iterations[1]["prompt"].get<std::string>().find("Class says whether x won.") != std::string::npos);
    CHECK(iterations[0]["prompt"].get<std::string>().find("Class says whether x won.") == std::string::npos);

    CHECK(s.iterations[0].decision == engine::Decision::Accepted);
    CHECK(s.iterations[1].decision == engine::Decision::Rejected);
    CHECK(s.accepted.size() == 1);

    session = get_json(client, "/api/session");
    check_schema("session.schema.json", session);
    CHECK(session["status"] == "finished");
    CHECK(session["awaiting_decision"].is_null());
    CHECK(session["description"] == "Final tic-tac-toe boards. Class says whether x won.");

    // Events form one gap-free sequence.
    Json all = get_json(client, "/api/events?after=0&wait=0");
    check_schema("events.schema.json", all);
    for (std::size_t i = 0; i < all["events"].size(); ++i) CHECK(all["events"][i]["seq"] == i + 1);
    CHECK(get_json(client, "/api/events?after=" + std::to_string(all["last"].get<int>()) + "&wait=0")["events"].empty());
}

TEST_CASE("error responses") {
    SessionMonitor monitor;
    LiveServer live(monitor);
    auto client = live.client();
    Json missing = get_json(client, "/api/iterations/99", 404);
    check_schema("common.schema.json#/definitions/error", missing);
    CHECK(get_json(client, "/api/events?after=x", 400).contains("error"));
    CHECK(get_json(client, "/api/events?wait=-1", 400).contains("error"));
    CHECK(post_json(client, "/api/iterations/1/decision", R"({"accept": true})").first == 409);

    auto index = client.Get("/");
    REQUIRE(index);
    CHECK(index->status == 200);
    CHECK(index->body.find("/api/session") != std::string::npos);
}

TEST_CASE("static files are served when the directory exists") {
    const auto dir = testing::scratch_dir("api_static");
    write_text_file(dir / "index.html", "<p>dashboard</p>");
    SessionMonitor monitor;
    LiveServer live(monitor, dir);
    auto client = live.client();
    auto res = client.Get("/index.html");
    REQUIRE(res);
    CHECK(res->body == "<p>dashboard</p>");
    CHECK(get_json(client, "/api/session")["status"] == "starting");
    std::filesystem::remove_all(dir);
}

TEST_CASE("persisted sessions can be served read-only") {
    const Table board = gen_tictactoe();
    const auto dir = testing::scratch_dir("api_load");
    auto cfg = review_config();
    cfg.decision_mode = engine::DecisionMode::Auto;
    cfg.out_dir = dir;
    llm::ScriptedBackend backend(testing::tictactoe_playbook_o_first());
    engine::run_session(cfg, board, backend);

    SessionMonitor monitor;
    monitor.load(engine::load_session(dir));
    LiveServer live(monitor);
    auto client = live.client();

    Json session = get_json(client, "/api/session");
    check_schema("session.schema.json", session);
    CHECK(session["status"] == "finished");
    CHECK(session["iterations"] == 2);
    Json iterations = get_json(client, "/api/iterations");
    check_schema("iterations.schema.json", iterations);
    CHECK(iterations[0]["status"] == "accepted");

    Json events = get_json(client, "/api/events?after=0&wait=0");
    check_schema("events.schema.json", events);
    CHECK(events["events"].back()["kind"] == "session_finished");
    CHECK(events["status"] == "finished");
    std::filesystem::remove_all(dir);
}

TEST_CASE("closing the monitor releases a pending decision") {
    const Table board = gen_tictactoe();
    SessionMonitor monitor;
    auto cfg = review_config();
    cfg.iterations = 1;
    llm::ScriptedBackend backend(testing::tictactoe_playbook_o_first());
    auto run = std::async(std::launch::async, [&] { return engine::run_session(cfg, board, backend, monitor.hooks()); });
    for (int i = 0; i < 500 && !monitor.awaiting(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(20));
    REQUIRE(monitor.awaiting() == 1);
    monitor.close();
    const engine::Session s = run.get();
    CHECK(s.iterations[0].decision == engine::Decision::Rejected);
    CHECK(s.iterations[0].note == "session stopped before a decision");
    CHECK(monitor.decide(1, true, "") == SessionMonitor::DecisionResult::Stale);
}

TEST_CASE("schema checker rejects malformed payloads") {
    CHECK_FALSE(schemas().check("decision.schema.json#/definitions/request", Json{{"accept", "yes"}}).empty());
    CHECK_FALSE(schemas().check("decision.schema.json#/definitions/request", Json::object()).empty());
    CHECK_FALSE(schemas().check("decision.schema.json#/definitions/response", Json{{"iteration", 1}, {"accept", true}, {"x", 1}}).empty());
    CHECK_FALSE(schemas().check("events.schema.json", Json{{"events", Json::array({Json{{"seq", 1}, {"kind", "bogus"}, {"iteration", 0}, {"payload", Json{{"iterations", 0}}}}})}, {"last", 1}, {"status", "finished"}}).empty());
    CHECK_FALSE(schemas().check("common.schema.json#/definitions/metrics", Json{{"roc_auc", 1.5}, {"accuracy", 0.5}}).empty());
    CHECK(schemas().check("common.schema.json#/definitions/metrics", Json{{"roc_auc", 1.0}, {"accuracy", 0.5}}).empty());
}
