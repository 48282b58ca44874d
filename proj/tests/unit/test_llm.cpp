#include "autofe/llm.hpp"
#include "autofe/prompt.hpp"
#include "stub_server.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace autofe;
using namespace autofe::llm;

namespace {

LlmConfig stub_config(const testing::StubServer& s) {
    LlmConfig c;
    c.backend = BackendKind::Http;
    c.endpoint_url = s.url();
    c.model_name = "stub-model";
    c.request_timeout = 5.0;
    c.max_retries = 3;
    c.backoff_initial = 0.5;
    c.api_key_env_var = "AUTOFE_TEST_KEY";
    c.prices["stub-model"] = Price{0.03, 0.06};
    return c;
}

struct KeySet {
    KeySet() { ::setenv("AUTOFE_TEST_KEY", "secret", 1); }
    ~KeySet() { ::unsetenv("AUTOFE_TEST_KEY"); }
};

}  // namespace

TEST_CASE("scripted backend replays in order then fails") {
    ScriptedBackend b({"A", "B"});
    CHECK(b.complete("p").text == "A");
    CHECK(b.complete("p").text == "B");
    CHECK(b.consumed() == 2);
    CHECK_THROWS_WITH_AS(b.complete("p"), "playbook exhausted after 2 responses", LlmError);
}

TEST_CASE("scripted playbook file") {
    const auto dir = std::filesystem::temp_directory_path() / "autofe_test_llm";
    std::filesystem::create_directories(dir);
    const auto good = dir / "good.json";
    std::ofstream(good) << R"(["one", "two\nlines"])";
    ScriptedBackend b(ScriptedBackend::load_playbook(good));
    CHECK(b.complete("").text == "one");
    CHECK(b.complete("").text == "two\nlines");

    const auto bad = dir / "bad.json";
    std::ofstream(bad) << R"({"a": 1})";
    CHECK_THROWS_AS(ScriptedBackend::load_playbook(bad), LlmError);
    std::ofstream(bad) << R"([1, 2])";
    CHECK_THROWS_AS(ScriptedBackend::load_playbook(bad), LlmError);
    CHECK_THROWS_AS(ScriptedBackend::load_playbook(dir / "missing.json"), LlmError);

    LlmConfig c;
    c.backend = BackendKind::Scripted;
    CHECK_THROWS_AS(make_backend(c), LlmError);
    c.playbook_path = good;
    CHECK(make_backend(c)->complete("").text == "one");
    std::filesystem::remove_all(dir);
}

TEST_CASE("extract first fenced block") {
    CHECK(extract_code_block("text\n```fedsl\nX\n```end\nmore").code == "X");
    CHECK(extract_code_block("```fedsl\nfeature \"a\" {\n  expr: 1\n}\n```end").code == "feature \"a\" {\n  expr: 1\n}");
    CHECK(extract_code_block("```\nA\n```").code == "A");
    CHECK(extract_code_block("intro\n```fedsl\nA\nB\n").code == "A\nB");
    CHECK(extract_code_block("```fedsl\nA\n```end\n```fedsl\nB\n```end\n```fedsl\nC\n```end").extra_blocks == 2);
    CHECK(extract_code_block("```fedsl\nA\n```end").extra_blocks == 0);
    CHECK_THROWS_AS(extract_code_block("no code here"), ExtractionError);
    CHECK_THROWS_AS(extract_code_block(""), ExtractionError);
}

TEST_CASE("extracted body never contains a fence") {
    const char* responses[] = {"```fedsl\n```end", "a\n```fedsl\nx\n```end\n```fedsl\ny",
                               "  ```fedsl\n  drop \"a\" reason \"r\"\n  ```end", "```fedsl\nx```end"};
    for (const char* r : responses) {
        const auto code = extract_code_block(r).code;
        CHECK(code.find("```") == std::string::npos);
    }
    CHECK(extract_code_block("```fedsl\nx```end").code == "x");
}

TEST_CASE("usage accumulation") {
    CHECK(accumulate_usage({}).prompt_tokens == 0);
    CHECK(accumulate_usage({}).estimated_cost == 0.0);
    const auto total = accumulate_usage({{10, 4, 0.01, 0.5}, {20, 6, 0.02, 0.25}});
    CHECK(total.prompt_tokens == 30);
    CHECK(total.completion_tokens == 10);
    CHECK(total.estimated_cost == doctest::Approx(0.03).epsilon(1e-12));
    CHECK(total.latency == doctest::Approx(0.75));
}

TEST_CASE("cost estimate") {
    LlmConfig c;
    c.model_name = "m";
    c.prices["m"] = Price{0.03, 0.06};
    CHECK(estimate_cost(c, 1000, 500) == doctest::Approx(0.06));
    c.model_name = "unknown";
    CHECK(estimate_cost(c, 1000, 500) == 0.0);
}

TEST_CASE("config checks") {
    LlmConfig c;
    c.temperature = -1;
    CHECK_THROWS_AS(c.check(), LlmError);
    c = {};
    c.max_retries = -1;
    CHECK_THROWS_AS(c.check(), LlmError);
    c = {};
    c.request_timeout = 0;
    CHECK_THROWS_AS(c.check(), LlmError);
}

TEST_CASE("http backend round trip") {
    KeySet key;
    std::string seen_auth, seen_body;
    testing::StubServer server([&](int, const httplib::Request& req) {
        seen_auth = req.get_header_value("Authorization");
        seen_body = req.body;
        return std::pair{200, testing::completion_body("```fedsl\nX\n```end", 100, 20)};
    });
    HttpBackend b(stub_config(server));
    const auto c = b.complete("hello prompt");
    CHECK(c.text == "```fedsl\nX\n```end");
    CHECK(c.usage.prompt_tokens == 100);
    CHECK(c.usage.completion_tokens == 20);
    CHECK(c.usage.estimated_cost == doctest::Approx(0.003 + 0.0012));
    CHECK(c.usage.latency > 0.0);
    CHECK(b.attempts() == 1);
    CHECK(seen_auth == "Bearer secret");
    const auto j = nlohmann::json::parse(seen_body);
    CHECK(j["model"] == "stub-model");
    CHECK(j["temperature"] == 0.5);
    CHECK(j["messages"][1]["content"] == "hello prompt");
}

TEST_CASE("http backend retries with backoff") {
    KeySet key;
    testing::StubServer server([](int n, const httplib::Request&) {
        if (n == 0) return std::pair{500, std::string("{}")};
        if (n == 1) return std::pair{429, std::string("{}")};
        return std::pair{200, testing::completion_body("ok", 1, 1)};
    });
    std::vector<double> sleeps;
    HttpBackend b(stub_config(server), [&](std::chrono::duration<double> d) { sleeps.push_back(d.count()); });
    CHECK(b.complete("p").text == "ok");
    CHECK(b.attempts() == 3);
    CHECK(sleeps == std::vector<double>{0.5, 1.0});
}

TEST_CASE("http backend gives up after max_retries + 1 attempts") {
    KeySet key;
    testing::StubServer server([](int, const httplib::Request&) { return std::pair{503, std::string("{}")}; });
    auto cfg = stub_config(server);
    HttpBackend b(cfg, [](std::chrono::duration<double>) {});
    CHECK_THROWS_AS(b.complete("p"), LlmError);
    CHECK(b.attempts() == static_cast<std::size_t>(cfg.max_retries + 1));
    CHECK(server.requests() == cfg.max_retries + 1);
}

TEST_CASE("http backend does not retry client errors") {
    KeySet key;
    testing::StubServer server([](int, const httplib::Request&) { return std::pair{400, std::string("{}")}; });
    HttpBackend b(stub_config(server), [](std::chrono::duration<double>) {});
    CHECK_THROWS_AS(b.complete("p"), LlmError);
    CHECK(b.attempts() == 1);
}

TEST_CASE("http backend rejects malformed bodies") {
    KeySet key;
    testing::StubServer server([](int n, const httplib::Request&) {
        return std::pair{200, std::string(n == 0 ? "not json" : R"({"choices":[]})")};
    });
    HttpBackend b(stub_config(server), [](std::chrono::duration<double>) {});
    CHECK_THROWS_AS(b.complete("p"), LlmError);
    CHECK_THROWS_AS(b.complete("p"), LlmError);
}

TEST_CASE("missing usage counts as zero tokens") {
    KeySet key;
    testing::StubServer server([](int, const httplib::Request&) {
        return std::pair{200, std::string(R"({"choices":[{"message":{"content":"hi"}}]})")};
    });
    HttpBackend b(stub_config(server));
    const auto c = b.complete("p");
    CHECK(c.text == "hi");
    CHECK(c.usage.prompt_tokens == 0);
    CHECK(c.usage.estimated_cost == 0.0);
}

TEST_CASE("transport failure is retried then reported") {
    KeySet key;
    int port = 0;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    LlmConfig c;
    c.backend = BackendKind::Http;
    c.endpoint_url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    c.api_key_env_var = "AUTOFE_TEST_KEY";
    c.max_retries = 2;
    c.request_timeout = 2.0;
    HttpBackend b(c, [](std::chrono::duration<double>) {});
    CHECK_THROWS_AS(b.complete("p"), LlmError);
    CHECK(b.attempts() == 3);
}

TEST_CASE("missing API key is an error") {
    ::unsetenv("AUTOFE_TEST_KEY_ABSENT");
    LlmConfig c;
    c.backend = BackendKind::Http;
    c.api_key_env_var = "AUTOFE_TEST_KEY_ABSENT";
    HttpBackend b(c);
    CHECK_THROWS_WITH_AS(b.complete("p"),
                         "environment variable AUTOFE_TEST_KEY_ABSENT holding the API key is not set", LlmError);
    CHECK(b.attempts() == 0);
}
