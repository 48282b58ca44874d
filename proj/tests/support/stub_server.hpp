#pragma once

// Loopback chat-completion endpoint for client tests.

#include <httplib.h>

#include <atomic>
#include <functional>
#include <string>
#include <thread>

namespace autofe::testing {

class StubServer {
public:
    /// `handler` returns (status, body) for the n-th request (0-based).
    using Handler = std::function<std::pair<int, std::string>(int n, const httplib::Request&)>;

    explicit StubServer(Handler handler) : handler_(std::move(handler)) {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            const int n = requests_++;
            auto [status, body] = handler_(n, req);
            res.status = status;
            res.set_content(body, "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer() {
        server_.stop();
        thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }
    int requests() const { return requests_; }

private:
    Handler handler_;
    httplib::Server server_;
    int port_ = 0;
    std::atomic<int> requests_{0};
    std::thread thread_;
};

inline std::string completion_body(const std::string& content, int prompt_tokens, int completion_tokens) {
    std::string escaped;
    for (char c : content) {
        if (c == '"' || c == '\\') escaped += '\\';
        if (c == '\n') {
            escaped += "\\n";
            continue;
        }
        escaped += c;
    }
    return R"({"choices":[{"message":{"role":"assistant","content":")" + escaped +
           R"("}}],"usage":{"prompt_tokens":)" + std::to_string(prompt_tokens) +
           R"(,"completion_tokens":)" + std::to_string(completion_tokens) + "}}";
}

}  // namespace autofe::testing
