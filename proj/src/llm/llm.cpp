#include "autofe/llm.hpp"

#include "autofe/csv.hpp"
#include "autofe/text_format.hpp"

#include <json.hpp>
#include <httplib.h>

#include <cmath>
#include <cstdlib>
#include <thread>

namespace autofe::llm {

using json = nlohmann::json;

void LlmConfig::check() const {
    if (!(temperature >= 0.0)) throw LlmError("temperature must be >= 0");
    if (max_retries < 0) throw LlmError("max_retries must be >= 0");
    if (max_response_tokens < 1) throw LlmError("max_response_tokens must be >= 1");
    if (!(request_timeout > 0.0)) throw LlmError("request_timeout must be > 0");
    if (!(backoff_initial >= 0.0)) throw LlmError("backoff must be >= 0");
}

UsageRecord accumulate_usage(const std::vector<UsageRecord>& records) {
    UsageRecord total;
    for (const auto& r : records) {
        total.prompt_tokens += r.prompt_tokens;
        total.completion_tokens += r.completion_tokens;
        total.estimated_cost += r.estimated_cost;
        total.latency += r.latency;
    }
    return total;
}

double estimate_cost(const LlmConfig& config, std::size_t prompt_tokens, std::size_t completion_tokens) {
    auto it = config.prices.find(config.model_name);
    if (it == config.prices.end()) return 0.0;
    return (static_cast<double>(prompt_tokens) * it->second.prompt +
            static_cast<double>(completion_tokens) * it->second.completion) /
           1000.0;
}

// ---------------------------------------------------------------------------

ScriptedBackend::ScriptedBackend(std::vector<std::string> playbook) : playbook_(std::move(playbook)) {}

std::vector<std::string> ScriptedBackend::load_playbook(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const DataError& e) {
        throw LlmError(std::string("cannot read playbook: ") + e.what());
    }
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_array()) throw LlmError("playbook " + path.string() + " is not a JSON array");
    std::vector<std::string> entries;
    for (const auto& e : j) {
        if (!e.is_string()) throw LlmError("playbook " + path.string() + " must contain only strings");
        entries.push_back(e.get<std::string>());
    }
    return entries;
}

Completion ScriptedBackend::complete(const std::string&) {
    std::lock_guard lock(mu_);
    if (next_ >= playbook_.size()) {
        throw LlmError("playbook exhausted after " + std::to_string(playbook_.size()) + " responses");
    }
    return Completion{playbook_[next_++], UsageRecord{}};
}

std::size_t ScriptedBackend::consumed() const {
    std::lock_guard lock(mu_);
    return next_;
}

// ---------------------------------------------------------------------------

namespace {

struct Url {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

Url split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw LlmError("endpoint URL needs a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

bool retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpBackend::HttpBackend(LlmConfig config, Sleeper sleeper) : config_(std::move(config)), sleep_(std::move(sleeper)) {
    config_.check();
    if (!sleep_) sleep_ = [](std::chrono::duration<double> d) { std::this_thread::sleep_for(d); };
}

Completion HttpBackend::complete(const std::string& prompt) {
    const char* key = std::getenv(config_.api_key_env_var.c_str());
    if (!key || !*key) throw LlmError("environment variable " + config_.api_key_env_var + " holding the API key is not set");

    const Url url = split_url(config_.endpoint_url);
    json body = {{"model", config_.model_name},
                 {"messages",
                  json::array({{{"role", "system"}, {"content", config_.system_message}},
                               {{"role", "user"}, {"content", prompt}}})},
                 {"temperature", config_.temperature},
                 {"max_tokens", config_.max_response_tokens}};
    const std::string payload = body.dump();
    httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) sleep_(std::chrono::duration<double>(config_.backoff_initial * std::pow(2.0, attempt - 1)));
        ++attempts_;

        httplib::Client client(url.origin);
        const auto secs = std::chrono::duration<double>(config_.request_timeout);
        client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
        client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
        client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));

        const auto start = std::chrono::steady_clock::now();
        auto res = client.Post(url.path, headers, payload, "application/json");
        const double latency = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        if (!res) {
            last_error = "request to " + config_.endpoint_url + " failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "endpoint returned HTTP " + std::to_string(res->status);
            if (retryable(res->status)) continue;
            throw LlmError(last_error + ": " + res->body.substr(0, 300));
        }

        json j = json::parse(res->body, nullptr, false);
        if (j.is_discarded()) throw LlmError("response body is not JSON");
        try {
            Completion c;
            c.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
            if (j.contains("usage") && j["usage"].is_object()) {
                c.usage.prompt_tokens = j["usage"].value("prompt_tokens", std::size_t{0});
                c.usage.completion_tokens = j["usage"].value("completion_tokens", std::size_t{0});
            }
            c.usage.latency = latency;
            c.usage.estimated_cost = estimate_cost(config_, c.usage.prompt_tokens, c.usage.completion_tokens);
            return c;
        } catch (const json::exception& e) {
            throw LlmError(std::string("malformed completion response: ") + e.what());
        }
    }
    throw LlmError(last_error + " (after " + std::to_string(config_.max_retries + 1) + " attempts)");
}

std::unique_ptr<Backend> make_backend(const LlmConfig& config) {
    config.check();
    if (config.backend == BackendKind::Scripted) {
        if (config.playbook_path.empty()) throw LlmError("the scripted backend needs a playbook file");
        return std::make_unique<ScriptedBackend>(ScriptedBackend::load_playbook(config.playbook_path));
    }
    return std::make_unique<HttpBackend>(config);
}

// ---------------------------------------------------------------------------

ExtractedCode extract_code_block(std::string_view text) {
    auto lines = split_lines(text);
    std::size_t i = 0;
    while (i < lines.size() && trim(lines[i]).substr(0, 3) != "```") ++i;
    if (i == lines.size()) throw ExtractionError("no fenced code block found; wrap the code in ```fedsl ... ```end");

    // Body: everything up to the next ``` anywhere, or to the end.
    std::string body;
    std::size_t j = i + 1;
    for (; j < lines.size(); ++j) {
        auto pos = lines[j].find("```");
        if (pos != std::string_view::npos) {
            body.append(lines[j].substr(0, pos));
            break;
        }
        body.append(lines[j]);
        body += '\n';
    }
    if (!body.empty() && body.back() == '\n') body.pop_back();

    ExtractedCode out{body, 0};
    // Count later blocks: each opening fence line followed by a closing one.
    bool inside = false;
    for (std::size_t k = j + 1; k < lines.size(); ++k) {
        if (trim(lines[k]).substr(0, 3) != "```") continue;
        if (!inside) ++out.extra_blocks;
        inside = !inside;
    }
    return out;
}

}  // namespace autofe::llm
