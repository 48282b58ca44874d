#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace autofe::llm {

/// Any failure to obtain a completion: transport, HTTP status, bad body,
/// exhausted playbook or missing credentials.
class LlmError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No fenced code block in a response.
class ExtractionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class BackendKind { Http, Scripted };

/// USD per 1000 tokens.
struct Price {
    double prompt = 0.0;
    double completion = 0.0;
};

struct LlmConfig {
    BackendKind backend = BackendKind::Scripted;
    std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
    std::string model_name = "gpt-4";
    double temperature = 0.5;
    int max_response_tokens = 1024;
    double request_timeout = 60.0;  // seconds
    int max_retries = 3;
    double backoff_initial = 1.0;  // seconds, doubled per retry
    std::string api_key_env_var = "LLM_API_KEY";
    std::string system_message = "You are an expert data scientist writing feature engineering code.";
    std::filesystem::path playbook_path;
    std::map<std::string, Price> prices;

    /// Throws LlmError on out-of-range values.
    void check() const;
};

struct UsageRecord {
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;
    double estimated_cost = 0.0;
    double latency = 0.0;  // seconds
};

UsageRecord accumulate_usage(const std::vector<UsageRecord>& records);

struct Completion {
    std::string text;
    UsageRecord usage;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual Completion complete(const std::string& prompt) = 0;
};

/// Canned responses consumed in order.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(std::vector<std::string> playbook);
    /// Reads a JSON array of strings.
    static std::vector<std::string> load_playbook(const std::filesystem::path& path);

    Completion complete(const std::string& prompt) override;
    std::size_t consumed() const;

private:
    mutable std::mutex mu_;
    std::vector<std::string> playbook_;
    std::size_t next_ = 0;
};

/// Chat-completion client. Transport failures, 429 and 5xx responses are
/// retried with exponential backoff; other statuses fail immediately.
class HttpBackend : public Backend {
public:
    using Sleeper = std::function<void(std::chrono::duration<double>)>;

    explicit HttpBackend(LlmConfig config, Sleeper sleeper = {});

    Completion complete(const std::string& prompt) override;
    /// Requests sent so far, retries included.
    std::size_t attempts() const { return attempts_; }

private:
    LlmConfig config_;
    Sleeper sleep_;
    std::size_t attempts_ = 0;
};

std::unique_ptr<Backend> make_backend(const LlmConfig& config);

/// Cost of a call from the config's price table; zero for unknown models.
double estimate_cost(const LlmConfig& config, std::size_t prompt_tokens, std::size_t completion_tokens);

struct ExtractedCode {
    std::string code;
    /// Fenced blocks after the first one; they are ignored.
    std::size_t extra_blocks = 0;
};

/// Body of the first fenced block. The opening fence is the first line that
/// starts with ``` (any tag); the block ends at the next ``` (normally
/// ```end) or at the end of the text. Throws ExtractionError when there is
/// no opening fence.
ExtractedCode extract_code_block(std::string_view response);

}  // namespace autofe::llm
