#pragma once

#include "autofe/dataset.hpp"
#include "autofe/models/metrics.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace autofe::prompt {

/// Opening and closing code fences the model is asked to use.
inline constexpr std::string_view kOpenFence = "```fedsl";
inline constexpr std::string_view kCloseFence = "```end";
inline constexpr std::string_view kErrorPrefix = "Feedback: failed with error: ";

struct Feedback {
    enum class Kind { Error, Performance };
    Kind kind = Kind::Error;
    std::string text;
};

struct PromptContext {
    std::string description;
    std::vector<ColumnSummary> column_summaries;
    std::size_t train_row_count = 0;
    std::string target_name;
    /// Canonical texts of the scripts accepted so far, oldest first.
    std::vector<std::string> accepted_scripts;
    std::optional<Feedback> feedback;
    bool blinded = false;
};

/// Position-based replacement names c0, c1, ...
std::string blinded_name(std::size_t index);

/// Renders the full prompt. Pure: equal contexts give identical text.
/// When blinded, the description is replaced by a fixed notice and every
/// summarized column (target included) is shown as c<i> by position.
std::string build_prompt(const PromptContext& ctx);

/// Block for the next prompt after a failed iteration.
std::string render_error_feedback(const std::string& error_text);

struct PerformanceSummary {
    models::EvalMetrics before;
    models::EvalMetrics after;
    bool retained = false;
};

/// Three lines: before, after, improvement plus verdict. Three decimals.
std::string render_performance_feedback(const PerformanceSummary& p);

/// Words of the fixed prompt text (lower-case, alphanumeric runs). Anything
/// outside this set in a blinded prompt came from the data.
const std::set<std::string>& template_vocabulary();

}  // namespace autofe::prompt
