#pragma once

// The feature-engineering loop: prompt, generate, validate, execute,
// evaluate, then keep or roll back.

#include "autofe/dataset.hpp"
#include "autofe/dsl/dsl.hpp"
#include "autofe/llm.hpp"
#include "autofe/models/classifier.hpp"
#include "autofe/models/metrics.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace autofe::engine {

enum class DecisionMode { Auto, Review };
enum class Decision { Accepted, Rejected, Error };

std::string_view decision_name(Decision d);
std::optional<Decision> parse_decision(std::string_view name);

struct SessionConfig {
    std::filesystem::path data_path;
    std::filesystem::path description_path;
    std::string target;
    /// Read from description_path when empty.
    std::string description;
    int iterations = 10;
    models::ModelSpec model;
    SplitPlan splits;
    llm::LlmConfig llm;
    DecisionMode decision_mode = DecisionMode::Auto;
    bool blinded = false;
    std::uint64_t seed = 0;
    /// Fraction of the dataset's rows kept for the session (seeded sample).
    double sample_fraction = 1.0;
    std::filesystem::path out_dir;

    /// Throws std::invalid_argument.
    void check() const;
};

/// Metrics of one split before (P) and after (P') a candidate.
struct EvalOutcome {
    std::vector<models::EvalMetrics> before;
    std::vector<models::EvalMetrics> after;
    double mean_delta_auc = 0.0;
    double mean_delta_acc = 0.0;
    double decision_score = 0.0;
    /// decision_score > 0.
    bool recommended = false;

    /// Fills the means, score and recommendation from the per-split lists.
    static EvalOutcome from_splits(std::vector<models::EvalMetrics> before, std::vector<models::EvalMetrics> after);

    models::EvalMetrics mean_before() const;
    models::EvalMetrics mean_after() const;
};

models::EvalMetrics mean_metrics(const std::vector<models::EvalMetrics>& m);

/// Scores `table` on every split: preprocessor and model are fit on the
/// train rows and scored on the valid rows. Splits run in parallel.
std::vector<models::EvalMetrics> evaluate_table(const Table& table, const SplitSet& splits,
                                                const models::ModelSpec& spec);

/// P on `base`, P' on evaluate(script, base), same split indices for both.
/// Throws dsl::ExecError when the script fails to validate or run.
EvalOutcome evaluate_candidate(const Table& base, const dsl::FeatureScript& script, const SplitSet& splits,
                               const models::ModelSpec& spec);
EvalOutcome evaluate_candidate(const Table& base, const dsl::FeatureScript& script, const SplitPlan& plan,
                               const models::ModelSpec& spec);

struct IterationRecord {
    int index = 0;  // 1-based
    std::string prompt;
    std::string response;
    std::string code;
    /// Canonical text of the parsed script; empty when parsing failed.
    std::string script;
    std::vector<std::string> usefulness;
    std::optional<EvalOutcome> outcome;
    std::optional<std::string> error;
    Decision decision = Decision::Error;
    /// Set when a reviewer made the call; holds their verdict.
    std::optional<bool> human_override;
    std::string note;
    /// Feedback handed to the next prompt.
    std::string feedback;
    std::size_t extra_blocks = 0;
    std::uint64_t table_hash_before = 0;
    std::uint64_t table_hash_after = 0;
    llm::UsageRecord usage;
    double wall_time = 0.0;  // seconds
};

enum class EventKind { IterationStarted, CandidateReady, DecisionRequired, IterationFinished, SessionFinished };

std::string_view event_kind_name(EventKind kind);

struct Session;

/// Receives the candidate in review mode and blocks until a person decides.
class DecisionChannel {
public:
    struct Verdict {
        bool accept = false;
        std::string note;
    };
    virtual ~DecisionChannel() = default;
    virtual Verdict await_decision(const IterationRecord& candidate) = 0;
};

struct SessionHooks {
    DecisionChannel* decisions = nullptr;
    std::function<void(EventKind, const IterationRecord&)> observer;
    /// Polled before each prompt; a value replaces the description.
    std::function<std::optional<std::string>()> description_update;
    /// Called once the session's config and baseline are known.
    std::function<void(const Session&)> on_start;
};

struct Session {
    SessionConfig config;
    /// Column names of the loaded table; the engine works on blinded
    /// names c0, c1, ... when config.blinded is set.
    std::vector<std::string> original_names;
    std::vector<std::string> working_names;
    Schema original_schema;
    std::size_t row_count = 0;
    std::vector<models::EvalMetrics> baseline;
    std::vector<IterationRecord> iterations;
    /// Accepted scripts, oldest first; their concatenation is the running
    /// transformation.
    std::vector<dsl::FeatureScript> accepted;
    bool halted = false;
    std::string halt_reason;
    bool stratification_downgraded = false;

    dsl::FeatureScript accepted_script() const;
    /// The latest scores: the last accepted candidate's P', else the baseline.
    models::EvalMetrics current_metrics() const;
};

/// Loads the dataset and runs the loop. With a non-empty out_dir the
/// session is persisted after every iteration, and an existing directory
/// for the same config resumes after its last complete iteration.
/// LLM failures halt the session (halted = true) with results kept.
Session run_session(const SessionConfig& config, llm::Backend& backend, const SessionHooks& hooks = {});

/// Same, on a table that is already loaded.
Session run_session(const SessionConfig& config, const Table& table, llm::Backend& backend,
                    const SessionHooks& hooks = {});

/// Applies the session's accepted transformation to new rows with the
/// original column layout. Throws DataError on schema mismatch.
Table apply_final(const Session& session, const Table& new_table);

/// Applies a script after checking that every column it reads exists.
Table apply_script(const dsl::FeatureScript& script, const Table& table);

/// Session read back from a directory written by run_session.
Session load_session(const std::filesystem::path& dir);

struct BenchmarkDataset {
    std::string name;
    Table table;
    dsl::FeatureScript script;
};

struct BenchmarkRow {
    std::string dataset;
    std::string model;
    std::string condition;  // "without" or "with"
    std::vector<double> roc_auc;  // one per repetition
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation
};

struct BenchmarkReport {
    std::vector<std::uint64_t> seeds;
    std::vector<BenchmarkRow> rows;
};

/// Each repetition draws a stratified 50/50 train/test split from
/// mix_seed(seed, r) and scores every dataset x model x condition on it.
BenchmarkReport run_benchmark(const std::vector<BenchmarkDataset>& datasets,
                              const std::vector<models::ModelSpec>& models, int repetitions, std::uint64_t seed);

/// "0.6989 ±.08": mean to four places, std to two without the leading zero.
std::string format_mean_std(double mean, double stddev);

std::string benchmark_csv(const BenchmarkReport& report);

}  // namespace autofe::engine
