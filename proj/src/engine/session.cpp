#include "autofe/csv.hpp"
#include "autofe/engine.hpp"
#include "autofe/engine_json.hpp"
#include "autofe/prompt.hpp"
#include "autofe/random.hpp"
#include "autofe/text_format.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <stdexcept>

namespace autofe::engine {

namespace fs = std::filesystem;

void SessionConfig::check() const {
    if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
    if (!(sample_fraction > 0.0 && sample_fraction <= 1.0)) {
        throw std::invalid_argument("sample fraction must be in (0, 1]");
    }
    if (splits.n_splits < 1) throw std::invalid_argument("at least one validation split is needed");
    if (!(splits.valid_fraction > 0.0 && splits.valid_fraction < 1.0)) {
        throw std::invalid_argument("validation fraction must be in (0, 1)");
    }
}

dsl::FeatureScript Session::accepted_script() const {
    dsl::FeatureScript all;
    for (const auto& s : accepted) all = dsl::concat(all, s);
    return all;
}

models::EvalMetrics Session::current_metrics() const {
    for (auto it = iterations.rbegin(); it != iterations.rend(); ++it) {
        if (it->decision == Decision::Accepted && it->outcome) return it->outcome->mean_after();
    }
    return mean_metrics(baseline);
}

namespace {

constexpr std::size_t kPromptSamples = 3;

// Writes through a temporary so a crash never leaves a torn file.
void write_atomic(const fs::path& path, std::string_view text) {
    fs::path tmp = path;
    tmp += ".tmp";
    write_text_file(tmp, text);
    fs::rename(tmp, path);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string iteration_file(int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%03d.json", index);
    return buf;
}

Table sample_rows(const Table& table, double fraction, std::uint64_t seed) {
    if (fraction >= 1.0) return table;
    std::vector<std::size_t> rows(table.row_count());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    Rng rng(mix_seed(seed, 0x5A3D));
    rng.shuffle(rows);
    const auto keep = std::max<std::size_t>(2, static_cast<std::size_t>(fraction * static_cast<double>(rows.size())));
    rows.resize(std::min(keep, rows.size()));
    std::sort(rows.begin(), rows.end());
    return table.take(rows);
}

std::vector<std::string> usefulness_of(const dsl::FeatureScript& script) {
    std::vector<std::string> out;
    for (const auto& st : script.statements) {
        if (const auto* f = std::get_if<dsl::FeatureDef>(&st)) out.push_back(f->name + ": " + f->usefulness);
        if (const auto* d = std::get_if<dsl::DropColumn>(&st)) out.push_back("drop " + d->name + ": " + d->reason);
    }
    return out;
}

class Persister {
public:
    explicit Persister(fs::path dir) : dir_(std::move(dir)) {}

    bool enabled() const { return !dir_.empty(); }

    /// Records of a previous run with the same config, in order.
    std::vector<IterationRecord> resume(const Json& config) {
        std::vector<IterationRecord> out;
        if (!enabled()) return out;
        const auto cfg = dir_ / "config.json";
        if (!fs::exists(cfg)) return out;
        Json prev = Json::parse(read_text_file(cfg), nullptr, false);
        if (prev.is_discarded() || prev != config) {
            throw DataError("output directory " + dir_.string() + " holds a session with a different config");
        }
        for (int i = 1;; ++i) {
            const auto p = dir_ / "iterations" / iteration_file(i);
            if (!fs::exists(p)) break;
            Json j = Json::parse(read_text_file(p), nullptr, false);
            if (j.is_discarded()) break;
            out.push_back(record_from_json(j));
        }
        return out;
    }

    void start(const Json& config, const Session& s) {
        if (!enabled()) return;
        fs::create_directories(dir_ / "iterations");
        write_atomic(dir_ / "config.json", dump(config));
        write_atomic(dir_ / "baseline.json", dump(baseline_json(s)));
        summary(s);
    }

    void iteration(const Session& s) {
        if (!enabled()) return;
        const auto& r = s.iterations.back();
        write_atomic(dir_ / "iterations" / iteration_file(r.index), dump(record_json(r)));
        summary(s);
    }

    void summary(const Session& s) {
        if (!enabled()) return;
        write_atomic(dir_ / "accepted.fedsl", dsl::pretty_print(s.accepted_script()));
        write_atomic(dir_ / "report.json", dump(report_json(s)));
        write_atomic(dir_ / "report.csv", report_csv(s));
        std::vector<llm::UsageRecord> usage;
        for (const auto& r : s.iterations) usage.push_back(r.usage);
        write_atomic(dir_ / "usage.json", dump(usage_json(llm::accumulate_usage(usage))));
    }

private:
    fs::path dir_;
};

std::optional<prompt::Feedback> feedback_of(const IterationRecord& r) {
    if (r.decision == Decision::Error) return prompt::Feedback{prompt::Feedback::Kind::Error, r.error.value_or("")};
    return prompt::Feedback{prompt::Feedback::Kind::Performance, r.feedback};
}

}  // namespace

Session run_session(const SessionConfig& config, llm::Backend& backend, const SessionHooks& hooks) {
    config.check();
    return run_session(config, load_csv(config.data_path, config.target), backend, hooks);
}

Session run_session(const SessionConfig& config_in, const Table& loaded, llm::Backend& backend,
                    const SessionHooks& hooks) {
    config_in.check();
    if (config_in.decision_mode == DecisionMode::Review && !hooks.decisions) {
        throw std::invalid_argument("review mode needs a decision channel");
    }
    Session s;
    s.config = config_in;
    if (s.config.description.empty() && !s.config.description_path.empty()) {
        s.config.description = std::string(trim(read_text_file(s.config.description_path)));
    }
    const auto& cfg = s.config;

    Table table = sample_rows(loaded, cfg.sample_fraction, cfg.seed);
    s.original_schema = table.schema();
    for (const auto& c : table.columns()) s.original_names.push_back(c.name());
    s.working_names = s.original_names;
    if (cfg.blinded) {
        for (std::size_t i = 0; i < s.working_names.size(); ++i) s.working_names[i] = prompt::blinded_name(i);
        table = table.renamed(s.working_names);
    }
    s.row_count = table.row_count();

    const SplitSet splits = make_splits(table, cfg.splits);
    s.stratification_downgraded = splits.stratification_downgraded;
    s.baseline = evaluate_table(table, splits, cfg.model);

    const Json config_doc = config_json(cfg);
    Persister persist(cfg.out_dir);
    for (auto& r : persist.resume(config_doc)) {
        if (r.decision == Decision::Accepted) {
            auto script = dsl::parse(r.script);
            table = dsl::evaluate(script, table);
            s.accepted.push_back(std::move(script));
        }
        s.iterations.push_back(std::move(r));
    }
    persist.start(config_doc, s);
    if (hooks.on_start) hooks.on_start(s);

    std::optional<prompt::Feedback> feedback;
    if (!s.iterations.empty()) feedback = feedback_of(s.iterations.back());
    std::string description = cfg.description;

    const auto notify = [&](EventKind kind, const IterationRecord& r) {
        if (hooks.observer) hooks.observer(kind, r);
    };

    for (int index = static_cast<int>(s.iterations.size()) + 1; index <= cfg.iterations; ++index) {
        if (hooks.description_update) {
            if (auto d = hooks.description_update()) description = *d;
        }
        const auto started = std::chrono::steady_clock::now();
        IterationRecord rec;
        rec.index = index;
        rec.table_hash_before = table.content_hash();
        notify(EventKind::IterationStarted, rec);

        prompt::PromptContext ctx;
        ctx.description = description;
        ctx.column_summaries = summarize(table, std::min(kPromptSamples, table.row_count()), cfg.seed);
        ctx.train_row_count = table.row_count();
        ctx.target_name = table.target();
        for (const auto& a : s.accepted) ctx.accepted_scripts.push_back(dsl::pretty_print(a));
        ctx.feedback = feedback;
        ctx.blinded = cfg.blinded;
        rec.prompt = prompt::build_prompt(ctx);

        llm::Completion completion;
        try {
            completion = backend.complete(rec.prompt);
        } catch (const llm::LlmError& e) {
            s.halted = true;
            s.halt_reason = e.what();
            break;
        }
        rec.response = completion.text;
        rec.usage = completion.usage;

        std::optional<dsl::FeatureScript> script;
        try {
            auto extracted = llm::extract_code_block(rec.response);
            rec.code = extracted.code;
            rec.extra_blocks = extracted.extra_blocks;
            script = dsl::parse(rec.code);
            rec.script = dsl::pretty_print(*script);
            rec.usefulness = usefulness_of(*script);
            rec.outcome = evaluate_candidate(table, *script, splits, cfg.model);
        } catch (const llm::ExtractionError& e) {
            rec.error = e.what();
        } catch (const dsl::ExecError& e) {
            rec.error = e.describe();
        } catch (const models::MetricError& e) {
            rec.error = std::string("evaluation failed: ") + e.what();
        } catch (const std::invalid_argument& e) {
            rec.error = std::string("evaluation failed: ") + e.what();
        }

        if (rec.error) {
            rec.decision = Decision::Error;
            rec.feedback = prompt::render_error_feedback(*rec.error);
        } else {
            bool accept = rec.outcome->recommended;
            notify(EventKind::CandidateReady, rec);
            if (cfg.decision_mode == DecisionMode::Review) {
                notify(EventKind::DecisionRequired, rec);
                const auto verdict = hooks.decisions->await_decision(rec);
                accept = verdict.accept;
                rec.human_override = verdict.accept;
                rec.note = verdict.note;
            }
            if (accept) {
                table = dsl::evaluate(*script, table);
                s.accepted.push_back(*script);
            }
            rec.decision = accept ? Decision::Accepted : Decision::Rejected;
            rec.feedback = prompt::render_performance_feedback(
                {rec.outcome->mean_before(), rec.outcome->mean_after(), accept});
        }
        rec.table_hash_after = table.content_hash();
        rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        feedback = feedback_of(rec);
        s.iterations.push_back(std::move(rec));
        persist.iteration(s);
        notify(EventKind::IterationFinished, s.iterations.back());
    }
    persist.summary(s);
    notify(EventKind::SessionFinished, IterationRecord{});
    return s;
}

Table apply_script(const dsl::FeatureScript& script, const Table& table) {
    for (const auto& name : dsl::input_columns(script)) {
        if (!table.find(name)) throw DataError("schema mismatch: column '" + name + "' is missing");
    }
    return dsl::evaluate(script, table);
}

Table apply_final(const Session& session, const Table& new_table) {
    for (const auto& [name, dtype] : session.original_schema.columns) {
        const Column* c = new_table.find(name);
        if (c && c->dtype() != dtype) {
            throw DataError("schema mismatch: column '" + name + "' is " + std::string(dtype_name(c->dtype())) +
                            ", expected " + std::string(dtype_name(dtype)));
        }
    }
    if (!session.config.blinded) return apply_script(session.accepted_script(), new_table);

    // Blinded scripts use positional names; map them over and back.
    std::vector<std::string> names;
    for (const auto& c : new_table.columns()) names.push_back(c.name());
    if (names != session.original_names) {
        throw DataError("schema mismatch: a blinded session needs the original columns in their original order");
    }
    const Table out = apply_script(session.accepted_script(), new_table.renamed(session.working_names));
    std::vector<std::string> restored;
    for (const auto& c : out.columns()) {
        auto it = std::find(session.working_names.begin(), session.working_names.end(), c.name());
        restored.push_back(it == session.working_names.end()
                               ? c.name()
                               : session.original_names[static_cast<std::size_t>(it - session.working_names.begin())]);
    }
    return out.renamed(restored);
}

Session load_session(const fs::path& dir) {
    Session s;
    const auto read_json = [&](const std::string& name) {
        const auto p = dir / name;
        Json j = Json::parse(read_text_file(p), nullptr, false);
        if (j.is_discarded()) throw DataError(p.string() + " is not valid JSON");
        return j;
    };
    s.config = config_from_json(read_json("config.json"));
    s.config.out_dir = dir;
    const Json base = read_json("baseline.json");
    for (const auto& m : base.at("splits")) s.baseline.push_back(metrics_from_json(m));
    s.row_count = base.at("row_count").get<std::size_t>();
    s.original_schema.target = base.at("target").get<std::string>();
    for (const auto& c : base.at("columns")) {
        auto dtype = parse_dtype(c.at("dtype").get<std::string>());
        if (!dtype) throw DataError("unknown dtype in baseline.json");
        s.original_schema.columns.emplace_back(c.at("name").get<std::string>(), *dtype);
        s.original_names.push_back(c.at("name").get<std::string>());
        s.working_names.push_back(c.at("working_name").get<std::string>());
    }
    s.stratification_downgraded = base.value("stratification_downgraded", false);
    for (int i = 1;; ++i) {
        const auto p = dir / "iterations" / iteration_file(i);
        if (!fs::exists(p)) break;
        s.iterations.push_back(record_from_json(read_json("iterations/" + iteration_file(i))));
        if (s.iterations.back().decision == Decision::Accepted) {
            s.accepted.push_back(dsl::parse(s.iterations.back().script));
        }
    }
    const Json report = read_json("report.json");
    s.halted = report.value("halted", false);
    s.halt_reason = report.value("halt_reason", "");
    return s;
}

}  // namespace autofe::engine
