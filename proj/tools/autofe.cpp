// autofe: iterative feature engineering sessions, script deployment and
// the repeated-split evaluation, from the command line.
//
// Exit codes: 0 ok, 2 usage, 3 data or script error, 4 model backend error
// or halted session, 5 internal error.

#include "autofe/api.hpp"
#include "autofe/csv.hpp"
#include "autofe/dataset.hpp"
#include "autofe/dsl/dsl.hpp"
#include "autofe/engine.hpp"
#include "autofe/engine_json.hpp"
#include "autofe/llm.hpp"
#include "autofe/text_format.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using namespace autofe;

namespace {

enum Exit { kOk = 0, kUsage = 2, kData = 3, kLlm = 4, kInternal = 5 };

struct RunOptions {
    std::string data;
    std::string target;
    std::string description;
    int iterations = 10;
    std::string model = "logreg";
    std::string llm = "http";
    std::string playbook;
    std::string endpoint;
    std::string model_name;
    double temperature = 0.5;
    std::uint64_t seed = 0;
    bool blind = false;
    bool review = false;
    std::string out = "autofe_session";
    int serve_port = -1;
    std::string host = "127.0.0.1";
    std::string api_key_env = "LLM_API_KEY";
    double sample_fraction = 1.0;
    std::size_t splits = 10;
    int max_retries = 3;
    std::string static_dir;
    bool keep_serving = false;
};

void add_run_options(CLI::App* cmd, RunOptions& o, bool required) {
    cmd->add_option("--data", o.data, "Training data CSV")->required(required)->check(CLI::ExistingFile);
    cmd->add_option("--target", o.target, "Target column")->required(required);
    cmd->add_option("--description", o.description, "Dataset description text file")->check(CLI::ExistingFile);
    cmd->add_option("--iterations", o.iterations, "Number of iterations")->capture_default_str();
    cmd->add_option("--model", o.model, "Evaluation classifier")
        ->check(CLI::IsMember({"logreg", "forest"}))
        ->capture_default_str();
    cmd->add_option("--llm", o.llm, "Model backend")->check(CLI::IsMember({"http", "scripted"}))->capture_default_str();
    cmd->add_option("--playbook", o.playbook, "JSON array of canned responses (scripted backend)");
    cmd->add_option("--endpoint", o.endpoint, "Chat-completions URL (http backend)");
    cmd->add_option("--model-name", o.model_name, "Model name sent to the endpoint");
    cmd->add_option("--temperature", o.temperature, "Sampling temperature")->capture_default_str();
    cmd->add_option("--seed", o.seed, "Seed for splits, sampling and models")->capture_default_str();
    cmd->add_flag("--blind", o.blind, "Hide column names and the description from the model");
    cmd->add_flag("--review", o.review, "Wait for a human decision on each candidate (needs --serve-port)");
    cmd->add_option("--out", o.out, "Session directory")->capture_default_str();
    cmd->add_option("--api-key-env", o.api_key_env, "Environment variable holding the API key")->capture_default_str();
    cmd->add_option("--sample-fraction", o.sample_fraction, "Fraction of rows used by the session")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--splits", o.splits, "Train/validation splits per evaluation")->capture_default_str();
    cmd->add_option("--max-retries", o.max_retries, "Retries for transient endpoint failures")->capture_default_str();
    cmd->add_option("--host", o.host, "Bind address for the review API")->capture_default_str();
    cmd->add_option("--static-dir", o.static_dir, "Dashboard bundle served at /");
}

int cmd_run(const RunOptions& o);

engine::SessionConfig session_config(const RunOptions& o) {
    engine::SessionConfig c;
    c.data_path = o.data;
    c.description_path = o.description;
    c.target = o.target;
    c.iterations = o.iterations;
    c.model.kind = *models::parse_model_kind(o.model);
    c.model.seed = o.seed;
    c.splits.seed = o.seed;
    c.splits.n_splits = o.splits;
    c.llm.backend = o.llm == "scripted" ? llm::BackendKind::Scripted : llm::BackendKind::Http;
    c.llm.playbook_path = o.playbook;
    if (!o.endpoint.empty()) c.llm.endpoint_url = o.endpoint;
    if (!o.model_name.empty()) c.llm.model_name = o.model_name;
    c.llm.temperature = o.temperature;
    c.llm.max_retries = o.max_retries;
    c.llm.api_key_env_var = o.api_key_env;
    c.decision_mode = o.review ? engine::DecisionMode::Review : engine::DecisionMode::Auto;
    c.blinded = o.blind;
    c.seed = o.seed;
    c.sample_fraction = o.sample_fraction;
    c.out_dir = o.out;
    return c;
}

std::string metrics_text(const models::EvalMetrics& m) {
    return "ROC " + format_fixed(m.roc_auc, 3) + ", ACC " + format_fixed(m.accuracy, 3);
}

void print_iteration(const engine::IterationRecord& r, int total) {
    std::string line = "[" + std::to_string(r.index) + "/" + std::to_string(total) + "] ";
    if (r.decision == engine::Decision::Error) {
        line += "error: " + r.error.value_or("");
    } else {
        const auto& o = *r.outcome;
        line += std::string(engine::decision_name(r.decision)) + ": " + metrics_text(o.mean_before()) + " -> " +
                metrics_text(o.mean_after()) + ". Improvement ROC " + format_fixed(o.mean_delta_auc, 3) + ", ACC " +
                format_fixed(o.mean_delta_acc, 3) + ".";
        if (r.human_override) line += *r.human_override ? " (accepted by reviewer)" : " (rejected by reviewer)";
    }
    std::cout << line << std::endl;
}

/// Server plus its listening thread.
struct LiveServer {
    api::Server server;
    std::thread thread;
    LiveServer(api::SessionMonitor& monitor, const std::string& static_dir, const std::string& host, int port)
        : server(monitor, static_dir) {
        const int bound = server.bind(host, port);
        thread = std::thread([this] { server.listen(); });
        server.wait_until_ready();
        std::cout << "review API at http://" << host << ":" << bound << "/" << std::endl;
    }
    ~LiveServer() {
        server.stop();
        thread.join();
    }
    void block() {
        thread.join();
        thread = std::thread([] {});
    }
};

int cmd_run(const RunOptions& o) {
    if (o.review && o.serve_port < 0) throw std::invalid_argument("--review needs --serve-port");
    const auto config = session_config(o);
    config.check();
    auto backend = llm::make_backend(config.llm);

    api::SessionMonitor monitor;
    std::unique_ptr<LiveServer> live;
    engine::SessionHooks hooks;
    if (o.serve_port >= 0) {
        hooks = monitor.hooks();
        live = std::make_unique<LiveServer>(monitor, o.static_dir, o.host, o.serve_port);
    }
    auto forward = hooks.observer;
    hooks.observer = [&](engine::EventKind k, const engine::IterationRecord& r) {
        if (forward) forward(k, r);
        if (k == engine::EventKind::IterationFinished) print_iteration(r, config.iterations);
    };
    auto on_start = hooks.on_start;
    hooks.on_start = [&](const engine::Session& s) {
        if (on_start) on_start(s);
        std::cout << "baseline over " << s.baseline.size() << " splits, " << s.row_count
                  << " rows: " << metrics_text(engine::mean_metrics(s.baseline)) << std::endl;
    };

    const engine::Session s = engine::run_session(config, *backend, hooks);
    if (live) monitor.finish(s.halted, s.halt_reason);

    std::cout << "accepted " << s.accepted.size() << " of " << s.iterations.size() << " candidates; final "
              << metrics_text(s.current_metrics()) << "\nsession written to " << config.out_dir.string() << std::endl;
    if (live && o.keep_serving) {
        std::cout << "serving until interrupted" << std::endl;
        live->block();
    }
    if (s.halted) {
        std::cerr << "session halted: " << s.halt_reason << std::endl;
        return kLlm;
    }
    return kOk;
}

struct ApplyOptions {
    std::string script;
    std::string session;
    std::string data;
    std::string target;
    std::string out;
};

int cmd_apply(const ApplyOptions& o) {
    if (o.script.empty() == o.session.empty()) throw std::invalid_argument("give exactly one of --script or --session");
    const Table result = [&] {
        if (!o.session.empty()) {
            const engine::Session s = engine::load_session(o.session);
            const std::string target = o.target.empty() ? s.original_schema.target : o.target;
            return engine::apply_final(s, load_csv(o.data, target));
        }
        if (o.target.empty()) throw std::invalid_argument("--target is required with --script");
        const auto script = dsl::parse(read_text_file(o.script));
        return engine::apply_script(script, load_csv(o.data, o.target));
    }();
    write_csv(result, o.out);
    std::cout << "wrote " << result.row_count() << " rows, " << result.columns().size() << " columns to " << o.out
              << std::endl;
    return kOk;
}

/// Left-justifies to `width` characters plus one space; counts UTF-8 code points.
std::string pad(const std::string& s, std::size_t width) {
    std::size_t chars = 0;
    for (unsigned char c : s) chars += (c & 0xC0) != 0x80;
    return s + std::string(chars < width ? width - chars + 1 : 1, ' ');
}

struct EvalOptions {
    std::string data;
    std::string target;
    std::string script;
    std::vector<std::string> models{"logreg"};
    int repetitions = 5;
    std::uint64_t seed = 0;
    std::string out = "autofe_eval";
};

int cmd_eval(const EvalOptions& o) {
    engine::BenchmarkDataset d{fs::path(o.data).stem().string(), load_csv(o.data, o.target), {}};
    if (!o.script.empty()) d.script = dsl::parse(read_text_file(o.script));
    std::vector<models::ModelSpec> specs;
    for (const auto& name : o.models) {
        models::ModelSpec spec;
        spec.kind = *models::parse_model_kind(name);
        spec.seed = o.seed;
        specs.push_back(spec);
    }
    const auto report = engine::run_benchmark({d}, specs, o.repetitions, o.seed);

    fs::create_directories(o.out);
    write_text_file(fs::path(o.out) / "report.csv", engine::benchmark_csv(report));
    engine::Json j;
    j["seeds"] = report.seeds;
    j["rows"] = engine::Json::array();
    for (const auto& r : report.rows) {
        j["rows"].push_back({{"dataset", r.dataset},
                             {"model", r.model},
                             {"condition", r.condition},
                             {"roc_auc", r.roc_auc},
                             {"mean", r.mean},
                             {"std", r.stddev}});
    }
    write_text_file(fs::path(o.out) / "report.json", j.dump(2) + "\n");

    std::cout << "seeds:";
    for (auto s : report.seeds) std::cout << " " << s;
    std::cout << "\n";
    std::cout << pad("dataset", 20) << pad("model", 8) << pad("without", 14) << pad("with", 14) << "delta\n";
    for (std::size_t i = 0; i + 1 < report.rows.size(); i += 2) {
        const auto& without = report.rows[i];
        const auto& with = report.rows[i + 1];
        const double delta = with.mean - without.mean;
        std::cout << pad(without.dataset, 20) << pad(without.model, 8)
                  << pad(engine::format_mean_std(without.mean, without.stddev), 14)
                  << pad(engine::format_mean_std(with.mean, with.stddev), 14) << (delta < 0 ? "" : "+")
                  << format_fixed(delta, 4) << "\n";
    }
    std::cout << "report written to " << o.out << std::endl;
    return kOk;
}

/// With --session, serves a stored session read-only. Otherwise starts a
/// session from the run options and keeps the API up after it ends.
int cmd_serve(const std::string& session, RunOptions o) {
    if (o.serve_port < 0) o.serve_port = 8080;
    if (session.empty()) {
        if (o.data.empty() || o.target.empty()) throw std::invalid_argument("serve needs --session or --data and --target");
        o.keep_serving = true;
        return cmd_run(o);
    }
    api::SessionMonitor monitor;
    monitor.load(engine::load_session(session));
    LiveServer live(monitor, o.static_dir, o.host, o.serve_port);
    live.block();
    return kOk;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Iterative feature engineering with a language model in the loop"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Run a feature engineering session");
    add_run_options(run_cmd, run, true);
    run_cmd->add_option("--serve-port", run.serve_port, "Serve the review API on this port (0 picks one)");
    run_cmd->add_flag("--keep-serving", run.keep_serving, "Keep the API up after the session ends");

    ApplyOptions apply;
    auto* apply_cmd = app.add_subcommand("apply", "Apply a feature script or a session's accepted features to a CSV");
    apply_cmd->add_option("--script", apply.script, "Feature script file")->check(CLI::ExistingFile);
    apply_cmd->add_option("--session", apply.session, "Session directory")->check(CLI::ExistingDirectory);
    apply_cmd->add_option("--data", apply.data, "Input CSV")->required()->check(CLI::ExistingFile);
    apply_cmd->add_option("--target", apply.target, "Target column (defaults to the session's)");
    apply_cmd->add_option("--out", apply.out, "Output CSV")->required();

    EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "Score a dataset with and without a feature script");
    eval_cmd->add_option("--data", eval.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--target", eval.target, "Target column")->required();
    eval_cmd->add_option("--script", eval.script, "Feature script (identity when absent)")->check(CLI::ExistingFile);
    eval_cmd->add_option("--model", eval.models, "Classifier, repeatable")
        ->check(CLI::IsMember({"logreg", "forest"}))
        ->capture_default_str();
    eval_cmd->add_option("--repetitions", eval.repetitions, "Random 50/50 splits")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    eval_cmd->add_option("--seed", eval.seed, "Base seed")->capture_default_str();
    eval_cmd->add_option("--out", eval.out, "Report directory")->capture_default_str();

    std::string serve_session;
    RunOptions serve;
    auto* serve_cmd = app.add_subcommand("serve", "Serve a stored session, or run a new one behind the API");
    serve_cmd->add_option("--session", serve_session, "Stored session directory")->check(CLI::ExistingDirectory);
    serve_cmd->add_option("--port", serve.serve_port, "Port (default 8080)");
    add_run_options(serve_cmd, serve, false);

    std::string board_out;
    auto* board_cmd = app.add_subcommand("gen-tictactoe", "Write the tic-tac-toe endgame dataset");
    board_cmd->add_option("--out", board_out, "Output CSV")->required();

    CLI11_PARSE(app, argc, argv);

    if (*run_cmd) return cmd_run(run);
    if (*apply_cmd) return cmd_apply(apply);
    if (*eval_cmd) return cmd_eval(eval);
    if (*serve_cmd) return cmd_serve(serve_session, serve);
    if (*board_cmd) {
        const Table board = gen_tictactoe();
        write_csv(board, board_out);
        std::cout << "wrote " << board.row_count() << " boards to " << board_out << std::endl;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        const int rc = run_cli(argc, argv);
        // CLI11 reports parse failures with its own nonzero codes.
        return rc == kOk || rc == kLlm || rc == kData ? rc : kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return kUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << std::endl;
        return kData;
    } catch (const dsl::ExecError& e) {
        std::cerr << "script error: " << e.what() << std::endl;
        return kData;
    } catch (const models::MetricError& e) {
        std::cerr << "data error: " << e.what() << std::endl;
        return kData;
    } catch (const llm::LlmError& e) {
        std::cerr << "model backend error: " << e.what() << std::endl;
        return kLlm;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << std::endl;
        return kInternal;
    }
}
