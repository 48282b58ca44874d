#include "autofe/csv.hpp"
#include "cli_runner.hpp"
#include "autofe/engine_json.hpp"
#include "autofe/prompt.hpp"
#include "playbooks.hpp"
#include "session_files.hpp"

#include <doctest.h>

#include <cctype>
#include <filesystem>
#include <set>

using namespace autofe;
namespace fs = std::filesystem;

namespace {

const fs::path kData = AUTOFE_TEST_DATA_DIR;

using Result = testing::CliResult;

Result autofe_cli(const std::string& args) { return testing::run_cli(AUTOFE_CLI, args); }

std::string q(const fs::path& p) { return testing::quoted(p); }

/// Scratch dir holding the tic-tac-toe CSV, a description and playbooks.
struct Workspace {
    fs::path dir;
    explicit Workspace(const std::string& name) : dir(testing::scratch_dir(name)) {
        REQUIRE(autofe_cli("gen-tictactoe --out " + q(dir / "board.csv")).status == 0);
        write_text_file(dir / "desc.txt", "Endgame boards of noughts and crosses; Class marks a win for the cross player.\n");
        write_playbook("named.json", testing::tictactoe_playbook());
        write_playbook("blind.json", testing::tictactoe_playbook(testing::blinded_square));
    }
    ~Workspace() { fs::remove_all(dir); }
    void write_playbook(const std::string& name, const std::vector<std::string>& responses) {
        write_text_file(dir / name, engine::Json(responses).dump());
    }
    std::string run_args(const std::string& playbook, const std::string& out, const std::string& target = "Class") const {
        return "run --data " + q(dir / "board.csv") + " --target " + target + " --description " + q(dir / "desc.txt") +
               " --llm scripted --playbook " + q(dir / playbook) + " --seed 1 --iterations 2 --sample-fraction 0.1" +
               " --splits 5 --out " + q(dir / out);
    }
};

std::set<std::string> words(const std::string& text) {
    std::set<std::string> out;
    std::string cur;
    for (char c : text + " ") {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!cur.empty()) {
            out.insert(cur);
            cur.clear();
        }
    }
    return out;
}

}  // namespace

TEST_CASE("run writes a session directory") {
    Workspace ws("cli_run");
    const Result r = autofe_cli(ws.run_args("named.json", "s"));
    INFO(r.output);
    CHECK(r.status == 0);
    for (const char* f : {"config.json", "baseline.json", "iterations/001.json", "iterations/002.json",
                          "accepted.fedsl", "report.json", "report.csv", "usage.json"}) {
        CHECK_MESSAGE(fs::exists(ws.dir / "s" / f), f);
    }
    CHECK(r.output.find("[1/2] accepted: ROC ") != std::string::npos);
    CHECK(r.output.find("Improvement ROC ") != std::string::npos);
    CHECK(read_text_file(ws.dir / "s" / "accepted.fedsl").find("number_of_x_wins") != std::string::npos);

    // A second run into a fresh directory replays to the same content.
    CHECK(autofe_cli(ws.run_args("named.json", "again")).status == 0);
    CHECK(testing::session_files(ws.dir / "s") == testing::session_files(ws.dir / "again"));
}

TEST_CASE("usage errors exit 2 with usage text") {
    Workspace ws("cli_usage");
    Result r = autofe_cli("run --data " + q(ws.dir / "board.csv") + " --llm scripted");
    CHECK(r.status == 2);
    CHECK(r.output.find("--target is required") != std::string::npos);
    CHECK(r.output.find("Usage:") != std::string::npos);
    CHECK(autofe_cli("").status == 2);
    CHECK(autofe_cli("run --data " + q(ws.dir / "board.csv") + " --target Class --model svm").status == 2);
    CHECK(autofe_cli(ws.run_args("named.json", "s") + " --review").status == 2);
    CHECK(autofe_cli(ws.run_args("named.json", "s") + " --iterations 0").status == 2);
    CHECK(autofe_cli("--help").status == 0);
}

TEST_CASE("data and backend failures map to exit codes") {
    Workspace ws("cli_fail");
    Result r = autofe_cli(ws.run_args("named.json", "s", "Missing"));
    CHECK(r.status == 3);
    write_text_file(ws.dir / "short.json", "[]");
    r = autofe_cli(ws.run_args("short.json", "short"));
    CHECK(r.status == 4);
    CHECK(r.output.find("playbook exhausted") != std::string::npos);
    CHECK(fs::exists(ws.dir / "short" / "report.json"));
    write_text_file(ws.dir / "broken.json", "{");
    CHECK(autofe_cli(ws.run_args("broken.json", "broken")).status == 4);
}

TEST_CASE("blinded prompts leak no names or description words") {
    Workspace ws("cli_blind");
    const Result r = autofe_cli(ws.run_args("blind.json", "s") + " --blind");
    INFO(r.output);
    REQUIRE(r.status == 0);

    // Column names: substring scan. Description words outside the fixed
    // prompt text: whole-word scan.
    std::vector<std::string> names = tictactoe_squares();
    names.push_back("Class");
    std::vector<std::string> desc_words;
    const auto& vocab = prompt::template_vocabulary();
    for (const auto& w : words(read_text_file(ws.dir / "desc.txt"))) {
        if (!vocab.count(w)) desc_words.push_back(w);
    }
    REQUIRE(desc_words.size() > 4);

    int prompts = 0;
    for (const auto& e : fs::directory_iterator(ws.dir / "s" / "iterations")) {
        const auto prompt = engine::Json::parse(read_text_file(e.path()))["prompt"].get<std::string>();
        ++prompts;
        const auto present = words(prompt);
        for (const auto& n : names) CHECK_MESSAGE(prompt.find(n) == std::string::npos, n);
        for (const auto& w : desc_words) CHECK_MESSAGE(!present.count(w), w);
    }
    CHECK(prompts == 2);
}

TEST_CASE("apply deploys scripts and sessions") {
    const auto dir = testing::scratch_dir("cli_apply");
    const auto kidney = kData / "kidney_stone.csv";
    write_text_file(dir / "identity.fedsl", "");
    CHECK(autofe_cli("apply --script " + q(dir / "identity.fedsl") + " --data " + q(kidney) +
                     " --target target --out " + q(dir / "id.csv"))
              .status == 0);
    CHECK(load_csv(dir / "id.csv", "target").content_hash() == load_csv(kidney, "target").content_hash());

    CHECK(autofe_cli("apply --script " + q(kData / "kidney_ratio.fedsl") + " --data " + q(kidney) +
                     " --target target --out " + q(dir / "ratio.csv"))
              .status == 0);
    const Table ratio = load_csv(dir / "ratio.csv", "target");
    REQUIRE(ratio.find("calc_to_urea_ratio"));
    const Table original = load_csv(kidney, "target");
    for (std::size_t r = 0; r < ratio.row_count(); ++r) {
        CHECK(ratio.column("calc_to_urea_ratio").number(r) ==
              doctest::Approx(original.column("calc").number(r) / original.column("urea").number(r)).epsilon(1e-12));
    }

    write_text_file(dir / "bad.fedsl", "feature \"f\" {\n  usefulness: \"none\"\n  expr: col(\"nope\") * 2\n}\n");
    const Result bad = autofe_cli("apply --script " + q(dir / "bad.fedsl") + " --data " + q(kidney) +
                                  " --target target --out " + q(dir / "bad.csv"));
    CHECK(bad.status == 3);
    CHECK(bad.output.find("'nope'") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "bad.csv"));

    write_text_file(dir / "syntax.fedsl", "feature \"f\" {");
    CHECK(autofe_cli("apply --script " + q(dir / "syntax.fedsl") + " --data " + q(kidney) +
                     " --target target --out " + q(dir / "syntax.csv"))
              .status == 3);
    fs::remove_all(dir);
}

TEST_CASE("eval reports both conditions over five seeds") {
    const auto dir = testing::scratch_dir("cli_eval");
    const Result r = autofe_cli("eval --data " + q(kData / "kidney_stone.csv") + " --target target --out " + q(dir));
    INFO(r.output);
    REQUIRE(r.status == 0);
    const auto report = engine::Json::parse(read_text_file(dir / "report.json"));
    const auto seeds = report["seeds"].get<std::vector<std::uint64_t>>();
    CHECK(seeds.size() == 5);
    CHECK(std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() == 5);
    for (auto s : seeds) CHECK(r.output.find(std::to_string(s)) != std::string::npos);
    REQUIRE(report["rows"].size() == 2);
    CHECK(report["rows"][0]["roc_auc"] == report["rows"][1]["roc_auc"]);
    CHECK(r.output.find("+0.0000") != std::string::npos);
    CHECK(r.output.find(" \xC2\xB1.") != std::string::npos);
    CHECK(read_text_file(dir / "report.csv").rfind("dataset,model,condition,", 0) == 0);
    fs::remove_all(dir);
}
