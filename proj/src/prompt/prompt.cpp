#include "autofe/prompt.hpp"

#include "autofe/dsl/dsl.hpp"
#include "autofe/text_format.hpp"

#include <cctype>
#include <map>
#include <sstream>

namespace autofe::prompt {

namespace {

constexpr std::size_t kShownSamples = 3;

const char* kBlindNotice = "The dataset description is withheld and column names are anonymized.";

std::string quote_sample(const ColumnSummary& s, const std::string& v) {
    if (s.dtype == Dtype::Number || s.dtype == Dtype::Boolean || v == "NaN") return v;
    return "'" + v + "'";
}

std::string column_line(const ColumnSummary& s, const std::string& shown_name) {
    std::string line = shown_name + " (" + display_dtype(s) + "): NaN-freq [" +
                       format_fixed(s.missing_fraction * 100.0, 1) + "%], Samples [";
    const std::size_t n = std::min(kShownSamples, s.samples.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (i) line += ", ";
        line += quote_sample(s, s.samples[i]);
    }
    return line + "]";
}

void render_reference(std::ostream& out) {
    out << "The language (fedsl) in brief:\n"
        << "  feature \"<name>\" { usefulness: \"<why>\" expr: <expression> }\n"
        << "  drop \"<column>\" reason \"<why>\"\n"
        << "  col(\"name\") reads a column; literals are numbers, \"strings\", true and false.\n"
        << "  Operators: + - * / on numbers; == != on equal types; < <= > >= on numbers; and, or, not on booleans.\n"
        << "  Text and category values compare with == against string literals.\n"
        << "  Booleans are not numbers: wrap them in as_number(...) before arithmetic.\n"
        << "  A missing input makes the result missing; handle it with fill_missing or is_missing.\n"
        << "  Lines starting with # are comments. There are no loops, imports or other functions.\n"
        << "  Functions:\n";
    for (const auto& b : dsl::builtin_functions()) {
        out << "    " << b.signature << "  # " << b.summary << "\n";
    }
}

}  // namespace

std::string blinded_name(std::size_t index) { return "c" + std::to_string(index); }

std::string build_prompt(const PromptContext& ctx) {
    std::map<std::string, std::string> shown;
    for (std::size_t i = 0; i < ctx.column_summaries.size(); ++i) {
        const auto& name = ctx.column_summaries[i].name;
        shown[name] = ctx.blinded ? blinded_name(i) : name;
    }
    std::string target = ctx.target_name;
    if (ctx.blinded) {
        auto it = shown.find(ctx.target_name);
        target = it != shown.end() ? it->second : "target";
    }

    std::ostringstream out;
    out << "The table `df` holds the training data. It is changed only through fedsl programs.\n";
    out << "Description of the dataset (column types are inferred and may be imprecise):\n";
    out << "\"" << (ctx.blinded ? std::string(kBlindNotice) : ctx.description) << "\"\n\n";

    out << "Columns in `df` with type, share of missing values and sample values:\n";
    for (const auto& s : ctx.column_summaries) out << column_line(s, shown[s.name]) << "\n";
    out << "\n";
    out << "Number of samples (rows) in training dataset: " << ctx.train_row_count << "\n\n";

    out << "Write code that adds new columns to `df` which help a downstream classifier predict \"" << target
        << "\".\n"
        << "Useful columns bring in real-world knowledge about the data, for example combinations of columns, "
           "ratios, thresholds, bins or values parsed out of strings.\n"
        << "Scale and offset of a column do not matter. Only use columns that exist, and respect their types "
           "and meanings.\n"
        << "This code also drops columns, if they are redundant or likely to hurt the classifier; fewer columns "
           "reduce overfitting on small data.\n"
        << "Each code block is scored on held-out data by ROC AUC and accuracy and kept only if the average of "
           "both improves.\n"
        << "Columns added by accepted code can be used later; dropped columns are gone.\n\n";

    render_reference(out);
    out << "\n";

    out << "Format for each added column:\n"
        << kOpenFence << "\n"
        << "# Feature: (name and short description)\n"
        << "# Input samples: (three samples of each column used, e.g. 'x': [1.0, 2.0, 3.0])\n"
        << "feature \"(name)\" {\n"
        << "  usefulness: \"(why this adds real-world knowledge for predicting " << target << ")\"\n"
        << "  expr: (expression over existing columns)\n"
        << "}\n"
        << kCloseFence << "\n\n"
        << "Format for dropping a column:\n"
        << kOpenFence << "\n"
        << "drop \"XX\" reason \"(why XX is dropped)\"\n"
        << kCloseFence << "\n\n"
        << "A code block may add several columns and drop unused ones; it is accepted or rejected as a whole.\n"
        << "Every code block starts with \"" << kOpenFence << "\" and ends with \"" << kCloseFence << "\".\n";

    if (!ctx.accepted_scripts.empty()) {
        out << "\nCode accepted so far (already applied to `df`):\n";
        for (const auto& s : ctx.accepted_scripts) {
            out << kOpenFence << "\n" << s;
            if (!s.empty() && s.back() != '\n') out << "\n";
            out << kCloseFence << "\n";
        }
    }
    if (ctx.feedback) {
        out << "\n"
            << (ctx.feedback->kind == Feedback::Kind::Error ? render_error_feedback(ctx.feedback->text)
                                                            : ctx.feedback->text)
            << "\n";
    }
    out << "\nCode block:\n";
    return out.str();
}

std::string render_error_feedback(const std::string& error_text) { return std::string(kErrorPrefix) + error_text; }

std::string render_performance_feedback(const PerformanceSummary& p) {
    std::string s;
    s += "Performance before adding features ROC " + format_fixed(p.before.roc_auc, 3) + ", ACC " +
         format_fixed(p.before.accuracy, 3) + ".\n";
    s += "Performance after adding features ROC " + format_fixed(p.after.roc_auc, 3) + ", ACC " +
         format_fixed(p.after.accuracy, 3) + ".\n";
    s += "Improvement ROC " + format_fixed(p.after.roc_auc - p.before.roc_auc, 3) + ", ACC " +
         format_fixed(p.after.accuracy - p.before.accuracy, 3) + ". ";
    s += p.retained ? "Code was executed and changes to df retained."
                    : "Code was executed but changes to df were discarded.";
    return s;
}

const std::set<std::string>& template_vocabulary() {
    static const std::set<std::string> words = [] {
        PromptContext ctx;
        ctx.blinded = true;
        ctx.column_summaries.push_back(ColumnSummary{"c", Dtype::Number, false, 0.0, {"NaN"}});
        ctx.feedback = Feedback{Feedback::Kind::Error, ""};
        std::string text = build_prompt(ctx) + "\n" + render_performance_feedback({{}, {}, true}) + "\n" +
                           render_performance_feedback({{}, {}, false});
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
    }();
    return words;
}

}  // namespace autofe::prompt
