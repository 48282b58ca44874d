#include "autofe/engine.hpp"
#include "autofe/random.hpp"
#include "autofe/text_format.hpp"

#include <cmath>
#include <stdexcept>

namespace autofe::engine {

namespace {

double sample_std(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

BenchmarkReport run_benchmark(const std::vector<BenchmarkDataset>& datasets,
                              const std::vector<models::ModelSpec>& specs, int repetitions, std::uint64_t seed) {
    if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
    BenchmarkReport report;
    for (int r = 0; r < repetitions; ++r) report.seeds.push_back(mix_seed(seed, static_cast<std::uint64_t>(r)));

    for (const auto& ds : datasets) {
        const Table with = dsl::evaluate(ds.script, ds.table);
        // One split per repetition, shared by every model and condition.
        std::vector<SplitSet> halves;
        for (auto s : report.seeds) halves.push_back(make_splits(ds.table, SplitPlan{s, 1, 0.5, true}));

        for (const auto& spec : specs) {
            BenchmarkRow without{ds.name, std::string(models::model_kind_name(spec.kind)), "without", {}, 0, 0};
            BenchmarkRow with_row{ds.name, without.model, "with", {}, 0, 0};
            for (const auto& half : halves) {
                without.roc_auc.push_back(evaluate_table(ds.table, half, spec).front().roc_auc);
                with_row.roc_auc.push_back(evaluate_table(with, half, spec).front().roc_auc);
            }
            for (auto* row : {&without, &with_row}) {
                double sum = 0.0;
                for (double v : row->roc_auc) sum += v;
                row->mean = sum / static_cast<double>(row->roc_auc.size());
                row->stddev = sample_std(row->roc_auc, row->mean);
                report.rows.push_back(*row);
            }
        }
    }
    return report;
}

std::string format_mean_std(double mean, double stddev) {
    std::string s = format_fixed(stddev, 2);
    if (s.rfind("0.", 0) == 0) s.erase(0, 1);
    return format_fixed(mean, 4) + " ±" + s;
}

std::string benchmark_csv(const BenchmarkReport& report) {
    std::string out = "dataset,model,condition,mean_roc_auc,std_roc_auc,formatted";
    for (std::size_t r = 0; r < report.seeds.size(); ++r) out += ",rep" + std::to_string(r);
    out += "\n";
    for (const auto& row : report.rows) {
        out += row.dataset + "," + row.model + "," + row.condition + "," + format_number_exact(row.mean) + "," +
               format_number_exact(row.stddev) + "," + format_mean_std(row.mean, row.stddev);
        for (double v : row.roc_auc) out += "," + format_number_exact(v);
        out += "\n";
    }
    return out;
}

}  // namespace autofe::engine
