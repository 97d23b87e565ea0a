#pragma once

// Scoring of system predictions against references, aggregation per
// (task, test set) and pairwise significance tests.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "seedforge/eval/metrics.hpp"
#include "seedforge/eval/tokenizer.hpp"

namespace seedforge {

class Gateway;

enum class BenchTask {
    brainstorming,
    classification,
    closed_qa,
    creative_writing,
    open_qa,
    multiple_choice,
    summarization,
};
inline constexpr BenchTask kBenchTasks[] = {BenchTask::brainstorming, BenchTask::classification,
                                            BenchTask::closed_qa,     BenchTask::creative_writing,
                                            BenchTask::open_qa,       BenchTask::multiple_choice,
                                            BenchTask::summarization};

enum class TestSet { culture, general };
inline constexpr TestSet kTestSets[] = {TestSet::culture, TestSet::general};

std::string_view to_string(BenchTask t) noexcept;
BenchTask bench_task_from_string(std::string_view s);
std::string_view to_string(TestSet t) noexcept;
TestSet test_set_from_string(std::string_view s);

struct EvalPair {
    std::string id;
    BenchTask task = BenchTask::open_qa;
    TestSet test_set = TestSet::general;
    std::string prediction;
    std::string reference;
};

struct SystemOutputs {
    std::string name;
    std::vector<EvalPair> pairs;
};

struct EvalOptions {
    Tokenizer tokenizer{TokenizerMode::unicode_words};
    SquadOptions squad;
    // Per-pair metric the pairwise tests run on. Falls back to chrf when
    // the bert-like score is unavailable.
    std::string compare_metric = "bertscore_f1";
    std::size_t workers = 1;
};

struct PairScores {
    std::string id;
    BenchTask task = BenchTask::open_qa;
    TestSet test_set = TestSet::general;
    std::map<std::string, double> scores;
    std::size_t length = 0;  // prediction tokens
};

struct Comparison {
    std::string system_a;
    std::string system_b;
    std::string cell;  // "<task>/<test_set>", "overall/<test_set>" or "overall"
    std::string metric;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    double w = 0.0;
    double p = 1.0;
    bool exact = false;
};

struct MetricReport {
    std::string tokenizer;
    std::vector<std::string> systems;
    std::vector<std::string> metrics;
    std::map<std::string, std::vector<PairScores>> per_pair;
    // system -> cell -> metric -> mean. Cells as in Comparison. "bleu" is
    // corpus BLEU over the cell; every other entry is the mean of per-pair
    // values.
    std::map<std::string, std::map<std::string, std::map<std::string, double>>> aggregates;
    // system -> cell -> mean prediction length in tokens.
    std::map<std::string, std::map<std::string, double>> lengths;
    std::vector<Comparison> comparisons;
    std::vector<std::string> absent_tasks;
    std::vector<std::string> notes;

    nlohmann::json to_json() const;
    // Inverse of to_json; throws nlohmann::json exceptions on bad shape.
    static MetricReport from_json(const nlohmann::json& j);
};

// Per-pair metric values for one pair. bert-like entries only when `gw`
// can embed tokens.
PairScores score_pair(const EvalPair& pair, const EvalOptions& opt, Gateway* gw);

// Every system must cover the same pair ids (AlignmentError otherwise).
MetricReport aggregate_report(const std::vector<SystemOutputs>& systems, const EvalOptions& opt,
                              Gateway* gw = nullptr);

// System rows with per-test-set averages over all tasks.
std::string render_summary_table(const MetricReport& report);
// One block per task with per-test-set columns.
std::string render_task_table(const MetricReport& report);

}  // namespace seedforge
