#include "seedforge/eval/report.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <functional>
#include <unordered_map>

#include "seedforge/errors.hpp"
#include "seedforge/eval/wilcoxon.hpp"
#include "seedforge/gateway/gateway.hpp"
#include "seedforge/util/parallel.hpp"

namespace seedforge {

using nlohmann::json;

namespace {

constexpr std::string_view kTaskNames[] = {"brainstorming", "classification", "closed_qa",
                                           "creative_writing", "open_qa", "multiple_choice",
                                           "summarization"};
constexpr std::string_view kSetNames[] = {"culture", "general"};

struct Row {
    const char* label;
    const char* key;
    double scale;
};

constexpr Row kRows[] = {{"ROUGE-1", "rouge1", 100.0},        {"ROUGE-2", "rouge2", 100.0},
                         {"ROUGE-L", "rougeL", 100.0},        {"ROUGE-Lsum", "rougeLsum", 100.0},
                         {"BLEU", "bleu", 100.0},             {"ChrF", "chrf", 1.0},
                         {"METEOR", "meteor", 100.0},         {"SQuAD F1", "squad_f1", 100.0},
                         {"BERTScore*", "bertscore_f1", 100.0}};

std::string cell_of(BenchTask t, TestSet s) {
    return std::string(to_string(t)) + "/" + std::string(to_string(s));
}
std::string overall_of(TestSet s) { return "overall/" + std::string(to_string(s)); }

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

void check_alignment(const std::vector<SystemOutputs>& systems) {
    if (systems.empty()) throw PreconditionError("aggregate_report: no systems");
    std::set<std::string> names;
    std::map<std::string, std::pair<BenchTask, TestSet>> ref;
    for (std::size_t s = 0; s < systems.size(); ++s) {
        const auto& sys = systems[s];
        if (!names.insert(sys.name).second) throw PreconditionError("duplicate system name " + sys.name);
        std::map<std::string, std::pair<BenchTask, TestSet>> mine;
        for (const auto& p : sys.pairs) {
            if (!mine.emplace(p.id, std::make_pair(p.task, p.test_set)).second) {
                throw AlignmentError(sys.name + ": duplicate pair id " + p.id);
            }
        }
        if (s == 0) {
            ref = std::move(mine);
            continue;
        }
        for (const auto& [id, key] : mine) {
            auto it = ref.find(id);
            if (it == ref.end()) throw AlignmentError(sys.name + ": pair " + id + " missing from " + systems[0].name);
            if (it->second != key) throw AlignmentError(sys.name + ": pair " + id + " has a different task or test set");
        }
        if (mine.size() != ref.size()) {
            for (const auto& [id, key] : ref) {
                if (!mine.count(id)) throw AlignmentError(sys.name + ": pair " + id + " missing");
            }
        }
    }
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

// Metric rows by (system, test set) columns for one cell prefix.
void render_block(std::ostringstream& os, const MetricReport& r,
                  const std::function<std::string(TestSet)>& cell) {
    const int label_w = 12;
    const int col_w = 14;
    os << std::string(label_w, ' ');
    for (const auto& sys : r.systems) {
        for (TestSet s : kTestSets) {
            std::string h = sys.substr(0, col_w - 9) + " " + std::string(to_string(s));
            os << " " << std::string(std::max<int>(0, col_w - static_cast<int>(h.size())), ' ') << h;
        }
    }
    os << "\n";
    for (const Row& row : kRows) {
        if (std::find(r.metrics.begin(), r.metrics.end(), row.key) == r.metrics.end()) continue;
        std::string label = row.label;
        os << label << std::string(std::max<int>(1, label_w - static_cast<int>(label.size())), ' ');
        for (const auto& sys : r.systems) {
            for (TestSet s : kTestSets) {
                std::string v = "-";
                const auto& agg = r.aggregates.at(sys);
                if (auto c = agg.find(cell(s)); c != agg.end()) {
                    if (auto m = c->second.find(row.key); m != c->second.end()) v = fmt(m->second * row.scale);
                }
                os << " " << std::string(std::max<int>(0, col_w - static_cast<int>(v.size())), ' ') << v;
            }
        }
        os << "\n";
    }
}

}  // namespace

std::string_view to_string(BenchTask t) noexcept { return kTaskNames[static_cast<int>(t)]; }

BenchTask bench_task_from_string(std::string_view s) {
    for (int i = 0; i < 7; ++i) {
        if (kTaskNames[i] == s) return static_cast<BenchTask>(i);
    }
    throw ConfigError("task", "unknown benchmark task '" + std::string(s) + "'");
}

std::string_view to_string(TestSet t) noexcept { return kSetNames[static_cast<int>(t)]; }

TestSet test_set_from_string(std::string_view s) {
    if (s == "culture" || s == "cultural") return TestSet::culture;
    if (s == "general") return TestSet::general;
    throw ConfigError("test_set", "unknown test set '" + std::string(s) + "' (expected culture or general)");
}

PairScores score_pair(const EvalPair& pair, const EvalOptions& opt, Gateway* gw) {
    PairScores out;
    out.id = pair.id;
    out.task = pair.task;
    out.test_set = pair.test_set;
    const Tokens p = opt.tokenizer.tokenize(pair.prediction);
    const Tokens r = opt.tokenizer.tokenize(pair.reference);
    out.length = p.size();
    auto& s = out.scores;
    s["rouge1"] = rouge_n(p, r, 1).f1;
    s["rouge2"] = rouge_n(p, r, 2).f1;
    s["rougeL"] = rouge_l(p, r).f1;
    s["rougeLsum"] = rouge_lsum(pair.prediction, pair.reference, opt.tokenizer);
    s["sentence_bleu"] = sentence_bleu(p, r);
    s["chrf"] = chrf(pair.prediction, pair.reference);
    s["meteor"] = meteor(p, r);
    s["squad_f1"] = squad_f1(pair.prediction, pair.reference, opt.tokenizer, opt.squad);
    if (gw != nullptr && gw->supports_token_embeddings()) {
        const Prf b = bert_like_score(p, r, *gw);
        s["bertscore_p"] = b.precision;
        s["bertscore_r"] = b.recall;
        s["bertscore_f1"] = b.f1;
    }
    return out;
}

MetricReport aggregate_report(const std::vector<SystemOutputs>& systems, const EvalOptions& opt, Gateway* gw) {
    check_alignment(systems);
    MetricReport rep;
    rep.tokenizer = opt.tokenizer.name();
    const bool bert = gw != nullptr && gw->supports_token_embeddings();
    rep.metrics = {"rouge1", "rouge2", "rougeL", "rougeLsum", "bleu", "sentence_bleu", "chrf", "meteor", "squad_f1"};
    if (bert) {
        rep.metrics.insert(rep.metrics.end(), {"bertscore_p", "bertscore_r", "bertscore_f1"});
        rep.notes.push_back(
            "bert-like scores use greedy matching of contextless token vectors without idf weighting or "
            "baseline rescaling; they are not comparable to published BERTScore values");
    } else {
        rep.notes.push_back("bert-like score skipped: the embedding provider has no token-level embeddings");
    }
    rep.notes.push_back("bleu is corpus-level per cell (unsmoothed); sentence_bleu is the mean of add-one "
                        "smoothed per-pair values");
    std::string compare = opt.compare_metric;
    if (compare.rfind("bertscore", 0) == 0 && !bert) {
        compare = "chrf";
        rep.notes.push_back("pairwise tests use chrf because the bert-like score is unavailable");
    }
    if (compare != "length" && std::find(rep.metrics.begin(), rep.metrics.end(), compare) == rep.metrics.end()) {
        throw ConfigError("eval.compare_metric", "unknown per-pair metric '" + compare + "'");
    }
    if (compare == "bleu") throw ConfigError("eval.compare_metric", "bleu is corpus-level; use sentence_bleu");

    std::set<BenchTask> present;
    for (const auto& p : systems[0].pairs) present.insert(p.task);
    for (BenchTask t : kBenchTasks) {
        if (!present.count(t)) rep.absent_tasks.emplace_back(to_string(t));
    }

    // Cell name -> member positions, identical across systems by id.
    std::map<std::string, std::vector<std::string>> cell_ids;
    for (const auto& p : systems[0].pairs) {
        cell_ids[cell_of(p.task, p.test_set)].push_back(p.id);
        cell_ids[overall_of(p.test_set)].push_back(p.id);
        cell_ids["overall"].push_back(p.id);
    }

    std::map<std::string, std::unordered_map<std::string, const PairScores*>> by_id;
    for (const auto& sys : systems) {
        rep.systems.push_back(sys.name);
        rep.per_pair[sys.name] = parallel_map<PairScores>(sys.pairs.size(), opt.workers, [&](std::size_t i) {
            return score_pair(sys.pairs[i], opt, gw);
        });
    }
    for (const auto& sys : systems) {
        auto& idx = by_id[sys.name];
        for (const auto& ps : rep.per_pair[sys.name]) idx.emplace(ps.id, &ps);
        std::unordered_map<std::string, const EvalPair*> raw;
        for (const auto& p : sys.pairs) raw.emplace(p.id, &p);

        for (const auto& [cell, ids] : cell_ids) {
            auto& agg = rep.aggregates[sys.name][cell];
            for (const auto& m : rep.metrics) {
                if (m == "bleu") continue;
                std::vector<double> v;
                for (const auto& id : ids) v.push_back(idx.at(id)->scores.at(m));
                agg[m] = mean(v);
            }
            std::vector<std::pair<Tokens, Tokens>> corpus;
            std::vector<double> lens;
            for (const auto& id : ids) {
                const EvalPair& p = *raw.at(id);
                corpus.emplace_back(opt.tokenizer.tokenize(p.prediction), opt.tokenizer.tokenize(p.reference));
                lens.push_back(static_cast<double>(idx.at(id)->length));
            }
            agg["bleu"] = bleu(corpus);
            rep.lengths[sys.name][cell] = mean(lens);
        }
    }

    auto values = [&](const std::string& sys, const std::vector<std::string>& ids, const std::string& metric) {
        std::vector<double> v;
        for (const auto& id : ids) {
            const PairScores* ps = by_id.at(sys).at(id);
            v.push_back(metric == "length" ? static_cast<double>(ps->length) : ps->scores.at(metric));
        }
        return v;
    };
    for (std::size_t i = 0; i < systems.size(); ++i) {
        for (std::size_t j = i + 1; j < systems.size(); ++j) {
            auto run = [&](const std::string& cell, const std::vector<std::string>& ids, const std::string& metric) {
                const auto a = values(systems[i].name, ids, metric);
                const auto b = values(systems[j].name, ids, metric);
                try {
                    const RankSumResult r = wilcoxon_rank_sum(a, b);
                    rep.comparisons.push_back(
                        {systems[i].name, systems[j].name, cell, metric, a.size(), b.size(), r.w, r.p, r.exact});
                } catch (const DegenerateTestError&) {
                    rep.notes.push_back("no test for " + systems[i].name + " vs " + systems[j].name + " on " + cell +
                                        " (" + metric + "): all values identical");
                }
            };
            for (const auto& [cell, ids] : cell_ids) {
                if (cell.rfind("overall", 0) == 0) continue;
                run(cell, ids, compare);
            }
            for (TestSet s : kTestSets) {
                if (auto it = cell_ids.find(overall_of(s)); it != cell_ids.end()) run(it->first, it->second, compare);
            }
            run("overall", cell_ids.at("overall"), "length");
        }
    }
    return rep;
}

json MetricReport::to_json() const {
    json j;
    j["tokenizer"] = tokenizer;
    j["systems"] = systems;
    j["metrics"] = metrics;
    j["absent_tasks"] = absent_tasks;
    j["notes"] = notes;
    j["aggregates"] = aggregates;
    j["lengths"] = lengths;
    json comps = json::array();
    for (const auto& c : comparisons) {
        comps.push_back({{"system_a", c.system_a}, {"system_b", c.system_b}, {"cell", c.cell},
                         {"metric", c.metric}, {"n_a", c.n_a}, {"n_b", c.n_b}, {"w", c.w}, {"p", c.p},
                         {"exact", c.exact}});
    }
    j["comparisons"] = comps;
    json pp = json::object();
    for (const auto& [sys, rows] : per_pair) {
        json arr = json::array();
        for (const auto& r : rows) {
            arr.push_back({{"id", r.id}, {"task", to_string(r.task)}, {"test_set", to_string(r.test_set)},
                           {"length", r.length}, {"scores", r.scores}});
        }
        pp[sys] = arr;
    }
    j["per_pair"] = pp;
    return j;
}

MetricReport MetricReport::from_json(const json& j) {
    MetricReport r;
    j.at("tokenizer").get_to(r.tokenizer);
    j.at("systems").get_to(r.systems);
    j.at("metrics").get_to(r.metrics);
    j.at("absent_tasks").get_to(r.absent_tasks);
    j.at("notes").get_to(r.notes);
    j.at("aggregates").get_to(r.aggregates);
    j.at("lengths").get_to(r.lengths);
    for (const auto& c : j.at("comparisons")) {
        r.comparisons.push_back({c.at("system_a"), c.at("system_b"), c.at("cell"), c.at("metric"), c.at("n_a"),
                                 c.at("n_b"), c.at("w"), c.at("p"), c.at("exact")});
    }
    for (const auto& [sys, rows] : j.at("per_pair").items()) {
        auto& out = r.per_pair[sys];
        for (const auto& row : rows) {
            PairScores ps;
            row.at("id").get_to(ps.id);
            ps.task = bench_task_from_string(row.at("task").get<std::string>());
            ps.test_set = test_set_from_string(row.at("test_set").get<std::string>());
            row.at("length").get_to(ps.length);
            row.at("scores").get_to(ps.scores);
            out.push_back(std::move(ps));
        }
    }
    return r;
}

std::string render_summary_table(const MetricReport& r) {
    std::ostringstream os;
    os << "Average over all tasks (tokenizer: " << r.tokenizer << "; scores x100 except ChrF)\n";
    if (!r.absent_tasks.empty()) {
        os << "Tasks without pairs:";
        for (const auto& t : r.absent_tasks) os << " " << t;
        os << "\n";
    }
    render_block(os, r, [](TestSet s) { return overall_of(s); });
    for (const auto& n : r.notes) os << "* " << n << "\n";
    return os.str();
}

std::string render_task_table(const MetricReport& r) {
    std::ostringstream os;
    for (BenchTask t : kBenchTasks) {
        if (std::find(r.absent_tasks.begin(), r.absent_tasks.end(), to_string(t)) != r.absent_tasks.end()) continue;
        os << "[" << to_string(t) << "]\n";
        render_block(os, r, [t](TestSet s) { return cell_of(t, s); });
        os << "\n";
    }
    return os.str();
}

}  // namespace seedforge
