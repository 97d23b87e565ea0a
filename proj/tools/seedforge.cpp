// seedforge command line. Every subcommand takes --config plus repeated
// --set key=value overrides; flags specific to a subcommand are sugar for
// the matching config keys.

#include <CLI11.hpp>

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "seedforge/ablation/builder.hpp"
#include "seedforge/diversity/dedup.hpp"
#include "seedforge/errors.hpp"
#include "seedforge/eval/report.hpp"
#include "seedforge/pipeline/contexts.hpp"
#include "seedforge/pipeline/instructions.hpp"
#include "seedforge/pipeline/topics.hpp"
#include "seedforge/store/codec.hpp"
#include "seedforge/store/config.hpp"
#include "seedforge/store/records.hpp"
#include "seedforge/store/run.hpp"
#include "seedforge/util/hash.hpp"

using namespace seedforge;
namespace fs = std::filesystem;

namespace {

struct Common {
    std::string config;
    std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "configuration file (flat key = value)");
    cmd->add_option("--set", c.sets, "override a config key, key=value (repeatable)");
}

PipelineConfig resolve(const Common& c, std::vector<std::string> extra = {}) {
    PipelineConfig cfg = c.config.empty() ? parse_config("") : load_config(c.config);
    std::vector<std::string> all = std::move(extra);
    all.insert(all.end(), c.sets.begin(), c.sets.end());
    apply_overrides(cfg, all);
    return cfg;
}

template <typename T>
void set_if(std::vector<std::string>& out, const std::string& key, const std::optional<T>& v) {
    if (!v) return;
    if constexpr (std::is_same_v<T, std::string>) {
        out.push_back(key + "=" + *v);
    } else {
        out.push_back(key + "=" + std::to_string(*v));
    }
}

void describe_failure(std::ostream& os, const std::exception& e, const std::string& workdir) {
    os << "error: " << e.what() << "\n";
    try {
        std::rethrow_if_nested(e);
    } catch (const std::exception& inner) {
        os << "  caused by: " << inner.what() << "\n";
    } catch (...) {
    }
    if (const auto* stage = dynamic_cast<const StageError*>(&e)) {
        os << "  stage '" << stage->stage() << "' did not finish";
        if (!workdir.empty()) {
            os << "; completed stages are checkpointed under " << (fs::path(workdir) / "checkpoints").string()
               << ", rerun the same command to resume";
        }
        os << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"seedforge: synthetic instruction data for low-resource languages"};
    app.require_subcommand(1);
    std::string workdir_for_errors;

    // topics
    Common topics_c;
    std::optional<int> general, cultural;
    std::string topics_out;
    auto* topics = app.add_subcommand("topics", "generate a topic set");
    add_common(topics, topics_c);
    topics->add_option("--general", general, "general topics");
    topics->add_option("--cultural", cultural, "cultural topics");
    topics->add_option("--out", topics_out, "topics JSONL")->required();

    // contexts
    Common contexts_c;
    std::string contexts_in, contexts_out;
    std::optional<double> p_wiki;
    auto* contexts = app.add_subcommand("contexts", "build one context per topic");
    add_common(contexts, contexts_c);
    contexts->add_option("--topics", contexts_in, "topics JSONL")->required();
    contexts->add_option("--p-wiki", p_wiki, "probability of a wiki context");
    contexts->add_option("--out", contexts_out, "contexts JSONL")->required();

    // generate
    Common gen_c;
    std::string gen_in, gen_out, gen_failures;
    std::optional<std::string> tasks;
    auto* generate = app.add_subcommand("generate", "generate instruction records from contexts");
    add_common(generate, gen_c);
    generate->add_option("--contexts", gen_in, "contexts JSONL")->required();
    generate->add_option("--tasks", tasks, "comma-separated task list");
    generate->add_option("--out", gen_out, "records JSONL")->required();
    generate->add_option("--failures", gen_failures, "write generation failures as JSON");

    // dedup
    Common dedup_c;
    std::string dedup_in, dedup_out, dedup_removals;
    std::optional<double> threshold;
    auto* dedup = app.add_subcommand("dedup", "drop near-duplicate records");
    add_common(dedup, dedup_c);
    dedup->add_option("--in", dedup_in, "records JSONL")->required();
    dedup->add_option("--threshold", threshold, "cosine similarity threshold (strict)");
    dedup->add_option("--out", dedup_out, "kept records JSONL")->required();
    dedup->add_option("--removals", dedup_removals, "removal log JSONL");

    // ablate / run
    Common ablate_c;
    std::optional<std::string> variant, source, external;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> size;
    std::string ablate_out, ablate_workdir;
    auto* ablate = app.add_subcommand("ablate", "build one property-controlled dataset variant");
    add_common(ablate, ablate_c);
    ablate->add_option("--variant", variant, "full|fluency|diversity|culture|none");
    ablate->add_option("--seed", seed, "seed");
    ablate->add_option("--size", size, "target size for generated variants");
    ablate->add_option("--source", source, "full build records (culture variant)");
    ablate->add_option("--external", external, "external corpus JSONL (none variant)");
    ablate->add_option("--out", ablate_out, "records JSONL; the manifest is written beside it")->required();
    ablate->add_option("--workdir", ablate_workdir, "checkpoint directory (default: beside --out)");

    Common run_c;
    std::string run_workdir;
    auto* run = app.add_subcommand("run", "resumable end-to-end pipeline run");
    add_common(run, run_c);
    run->add_option("--workdir", run_workdir, "working directory (lock, checkpoints, output)")->required();

    // eval / report
    Common eval_c;
    std::vector<std::string> preds;
    std::string refs, eval_out;
    std::optional<std::string> tokenizer;
    auto* eval = app.add_subcommand("eval", "score system predictions against references");
    add_common(eval, eval_c);
    eval->add_option("--pred", preds, "predictions JSONL, one per system")->required();
    eval->add_option("--refs", refs, "references JSONL")->required();
    eval->add_option("--tokenizer", tokenizer, "unicode_words|characters|whitespace");
    eval->add_option("--out", eval_out, "report JSON")->required();

    std::string report_in;
    bool per_task = false;
    auto* report = app.add_subcommand("report", "render a report as tables");
    report->add_option("--in", report_in, "report JSON")->required();
    report->add_flag("--tasks", per_task, "also print the per-task tables");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*topics) {
            std::vector<std::string> extra;
            set_if(extra, "topics.general", general);
            set_if(extra, "topics.cultural", cultural);
            const PipelineConfig cfg = resolve(topics_c, extra);
            Gateway gw(make_providers(cfg), cfg.budget);
            TopicSet set = generate_topic_set(cfg.general_topics, cfg.cultural_topics, gw,
                                              derive_seed(cfg.seed, "topics"), cfg.build_settings().topics);
            write_topics(set.topics, topics_out);
            std::cerr << set.topics.size() << " topics (" << set.collisions.size() << " collisions) -> "
                      << topics_out << "\n";
        } else if (*contexts) {
            std::vector<std::string> extra;
            set_if(extra, "context.p_wiki", p_wiki);
            const PipelineConfig cfg = resolve(contexts_c, extra);
            Gateway gw(make_providers(cfg), cfg.budget);
            auto docs = build_contexts(read_topics(contexts_in), gw, cfg.context, derive_seed(cfg.seed, "contexts"));
            write_contexts(docs, contexts_out);
            std::size_t wiki = 0;
            for (const auto& d : docs) wiki += d.source.kind == ContextSourceKind::wiki;
            std::cerr << docs.size() << " contexts (" << wiki << " wiki) -> " << contexts_out << "\n";
        } else if (*generate) {
            std::vector<std::string> extra;
            set_if(extra, "tasks.enabled", tasks);
            const PipelineConfig cfg = resolve(gen_c, extra);
            Gateway gw(make_providers(cfg), cfg.budget);
            const BuildSettings s = cfg.build_settings();
            TaskOutcome out = generate_instructions(read_contexts(gen_in), s.task_kinds, gw, s.tasks,
                                                    derive_seed(cfg.seed, "instructions"));
            write_records(out.records, gen_out);
            if (!gen_failures.empty()) write_file(gen_failures, nlohmann::json(out.failures).dump(2) + "\n");
            std::cerr << out.records.size() << " records, " << out.failures.size() << " failures -> " << gen_out
                      << "\n";
        } else if (*dedup) {
            std::vector<std::string> extra;
            set_if(extra, "dedup.threshold", threshold);
            const PipelineConfig cfg = resolve(dedup_c, extra);
            Gateway gw(make_providers(cfg), cfg.budget);
            DedupResult res = dedup_filter(read_records(dedup_in), cfg.dedup, gw);
            write_records(res.kept, dedup_out);
            if (!dedup_removals.empty()) write_removals(res.log.removed, dedup_removals);
            std::cerr << res.kept.size() << " kept, " << res.log.removed.size() << " removed -> " << dedup_out
                      << "\n";
        } else if (*ablate || *run) {
            PipelineConfig cfg;
            fs::path workdir;
            RunOptions opt;
            if (*ablate) {
                std::vector<std::string> extra;
                set_if(extra, "ablation.variant", variant);
                set_if(extra, "seed", seed);
                set_if(extra, "dataset.size", size);
                set_if(extra, "ablation.source", source);
                set_if(extra, "ablation.external", external);
                cfg = resolve(ablate_c, extra);
                const fs::path out = ablate_out;
                workdir = ablate_workdir.empty() ? (out.has_parent_path() ? out.parent_path() : fs::path(".")) / (out.stem().string() + ".work")
                                                 : fs::path(ablate_workdir);
                opt.output_name = out.filename().string();
                workdir_for_errors = workdir.string();
                RunResult r = run_pipeline(cfg, workdir, opt);
                fs::create_directories(out.has_parent_path() ? out.parent_path() : fs::path("."));
                fs::copy_file(r.records_path, out, fs::copy_options::overwrite_existing);
                fs::copy_file(r.manifest_path, manifest_path_for(out), fs::copy_options::overwrite_existing);
                std::cout << r.manifest.records.size() << " records " << flags_label(r.manifest.flags) << " -> "
                          << out.string() << "\nmanifest sha256 " << r.manifest_sha256 << "\n";
            } else {
                cfg = resolve(run_c);
                workdir = run_workdir;
                workdir_for_errors = workdir.string();
                RunResult r = run_pipeline(cfg, workdir, opt);
                std::cout << r.manifest.records.size() << " records " << flags_label(r.manifest.flags) << " -> "
                          << r.records_path.string() << "\nmanifest sha256 " << r.manifest_sha256 << "\n";
            }
        } else if (*eval) {
            std::vector<std::string> extra;
            set_if(extra, "eval.tokenizer", tokenizer);
            const PipelineConfig cfg = resolve(eval_c, extra);
            std::vector<fs::path> pred_paths(preds.begin(), preds.end());
            auto systems = read_eval_inputs(refs, pred_paths);
            Gateway gw(make_providers(cfg), cfg.budget);
            MetricReport rep = aggregate_report(systems, cfg.eval_options(), &gw);
            write_file(eval_out, rep.to_json().dump(2) + "\n");
            std::cout << render_summary_table(rep);
        } else if (*report) {
            std::ifstream in(report_in, std::ios::binary);
            if (!in) throw PreconditionError("cannot open " + report_in);
            MetricReport rep = MetricReport::from_json(nlohmann::json::parse(in));
            std::cout << render_summary_table(rep);
            if (per_task) std::cout << "\n" << render_task_table(rep);
        }
    } catch (const std::exception& e) {
        describe_failure(std::cerr, e, workdir_for_errors);
        return exit_code_for(std::current_exception());
    }
    return 0;
}
