#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>

#include "seedforge/errors.hpp"
#include "seedforge/gateway/mock.hpp"
#include "seedforge/store/codec.hpp"
#include "seedforge/store/config.hpp"
#include "seedforge/store/records.hpp"
#include "seedforge/store/run.hpp"
#include "seedforge/util/hash.hpp"
#include "test_support.hpp"

using namespace seedforge;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* kSmallRun =
    "# end-to-end smoke configuration\n"
    "seed = 42\n"
    "dataset.size = 50\n"
    "topics.cultural = 8\n"
    "topics.general = 6\n";

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    out << s;
}

std::string config_error_key(const std::function<void()>& f) {
    try {
        f();
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "<no error>";
}

InstructionRecord sample_record(std::size_t i) {
    InstructionRecord r;
    r.id = "rec-" + std::to_string(i);
    r.task = kAllTasks[i % 4];
    r.instruction = "คำสั่ง " + std::to_string(i) + " \"quoted\"\n";
    if (i % 3 != 0) r.context = "บริบท\tข้อความ " + std::to_string(i * 7);
    r.output = "ผลลัพธ์ " + std::to_string(i);
    r.topic = {"หัวข้อ " + std::to_string(i % 17), i % 2 ? TopicCategory::cultural : TopicCategory::general,
               static_cast<std::int64_t>(i % 5), {0.95, i * 31, "ab", "topics/b0"}};
    r.language = "th";
    r.lineage = {"generated", "dedup(0.95)"};
    if (i % 2) r.flags = PropertyFlags{true, i % 4 == 1, false};
    r.provenance = {0.35, i, sha256_hex(r.instruction), "instructions/" + std::to_string(i)};
    r.context_source = r.context ? "generated:essay" : "";
    return r;
}

// Delegates to the mock until `limit` calls have been made, then fails
// permanently, as a revoked key would.
class FailingGenerator final : public TextGenerator {
public:
    explicit FailingGenerator(std::size_t limit) : limit_(limit) {}
    std::string id() const override { return inner_.id(); }
    std::string complete(const GenRequest& req) override {
        if (calls_.fetch_add(1) >= limit_) throw ProviderError("injected failure", false, 401);
        return inner_.complete(req);
    }

private:
    MockGenerator inner_;
    std::size_t limit_;
    std::atomic<std::size_t> calls_{0};
};

ProviderSet mocks(std::shared_ptr<TextGenerator> gen = std::make_shared<MockGenerator>()) {
    return {.generator = std::move(gen),
            .embedder = std::make_shared<MockEmbedder>(128),
            .translator = std::make_shared<MockTranslator>(),
            .paraphraser = std::make_shared<MockParaphraser>(),
            .wiki = std::make_shared<MockWiki>()};
}

class StubHttp final : public HttpTransport {
public:
    HttpResponse get(const std::string&, const HttpParams&, const HttpHeaders&) override {
        ++calls;
        return {401, R"({"error":"bad key"})"};
    }
    HttpResponse post_json(const std::string&, const std::string&, const HttpHeaders&) override {
        ++calls;
        return {401, R"({"error":{"message":"invalid api key"}})"};
    }
    int calls = 0;
};

}  // namespace

// ---- config ----

TEST(Config, EmptyFileGivesDefaults) {
    PipelineConfig c = parse_config("");
    EXPECT_EQ(c.topics.temperature, 0.95);
    EXPECT_EQ(c.tasks.closed_qa_temperature, 0.35);
    EXPECT_EQ(c.tasks.summarization_temperature, 0.35);
    EXPECT_EQ(c.tasks.conversation_temperature, 0.8);
    EXPECT_EQ(c.tasks.multiple_choice_temperature, 0.4);
    EXPECT_EQ(c.dedup.threshold, 0.95);
    EXPECT_EQ(c.dataset_size, 5000u);
    EXPECT_EQ(c.context.search_limit, 10);
    EXPECT_EQ(c.tasks.closed_qa_pairs, 5);
    EXPECT_EQ(c.topics.per_batch, 20);
    EXPECT_EQ(c.paraphrases, 4);
    EXPECT_EQ(c.cultural_topics, 400);
    EXPECT_EQ(c.general_topics, 300);
    EXPECT_EQ(c.variant, Variant::full);
    EXPECT_EQ(c.task_kinds.size(), 4u);
}

TEST(Config, RangeAndUnknownKeysAreRejectedWithTheKey) {
    EXPECT_EQ(config_error_key([] { parse_config("dedup.threshold = 1.5"); }), "dedup.threshold");
    EXPECT_EQ(config_error_key([] { parse_config("dedup.threshold = 0"); }), "dedup.threshold");
    EXPECT_EQ(config_error_key([] { parse_config("tasks.conversation.temperature = 1.2"); }),
              "tasks.conversation.temperature");
    EXPECT_EQ(config_error_key([] { parse_config("dataset.size = 0"); }), "dataset.size");
    EXPECT_EQ(config_error_key([] { parse_config("dataset.size = -3"); }), "dataset.size");
    EXPECT_EQ(config_error_key([] { parse_config("seed = forty"); }), "seed");
    EXPECT_EQ(config_error_key([] { parse_config("dedup.treshold = 0.9"); }), "dedup.treshold");
    EXPECT_EQ(config_error_key([] { parse_config("seed = 1\nseed = 2"); }), "seed");
    EXPECT_EQ(config_error_key([] { parse_config("ablation.variant = partial"); }), "ablation.variant");
    EXPECT_EQ(config_error_key([] { parse_config("provider.wiki.kind = openai\nprovider.wiki.base_url = http://x"); }),
              "provider.wiki.kind");
    EXPECT_EQ(config_error_key([] { parse_config("provider.generation.kind = openai"); }),
              "provider.generation.base_url");
    EXPECT_EQ(config_error_key([] { parse_config("topics.cultural = 0\ntopics.general = 0"); }), "topics.general");
    EXPECT_THROW(parse_config("just words"), ConfigError);
    EXPECT_THROW(parse_config("context.template = \"unterminated"), ConfigError);
}

TEST(Config, CommentsQuotesAndLists) {
    PipelineConfig c = parse_config(
        "  # full line comment\n"
        "culture = \"Thai # not a comment\"   # trailing comment\n"
        "context.template = \"Write about [topic]\\nin detail\"\n"
        "tasks.enabled = closed_qa, multiple_choice\n"
        "dedup.index = exact\n"
        "dedup.mode = full_set\n"
        "eval.tokenizer = characters\n");
    EXPECT_EQ(c.culture, "Thai # not a comment");
    EXPECT_EQ(c.context.prompt_template, "Write about [topic]\nin detail");
    ASSERT_EQ(c.task_kinds.size(), 2u);
    EXPECT_EQ(c.task_kinds[1], TaskKind::multiple_choice);
    EXPECT_EQ(c.dedup.index_kind, IndexKind::exact);
    EXPECT_EQ(c.dedup.mode, DedupMode::full_set);
    EXPECT_EQ(c.tokenizer, TokenizerMode::characters);
    EXPECT_THROW(parse_config("tasks.enabled = closed_qa, closed_qa"), ConfigError);
}

TEST(Config, EffectiveConfigCoversEveryKeyAndReparses) {
    PipelineConfig c = parse_config("seed = 7\ntasks.conversation.temperature = 0.6\nbudget.cache_dir = /tmp/x");
    json j = c.to_json();
    std::vector<std::string> keys;
    for (const auto& [k, _] : j.items()) keys.push_back(k);
    EXPECT_EQ(keys, config_keys());

    std::string text;
    for (const auto& [k, v] : j.items()) text += k + " = " + (v.is_string() ? json(v.get<std::string>()).dump() : v.dump()) + "\n";
    EXPECT_EQ(parse_config(text).to_json(), j);
}

TEST(Config, OverridesApplyInOrderAndRevalidate) {
    PipelineConfig c = parse_config("seed = 1");
    apply_overrides(c, {"seed=9", "dataset.size = 12", "culture=\"Lao\""});
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(c.dataset_size, 12u);
    EXPECT_EQ(c.culture, "Lao");
    EXPECT_EQ(config_error_key([&] { apply_overrides(c, {"dedup.threshold=2"}); }), "dedup.threshold");
    EXPECT_THROW(apply_overrides(c, {"seed"}), ConfigError);
}

TEST(Config, MissingFileIsAConfigError) {
    EXPECT_THROW(load_config("/nonexistent/seedforge.conf"), ConfigError);
    test::TempDir dir;
    spit(dir.path() / "a.conf", "seed = 3\n");
    EXPECT_EQ(load_config(dir.path() / "a.conf").seed, 3u);
}

// ---- records ----

TEST(Records, RoundTripFiveThousand) {
    test::TempDir dir;
    std::vector<InstructionRecord> in;
    for (std::size_t i = 0; i < 5000; ++i) in.push_back(sample_record(i));
    write_records(in, dir.path() / "a.jsonl");
    EXPECT_EQ(read_records(dir.path() / "a.jsonl"), in);

    write_records(read_records(dir.path() / "a.jsonl"), dir.path() / "b.jsonl");
    EXPECT_EQ(slurp(dir.path() / "a.jsonl"), slurp(dir.path() / "b.jsonl"));
}

TEST(Records, KeysAreSortedAndNullablesExplicit) {
    test::TempDir dir;
    write_records({sample_record(0)}, dir.path() / "a.jsonl");
    const std::string line = slurp(dir.path() / "a.jsonl");
    json j = json::parse(line);
    EXPECT_TRUE(j.at("context").is_null());
    EXPECT_TRUE(j.at("flags").is_null());
    EXPECT_LT(line.find("\"context\""), line.find("\"id\""));
    EXPECT_LT(line.find("\"id\""), line.find("\"output\""));
}

TEST(Records, MalformedLinesReportTheirLineNumber) {
    test::TempDir dir;
    const std::string good1 = json(sample_record(1)).dump();
    const std::string good2 = json(sample_record(2)).dump();
    auto line_of = [&](const std::string& content) -> std::size_t {
        spit(dir.path() / "x.jsonl", content);
        try {
            read_records(dir.path() / "x.jsonl");
        } catch (const FormatError& e) {
            return e.line();
        }
        return 0;
    };
    EXPECT_EQ(line_of(good1 + "\n" + good1 + "\n"), 2u);                         // duplicate id
    EXPECT_EQ(line_of(good1 + "\n" + good2 + "\n\xff\xfe{}\n"), 3u);             // not UTF-8
    EXPECT_EQ(line_of(good1 + "\n{\"id\": \n"), 2u);                             // bad JSON
    EXPECT_EQ(line_of(good1 + "\n[1,2]\n"), 2u);                                 // not an object
    json missing = json::parse(good2);
    missing.erase("lineage");
    EXPECT_EQ(line_of(good1 + "\n" + missing.dump() + "\n"), 2u);
    json bad_task = json::parse(good2);
    bad_task["task"] = "poetry";
    EXPECT_EQ(line_of(bad_task.dump() + "\n"), 1u);
    EXPECT_EQ(line_of(good1 + "\n\n" + good2 + "\n"), 2u);                      // blank line
    EXPECT_EQ(line_of(good1 + "\n" + good2 + "\n"), 0u);
}

TEST(Records, WriterRejectsDuplicateIds) {
    test::TempDir dir;
    EXPECT_THROW(write_records({sample_record(3), sample_record(3)}, dir.path() / "a.jsonl"), PreconditionError);
}

TEST(Records, DatasetAndManifestRoundTrip) {
    test::TempDir dir;
    DatasetManifest m;
    for (std::size_t i = 0; i < 20; ++i) m.records.push_back(sample_record(i));
    m.recipe.variant = Variant::diversity;
    m.recipe.general_topics = 750;
    m.recipe.dedup = true;
    m.recipe.dedup_threshold = 0.95;
    m.recipe.transforms = {"round_trip(th>en>th)"};
    m.flags = flags_from_recipe(m.recipe);
    m.target_size = 20;
    m.seed = 5;
    m.removals.removed.push_back({"rec-x", "rec-1", 0.97});
    m.skipped.push_back({"rec-y", "round trip translation failed"});
    const json mj = write_dataset(m, dir.path() / "d.jsonl", parse_config("").to_json());
    EXPECT_EQ(mj.at("record_count"), 20);
    EXPECT_EQ(mj.at("flags_label"), "F- C- D+");
    EXPECT_TRUE(fs::exists(dir.path() / "d.manifest.json"));

    DatasetManifest back = read_dataset(dir.path() / "d.jsonl");
    EXPECT_EQ(back.records, m.records);
    EXPECT_EQ(back.flags, m.flags);
    EXPECT_EQ(back.recipe.to_json(), m.recipe.to_json());
    EXPECT_EQ(back.skipped, m.skipped);
    EXPECT_EQ(back.removals.removed.size(), 1u);

    spit(dir.path() / "d.jsonl", slurp(dir.path() / "d.jsonl") + json(sample_record(99)).dump() + "\n");
    EXPECT_THROW(read_dataset(dir.path() / "d.jsonl"), FormatError);
}

// ---- run ----

TEST(Run, SmallMockRunMeetsItsTargetAndIsTraceable) {
    test::TempDir dir;
    const auto t0 = std::chrono::steady_clock::now();
    RunResult r = run_pipeline(parse_config(kSmallRun), dir.path());
    EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(30));

    ASSERT_EQ(r.manifest.records.size(), 50u);
    EXPECT_EQ(r.manifest.flags, (PropertyFlags{true, true, true}));
    EXPECT_EQ(read_records(r.records_path), r.manifest.records);
    EXPECT_EQ(r.manifest_json.at("config").at("seed"), 42);
    EXPECT_EQ(r.manifest_json.at("records_sha256"), file_sha256(r.records_path));
    for (const auto& rec : r.manifest.records) {
        ASSERT_TRUE(rec.flags.has_value());
        EXPECT_EQ(*rec.flags, (PropertyFlags{true, true, true}));
        EXPECT_FALSE(rec.topic.text.empty()) << rec.id;
        EXPECT_EQ(rec.provenance.prompt_hash.size(), 64u) << rec.id;
        EXPECT_GT(rec.provenance.temperature, 0.0) << rec.id;
        EXPECT_FALSE(rec.provenance.seed_path.empty()) << rec.id;
        if (rec.task != TaskKind::conversation) EXPECT_FALSE(rec.context_source.empty()) << rec.id;
    }
}

TEST(Run, ManifestHashIsReproducibleAndMatchesGolden) {
    test::TempDir a, b;
    const RunResult ra = run_pipeline(parse_config(kSmallRun), a.path());
    const RunResult rb = run_pipeline(parse_config(kSmallRun), b.path());
    EXPECT_EQ(ra.manifest_sha256, rb.manifest_sha256);
    EXPECT_EQ(slurp(ra.records_path), slurp(rb.records_path));

    // A rerun in the same directory is served entirely from checkpoints.
    const RunResult again = run_pipeline(parse_config(kSmallRun), a.path());
    EXPECT_EQ(again.manifest_sha256, ra.manifest_sha256);
    EXPECT_EQ(again.stats.provider_calls, 0u);
    EXPECT_GT(again.checkpoint_hits, 0u);

    const std::string golden = slurp(fs::path(SEEDFORGE_FIXTURE_DIR) / "golden" / "run_seed42_size50.sha256");
    EXPECT_EQ(ra.manifest_sha256 + "\n", golden);
}

TEST(Run, ResumeAfterInjectedFailureMatchesUninterruptedRun) {
    test::TempDir clean, broken;
    const PipelineConfig cfg = parse_config(kSmallRun);
    RunOptions plain;
    plain.providers = mocks();
    const RunResult reference = run_pipeline(cfg, clean.path(), plain);
    const std::uint64_t total_calls = reference.stats.provider_calls;

    RunOptions failing;
    failing.providers = mocks(std::make_shared<FailingGenerator>(total_calls * 2 / 3));
    std::string stage;
    try {
        run_pipeline(cfg, broken.path(), failing);
        FAIL() << "expected the injected failure to surface";
    } catch (const StageError& e) {
        stage = e.stage();
        try {
            std::rethrow_if_nested(e);
            FAIL() << "cause should be nested";
        } catch (const ProviderError& cause) {
            EXPECT_EQ(cause.http_status(), 401);
        }
    }
    EXPECT_NE(stage, "topics");
    EXPECT_FALSE(fs::exists(broken.path() / "dataset.jsonl"));
    EXPECT_FALSE(fs::is_empty(broken.path() / "checkpoints"));

    const RunResult resumed = run_pipeline(cfg, broken.path(), plain);
    EXPECT_GT(resumed.checkpoint_hits, 0u);
    EXPECT_LT(resumed.stats.provider_calls, total_calls);
    EXPECT_EQ(resumed.manifest_sha256, reference.manifest_sha256);
    EXPECT_EQ(slurp(resumed.records_path), slurp(reference.records_path));
}

TEST(Run, ConfigChangesInvalidateCheckpoints) {
    test::TempDir dir;
    const RunResult a = run_pipeline(parse_config(kSmallRun), dir.path());
    PipelineConfig changed = parse_config(kSmallRun);
    apply_overrides(changed, {"tasks.conversation.temperature=0.7"});
    const RunResult b = run_pipeline(changed, dir.path());
    EXPECT_GT(b.stats.provider_calls, 0u);
    EXPECT_EQ(b.manifest_json.at("config").at("tasks.conversation.temperature"), 0.7);
    EXPECT_NE(a.manifest_sha256, b.manifest_sha256);
    for (const auto& rec : b.manifest.records) {
        if (rec.task == TaskKind::conversation) EXPECT_EQ(rec.provenance.temperature, 0.7);
    }
}

TEST(Run, WorkdirIsLocked) {
    test::TempDir dir;
    WorkdirLock held(dir.path());
    EXPECT_THROW(run_pipeline(parse_config(kSmallRun), dir.path()), PreconditionError);
}

TEST(Run, MissingCredentialFailsBeforeAnyRequest) {
    auto http = std::make_shared<StubHttp>();
    PipelineConfig c = parse_config(
        "provider.generation.kind = openai\n"
        "provider.generation.base_url = https://api.example.com/v1\n"
        "provider.generation.model = m\n"
        "provider.generation.api_key_env = SEEDFORGE_TEST_UNSET_KEY\n");
    ::unsetenv("SEEDFORGE_TEST_UNSET_KEY");
    EXPECT_EQ(config_error_key([&] { make_providers(c, http); }), "provider.generation.api_key_env");
    EXPECT_EQ(http->calls, 0);
}

TEST(Run, RejectedCredentialFailsAtFirstCallAndKeepsCheckpoints) {
    test::TempDir dir;
    run_pipeline(parse_config(kSmallRun), dir.path());
    std::size_t before = 0;
    for (const auto& e : fs::directory_iterator(dir.path() / "checkpoints")) before += e.is_regular_file();

    auto http = std::make_shared<StubHttp>();
    ::setenv("SEEDFORGE_TEST_KEY", "sk-wrong", 1);
    PipelineConfig c = parse_config(std::string(kSmallRun) +
                                    "provider.generation.kind = openai\n"
                                    "provider.generation.base_url = https://api.example.com/v1\n"
                                    "provider.generation.model = m\n"
                                    "provider.generation.api_key_env = SEEDFORGE_TEST_KEY\n"
                                    "budget.backoff_base_seconds = 0\n"
                                    "budget.backoff_max_seconds = 0\n");
    RunOptions opt;
    opt.http = http;
    try {
        run_pipeline(c, dir.path(), opt);
        FAIL() << "expected failure";
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "topics");
    }
    EXPECT_GE(http->calls, 1);
    std::size_t after = 0;
    for (const auto& e : fs::directory_iterator(dir.path() / "checkpoints")) after += e.is_regular_file();
    EXPECT_EQ(after, before);
    const RunResult again = run_pipeline(parse_config(kSmallRun), dir.path());
    EXPECT_EQ(again.stats.provider_calls, 0u);
}

TEST(Run, CultureVariantFromAFullBuild) {
    test::TempDir full_dir, culture_dir;
    const RunResult full = run_pipeline(parse_config(kSmallRun), full_dir.path());
    PipelineConfig c = parse_config(std::string(kSmallRun) + "ablation.variant = culture\nablation.sample = 10\n");
    apply_overrides(c, {"ablation.source=" + full.records_path.string()});
    const RunResult r = run_pipeline(c, culture_dir.path());
    EXPECT_EQ(r.manifest.records.size(), 50u);
    EXPECT_EQ(r.manifest.flags, (PropertyFlags{false, true, false}));

    PipelineConfig missing = parse_config("ablation.variant = culture");
    EXPECT_EQ(config_error_key([&] { run_pipeline(missing, culture_dir.path() / "x"); }), "ablation.source");
}

TEST(Run, ExitCodesFollowTheInnermostCause) {
    auto code = [](auto&& thrower) {
        try {
            thrower();
        } catch (...) {
            return exit_code_for(std::current_exception());
        }
        return 0;
    };
    EXPECT_EQ(code([] { throw ConfigError("seed", "bad"); }), 2);
    EXPECT_EQ(code([] { throw ProviderError("down", true, 503); }), 3);
    EXPECT_EQ(code([] { throw BuildShortfallError("short", 1, 2); }), 4);
    EXPECT_EQ(code([] { throw FormatError("f", 1, "bad"); }), 1);
    EXPECT_EQ(code([] {
                  try {
                      throw ProviderError("revoked", false, 401);
                  } catch (const std::exception& e) {
                      std::throw_with_nested(StageError("contexts/r0", e.what()));
                  }
              }),
              3);
    EXPECT_EQ(code([] { throw StageError("topics", "no cause"); }), 1);
}

// ---- eval inputs ----

TEST(EvalInputs, AlignsPredictionsToReferences) {
    test::TempDir dir;
    spit(dir.path() / "refs.jsonl",
         R"({"id":"a","task":"closed_qa","test_set":"culture","reference":"x y"})" "\n"
         R"({"id":"b","task":"open_qa","test_set":"general","reference":"z"})" "\n");
    spit(dir.path() / "sys1.jsonl", R"({"id":"b","prediction":"z"})" "\n" R"({"id":"a","prediction":"x"})" "\n");
    spit(dir.path() / "sys2.jsonl", R"({"id":"a","prediction":"q"})" "\n");
    auto systems = read_eval_inputs(dir.path() / "refs.jsonl", {dir.path() / "sys1.jsonl"});
    ASSERT_EQ(systems.size(), 1u);
    EXPECT_EQ(systems[0].name, "sys1");
    EXPECT_EQ(systems[0].pairs[0].prediction, "x");
    EXPECT_EQ(systems[0].pairs[1].reference, "z");
    EXPECT_THROW(read_eval_inputs(dir.path() / "refs.jsonl", {dir.path() / "sys2.jsonl"}), AlignmentError);

    spit(dir.path() / "bad.jsonl", R"({"id":"a","task":"essay","test_set":"culture","reference":"x"})" "\n");
    try {
        read_eval_inputs(dir.path() / "bad.jsonl", {dir.path() / "sys1.jsonl"});
        FAIL();
    } catch (const FormatError& e) {
        EXPECT_EQ(e.line(), 1u);
    }
}

TEST(EvalInputs, ReportJsonRoundTrips) {
    EvalPair p{"a", BenchTask::closed_qa, TestSet::culture, "ก ข ค", "ก ข"};
    MetricReport r = aggregate_report({{"s1", {p}}, {"s2", {p}}}, EvalOptions{});
    const json j = r.to_json();
    EXPECT_EQ(MetricReport::from_json(j).to_json(), j);
}
