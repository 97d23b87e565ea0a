#pragma once

// Run configuration. The file format is flat `dotted.key = value` lines with
// `#` comments; values may be double-quoted. Every key has a default, so an
// empty file is a complete configuration.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "seedforge/ablation/builder.hpp"
#include "seedforge/eval/report.hpp"
#include "seedforge/gateway/provider.hpp"

namespace seedforge {

enum class ProviderKind { mock, openai, anthropic, http, mediawiki };

std::string_view to_string(ProviderKind k) noexcept;

struct ProviderEndpoint {
    ProviderKind kind = ProviderKind::mock;
    std::string base_url;
    std::string model;
    std::string api_key_env;  // name of the variable, never the key itself
};

struct PipelineConfig {
    std::uint64_t seed = 0;
    std::string language = "th";
    std::string culture = "Thai";
    int cultural_topics = kFullCulturalTopics;
    int general_topics = kFullGeneralTopics;
    std::size_t dataset_size = kDatasetSize;

    TopicGenConfig topics;
    ContextPolicy context;
    TaskSettings tasks;
    std::vector<TaskKind> task_kinds{std::begin(kAllTasks), std::end(kAllTasks)};
    DedupConfig dedup;

    Variant variant = Variant::full;
    std::string pivot = "en";
    int paraphrases = kParaphrasesPerSample;
    std::size_t sample = kSampledOriginals;
    int fluency_topics = kFluencyTopics;
    int diversity_topics = kDiversityTopics;
    int max_extension_rounds = 8;
    std::string source_records;   // full build feeding the culture-only variant
    std::string external_corpus;  // corpus feeding the no-property variant
    std::string external_language = "en";

    ProviderEndpoint generation;
    ProviderEndpoint embedding;
    ProviderEndpoint translation;
    ProviderEndpoint paraphrase;
    ProviderEndpoint wiki;
    std::size_t embedding_dimension = 128;  // mock embedder only
    ProviderBudget budget;

    TokenizerMode tokenizer = TokenizerMode::unicode_words;
    std::string compare_metric = "bertscore_f1";
    bool strip_english_articles = false;
    std::size_t eval_workers = 1;

    // Cross-field checks; ConfigError naming the key.
    void validate() const;

    // Every key with its effective value, in key order.
    nlohmann::json to_json() const;

    BuildSettings build_settings() const;
    EvalOptions eval_options() const;
};

// All recognized keys, sorted.
std::vector<std::string> config_keys();

// Sets one key from its textual value. Unknown keys and unparsable or
// out-of-range values throw ConfigError with the key.
void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value);

// Parses file content; `origin` prefixes line numbers in errors. Duplicate
// keys are errors. The result is validated.
PipelineConfig parse_config(const std::string& text, const std::string& origin = "<config>");

// Reads and parses a file. A missing file is a ConfigError.
PipelineConfig load_config(const std::filesystem::path& path);

// Applies "key=value" overrides in order and revalidates.
void apply_overrides(PipelineConfig& cfg, const std::vector<std::string>& assignments);

}  // namespace seedforge
