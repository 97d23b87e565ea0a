#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "seedforge/gateway/gateway.hpp"
#include "seedforge/pipeline/prompts.hpp"
#include "seedforge/types.hpp"

namespace seedforge {

struct TopicGenConfig {
    int per_batch = prompts::kTopicsPerBatch;
    double temperature = prompts::kTopicTemperature;
    std::string culture = "Thai";
    int max_tokens = 1024;
    // Consecutive unparseable replies tolerated for one batch.
    int retry_limit = 3;
    // Consecutive batches that add nothing new before giving up.
    int stall_limit = 8;
    // Issue the batches of a round concurrently (merge order stays by batch id).
    bool parallel = true;
};

struct TopicSet {
    std::vector<Topic> topics;
    int requested_general = 0;
    int requested_cultural = 0;
    // Normalized texts generated for one category that already existed in
    // the other; they were skipped.
    std::vector<std::string> collisions;
    std::uint64_t calls = 0;

    std::vector<Topic> of(TopicCategory c) const;
};

std::string render_topic_prompt(TopicCategory category, const std::string& culture = "Thai");

// Extracts the first well-formed bracketed list of strings. Throws
// ParseError (carrying `raw`) when none exists.
std::vector<std::string> parse_topic_list(const std::string& raw);

// Keeps the first occurrence under case-fold + whitespace normalization.
std::vector<Topic> dedup_topics(const std::vector<Topic>& topics);

struct TopicFragment {
    std::vector<Topic> topics;
    std::vector<std::string> collisions;
    std::uint64_t calls = 0;
};

// Batched generation until `n` unique topics exist (then truncated to n).
// Topics whose normalized text is in `exclude` are dropped and reported as
// collisions. Throws GenerationExhaustedError when a batch exceeds its parse
// retries or generation stalls.
TopicFragment generate_topics(TopicCategory category, int n, Gateway& gateway, std::uint64_t seed,
                              const TopicGenConfig& cfg = {},
                              const std::set<std::string>& exclude = {});

// Cultural topics first, then general topics deduplicated globally against
// them.
TopicSet generate_topic_set(int general, int cultural, Gateway& gateway, std::uint64_t seed,
                            const TopicGenConfig& cfg = {});

}  // namespace seedforge
