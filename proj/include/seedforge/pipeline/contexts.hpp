#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seedforge/gateway/gateway.hpp"
#include "seedforge/pipeline/prompts.hpp"
#include "seedforge/types.hpp"
#include "seedforge/util/rng.hpp"

namespace seedforge {

struct ContextPolicy {
    double p_wiki = prompts::kDefaultPWiki;
    double temperature = prompts::kContextTemperature;
    std::string prompt_template = std::string(prompts::kDefaultContextTemplate);
    int search_limit = prompts::kWikiSearchLimit;
    int max_tokens = 2048;
    bool parallel = true;

    void validate() const;  // ConfigError on out-of-range fields
};

ContextSourceKind choose_source(const ContextPolicy& policy, Rng& rng);

// Uniform draw over the 13 context styles.
std::string draw_style(Rng& rng);

// One generation call with `style` and the topic in the context template.
// Throws PreconditionError for an unknown style and GenerationError for an
// empty completion.
ContextDoc generate_context(const Topic& topic, const std::string& style, Gateway& gateway,
                            const ContextPolicy& policy, std::uint64_t seed);

// Top-k search, uniform article, uniform non-empty section. Falls back to a
// generated context (fallback=true) when the search is empty or the chosen
// article has no usable section.
ContextDoc wiki_context(const Topic& topic, Gateway& gateway, Rng& rng,
                        const ContextPolicy& policy);

// One context per topic, ordered by topic index. Each topic draws from its
// own stream derived from (seed, round, index), so results do not depend on
// scheduling. `round` lets callers draw further contexts for the same topics.
std::vector<ContextDoc> build_contexts(const std::vector<Topic>& topics, Gateway& gateway,
                                       const ContextPolicy& policy, std::uint64_t seed,
                                       int round = 0);

}  // namespace seedforge
