#include "seedforge/pipeline/contexts.hpp"


#include "seedforge/util/hash.hpp"
#include "seedforge/util/parallel.hpp"
#include "seedforge/util/utf8.hpp"

namespace seedforge {

void ContextPolicy::validate() const {
    if (!(p_wiki >= 0.0 && p_wiki <= 1.0)) throw ConfigError("context.p_wiki", "must be in [0,1]");
    if (!(temperature >= 0.0 && temperature <= 1.0)) {
        throw ConfigError("context.temperature", "must be in [0,1]");
    }
    if (search_limit < 1) throw ConfigError("wiki.search_limit", "must be >= 1");
    if (prompt_template.find("[topic]") == std::string::npos) {
        throw ConfigError("context.template", "must contain a [topic] slot");
    }
}

ContextSourceKind choose_source(const ContextPolicy& policy, Rng& rng) {
    return rng.bernoulli(policy.p_wiki) ? ContextSourceKind::wiki : ContextSourceKind::generated;
}

std::string draw_style(Rng& rng) {
    return std::string(prompts::kContextStyles[rng.uniform_index(prompts::kContextStyles.size())]);
}

ContextDoc generate_context(const Topic& topic, const std::string& style, Gateway& gateway,
                            const ContextPolicy& policy, std::uint64_t seed) {
    if (!prompts::is_context_style(style)) {
        throw PreconditionError("generate_context: unknown style '" + style + "'");
    }
    if (utf8::trim(topic.text).empty()) throw PreconditionError("generate_context: empty topic");
    GenRequest req;
    req.prompt = prompts::context_prompt(policy.prompt_template, style, topic.text);
    req.temperature = policy.temperature;
    req.max_tokens = policy.max_tokens;
    req.seed = seed;
    std::string body = utf8::trim(gateway.complete(req));
    if (body.empty()) throw GenerationError("empty context completion for topic '" + topic.text + "'");
    ContextDoc doc;
    doc.body = std::move(body);
    doc.source.kind = ContextSourceKind::generated;
    doc.source.style = style;
    doc.topic = topic;
    doc.provenance = {policy.temperature, seed, sha256_hex(req.prompt), ""};
    return doc;
}

ContextDoc wiki_context(const Topic& topic, Gateway& gateway, Rng& rng,
                        const ContextPolicy& policy) {
    if (utf8::trim(topic.text).empty()) throw PreconditionError("wiki_context: empty topic");
    std::string path = "wiki";
    std::string why;
    const auto refs = gateway.wiki_search(topic.text, policy.search_limit);
    if (!refs.empty()) {
        const std::size_t a = rng.uniform_index(refs.size());
        path += ":article=" + std::to_string(a + 1) + "/" + std::to_string(refs.size());
        std::vector<ContextDoc> sections;
        try {
            sections = gateway.wiki_fetch_sections(refs[a]);
        } catch (const NotFoundError&) {
            why = "article vanished";
        }
        if (!sections.empty()) {
            const std::size_t s = rng.uniform_index(sections.size());
            ContextDoc doc = std::move(sections[s]);
            doc.topic = topic;
            doc.rng_path = path + ":section=" + std::to_string(s + 1) + "/" +
                           std::to_string(sections.size());
            return doc;
        }
        if (why.empty()) why = "no usable sections";
    } else {
        why = "no search results";
    }
    const std::string style = draw_style(rng);
    const std::uint64_t gen_seed = rng.next_u64();
    ContextDoc doc = generate_context(topic, style, gateway, policy, gen_seed);
    doc.fallback = true;
    doc.rng_path = path + ":fallback(" + why + "):style=" + style;
    doc.provenance.seed_path = doc.rng_path;
    return doc;
}

namespace {

ContextDoc context_for(const Topic& topic, std::int64_t index, Gateway& gateway,
                       const ContextPolicy& policy, std::uint64_t seed, int round) {
    const std::uint64_t topic_seed =
        derive_seed(derive_seed(seed, "contexts/round", static_cast<std::uint64_t>(round)), "topic",
                    static_cast<std::uint64_t>(index));
    Rng rng(topic_seed);
    const std::string prefix =
        "contexts/r" + std::to_string(round) + "/t" + std::to_string(index) + ":";
    ContextDoc doc;
    if (choose_source(policy, rng) == ContextSourceKind::wiki) {
        doc = wiki_context(topic, gateway, rng, policy);
        doc.rng_path = prefix + doc.rng_path;
        if (doc.fallback) doc.provenance.seed_path = doc.rng_path;
    } else {
        const std::string style = draw_style(rng);
        doc = generate_context(topic, style, gateway, policy, rng.next_u64());
        doc.rng_path = prefix + "generated:style=" + style;
        doc.provenance.seed_path = doc.rng_path;
    }
    doc.topic_index = index;
    return doc;
}

}  // namespace

std::vector<ContextDoc> build_contexts(const std::vector<Topic>& topics, Gateway& gateway,
                                       const ContextPolicy& policy, std::uint64_t seed, int round) {
    policy.validate();
    const std::size_t workers = policy.parallel ? gateway.budget().max_concurrent : 1;
    auto out = parallel_map<ContextDoc>(topics.size(), workers, [&](std::size_t i) {
        return context_for(topics[i], static_cast<std::int64_t>(i), gateway, policy, seed, round);
    });
    return out;
}

}  // namespace seedforge
