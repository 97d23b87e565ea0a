#include "seedforge/pipeline/topics.hpp"

#include <unordered_set>

#include "seedforge/pipeline/lenient_json.hpp"
#include "seedforge/util/hash.hpp"
#include "seedforge/util/parallel.hpp"
#include "seedforge/util/utf8.hpp"

namespace seedforge {

std::vector<Topic> TopicSet::of(TopicCategory c) const {
    std::vector<Topic> out;
    for (const auto& t : topics) {
        if (t.category == c) out.push_back(t);
    }
    return out;
}

std::string render_topic_prompt(TopicCategory category, const std::string& culture) {
    return prompts::topic_prompt(category, culture);
}

std::vector<std::string> parse_topic_list(const std::string& raw) {
    const auto list = lenient::find_first(raw, lenient::Want::array, [](const nlohmann::json& j) {
        if (j.empty()) return false;
        for (const auto& e : j) {
            if (!e.is_string()) return false;
        }
        return true;
    });
    if (!list) throw ParseError("no list of strings found in topic reply", raw);
    std::vector<std::string> out;
    for (const auto& e : *list) {
        std::string t = utf8::collapse_whitespace(e.get<std::string>());
        // Some replies double-quote inside the string: "\"topic\"".
        while (t.size() >= 2 && (t.front() == '"' || t.front() == '\'') && t.back() == t.front()) {
            t = utf8::trim(std::string_view(t).substr(1, t.size() - 2));
        }
        if (!t.empty()) out.push_back(std::move(t));
    }
    if (out.empty()) throw ParseError("topic list contains no usable entries", raw);
    return out;
}

std::vector<Topic> dedup_topics(const std::vector<Topic>& topics) {
    std::unordered_set<std::string> seen;
    std::vector<Topic> out;
    for (const auto& t : topics) {
        if (seen.insert(utf8::normalize_key(t.text)).second) out.push_back(t);
    }
    return out;
}

namespace {

struct BatchResult {
    std::vector<std::string> texts;
    Provenance provenance;
    int calls = 0;
    bool ok = false;
    std::string last_raw;
};

BatchResult run_batch(TopicCategory category, std::int64_t batch_id, Gateway& gateway,
                      std::uint64_t seed, const TopicGenConfig& cfg, const std::string& prompt) {
    const std::string label = std::string("topics/") + std::string(to_string(category));
    const std::uint64_t batch_seed = derive_seed(seed, label, static_cast<std::uint64_t>(batch_id));
    BatchResult result;
    for (int attempt = 0; attempt <= cfg.retry_limit; ++attempt) {
        GenRequest req;
        req.prompt = prompt;
        req.temperature = cfg.temperature;
        req.max_tokens = cfg.max_tokens;
        req.seed = derive_seed(batch_seed, "attempt", static_cast<std::uint64_t>(attempt));
        ++result.calls;
        result.last_raw = gateway.complete(req);
        try {
            result.texts = parse_topic_list(result.last_raw);
        } catch (const ParseError&) {
            continue;  // fresh seed, no repair
        }
        result.provenance = {cfg.temperature, *req.seed, sha256_hex(prompt),
                             label + "/b" + std::to_string(batch_id) + "/a" + std::to_string(attempt)};
        result.ok = true;
        return result;
    }
    return result;
}

}  // namespace

TopicFragment generate_topics(TopicCategory category, int n, Gateway& gateway, std::uint64_t seed,
                              const TopicGenConfig& cfg, const std::set<std::string>& exclude) {
    if (n < 1) throw PreconditionError("generate_topics: n must be >= 1");
    if (cfg.per_batch < 1) throw PreconditionError("generate_topics: per_batch must be >= 1");
    const std::string prompt = render_topic_prompt(category, cfg.culture);

    TopicFragment frag;
    std::unordered_set<std::string> seen;
    std::int64_t next_batch = 0;
    int stalled = 0;
    while (static_cast<int>(frag.topics.size()) < n) {
        const int missing = n - static_cast<int>(frag.topics.size());
        const int batches = cfg.parallel ? (missing + cfg.per_batch - 1) / cfg.per_batch : 1;
        const std::int64_t first = next_batch;
        next_batch += batches;
        const std::size_t workers = cfg.parallel ? gateway.budget().max_concurrent : 1;
        const auto results = parallel_map<BatchResult>(
            static_cast<std::size_t>(batches), workers, [&](std::size_t b) {
                return run_batch(category, first + static_cast<std::int64_t>(b), gateway, seed, cfg,
                                 prompt);
            });
        for (const auto& r : results) frag.calls += static_cast<std::uint64_t>(r.calls);

        bool progressed = false;
        for (std::size_t b = 0; b < results.size(); ++b) {
            const std::int64_t batch_id = first + static_cast<std::int64_t>(b);
            if (!results[b].ok) continue;
            for (const auto& text : results[b].texts) {
                if (static_cast<int>(frag.topics.size()) >= n) break;
                std::string key = utf8::normalize_key(text);
                if (exclude.contains(key)) {
                    frag.collisions.push_back(key);
                    continue;
                }
                if (!seen.insert(key).second) continue;
                frag.topics.push_back({text, category, batch_id, results[b].provenance});
                progressed = true;
            }
        }
        for (std::size_t b = 0; b < results.size(); ++b) {
            if (results[b].ok) continue;
            // Successful batches of the same round are kept so the
            // reported count is accurate.
            throw GenerationExhaustedError(
                "topic batch " + std::to_string(first + static_cast<std::int64_t>(b)) +
                    " unparseable after " + std::to_string(cfg.retry_limit + 1) +
                    " attempts; collected " + std::to_string(frag.topics.size()) + " of " +
                    std::to_string(n),
                frag.topics.size());
        }
        stalled = progressed ? 0 : stalled + 1;
        if (stalled >= cfg.stall_limit) {
            throw GenerationExhaustedError(
                std::to_string(stalled) + " consecutive topic batches added nothing new; collected " +
                    std::to_string(frag.topics.size()) + " of " + std::to_string(n),
                frag.topics.size());
        }
    }
    return frag;
}

TopicSet generate_topic_set(int general, int cultural, Gateway& gateway, std::uint64_t seed,
                            const TopicGenConfig& cfg) {
    if (general < 0 || cultural < 0 || general + cultural == 0) {
        throw PreconditionError("generate_topic_set: need a positive topic count");
    }
    TopicSet set;
    set.requested_general = general;
    set.requested_cultural = cultural;
    std::set<std::string> taken;
    if (cultural > 0) {
        auto frag = generate_topics(TopicCategory::cultural, cultural, gateway, seed, cfg);
        for (const auto& t : frag.topics) taken.insert(utf8::normalize_key(t.text));
        set.calls += frag.calls;
        set.topics = std::move(frag.topics);
    }
    if (general > 0) {
        auto frag = generate_topics(TopicCategory::general, general, gateway, seed, cfg, taken);
        set.calls += frag.calls;
        set.collisions = std::move(frag.collisions);
        for (auto& t : frag.topics) set.topics.push_back(std::move(t));
    }
    return set;
}

}  // namespace seedforge
