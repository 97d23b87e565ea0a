#include "seedforge/gateway/gateway.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "seedforge/gateway/wikitext.hpp"
#include "seedforge/util/hash.hpp"

namespace seedforge {

using nlohmann::json;

void GenRequest::validate() const {
    if (prompt.empty()) throw PreconditionError("GenRequest: prompt must be non-empty");
    if (!(temperature >= 0.0 && temperature <= 1.0)) {
        throw PreconditionError("GenRequest: temperature must be within [0,1]");
    }
    if (max_tokens <= 0) throw PreconditionError("GenRequest: max_tokens must be positive");
}

void ProviderBudget::validate() const {
    if (max_concurrent < 1) throw ConfigError("budget.max_concurrent", "must be >= 1");
    if (requests_per_minute < 1) throw ConfigError("budget.requests_per_minute", "must be >= 1");
    if (retry_limit < 0 || retry_limit > 10) throw ConfigError("budget.retry_limit", "must be in [0,10]");
    if (backoff_base_seconds < 0 || backoff_max_seconds < backoff_base_seconds) {
        throw ConfigError("budget.backoff", "invalid backoff bounds");
    }
}

namespace {

std::vector<EmbeddingVector> vectors_from_json(const json& j) {
    std::vector<EmbeddingVector> out;
    for (const auto& row : j) {
        EmbeddingVector v;
        v.values = row.get<std::vector<float>>();
        out.push_back(std::move(v));
    }
    return out;
}

json vectors_to_json(const std::vector<EmbeddingVector>& vs) {
    json j = json::array();
    for (const auto& v : vs) j.push_back(v.values);
    return j;
}

void check_vectors(const std::vector<EmbeddingVector>& vs, std::size_t expected_count,
                   const std::string& provider) {
    if (vs.size() != expected_count) {
        throw ProtocolError(provider + " returned " + std::to_string(vs.size()) +
                            " vectors for " + std::to_string(expected_count) + " inputs");
    }
    for (const auto& v : vs) {
        if (v.dimension() == 0 || v.dimension() != vs.front().dimension()) {
            throw ProtocolError(provider + " returned vectors of mixed dimension");
        }
        for (float x : v.values) {
            if (!std::isfinite(x)) throw ProtocolError(provider + " returned a non-finite component");
        }
    }
}

}  // namespace

Gateway::Gateway(ProviderSet providers, ProviderBudget budget, std::shared_ptr<Clock> clock)
    : providers_(std::move(providers)),
      budget_(std::move(budget)),
      clock_(std::move(clock)),
      concurrency_((budget_.validate(), budget_.max_concurrent)),
      rate_limiter_(budget_.requests_per_minute, std::chrono::seconds(60), clock_),
      jitter_(0x5eedf0e9ULL) {
    if (!budget_.cache_dir.empty()) cache_.emplace(budget_.cache_dir);
}

std::string Gateway::cache_key(const std::string& provider_id, const std::string& operation,
                               const std::string& canonical_params) {
    const json key = {{"provider", provider_id}, {"op", operation}, {"params", canonical_params}};
    return sha256_hex(key.dump());
}

template <typename P>
P& Gateway::require(const std::shared_ptr<P>& p, const char* what) const {
    if (!p) throw ConfigError(std::string("provider.") + what, "no provider configured");
    return *p;
}

void Gateway::backoff(int attempt) {
    double jitter;
    {
        std::lock_guard lock(jitter_mu_);
        jitter = 0.5 + jitter_.uniform01();  // [0.5, 1.5)
    }
    const double delay = std::min(budget_.backoff_max_seconds,
                                  budget_.backoff_base_seconds * std::ldexp(1.0, attempt)) * jitter;
    clock_->sleep_for(std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(delay)));
}

std::string Gateway::call(const std::string& provider_id, const std::string& operation,
                          const std::string& canonical_params, bool remote,
                          const std::function<std::string()>& fetch) {
    std::string key;
    if (cache_) {
        key = cache_key(provider_id, operation, canonical_params);
        if (auto hit = cache_->get(key)) {
            ++cache_hits_;
            return *std::move(hit);
        }
    }
    std::string body;
    for (int attempt = 0;; ++attempt) {
        try {
            if (remote) rate_limiter_.acquire();
            ConcurrencyLimiter::Slot slot(concurrency_);
            ++provider_calls_;
            body = fetch();
            break;
        } catch (const ProviderError& e) {
            if (!e.retryable() || attempt >= budget_.retry_limit) throw;
            ++retries_;
            backoff(attempt);
        }
    }
    if (cache_) cache_->put(key, body);
    return body;
}

std::string Gateway::complete(const GenRequest& req) {
    req.validate();
    auto& gen = require(providers_.generator, "generation");
    json params = {{"prompt", req.prompt},
                   {"temperature", req.temperature},
                   {"max_tokens", req.max_tokens}};
    if (req.seed) params["seed"] = *req.seed;
    return call(gen.id(), "complete", params.dump(), gen.is_remote(),
                [&] { return gen.complete(req); });
}

std::vector<EmbeddingVector> Gateway::embed(std::span<const std::string> texts) {
    if (texts.empty()) throw PreconditionError("embed: texts must be non-empty");
    auto& emb = require(providers_.embedder, "embedding");
    const std::size_t chunk = std::max<std::size_t>(1, emb.max_batch());
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t begin = 0; begin < texts.size(); begin += chunk) {
        const auto part = texts.subspan(begin, std::min(chunk, texts.size() - begin));
        const json params = {{"texts", std::vector<std::string>(part.begin(), part.end())}};
        const std::string body = call(emb.id(), "embed", params.dump(), emb.is_remote(), [&] {
            auto vs = emb.embed(part);
            check_vectors(vs, part.size(), emb.id());
            return vectors_to_json(vs).dump();
        });
        auto vs = vectors_from_json(json::parse(body));
        check_vectors(vs, part.size(), emb.id());
        for (auto& v : vs) out.push_back(std::move(v));
    }
    if (out.front().dimension() != out.back().dimension()) {
        throw ProtocolError(emb.id() + ": embedding dimension changed between chunks");
    }
    return out;
}

bool Gateway::supports_token_embeddings() const {
    return providers_.embedder && providers_.embedder->supports_token_embeddings();
}

std::vector<EmbeddingVector> Gateway::embed_tokens(std::span<const std::string> tokens) {
    auto& emb = require(providers_.embedder, "embedding");
    if (!emb.supports_token_embeddings()) {
        throw CapabilityError(emb.id() + " does not provide token-level embeddings");
    }
    if (tokens.empty()) return {};
    const json params = {{"tokens", std::vector<std::string>(tokens.begin(), tokens.end())}};
    const std::string body = call(emb.id(), "embed_tokens", params.dump(), emb.is_remote(), [&] {
        auto vs = emb.embed_tokens(tokens);
        check_vectors(vs, tokens.size(), emb.id());
        return vectors_to_json(vs).dump();
    });
    return vectors_from_json(json::parse(body));
}

std::string Gateway::translate(const std::string& text, const std::string& source_lang,
                               const std::string& target_lang) {
    if (text.empty()) throw PreconditionError("translate: text must be non-empty");
    auto& tr = require(providers_.translator, "translation");
    const json params = {{"text", text}, {"source", source_lang}, {"target", target_lang}};
    return call(tr.id(), "translate", params.dump(), tr.is_remote(),
                [&] { return tr.translate(text, source_lang, target_lang); });
}

std::vector<std::string> Gateway::paraphrase(const std::string& text, int count,
                                             std::uint64_t seed) {
    if (count < 1) throw PreconditionError("paraphrase: count must be >= 1");
    if (text.empty()) throw PreconditionError("paraphrase: text must be non-empty");
    auto& pp = require(providers_.paraphraser, "paraphrase");
    const json params = {{"text", text}, {"count", count}, {"seed", seed}};
    const std::string body = call(pp.id(), "paraphrase", params.dump(), pp.is_remote(), [&] {
        auto variants = pp.paraphrase(text, count, seed);
        if (static_cast<int>(variants.size()) < count) {
            throw ProtocolError(pp.id() + " returned " + std::to_string(variants.size()) +
                                " paraphrases, expected " + std::to_string(count));
        }
        variants.resize(static_cast<std::size_t>(count));
        return json(variants).dump();
    });
    return json::parse(body).get<std::vector<std::string>>();
}

std::vector<WikiArticleRef> Gateway::wiki_search(const std::string& query, int limit) {
    if (query.empty()) throw PreconditionError("wiki_search: query must be non-empty");
    if (limit < 1) throw PreconditionError("wiki_search: limit must be >= 1");
    auto& wiki = require(providers_.wiki, "wiki");
    const json params = {{"query", query}, {"limit", limit}};
    const std::string body = call(wiki.id(), "wiki_search", params.dump(), wiki.is_remote(), [&] {
        json arr = json::array();
        for (const auto& r : wiki.search(query, limit)) {
            arr.push_back({{"title", r.title}, {"page_id", r.page_id}, {"rank", r.relevance_rank}});
        }
        return arr.dump();
    });
    std::vector<WikiArticleRef> refs;
    for (const auto& r : json::parse(body)) {
        refs.push_back({r.at("title").get<std::string>(), r.at("page_id").get<std::int64_t>(),
                        r.at("rank").get<int>()});
    }
    for (const auto& r : refs) {
        if (r.relevance_rank < 1) throw ProtocolError(wiki.id() + ": relevance rank must be >= 1");
    }
    std::stable_sort(refs.begin(), refs.end(), [](const auto& a, const auto& b) {
        return a.relevance_rank < b.relevance_rank;
    });
    if (refs.size() > static_cast<std::size_t>(limit)) refs.resize(static_cast<std::size_t>(limit));
    // Ranks are positions in the returned list.
    for (std::size_t i = 0; i < refs.size(); ++i) refs[i].relevance_rank = static_cast<int>(i) + 1;
    return refs;
}

std::vector<ContextDoc> Gateway::wiki_fetch_sections(const WikiArticleRef& ref) {
    auto& wiki = require(providers_.wiki, "wiki");
    const json params = {{"page_id", ref.page_id}, {"title", ref.title}};
    const std::string text = call(wiki.id(), "wiki_wikitext", params.dump(), wiki.is_remote(),
                                  [&] { return wiki.fetch_wikitext(ref); });
    std::vector<ContextDoc> docs;
    for (const auto& section : wikitext::split_sections(text)) {
        std::string body = wikitext::strip_markup(section.body);
        if (body.empty()) continue;
        ContextDoc doc;
        doc.body = std::move(body);
        doc.source.kind = ContextSourceKind::wiki;
        doc.source.title = ref.title;
        doc.source.page_id = ref.page_id;
        doc.source.section = section.heading;
        doc.source.section_index = section.index;
        docs.push_back(std::move(doc));
    }
    return docs;
}

GatewayStats Gateway::stats() const {
    return {provider_calls_.load(), cache_hits_.load(), retries_.load()};
}

}  // namespace seedforge
