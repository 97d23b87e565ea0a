#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seedforge/gateway/cache.hpp"
#include "seedforge/gateway/clock.hpp"
#include "seedforge/gateway/provider.hpp"
#include "seedforge/gateway/rate_limiter.hpp"
#include "seedforge/types.hpp"
#include "seedforge/util/rng.hpp"

namespace seedforge {

struct ProviderSet {
    std::shared_ptr<TextGenerator> generator;
    std::shared_ptr<Embedder> embedder;
    std::shared_ptr<Translator> translator;
    std::shared_ptr<Paraphraser> paraphraser;
    std::shared_ptr<WikiSource> wiki;
};

struct GatewayStats {
    std::uint64_t provider_calls = 0;  // requests that reached a provider
    std::uint64_t cache_hits = 0;
    std::uint64_t retries = 0;
};

// Uniform access to every external service. Adds a content-addressed
// response cache, bounded parallelism, sliding-window rate limiting for
// remote providers and retries with exponential backoff and jitter.
// Safe for concurrent callers.
class Gateway {
public:
    Gateway(ProviderSet providers, ProviderBudget budget,
            std::shared_ptr<Clock> clock = steady_clock());

    std::string complete(const GenRequest& req);

    // One vector per input, order preserved, split into provider-sized chunks.
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts);

    bool supports_token_embeddings() const;
    std::vector<EmbeddingVector> embed_tokens(std::span<const std::string> tokens);

    std::string translate(const std::string& text, const std::string& source_lang,
                          const std::string& target_lang);

    std::vector<std::string> paraphrase(const std::string& text, int count, std::uint64_t seed);

    std::vector<WikiArticleRef> wiki_search(const std::string& query, int limit = 10);

    // One ContextDoc per non-empty section (lead included), markup stripped.
    // Topic fields of the returned docs are left for the caller to fill.
    std::vector<ContextDoc> wiki_fetch_sections(const WikiArticleRef& ref);

    GatewayStats stats() const;
    const ProviderBudget& budget() const noexcept { return budget_; }

    // Canonical cache key for a request: sha256 of a canonical JSON object
    // with provider id, operation and normalized parameters.
    static std::string cache_key(const std::string& provider_id, const std::string& operation,
                                 const std::string& canonical_params);

private:
    std::string call(const std::string& provider_id, const std::string& operation,
                     const std::string& canonical_params, bool remote,
                     const std::function<std::string()>& fetch);
    void backoff(int attempt);
    template <typename P>
    P& require(const std::shared_ptr<P>& p, const char* what) const;

    ProviderSet providers_;
    ProviderBudget budget_;
    std::shared_ptr<Clock> clock_;
    std::optional<ResponseCache> cache_;
    ConcurrencyLimiter concurrency_;
    RateLimiter rate_limiter_;

    std::mutex jitter_mu_;
    Rng jitter_;

    std::atomic<std::uint64_t> provider_calls_{0};
    std::atomic<std::uint64_t> cache_hits_{0};
    std::atomic<std::uint64_t> retries_{0};
};

}  // namespace seedforge
