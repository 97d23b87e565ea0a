#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seedforge/errors.hpp"

namespace seedforge {

struct GenRequest {
    std::string prompt;
    double temperature = 0.7;
    int max_tokens = 2048;
    // Honored by mocks; forwarded to real providers that accept one.
    std::optional<std::uint64_t> seed;

    // Throws PreconditionError on an empty prompt, temperature outside
    // [0,1] or non-positive max_tokens.
    void validate() const;
};

struct EmbeddingVector {
    std::vector<float> values;

    std::size_t dimension() const noexcept { return values.size(); }
    bool operator==(const EmbeddingVector&) const = default;
};

struct WikiArticleRef {
    std::string title;
    std::int64_t page_id = 0;
    int relevance_rank = 1;

    bool operator==(const WikiArticleRef&) const = default;
};

struct ProviderBudget {
    std::size_t max_concurrent = 4;
    int requests_per_minute = 50;
    int retry_limit = 3;
    std::filesystem::path cache_dir;  // empty disables the response cache
    double backoff_base_seconds = 1.0;
    double backoff_max_seconds = 60.0;

    void validate() const;
};

// Text generation backend (chat/completion endpoint or mock).
class TextGenerator {
public:
    virtual ~TextGenerator() = default;
    // Stable identifier; part of every cache key.
    virtual std::string id() const = 0;
    // Remote providers are subject to rate limiting.
    virtual bool is_remote() const { return false; }
    virtual std::string complete(const GenRequest& req) = 0;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::string id() const = 0;
    virtual bool is_remote() const { return false; }
    // Largest batch the backend accepts in one call.
    virtual std::size_t max_batch() const { return 64; }
    virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;

    // Contextless per-token vectors for greedy token matching metrics.
    virtual bool supports_token_embeddings() const { return false; }
    virtual std::vector<EmbeddingVector> embed_tokens(std::span<const std::string> tokens) {
        (void)tokens;
        throw CapabilityError(id() + " does not provide token-level embeddings");
    }
};

class Translator {
public:
    virtual ~Translator() = default;
    virtual std::string id() const = 0;
    virtual bool is_remote() const { return false; }
    virtual std::string translate(const std::string& text, const std::string& source_lang,
                                  const std::string& target_lang) = 0;
};

class Paraphraser {
public:
    virtual ~Paraphraser() = default;
    virtual std::string id() const = 0;
    virtual bool is_remote() const { return false; }
    virtual std::vector<std::string> paraphrase(const std::string& text, int count,
                                                std::uint64_t seed) = 0;
};

class WikiSource {
public:
    virtual ~WikiSource() = default;
    virtual std::string id() const = 0;
    virtual bool is_remote() const { return false; }
    virtual std::vector<WikiArticleRef> search(const std::string& query, int limit) = 0;
    // Full article wikitext. Throws NotFoundError for deleted/moved pages.
    virtual std::string fetch_wikitext(const WikiArticleRef& ref) = 0;
};

}  // namespace seedforge
