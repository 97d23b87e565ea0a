#pragma once

// HTTP-backed providers. Credentials are read from the environment variable
// named in the endpoint config at construction; a missing variable is a
// ConfigError so misconfiguration surfaces before any request is sent.

#include <memory>
#include <string>

#include "seedforge/gateway/http.hpp"
#include "seedforge/gateway/provider.hpp"

namespace seedforge {

enum class ApiStyle { openai, anthropic };

struct EndpointConfig {
    std::string base_url;      // e.g. https://api.openai.com/v1
    std::string model;
    std::string api_key_env;   // empty: no credential header is sent
    ApiStyle style = ApiStyle::openai;
};

// Resolves the credential for an endpoint; `key_path` names the config key
// in errors.
std::string resolve_credential(const EndpointConfig& cfg, const std::string& key_path);

// POST {base}/chat/completions (openai) or {base}/messages (anthropic).
class RemoteGenerator final : public TextGenerator {
public:
    RemoteGenerator(EndpointConfig cfg, std::shared_ptr<HttpTransport> http);
    std::string id() const override;
    bool is_remote() const override { return true; }
    std::string complete(const GenRequest& req) override;

private:
    EndpointConfig cfg_;
    std::string key_;
    std::shared_ptr<HttpTransport> http_;
};

// POST {base}/embeddings, OpenAI request/response shape.
class RemoteEmbedder final : public Embedder {
public:
    RemoteEmbedder(EndpointConfig cfg, std::shared_ptr<HttpTransport> http,
                   std::size_t max_batch = 64);
    std::string id() const override;
    bool is_remote() const override { return true; }
    std::size_t max_batch() const override { return max_batch_; }
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;

private:
    EndpointConfig cfg_;
    std::string key_;
    std::shared_ptr<HttpTransport> http_;
    std::size_t max_batch_;
};

// POST {base}/translate with {"text","source","target"[,"model"]};
// expects {"translation": "..."}.
class RemoteTranslator final : public Translator {
public:
    RemoteTranslator(EndpointConfig cfg, std::shared_ptr<HttpTransport> http);
    std::string id() const override;
    bool is_remote() const override { return true; }
    std::string translate(const std::string& text, const std::string& source_lang,
                          const std::string& target_lang) override;

private:
    EndpointConfig cfg_;
    std::string key_;
    std::shared_ptr<HttpTransport> http_;
};

// POST {base}/paraphrase with {"text","count","seed"[,"model"]};
// expects {"paraphrases": [...]}.
class RemoteParaphraser final : public Paraphraser {
public:
    RemoteParaphraser(EndpointConfig cfg, std::shared_ptr<HttpTransport> http);
    std::string id() const override;
    bool is_remote() const override { return true; }
    std::vector<std::string> paraphrase(const std::string& text, int count,
                                        std::uint64_t seed) override;

private:
    EndpointConfig cfg_;
    std::string key_;
    std::shared_ptr<HttpTransport> http_;
};

// MediaWiki Action API: list=search for ranking, action=parse with
// prop=wikitext for article text.
class MediaWikiSource final : public WikiSource {
public:
    MediaWikiSource(std::string api_url, std::shared_ptr<HttpTransport> http);
    std::string id() const override { return "mediawiki:" + api_url_; }
    bool is_remote() const override { return true; }
    std::vector<WikiArticleRef> search(const std::string& query, int limit) override;
    std::string fetch_wikitext(const WikiArticleRef& ref) override;

private:
    std::string api_url_;
    std::shared_ptr<HttpTransport> http_;
};

}  // namespace seedforge
