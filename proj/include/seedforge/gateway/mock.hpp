#pragma once

// Deterministic in-process providers. Every output is a pure function of the
// request and its seed, so mock runs are byte-reproducible.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "seedforge/gateway/provider.hpp"

namespace seedforge {

// Recognizes the pipeline's prompt families and answers each in its
// expected output format with pseudo-random Thai text. Prompts of the form
// "echo:X" return X. Anything else yields a paragraph.
class MockGenerator final : public TextGenerator {
public:
    std::string id() const override { return "mock-generator/1"; }
    std::string complete(const GenRequest& req) override;
};

// Replays a fixed list of responses in order and records the requests it
// saw. Throws ProviderError (non-retryable) when the script runs out.
class ScriptedGenerator final : public TextGenerator {
public:
    explicit ScriptedGenerator(std::vector<std::string> responses)
        : responses_(responses.begin(), responses.end()) {}

    std::string id() const override { return "scripted-generator"; }
    std::string complete(const GenRequest& req) override;

    std::vector<GenRequest> requests() const;
    std::size_t calls() const;

private:
    mutable std::mutex mu_;
    std::deque<std::string> responses_;
    std::vector<GenRequest> seen_;
};

// Bag-of-words hashing embedder: each token maps to a fixed pseudo-random
// unit direction; a text is the normalized sum of its token directions
// plus a constant bias direction (so no text embeds to zero).
class MockEmbedder final : public Embedder {
public:
    explicit MockEmbedder(std::size_t dimension = 128, std::size_t max_batch = 32)
        : dimension_(dimension), max_batch_(max_batch) {}

    std::string id() const override { return "mock-embedder/" + std::to_string(dimension_); }
    std::size_t max_batch() const override { return max_batch_; }
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;

    bool supports_token_embeddings() const override { return true; }
    std::vector<EmbeddingVector> embed_tokens(std::span<const std::string> tokens) override;

    EmbeddingVector embed_one(const std::string& text) const;
    EmbeddingVector token_vector(const std::string& token) const;

private:
    std::size_t dimension_;
    std::size_t max_batch_;
};

// Returns preassigned vectors by exact text; an unknown text is a protocol
// error. Token lookups use the same table.
class TableEmbedder final : public Embedder {
public:
    explicit TableEmbedder(std::map<std::string, EmbeddingVector> table, std::size_t max_batch = 64)
        : table_(std::move(table)), max_batch_(max_batch) {}

    std::string id() const override { return "table-embedder"; }
    std::size_t max_batch() const override { return max_batch_; }
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
    bool supports_token_embeddings() const override { return true; }
    std::vector<EmbeddingVector> embed_tokens(std::span<const std::string> tokens) override {
        return embed(tokens);
    }

private:
    std::map<std::string, EmbeddingVector> table_;
    std::size_t max_batch_;
};

// Wraps text in language-tagged brackets: translate("x", th, en) = "en⟨x⟩".
// Round trips stay visibly degraded ("th⟨en⟨x⟩⟩").
class MockTranslator final : public Translator {
public:
    explicit MockTranslator(std::set<std::string> languages = {"th", "en"})
        : languages_(std::move(languages)) {}

    std::string id() const override { return "mock-translator/1"; }
    std::string translate(const std::string& text, const std::string& source_lang,
                          const std::string& target_lang) override;

private:
    std::set<std::string> languages_;
};

// Variant k (1-based) is "p<k>⟨...⟩" around the input with its words
// rotated by a seed-dependent offset. Always distinct from the input.
class MockParaphraser final : public Paraphraser {
public:
    std::string id() const override { return "mock-paraphraser/1"; }
    std::vector<std::string> paraphrase(const std::string& text, int count,
                                        std::uint64_t seed) override;
};

// Synthetic encyclopedia: any query yields up to `limit` articles (a small
// fraction of queries yield none) whose wikitext has a lead and 1-4
// headed sections of Thai text. Deterministic in the query.
class MockWiki final : public WikiSource {
public:
    std::string id() const override { return "mock-wiki/1"; }
    std::vector<WikiArticleRef> search(const std::string& query, int limit) override;
    std::string fetch_wikitext(const WikiArticleRef& ref) override;
};

// Fixture-backed wiki: fixed search results per query and wikitext per
// page id. Unknown queries return no results; unknown pages throw
// NotFoundError.
class FixtureWiki final : public WikiSource {
public:
    std::string id() const override { return "fixture-wiki"; }
    void add_search(const std::string& query, std::vector<WikiArticleRef> results) {
        searches_[query] = std::move(results);
    }
    void add_page(std::int64_t page_id, std::string wikitext) {
        pages_[page_id] = std::move(wikitext);
    }
    std::vector<WikiArticleRef> search(const std::string& query, int limit) override;
    std::string fetch_wikitext(const WikiArticleRef& ref) override;

private:
    std::map<std::string, std::vector<WikiArticleRef>> searches_;
    std::map<std::int64_t, std::string> pages_;
};

// Mock text vocabulary, exposed for tests that need in-vocabulary strings.
const std::vector<std::string>& mock_vocabulary();

}  // namespace seedforge
