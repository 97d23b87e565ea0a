#include "seedforge/gateway/remote.hpp"

#include <cstdlib>

#include <json.hpp>

#include "seedforge/errors.hpp"

namespace seedforge {

using nlohmann::json;

namespace {

std::string join_url(const std::string& base, const std::string& tail) {
    if (!base.empty() && base.back() == '/') return base + tail;
    return base + "/" + tail;
}

json parse_body(const std::string& service, const HttpResponse& resp) {
    if (resp.status < 200 || resp.status >= 300) throw_for_status(service, resp);
    try {
        return json::parse(resp.body);
    } catch (const json::exception& e) {
        throw ProtocolError(service + ": response is not JSON: " + e.what());
    }
}

template <typename F>
auto extract(const std::string& service, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw ProtocolError(service + ": unexpected response shape: " + e.what());
    }
}

HttpHeaders bearer(const std::string& key) {
    if (key.empty()) return {};
    return {{"Authorization", "Bearer " + key}};
}

}  // namespace

std::string resolve_credential(const EndpointConfig& cfg, const std::string& key_path) {
    if (cfg.api_key_env.empty()) return {};
    const char* v = std::getenv(cfg.api_key_env.c_str());
    if (v == nullptr || *v == '\0') {
        throw ConfigError(key_path, "environment variable " + cfg.api_key_env + " is not set");
    }
    return v;
}

RemoteGenerator::RemoteGenerator(EndpointConfig cfg, std::shared_ptr<HttpTransport> http)
    : cfg_(std::move(cfg)),
      key_(resolve_credential(cfg_, "provider.generation.api_key_env")),
      http_(std::move(http)) {
    parse_url(cfg_.base_url);
    if (cfg_.model.empty()) throw ConfigError("provider.generation.model", "must be set");
}

std::string RemoteGenerator::id() const {
    return std::string(cfg_.style == ApiStyle::anthropic ? "anthropic:" : "openai:") + cfg_.model;
}

std::string RemoteGenerator::complete(const GenRequest& req) {
    json body = {{"model", cfg_.model},
                 {"max_tokens", req.max_tokens},
                 {"temperature", req.temperature},
                 {"messages", json::array({{{"role", "user"}, {"content", req.prompt}}})}};
    if (cfg_.style == ApiStyle::anthropic) {
        HttpHeaders headers = {{"anthropic-version", "2023-06-01"}};
        if (!key_.empty()) headers.emplace_back("x-api-key", key_);
        const json j = parse_body(id(), http_->post_json(join_url(cfg_.base_url, "messages"),
                                                         body.dump(), headers));
        return extract(id(), [&] {
            std::string out;
            for (const auto& block : j.at("content")) {
                if (block.value("type", "") == "text") out += block.at("text").get<std::string>();
            }
            return out;
        });
    }
    if (req.seed) body["seed"] = *req.seed;
    const json j = parse_body(id(), http_->post_json(join_url(cfg_.base_url, "chat/completions"),
                                                     body.dump(), bearer(key_)));
    return extract(id(), [&] {
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    });
}

RemoteEmbedder::RemoteEmbedder(EndpointConfig cfg, std::shared_ptr<HttpTransport> http,
                               std::size_t max_batch)
    : cfg_(std::move(cfg)),
      key_(resolve_credential(cfg_, "provider.embedding.api_key_env")),
      http_(std::move(http)),
      max_batch_(max_batch) {
    parse_url(cfg_.base_url);
}

std::string RemoteEmbedder::id() const { return "embed:" + cfg_.model; }

std::vector<EmbeddingVector> RemoteEmbedder::embed(std::span<const std::string> texts) {
    const json body = {{"model", cfg_.model},
                       {"input", std::vector<std::string>(texts.begin(), texts.end())}};
    const json j = parse_body(id(), http_->post_json(join_url(cfg_.base_url, "embeddings"),
                                                     body.dump(), bearer(key_)));
    return extract(id(), [&] {
        std::vector<EmbeddingVector> out(texts.size());
        const auto& data = j.at("data");
        if (data.size() != texts.size()) {
            throw ProtocolError(id() + ": embedding count mismatch");
        }
        for (std::size_t i = 0; i < data.size(); ++i) {
            // Entries carry an explicit index; honor it rather than array order.
            const std::size_t idx = data[i].value("index", i);
            if (idx >= out.size()) throw ProtocolError(id() + ": embedding index out of range");
            out[idx].values = data[i].at("embedding").get<std::vector<float>>();
        }
        return out;
    });
}

RemoteTranslator::RemoteTranslator(EndpointConfig cfg, std::shared_ptr<HttpTransport> http)
    : cfg_(std::move(cfg)),
      key_(resolve_credential(cfg_, "provider.translation.api_key_env")),
      http_(std::move(http)) {
    parse_url(cfg_.base_url);
}

std::string RemoteTranslator::id() const { return "translate:" + cfg_.base_url + ":" + cfg_.model; }

std::string RemoteTranslator::translate(const std::string& text, const std::string& source_lang,
                                        const std::string& target_lang) {
    json body = {{"text", text}, {"source", source_lang}, {"target", target_lang}};
    if (!cfg_.model.empty()) body["model"] = cfg_.model;
    const json j = parse_body(id(), http_->post_json(join_url(cfg_.base_url, "translate"),
                                                     body.dump(), bearer(key_)));
    return extract(id(), [&] { return j.at("translation").get<std::string>(); });
}

RemoteParaphraser::RemoteParaphraser(EndpointConfig cfg, std::shared_ptr<HttpTransport> http)
    : cfg_(std::move(cfg)),
      key_(resolve_credential(cfg_, "provider.paraphrase.api_key_env")),
      http_(std::move(http)) {
    parse_url(cfg_.base_url);
}

std::string RemoteParaphraser::id() const {
    return "paraphrase:" + cfg_.base_url + ":" + cfg_.model;
}

std::vector<std::string> RemoteParaphraser::paraphrase(const std::string& text, int count,
                                                       std::uint64_t seed) {
    json body = {{"text", text}, {"count", count}, {"seed", seed}};
    if (!cfg_.model.empty()) body["model"] = cfg_.model;
    const json j = parse_body(id(), http_->post_json(join_url(cfg_.base_url, "paraphrase"),
                                                     body.dump(), bearer(key_)));
    return extract(id(), [&] { return j.at("paraphrases").get<std::vector<std::string>>(); });
}

MediaWikiSource::MediaWikiSource(std::string api_url, std::shared_ptr<HttpTransport> http)
    : api_url_(std::move(api_url)), http_(std::move(http)) {
    parse_url(api_url_);
}

std::vector<WikiArticleRef> MediaWikiSource::search(const std::string& query, int limit) {
    const HttpParams params = {{"action", "query"},   {"list", "search"},
                               {"srsearch", query},   {"srlimit", std::to_string(limit)},
                               {"srprop", ""},        {"format", "json"},
                               {"formatversion", "2"}};
    const json j = parse_body(id(), http_->get(api_url_, params, {}));
    return extract(id(), [&] {
        if (j.contains("error")) {
            throw ProviderError(id() + ": " + j["error"].value("info", "search failed"), false);
        }
        std::vector<WikiArticleRef> out;
        int rank = 1;
        for (const auto& hit : j.at("query").at("search")) {
            out.push_back({hit.at("title").get<std::string>(), hit.at("pageid").get<std::int64_t>(),
                           rank++});
        }
        return out;
    });
}

std::string MediaWikiSource::fetch_wikitext(const WikiArticleRef& ref) {
    const HttpParams params = {{"action", "parse"},       {"pageid", std::to_string(ref.page_id)},
                               {"prop", "wikitext"},      {"format", "json"},
                               {"formatversion", "2"}};
    const json j = parse_body(id(), http_->get(api_url_, params, {}));
    return extract(id(), [&] {
        if (j.contains("error")) {
            const std::string code = j["error"].value("code", "");
            if (code == "missingtitle" || code == "nosuchpageid") {
                throw NotFoundError(id() + ": page " + std::to_string(ref.page_id) + " not found");
            }
            throw ProviderError(id() + ": " + j["error"].value("info", code), false);
        }
        return j.at("parse").at("wikitext").get<std::string>();
    });
}

}  // namespace seedforge
