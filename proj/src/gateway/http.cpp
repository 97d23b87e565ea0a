#include <httplib.h>

#include "seedforge/gateway/http.hpp"

#include "seedforge/errors.hpp"

namespace seedforge {

ParsedUrl parse_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("url", "not an absolute URL: " + url);
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw ConfigError("url", "unsupported scheme in " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    ParsedUrl out;
    out.origin = url.substr(0, path_start);
    out.path = path_start == std::string::npos ? "/" : url.substr(path_start);
    if (out.origin.size() <= scheme_end + 3) throw ConfigError("url", "missing host in " + url);
    return out;
}

void throw_for_status(const std::string& service, const HttpResponse& resp) {
    const std::string snippet = resp.body.substr(0, 300);
    const std::string msg = service + ": HTTP " + std::to_string(resp.status) + ": " + snippet;
    if (resp.status == 429 || resp.status >= 500) throw ProviderError(msg, true, resp.status);
    if (resp.status == 401 || resp.status == 403) {
        throw ProviderError(service + ": credential rejected (HTTP " + std::to_string(resp.status) + ")",
                            false, resp.status);
    }
    throw ProviderError(msg, false, resp.status);
}

namespace {

class HttplibTransport final : public HttpTransport {
public:
    explicit HttplibTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

    HttpResponse get(const std::string& url, const HttpParams& params,
                     const HttpHeaders& headers) override {
        const ParsedUrl u = parse_url(url);
        auto client = make_client(u.origin);
        httplib::Params p(params.begin(), params.end());
        auto res = client.Get(u.path, p, to_headers(headers));
        return finish(url, res);
    }

    HttpResponse post_json(const std::string& url, const std::string& body,
                           const HttpHeaders& headers) override {
        const ParsedUrl u = parse_url(url);
        auto client = make_client(u.origin);
        auto res = client.Post(u.path, to_headers(headers), body, "application/json");
        return finish(url, res);
    }

private:
    httplib::Client make_client(const std::string& origin) const {
        httplib::Client client(origin);
        client.set_connection_timeout(timeout_);
        client.set_read_timeout(timeout_);
        client.set_write_timeout(timeout_);
        client.set_follow_location(true);
        return client;
    }

    static httplib::Headers to_headers(const HttpHeaders& headers) {
        return httplib::Headers(headers.begin(), headers.end());
    }

    static HttpResponse finish(const std::string& url, const httplib::Result& res) {
        if (!res) {
            throw ProviderError("transport failure for " + url + ": " + httplib::to_string(res.error()),
                                true);
        }
        return HttpResponse{res->status, res->body};
    }

    std::chrono::seconds timeout_;
};

}  // namespace

std::shared_ptr<HttpTransport> make_http_transport(std::chrono::seconds timeout) {
    return std::make_shared<HttplibTransport>(timeout);
}

}  // namespace seedforge
