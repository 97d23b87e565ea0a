#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace seedforge {

struct HttpResponse {
    int status = 0;
    std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;
using HttpParams = std::vector<std::pair<std::string, std::string>>;

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;    // always begins with '/'
};

// Splits an absolute http(s) URL; throws ConfigError when malformed.
ParsedUrl parse_url(const std::string& url);

// Blocking HTTP client seam; the default implementation wraps cpp-httplib.
// Transport failures throw ProviderError(retryable=true).
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse get(const std::string& url, const HttpParams& params,
                             const HttpHeaders& headers) = 0;
    virtual HttpResponse post_json(const std::string& url, const std::string& body,
                                   const HttpHeaders& headers) = 0;
};

std::shared_ptr<HttpTransport> make_http_transport(
    std::chrono::seconds timeout = std::chrono::seconds(120));

// Maps a non-2xx status to the gateway's error taxonomy: 429 and 5xx are
// retryable, 401/403 are credential failures, other 4xx are permanent.
[[noreturn]] void throw_for_status(const std::string& service, const HttpResponse& resp);

}  // namespace seedforge
