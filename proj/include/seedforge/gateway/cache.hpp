#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace seedforge {

// On-disk response cache: one file per request hash holding the raw
// response body. Writes go through a temp file and rename, so concurrent
// readers see either nothing or a complete body.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<std::string> get(const std::string& key) const;
    void put(const std::string& key, const std::string& body) const;

    const std::filesystem::path& dir() const noexcept { return dir_; }

private:
    std::filesystem::path path_for(const std::string& key) const;

    std::filesystem::path dir_;
};

}  // namespace seedforge
