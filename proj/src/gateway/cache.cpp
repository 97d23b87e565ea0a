#include "seedforge/gateway/cache.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "seedforge/errors.hpp"

namespace seedforge {

namespace fs = std::filesystem;

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ConfigError("budget.cache_dir", "cannot create " + dir_.string() + ": " + ec.message());
}

fs::path ResponseCache::path_for(const std::string& key) const {
    // Two-level fan-out keeps directories small.
    return dir_ / key.substr(0, 2) / key;
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
    std::ifstream in(path_for(key), std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void ResponseCache::put(const std::string& key, const std::string& body) const {
    static std::atomic<unsigned long> counter{0};
    const fs::path target = path_for(key);
    fs::create_directories(target.parent_path());
    std::ostringstream tmp_name;
    tmp_name << key << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id()) << "."
             << counter.fetch_add(1);
    const fs::path tmp = target.parent_path() / tmp_name.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(body.data(), static_cast<std::streamsize>(body.size()));
        if (!out) throw Error("cache write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

}  // namespace seedforge
