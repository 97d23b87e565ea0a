#include "seedforge/store/records.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "seedforge/errors.hpp"
#include "seedforge/store/codec.hpp"
#include "seedforge/util/hash.hpp"
#include "seedforge/util/utf8.hpp"

namespace seedforge {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PreconditionError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string records_text(const std::vector<InstructionRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += json(r).dump();
        out += '\n';
    }
    return out;
}

}  // namespace

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw PreconditionError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw PreconditionError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string file_sha256(const fs::path& path) { return sha256_hex(read_file(path)); }

void write_records(const std::vector<InstructionRecord>& records, const fs::path& path) {
    std::set<std::string> ids;
    for (const auto& r : records) {
        if (!ids.insert(r.id).second) throw PreconditionError("write_records: duplicate id " + r.id);
    }
    write_file(path, records_text(records));
}

std::vector<InstructionRecord> read_records(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PreconditionError("cannot open " + path.string());
    const std::string name = path.string();
    std::vector<InstructionRecord> out;
    std::set<std::string> ids;
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (!utf8::is_valid(line)) throw FormatError(name, n, "invalid UTF-8");
        if (utf8::trim(line).empty()) throw FormatError(name, n, "blank line");
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw FormatError(name, n, std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object()) throw FormatError(name, n, "expected a JSON object");
        for (const char* key : {"id", "task", "instruction", "context", "output", "topic", "language", "lineage", "flags"}) {
            if (!j.contains(key)) throw FormatError(name, n, std::string("missing field '") + key + "'");
        }
        InstructionRecord r;
        try {
            r = j.get<InstructionRecord>();
        } catch (const std::invalid_argument& e) {
            throw FormatError(name, n, e.what());
        } catch (const Error& e) {
            throw FormatError(name, n, e.what());
        } catch (const json::exception& e) {
            throw FormatError(name, n, e.what());
        }
        if (!ids.insert(r.id).second) throw FormatError(name, n, "duplicate id '" + r.id + "'");
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

template <typename T>
void write_lines(const std::vector<T>& items, const fs::path& path) {
    std::string out;
    for (const auto& item : items) {
        out += json(item).dump();
        out += '\n';
    }
    write_file(path, out);
}

template <typename T>
std::vector<T> read_lines(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PreconditionError("cannot open " + path.string());
    std::vector<T> out;
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (!utf8::is_valid(line)) throw FormatError(path.string(), n, "invalid UTF-8");
        if (utf8::trim(line).empty()) throw FormatError(path.string(), n, "blank line");
        try {
            out.push_back(json::parse(line).get<T>());
        } catch (const json::exception& e) {
            throw FormatError(path.string(), n, e.what());
        } catch (const std::invalid_argument& e) {
            throw FormatError(path.string(), n, e.what());
        } catch (const Error& e) {
            throw FormatError(path.string(), n, e.what());
        }
    }
    return out;
}

}  // namespace

void write_topics(const std::vector<Topic>& topics, const fs::path& path) { write_lines(topics, path); }
std::vector<Topic> read_topics(const fs::path& path) { return read_lines<Topic>(path); }
void write_contexts(const std::vector<ContextDoc>& contexts, const fs::path& path) { write_lines(contexts, path); }
std::vector<ContextDoc> read_contexts(const fs::path& path) { return read_lines<ContextDoc>(path); }
void write_removals(const std::vector<Removal>& removals, const fs::path& path) { write_lines(removals, path); }

fs::path manifest_path_for(const fs::path& records_path) {
    fs::path p = records_path;
    p.replace_extension(".manifest.json");
    return p;
}

json manifest_json(const DatasetManifest& m, const std::string& records_sha256, const json& config) {
    json skipped = json::array();
    for (const auto& s : m.skipped) skipped.push_back({{"id", s.id}, {"reason", s.reason}});
    return {{"variant", to_string(m.recipe.variant)},
            {"flags", m.flags},
            {"flags_label", flags_label(m.flags)},
            {"target_size", m.target_size},
            {"record_count", m.records.size()},
            {"seed", m.seed},
            {"recipe", m.recipe.to_json()},
            {"records_sha256", records_sha256},
            {"config", config},
            {"removals", m.removals.removed},
            {"failures", m.failures},
            {"skipped", skipped}};
}

json write_dataset(const DatasetManifest& m, const fs::path& records_path, const json& config) {
    const std::string text = records_text(m.records);
    write_records(m.records, records_path);
    json j = manifest_json(m, sha256_hex(text), config);
    j["records_file"] = records_path.filename().string();
    write_file(manifest_path_for(records_path), j.dump(2) + "\n");
    return j;
}

DatasetManifest read_dataset(const fs::path& records_path) {
    const fs::path mpath = manifest_path_for(records_path);
    json j;
    try {
        j = json::parse(read_file(mpath));
    } catch (const json::parse_error& e) {
        throw FormatError(mpath.string(), 0, std::string("invalid manifest: ") + e.what());
    }
    if (file_sha256(records_path) != j.value("records_sha256", "")) {
        throw FormatError(records_path.string(), 0, "record file does not match its manifest hash");
    }
    DatasetManifest m;
    try {
        m.recipe = Recipe::from_json(j.at("recipe"));
        m.flags = j.at("flags").get<PropertyFlags>();
        m.target_size = j.at("target_size").get<std::size_t>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.removals.removed = j.at("removals").get<std::vector<Removal>>();
        m.failures = j.at("failures").get<std::vector<GenerationFailure>>();
        for (const auto& s : j.at("skipped")) m.skipped.push_back({s.at("id"), s.at("reason")});
    } catch (const json::exception& e) {
        throw FormatError(mpath.string(), 0, std::string("invalid manifest: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw FormatError(mpath.string(), 0, std::string("invalid manifest: ") + e.what());
    }
    m.records = read_records(records_path);
    return m;
}

}  // namespace seedforge
