#include "seedforge/store/run.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "seedforge/errors.hpp"
#include "seedforge/gateway/mock.hpp"
#include "seedforge/gateway/remote.hpp"
#include "seedforge/store/codec.hpp"
#include "seedforge/store/records.hpp"
#include "seedforge/util/hash.hpp"
#include "seedforge/util/utf8.hpp"

namespace seedforge {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

EndpointConfig endpoint(const ProviderEndpoint& e, ApiStyle style = ApiStyle::openai) {
    return {e.base_url, e.model, e.api_key_env, style};
}

}  // namespace

ProviderSet make_providers(const PipelineConfig& cfg, std::shared_ptr<HttpTransport> http) {
    cfg.validate();
    auto transport = [&] {
        if (!http) http = make_http_transport();
        return http;
    };
    ProviderSet p;
    switch (cfg.generation.kind) {
        case ProviderKind::openai:
            p.generator = std::make_shared<RemoteGenerator>(endpoint(cfg.generation), transport());
            break;
        case ProviderKind::anthropic:
            p.generator = std::make_shared<RemoteGenerator>(endpoint(cfg.generation, ApiStyle::anthropic), transport());
            break;
        default:
            p.generator = std::make_shared<MockGenerator>();
    }
    if (cfg.embedding.kind == ProviderKind::openai) {
        p.embedder = std::make_shared<RemoteEmbedder>(endpoint(cfg.embedding), transport());
    } else {
        p.embedder = std::make_shared<MockEmbedder>(cfg.embedding_dimension);
    }
    if (cfg.translation.kind == ProviderKind::http) {
        p.translator = std::make_shared<RemoteTranslator>(endpoint(cfg.translation), transport());
    } else {
        p.translator = std::make_shared<MockTranslator>(std::set<std::string>{cfg.language, cfg.pivot,
                                                                              cfg.external_language});
    }
    if (cfg.paraphrase.kind == ProviderKind::http) {
        p.paraphraser = std::make_shared<RemoteParaphraser>(endpoint(cfg.paraphrase), transport());
    } else {
        p.paraphraser = std::make_shared<MockParaphraser>();
    }
    if (cfg.wiki.kind == ProviderKind::mediawiki) {
        p.wiki = std::make_shared<MediaWikiSource>(cfg.wiki.base_url, transport());
    } else {
        p.wiki = std::make_shared<MockWiki>();
    }
    return p;
}

std::string run_fingerprint(const PipelineConfig& cfg, const ProviderSet& providers) {
    json config = cfg.to_json();
    for (auto it = config.begin(); it != config.end();) {
        const std::string& k = it.key();
        if (k.starts_with("budget.") || k.starts_with("eval.")) {
            it = config.erase(it);
        } else {
            ++it;
        }
    }
    auto id = [](const auto& p) { return p ? p->id() : std::string(); };
    json ids = {{"generator", id(providers.generator)}, {"embedder", id(providers.embedder)},
                {"translator", id(providers.translator)}, {"paraphraser", id(providers.paraphraser)},
                {"wiki", id(providers.wiki)}};
    return sha256_hex(json{{"config", config}, {"providers", ids}}.dump());
}

FileCheckpoints::FileCheckpoints(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

std::optional<json> FileCheckpoints::load(const std::string& key) {
    const fs::path p = dir_ / (key + ".json");
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        json j = json::parse(ss.str());
        ++hits_;
        return j;
    } catch (const json::parse_error&) {
        // A torn write from a killed run; recompute.
        std::error_code ec;
        fs::remove(p, ec);
        return std::nullopt;
    }
}

void FileCheckpoints::save(const std::string& key, const json& value) {
    write_file(dir_ / (key + ".json"), value.dump());
    ++saves_;
}

WorkdirLock::WorkdirLock(const fs::path& dir) {
    fs::create_directories(dir);
    const fs::path p = dir / ".seedforge.lock";
    fd_ = ::open(p.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw PreconditionError("cannot open lock file " + p.string() + ": " + std::strerror(errno));
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
        ::close(fd_);
        fd_ = -1;
        throw PreconditionError("another run is using " + dir.string());
    }
}

WorkdirLock::~WorkdirLock() {
    if (fd_ >= 0) {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
}

RunResult run_pipeline(const PipelineConfig& cfg, const fs::path& workdir, const RunOptions& options) {
    cfg.validate();
    WorkdirLock lock(workdir);
    ProviderSet providers = options.providers ? *options.providers : make_providers(cfg, options.http);
    Gateway gw(providers, cfg.budget);

    BuildSettings s = cfg.build_settings();
    std::optional<FileCheckpoints> cp;
    if (options.checkpoints) {
        cp.emplace(workdir / "checkpoints");
        s.checkpoints = &*cp;
        s.fingerprint = run_fingerprint(cfg, providers);
    }

    DatasetManifest m;
    switch (cfg.variant) {
        case Variant::full:
            m = build_full(gw, cfg.seed, cfg.dataset_size, s, cfg.cultural_topics, cfg.general_topics);
            break;
        case Variant::fluency:
            m = build_fluency_only(gw, cfg.seed, cfg.dataset_size, s, cfg.fluency_topics);
            break;
        case Variant::diversity:
            m = build_diversity_only(gw, cfg.seed, cfg.dataset_size, s, cfg.diversity_topics);
            break;
        case Variant::culture: {
            if (cfg.source_records.empty()) throw ConfigError("ablation.source", "required for the culture variant");
            m = build_culture_only(read_dataset(cfg.source_records), gw, cfg.seed, cfg.sample, s);
            break;
        }
        case Variant::none: {
            if (cfg.external_corpus.empty()) throw ConfigError("ablation.external", "required for the none variant");
            m = build_no_properties(read_external_corpus(cfg.external_corpus, cfg.external_language), gw, cfg.seed,
                                    cfg.sample, s, cfg.language);
            break;
        }
    }

    RunResult r;
    r.records_path = workdir / options.output_name;
    r.manifest_path = manifest_path_for(r.records_path);
    r.manifest_json = write_dataset(m, r.records_path, cfg.to_json());
    r.manifest_sha256 = file_sha256(r.manifest_path);
    r.manifest = std::move(m);
    r.stats = gw.stats();
    r.checkpoint_hits = cp ? cp->hits() : 0;
    return r;
}

int exit_code_for(std::exception_ptr error) {
    try {
        std::rethrow_exception(error);
    } catch (const StageError& e) {
        try {
            std::rethrow_if_nested(e);
        } catch (...) {
            return exit_code_for(std::current_exception());
        }
        return 1;
    } catch (const ConfigError&) {
        return kExitConfig;
    } catch (const ProviderError&) {
        return kExitProvider;
    } catch (const ProtocolError&) {
        return kExitProvider;
    } catch (const CapabilityError&) {
        return kExitProvider;
    } catch (const BuildShortfallError&) {
        return kExitShortfall;
    } catch (...) {
        return 1;
    }
}

namespace {

std::vector<json> read_json_lines(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PreconditionError("cannot open " + path.string());
    std::vector<json> rows;
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (!utf8::is_valid(line)) throw FormatError(path.string(), n, "invalid UTF-8");
        if (utf8::trim(line).empty()) continue;
        try {
            json j = json::parse(line);
            if (!j.is_object()) throw FormatError(path.string(), n, "expected a JSON object");
            j["__line"] = n;
            rows.push_back(std::move(j));
        } catch (const json::parse_error& e) {
            throw FormatError(path.string(), n, std::string("invalid JSON: ") + e.what());
        }
    }
    return rows;
}

std::string string_at(const json& row, const char* key, const fs::path& path) {
    const std::size_t n = row.at("__line").get<std::size_t>();
    auto it = row.find(key);
    if (it == row.end() || !it->is_string()) {
        throw FormatError(path.string(), n, std::string("missing string field '") + key + "'");
    }
    return it->get<std::string>();
}

}  // namespace

std::vector<SystemOutputs> read_eval_inputs(const fs::path& refs, const std::vector<fs::path>& predictions) {
    if (predictions.empty()) throw PreconditionError("eval: at least one prediction file is required");
    std::vector<EvalPair> base;
    std::map<std::string, std::size_t> index;
    for (const auto& row : read_json_lines(refs)) {
        const std::size_t n = row.at("__line").get<std::size_t>();
        EvalPair p;
        p.id = string_at(row, "id", refs);
        try {
            p.task = bench_task_from_string(string_at(row, "task", refs));
            p.test_set = test_set_from_string(string_at(row, "test_set", refs));
        } catch (const ConfigError& e) {
            throw FormatError(refs.string(), n, e.what());
        }
        p.reference = string_at(row, "reference", refs);
        if (!index.emplace(p.id, base.size()).second) throw FormatError(refs.string(), n, "duplicate id '" + p.id + "'");
        base.push_back(std::move(p));
    }

    std::vector<SystemOutputs> systems;
    std::set<std::string> names;
    for (const auto& path : predictions) {
        SystemOutputs sys;
        sys.name = path.stem().string();
        if (!names.insert(sys.name).second) throw PreconditionError("eval: two prediction files named " + sys.name);
        sys.pairs = base;
        std::vector<bool> seen(base.size(), false);
        for (const auto& row : read_json_lines(path)) {
            const std::size_t n = row.at("__line").get<std::size_t>();
            const std::string id = string_at(row, "id", path);
            auto it = index.find(id);
            if (it == index.end()) throw AlignmentError(path.string() + ":" + std::to_string(n) + ": unknown id '" + id + "'");
            if (seen[it->second]) throw FormatError(path.string(), n, "duplicate id '" + id + "'");
            seen[it->second] = true;
            sys.pairs[it->second].prediction = string_at(row, "prediction", path);
        }
        for (std::size_t i = 0; i < seen.size(); ++i) {
            if (!seen[i]) throw AlignmentError(path.string() + ": no prediction for id '" + base[i].id + "'");
        }
        systems.push_back(std::move(sys));
    }
    return systems;
}

}  // namespace seedforge
