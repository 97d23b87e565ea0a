#include "seedforge/store/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "seedforge/errors.hpp"
#include "seedforge/util/utf8.hpp"

namespace seedforge {

using nlohmann::json;

std::string_view to_string(ProviderKind k) noexcept {
    switch (k) {
        case ProviderKind::mock: return "mock";
        case ProviderKind::openai: return "openai";
        case ProviderKind::anthropic: return "anthropic";
        case ProviderKind::http: return "http";
        case ProviderKind::mediawiki: return "mediawiki";
    }
    return "mock";
}

namespace {

using Setter = std::function<void(PipelineConfig&, const std::string&)>;
using Getter = std::function<json(const PipelineConfig&)>;

struct Field {
    Setter set;
    Getter get;
};

[[noreturn]] void bad(const std::string& key, const std::string& what) { throw ConfigError(key, what); }

double to_double(const std::string& key, const std::string& v) {
    double out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || v.empty()) bad(key, "expected a number, got '" + v + "'");
    return out;
}

template <typename T>
T to_integer(const std::string& key, const std::string& v) {
    T out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec == std::errc::result_out_of_range) bad(key, "value out of range: " + v);
    if (ec != std::errc() || p != v.data() + v.size() || v.empty()) bad(key, "expected an integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad(key, "expected true or false, got '" + v + "'");
}

void in_range(const std::string& key, double v, double lo, double hi) {
    if (!(v >= lo && v <= hi)) {
        std::ostringstream os;
        os << "must be in [" << lo << ", " << hi << "], got " << v;
        bad(key, os.str());
    }
}

// Re-keys an error from a parser that does not know the config path.
template <typename F>
auto keyed(const std::string& key, F&& f) {
    try {
        return f();
    } catch (const ConfigError& e) {
        bad(key, e.what());
    } catch (const PreconditionError& e) {
        bad(key, e.what());
    }
}

// Accessors return a mutable reference; getters reuse them on a copy so one
// lambda serves both directions.
template <typename T>
using Ref = std::function<T&(PipelineConfig&)>;

template <typename T>
Getter getter(Ref<T> ref) {
    return [ref](const PipelineConfig& c) {
        PipelineConfig copy = c;
        return json(ref(copy));
    };
}

Field real(double lo, double hi, Ref<double> ref) {
    return {[=](PipelineConfig& c, const std::string& v) {
                const double x = to_double("", v);
                in_range("", x, lo, hi);
                ref(c) = x;
            },
            getter(ref)};
}

template <typename T>
Field integer(T lo, T hi, Ref<T> ref) {
    return {[=](PipelineConfig& c, const std::string& v) {
                const T x = to_integer<T>("", v);
                if (x < lo || x > hi) {
                    bad("", "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " + v);
                }
                ref(c) = x;
            },
            getter(ref)};
}

Field text(Ref<std::string> ref) {
    return {[=](PipelineConfig& c, const std::string& v) { ref(c) = v; }, getter(ref)};
}

Field flag(Ref<bool> ref) {
    return {[=](PipelineConfig& c, const std::string& v) { ref(c) = to_bool("", v); }, getter(ref)};
}

ProviderKind provider_kind_from_string(const std::string& v) {
    for (auto k : {ProviderKind::mock, ProviderKind::openai, ProviderKind::anthropic, ProviderKind::http,
                   ProviderKind::mediawiki}) {
        if (v == to_string(k)) return k;
    }
    throw ConfigError("unknown provider kind '" + v + "' (mock, openai, anthropic, http, mediawiki)");
}

void add_endpoint(std::map<std::string, Field>& f, const std::string& name,
                  ProviderEndpoint PipelineConfig::*member) {
    const std::string p = "provider." + name + ".";
    f[p + "kind"] = {[=](PipelineConfig& c, const std::string& v) { (c.*member).kind = provider_kind_from_string(v); },
                     [=](const PipelineConfig& c) { return json(std::string(to_string((c.*member).kind))); }};
    f[p + "base_url"] = text([=](PipelineConfig& c) -> std::string& { return (c.*member).base_url; });
    f[p + "model"] = text([=](PipelineConfig& c) -> std::string& { return (c.*member).model; });
    f[p + "api_key_env"] = text([=](PipelineConfig& c) -> std::string& { return (c.*member).api_key_env; });
}

std::string task_list(const std::vector<TaskKind>& tasks) {
    std::string out;
    for (auto t : tasks) {
        if (!out.empty()) out += ",";
        out += to_string(t);
    }
    return out;
}

std::vector<TaskKind> parse_task_list(const std::string& v) {
    std::vector<TaskKind> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = utf8::trim(item);
        if (item.empty()) continue;
        TaskKind t = task_kind_from_string(item);
        for (auto seen : out) {
            if (seen == t) throw ConfigError("task listed twice: " + item);
        }
        out.push_back(t);
    }
    if (out.empty()) throw ConfigError("at least one task is required");
    return out;
}

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> table = [] {
        std::map<std::string, Field> f;
        using C = PipelineConfig;
        f["seed"] = integer<std::uint64_t>(0, UINT64_MAX, [](C& c) -> std::uint64_t& { return c.seed; });
        f["language"] = text([](C& c) -> std::string& { return c.language; });
        f["culture"] = text([](C& c) -> std::string& { return c.culture; });

        f["topics.cultural"] = integer<int>(0, 1 << 20, [](C& c) -> int& { return c.cultural_topics; });
        f["topics.general"] = integer<int>(0, 1 << 20, [](C& c) -> int& { return c.general_topics; });
        f["topics.per_batch"] = integer<int>(1, 1000, [](C& c) -> int& { return c.topics.per_batch; });
        f["topics.temperature"] = real(0, 1, [](C& c) -> double& { return c.topics.temperature; });
        f["topics.max_tokens"] = integer<int>(1, 1 << 20, [](C& c) -> int& { return c.topics.max_tokens; });
        f["topics.retry_limit"] = integer<int>(0, 100, [](C& c) -> int& { return c.topics.retry_limit; });
        f["topics.stall_limit"] = integer<int>(1, 1000, [](C& c) -> int& { return c.topics.stall_limit; });

        f["context.p_wiki"] = real(0, 1, [](C& c) -> double& { return c.context.p_wiki; });
        f["context.temperature"] = real(0, 1, [](C& c) -> double& { return c.context.temperature; });
        f["context.template"] = text([](C& c) -> std::string& { return c.context.prompt_template; });
        f["context.max_tokens"] = integer<int>(1, 1 << 20, [](C& c) -> int& { return c.context.max_tokens; });
        f["wiki.search_limit"] = integer<int>(1, 500, [](C& c) -> int& { return c.context.search_limit; });

        f["tasks.enabled"] = {[](C& c, const std::string& v) { c.task_kinds = parse_task_list(v); },
                              [](const C& c) { return json(task_list(c.task_kinds)); }};
        f["tasks.closed_qa.temperature"] = real(0, 1, [](C& c) -> double& { return c.tasks.closed_qa_temperature; });
        f["tasks.summarization.temperature"] =
            real(0, 1, [](C& c) -> double& { return c.tasks.summarization_temperature; });
        f["tasks.conversation.temperature"] = real(0, 1, [](C& c) -> double& { return c.tasks.conversation_temperature; });
        f["tasks.multiple_choice.temperature"] =
            real(0, 1, [](C& c) -> double& { return c.tasks.multiple_choice_temperature; });
        f["tasks.closed_qa.pairs"] = integer<int>(1, 100, [](C& c) -> int& { return c.tasks.closed_qa_pairs; });
        f["tasks.max_tokens"] = integer<int>(1, 1 << 20, [](C& c) -> int& { return c.tasks.max_tokens; });
        f["tasks.attempts"] = integer<int>(1, 10, [](C& c) -> int& { return c.tasks.attempts; });

        f["dedup.threshold"] = real(0, 1, [](C& c) -> double& { return c.dedup.threshold; });
        f["dedup.index"] = {[](C& c, const std::string& v) {
                                if (v == "auto") c.dedup.index_kind.reset();
                                else if (v == "exact") c.dedup.index_kind = IndexKind::exact;
                                else if (v == "approximate" || v == "hnsw") c.dedup.index_kind = IndexKind::approximate;
                                else throw ConfigError("expected auto, exact or approximate, got '" + v + "'");
                            },
                            [](const C& c) {
                                if (!c.dedup.index_kind) return json("auto");
                                return json(*c.dedup.index_kind == IndexKind::exact ? "exact" : "approximate");
                            }};
        f["dedup.exact_fallback_limit"] =
            integer<std::size_t>(1, SIZE_MAX, [](C& c) -> std::size_t& { return c.dedup.exact_fallback_limit; });
        f["dedup.mode"] = {[](C& c, const std::string& v) {
                               if (v == "keep_first") c.dedup.mode = DedupMode::keep_first;
                               else if (v == "full_set") c.dedup.mode = DedupMode::full_set;
                               else throw ConfigError("expected keep_first or full_set, got '" + v + "'");
                           },
                           [](const C& c) { return json(c.dedup.mode == DedupMode::keep_first ? "keep_first" : "full_set"); }};

        f["dataset.size"] = integer<std::size_t>(1, SIZE_MAX, [](C& c) -> std::size_t& { return c.dataset_size; });

        f["ablation.variant"] = {[](C& c, const std::string& v) { c.variant = variant_from_string(v); },
                                 [](const C& c) { return json(std::string(to_string(c.variant))); }};
        f["ablation.pivot"] = text([](C& c) -> std::string& { return c.pivot; });
        f["ablation.paraphrases"] = integer<int>(1, 64, [](C& c) -> int& { return c.paraphrases; });
        f["ablation.sample"] = integer<std::size_t>(1, SIZE_MAX, [](C& c) -> std::size_t& { return c.sample; });
        f["ablation.fluency_topics"] = integer<int>(1, 1 << 20, [](C& c) -> int& { return c.fluency_topics; });
        f["ablation.diversity_topics"] = integer<int>(1, 1 << 20, [](C& c) -> int& { return c.diversity_topics; });
        f["ablation.max_extension_rounds"] = integer<int>(0, 1000, [](C& c) -> int& { return c.max_extension_rounds; });
        f["ablation.source"] = text([](C& c) -> std::string& { return c.source_records; });
        f["ablation.external"] = text([](C& c) -> std::string& { return c.external_corpus; });
        f["ablation.external_language"] = text([](C& c) -> std::string& { return c.external_language; });

        add_endpoint(f, "generation", &C::generation);
        add_endpoint(f, "embedding", &C::embedding);
        add_endpoint(f, "translation", &C::translation);
        add_endpoint(f, "paraphrase", &C::paraphrase);
        add_endpoint(f, "wiki", &C::wiki);
        f["provider.embedding.dimension"] =
            integer<std::size_t>(1, 1 << 16, [](C& c) -> std::size_t& { return c.embedding_dimension; });

        f["budget.max_concurrent"] =
            integer<std::size_t>(1, 1024, [](C& c) -> std::size_t& { return c.budget.max_concurrent; });
        f["budget.requests_per_minute"] = integer<int>(1, 1 << 20, [](C& c) -> int& { return c.budget.requests_per_minute; });
        f["budget.retry_limit"] = integer<int>(0, 10, [](C& c) -> int& { return c.budget.retry_limit; });
        f["budget.cache_dir"] = {[](C& c, const std::string& v) { c.budget.cache_dir = v; },
                                 [](const C& c) { return json(c.budget.cache_dir.string()); }};
        f["budget.backoff_base_seconds"] = real(0, 3600, [](C& c) -> double& { return c.budget.backoff_base_seconds; });
        f["budget.backoff_max_seconds"] = real(0, 86400, [](C& c) -> double& { return c.budget.backoff_max_seconds; });

        f["eval.tokenizer"] = {[](C& c, const std::string& v) { c.tokenizer = tokenizer_mode_from_string(v); },
                               [](const C& c) { return json(std::string(to_string(c.tokenizer))); }};
        f["eval.compare_metric"] = text([](C& c) -> std::string& { return c.compare_metric; });
        f["eval.strip_english_articles"] = flag([](C& c) -> bool& { return c.strip_english_articles; });
        f["eval.workers"] = integer<std::size_t>(1, 1024, [](C& c) -> std::size_t& { return c.eval_workers; });
        return f;
    }();
    return table;
}

std::string unquote(const std::string& raw, const std::string& where) {
    if (raw.empty() || raw.front() != '"') return raw;
    std::string out;
    for (std::size_t i = 1; i < raw.size(); ++i) {
        const char ch = raw[i];
        if (ch == '"') {
            if (!utf8::trim(raw.substr(i + 1)).empty()) throw ConfigError(where + ": text after closing quote");
            return out;
        }
        if (ch == '\\' && i + 1 < raw.size()) {
            const char e = raw[++i];
            out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
            continue;
        }
        out += ch;
    }
    throw ConfigError(where + ": unterminated quoted value");
}

// Strips a trailing comment that starts outside quotes.
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '\\' && quoted) {
            ++i;
        } else if (line[i] == '"') {
            quoted = !quoted;
        } else if (line[i] == '#' && !quoted && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
            return line.substr(0, i);
        }
    }
    return line;
}

}  // namespace

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& [k, _] : fields()) out.push_back(k);
    return out;
}

void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    auto it = fields().find(key);
    if (it == fields().end()) throw ConfigError(key, "unknown key");
    keyed(key, [&] {
        it->second.set(cfg, value);
        return 0;
    });
}

void PipelineConfig::validate() const {
    auto temp = [](const std::string& key, double v) { in_range(key, v, 0.0, 1.0); };
    temp("topics.temperature", topics.temperature);
    temp("tasks.closed_qa.temperature", tasks.closed_qa_temperature);
    temp("tasks.summarization.temperature", tasks.summarization_temperature);
    temp("tasks.conversation.temperature", tasks.conversation_temperature);
    temp("tasks.multiple_choice.temperature", tasks.multiple_choice_temperature);
    if (cultural_topics < 0) bad("topics.cultural", "must be >= 0");
    if (general_topics < 0) bad("topics.general", "must be >= 0");
    if (cultural_topics + general_topics == 0) bad("topics.general", "at least one topic is required");
    if (topics.per_batch < 1) bad("topics.per_batch", "must be >= 1");
    if (tasks.closed_qa_pairs < 1) bad("tasks.closed_qa.pairs", "must be >= 1");
    if (tasks.attempts < 1) bad("tasks.attempts", "must be >= 1");
    if (language.empty()) bad("language", "must be non-empty");
    if (pivot.empty() || pivot == language) bad("ablation.pivot", "must be a language other than the target");
    if (dataset_size == 0) bad("dataset.size", "must be >= 1");
    if (paraphrases < 1) bad("ablation.paraphrases", "must be >= 1");
    if (sample == 0) bad("ablation.sample", "must be >= 1");
    if (max_extension_rounds < 0) bad("ablation.max_extension_rounds", "must be >= 0");
    context.validate();
    dedup.validate();
    budget.validate();

    auto endpoint = [](const std::string& name, const ProviderEndpoint& e, std::initializer_list<ProviderKind> ok) {
        bool allowed = false;
        for (auto k : ok) allowed = allowed || k == e.kind;
        if (!allowed) {
            bad("provider." + name + ".kind", "'" + std::string(to_string(e.kind)) + "' cannot serve this role");
        }
        if (e.kind != ProviderKind::mock && e.base_url.empty()) {
            bad("provider." + name + ".base_url", "required for non-mock providers");
        }
    };
    endpoint("generation", generation, {ProviderKind::mock, ProviderKind::openai, ProviderKind::anthropic});
    endpoint("embedding", embedding, {ProviderKind::mock, ProviderKind::openai});
    endpoint("translation", translation, {ProviderKind::mock, ProviderKind::http});
    endpoint("paraphrase", paraphrase, {ProviderKind::mock, ProviderKind::http});
    endpoint("wiki", wiki, {ProviderKind::mock, ProviderKind::mediawiki});
    if (generation.kind != ProviderKind::mock && generation.model.empty()) {
        bad("provider.generation.model", "required for remote generation");
    }
    keyed("eval.compare_metric", [&] {
        if (compare_metric.empty()) throw ConfigError("must be non-empty");
        return 0;
    });
}

json PipelineConfig::to_json() const {
    json out = json::object();
    for (const auto& [k, f] : fields()) out[k] = f.get(*this);
    return out;
}

BuildSettings PipelineConfig::build_settings() const {
    BuildSettings s;
    s.topics = topics;
    s.topics.culture = culture;
    s.context = context;
    s.tasks = tasks;
    s.tasks.language = language;
    s.task_kinds = task_kinds;
    s.dedup = dedup;
    s.pivot = pivot;
    s.paraphrases = paraphrases;
    s.max_extension_rounds = max_extension_rounds;
    return s;
}

EvalOptions PipelineConfig::eval_options() const {
    EvalOptions o;
    o.tokenizer = Tokenizer(tokenizer);
    o.squad.strip_english_articles = strip_english_articles;
    o.compare_metric = compare_metric;
    o.workers = eval_workers;
    return o;
}

PipelineConfig parse_config(const std::string& text, const std::string& origin) {
    if (!utf8::is_valid(text)) throw ConfigError(origin + ": not valid UTF-8");
    PipelineConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        const std::string where = origin + ":" + std::to_string(n);
        const std::string body = utf8::trim(strip_comment(line));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
        const std::string key = utf8::trim(body.substr(0, eq));
        if (key.empty()) throw ConfigError(where + ": missing key");
        if (!seen.insert(key).second) throw ConfigError(key, "set twice (" + where + ")");
        set_config_value(cfg, key, unquote(utf8::trim(body.substr(eq + 1)), where));
    }
    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

void apply_overrides(PipelineConfig& cfg, const std::vector<std::string>& assignments) {
    for (const auto& a : assignments) {
        const auto eq = a.find('=');
        if (eq == std::string::npos) throw ConfigError("override '" + a + "' is not key=value");
        set_config_value(cfg, utf8::trim(a.substr(0, eq)), unquote(utf8::trim(a.substr(eq + 1)), "--set " + a));
    }
    cfg.validate();
}

}  // namespace seedforge
