#include "seedforge/ablation/builder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <unordered_set>

#include "seedforge/errors.hpp"
#include "seedforge/store/codec.hpp"
#include "seedforge/util/hash.hpp"
#include "seedforge/util/parallel.hpp"
#include "seedforge/util/rng.hpp"
#include "seedforge/util/utf8.hpp"

namespace seedforge {

using nlohmann::json;

namespace {

constexpr std::string_view kVariantNames[] = {"full", "fluency", "diversity", "culture", "none"};

std::string dedup_step(double threshold) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "dedup(%g)", threshold);
    return buf;
}

std::string round_trip_step(const std::string& lang, const std::string& pivot) {
    return "round_trip(" + lang + ">" + pivot + ">" + lang + ")";
}

std::string translate_step(const std::string& from, const std::string& to) {
    return "translate(" + from + ">" + to + ")";
}

std::string paraphrase_step(int k, int total) {
    return "paraphrase(" + std::to_string(k) + "/" + std::to_string(total) + ")";
}

// Uniform subset of `n` positions out of `total`, returned ascending.
std::vector<std::size_t> sample_positions(std::size_t total, std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(total);
    for (std::size_t i = 0; i < total; ++i) idx[i] = i;
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(idx));
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
    return idx;
}

void finalize(DatasetManifest& m) {
    m.flags = flags_from_recipe(m.recipe);
    for (auto& r : m.records) r.flags = m.flags;
}

struct GenPlan {
    Variant variant;
    int cultural;
    int general;
    bool dedup;
    bool round_trip;
    bool extend_with_topics;
};

std::vector<Topic> extension_topics(const GenPlan& plan, std::size_t missing, double per_topic,
                                    const std::vector<Topic>& existing, Gateway& gw,
                                    std::uint64_t seed, const TopicGenConfig& cfg) {
    const double yield = per_topic > 0.0 ? per_topic : 1.0;
    // A quarter of headroom for dedup and parse losses.
    const int want = std::max(1, static_cast<int>(std::ceil(1.25 * static_cast<double>(missing) / yield)));
    const double share = static_cast<double>(plan.cultural) / static_cast<double>(plan.cultural + plan.general);
    const int cultural = static_cast<int>(std::lround(share * want));
    const int general = want - cultural;

    std::set<std::string> exclude;
    for (const auto& t : existing) exclude.insert(utf8::normalize_key(t.text));
    std::vector<Topic> out;
    if (cultural > 0) {
        auto frag = generate_topics(TopicCategory::cultural, cultural, gw,
                                    derive_seed(seed, "cultural"), cfg, exclude);
        for (auto& t : frag.topics) {
            exclude.insert(utf8::normalize_key(t.text));
            out.push_back(std::move(t));
        }
    }
    if (general > 0) {
        auto frag = generate_topics(TopicCategory::general, general, gw, derive_seed(seed, "general"),
                                    cfg, exclude);
        for (auto& t : frag.topics) out.push_back(std::move(t));
    }
    return out;
}

std::string content_hash(const json& j) { return sha256_hex(j.dump()); }

// Runs `compute` as a named stage: served from checkpoints when the same
// inputs were already processed, and failures come out as StageError.
template <typename F>
json staged(const BuildSettings& s, const std::string& stage, const json& inputs, F&& compute) {
    const std::string key =
        content_hash({{"stage", stage}, {"fingerprint", s.fingerprint}, {"inputs", inputs}});
    if (s.checkpoints != nullptr) {
        if (auto hit = s.checkpoints->load(key)) return *hit;
    }
    json value;
    try {
        value = compute();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        std::throw_with_nested(StageError(stage, e.what()));
    }
    if (s.checkpoints != nullptr) s.checkpoints->save(key, value);
    return value;
}

DatasetManifest build_generated(const GenPlan& plan, Gateway& gw, std::uint64_t seed, std::size_t size,
                                const BuildSettings& s) {
    if (size == 0) throw PreconditionError("build: size must be positive");
    if (plan.cultural + plan.general <= 0) throw PreconditionError("build: no topics requested");
    s.context.validate();
    s.dedup.validate();

    DatasetManifest m;
    m.seed = seed;
    m.target_size = size;
    m.recipe.variant = plan.variant;
    m.recipe.cultural_topics = plan.cultural;
    m.recipe.general_topics = plan.general;
    m.recipe.dedup = plan.dedup;
    m.recipe.dedup_threshold = plan.dedup ? s.dedup.threshold : 0.0;
    m.recipe.extension = plan.extend_with_topics ? "topics" : "context_rounds";
    if (plan.round_trip) m.recipe.transforms.push_back(round_trip_step(s.tasks.language, s.pivot));

    const json base = {{"variant", to_string(plan.variant)}, {"seed", seed}};
    const json topics_json = staged(s, "topics", {{"base", base}, {"cultural", plan.cultural}, {"general", plan.general}}, [&] {
        return json(generate_topic_set(plan.general, plan.cultural, gw, derive_seed(seed, "topics"), s.topics).topics);
    });
    std::vector<Topic> all_topics = topics_json.get<std::vector<Topic>>();
    std::vector<Topic> round_topics = all_topics;
    std::size_t topic_uses = 0;

    // `pool` holds every surviving record before transforms; the dedup pass
    // always runs over all of it so later rounds are checked against earlier
    // ones. `finals` maps pool ids to their emitted form.
    std::vector<InstructionRecord> pool;
    std::map<std::string, InstructionRecord> finals;
    std::set<std::string> logged;
    std::set<std::string> skipped_ids;

    for (int round = 0;; ++round) {
        const std::string r = "/r" + std::to_string(round);
        topic_uses += round_topics.size();
        const json ctx_json = staged(s, "contexts" + r,
                                     {{"base", base}, {"round", round}, {"topics", content_hash(json(round_topics))}}, [&] {
                                         return json(build_contexts(round_topics, gw, s.context,
                                                                    derive_seed(seed, "contexts"), round));
                                     });
        const json ins_json = staged(s, "instructions" + r,
                                     {{"base", base}, {"round", round}, {"contexts", content_hash(ctx_json)}}, [&] {
            char tag[16] = "";
            if (round > 0) std::snprintf(tag, sizeof tag, "r%02d", round);
            TaskOutcome out = generate_instructions(ctx_json.get<std::vector<ContextDoc>>(), s.task_kinds, gw,
                                                    s.tasks, derive_seed(seed, "instructions"), tag);
            return json{{"records", out.records}, {"failures", out.failures}};
        });
        for (auto f : ins_json.at("failures").get<std::vector<GenerationFailure>>()) m.failures.push_back(std::move(f));
        for (auto rec : ins_json.at("records").get<std::vector<InstructionRecord>>()) pool.push_back(std::move(rec));

        if (plan.dedup && !pool.empty()) {
            const json dd = staged(s, "dedup" + r, {{"base", base}, {"pool", content_hash(json(pool))}}, [&] {
                DedupResult res = dedup_filter(pool, s.dedup, gw);
                json kept = json::array();
                for (const auto& k : res.kept) kept.push_back(k.id);
                return json{{"kept", kept}, {"removed", res.log.removed}};
            });
            for (auto rem : dd.at("removed").get<std::vector<Removal>>()) {
                if (logged.insert(rem.record_id).second) m.removals.removed.push_back(std::move(rem));
            }
            const auto kept = dd.at("kept").get<std::unordered_set<std::string>>();
            std::erase_if(pool, [&](const InstructionRecord& rec) { return !kept.count(rec.id); });
            std::erase_if(finals, [&](const auto& kv) { return !kept.count(kv.first); });
        }

        std::vector<const InstructionRecord*> pending;
        for (const auto& rec : pool) {
            if (!finals.count(rec.id) && !skipped_ids.count(rec.id)) pending.push_back(&rec);
        }
        auto convert = [&]() {
            auto converted = parallel_map<std::optional<InstructionRecord>>(
                pending.size(), gw.budget().max_concurrent, [&](std::size_t i) -> std::optional<InstructionRecord> {
                    InstructionRecord rec = *pending[i];
                    if (plan.dedup) rec.lineage.push_back(dedup_step(s.dedup.threshold));
                    if (!plan.round_trip) return rec;
                    try {
                        return round_trip_translate(rec, gw, s.pivot);
                    } catch (const ProviderError& e) {
                        if (!e.retryable()) throw;
                        return std::nullopt;
                    } catch (const ProtocolError&) {
                        return std::nullopt;
                    }
                });
            json done = json::array(), skipped = json::array();
            for (std::size_t i = 0; i < pending.size(); ++i) {
                if (converted[i]) {
                    done.push_back(*converted[i]);
                } else {
                    skipped.push_back(pending[i]->id);
                }
            }
            return json{{"records", done}, {"skipped", skipped}};
        };
        json tr;
        if (plan.round_trip) {
            json ids = json::array();
            for (const auto* p : pending) ids.push_back(*p);
            tr = staged(s, "round_trip" + r, {{"base", base}, {"pending", content_hash(ids)}}, convert);
        } else {
            tr = convert();
        }
        for (auto rec : tr.at("records").get<std::vector<InstructionRecord>>()) {
            std::string id = rec.id;
            finals.emplace(std::move(id), std::move(rec));
        }
        for (const auto& id : tr.at("skipped")) {
            skipped_ids.insert(id.get<std::string>());
            m.skipped.push_back({id.get<std::string>(), "round trip translation failed"});
        }

        if (finals.size() >= size) break;
        if (round >= s.max_extension_rounds) {
            throw BuildShortfallError("build " + std::string(to_string(plan.variant)) + " produced " +
                                          std::to_string(finals.size()) + " of " + std::to_string(size) +
                                          " records after " + std::to_string(round) + " extension rounds",
                                      finals.size(), size);
        }
        m.recipe.extension_rounds = round + 1;
        if (plan.extend_with_topics) {
            const double per_topic = static_cast<double>(finals.size()) / static_cast<double>(topic_uses);
            const std::size_t missing = size - finals.size();
            const json ext = staged(s, "extend_topics/r" + std::to_string(round + 1),
                                    {{"base", base}, {"missing", missing}, {"per_topic", per_topic},
                                     {"existing", content_hash(json(all_topics))}}, [&] {
                                        return json(extension_topics(plan, missing, per_topic, all_topics, gw,
                                                                     derive_seed(seed, "extend", round + 1), s.topics));
                                    });
            round_topics = ext.get<std::vector<Topic>>();
            all_topics.insert(all_topics.end(), round_topics.begin(), round_topics.end());
        }
    }

    std::vector<InstructionRecord> ordered;
    ordered.reserve(finals.size());
    for (const auto& rec : pool) {
        if (auto it = finals.find(rec.id); it != finals.end()) ordered.push_back(std::move(it->second));
    }
    if (ordered.size() > size) {
        for (std::size_t i : sample_positions(ordered.size(), size, derive_seed(seed, "truncate"))) {
            m.records.push_back(std::move(ordered[i]));
        }
    } else {
        m.records = std::move(ordered);
    }
    finalize(m);
    return m;
}

// Shared tail of the culture-only and no-properties variants: `originals`
// are in `lang`; each gets `paraphrases` rewrites and all of them are
// translated to `target`.
std::vector<InstructionRecord> paraphrase_and_translate(const std::vector<InstructionRecord>& originals,
                                                        const std::string& lang, const std::string& target,
                                                        int paraphrases, Gateway& gw, std::uint64_t seed) {
    auto groups = parallel_map<std::vector<InstructionRecord>>(
        originals.size(), gw.budget().max_concurrent, [&](std::size_t i) {
            const InstructionRecord& src = originals[i];
            const std::uint64_t rs = derive_seed(seed, "record", i);
            auto rewrite = [&](const std::string& text, std::string_view field) {
                auto out = gw.paraphrase(text, paraphrases, derive_seed(rs, field));
                if (out.size() != static_cast<std::size_t>(paraphrases)) {
                    throw ProtocolError("paraphraser returned " + std::to_string(out.size()) + " of " +
                                        std::to_string(paraphrases) + " rewrites");
                }
                return out;
            };
            const auto ins = rewrite(src.instruction, "instruction");
            const auto outp = rewrite(src.output, "output");
            std::optional<std::vector<std::string>> ctx;
            if (src.context) ctx = rewrite(*src.context, "context");

            std::vector<InstructionRecord> group;
            for (int k = 0; k <= paraphrases; ++k) {
                InstructionRecord r = src;
                if (k == 0) {
                    r.id = src.id + "~orig";
                    r.lineage.push_back("original");
                } else {
                    r.id = src.id + "~p" + std::to_string(k);
                    r.instruction = ins[k - 1];
                    r.output = outp[k - 1];
                    if (ctx) r.context = (*ctx)[k - 1];
                    r.lineage.push_back(paraphrase_step(k, paraphrases));
                }
                r.instruction = gw.translate(r.instruction, lang, target);
                r.output = gw.translate(r.output, lang, target);
                if (r.context) r.context = gw.translate(*r.context, lang, target);
                r.lineage.push_back(translate_step(lang, target));
                r.language = target;
                group.push_back(std::move(r));
            }
            return group;
        });
    std::vector<InstructionRecord> out;
    for (auto& g : groups) {
        for (auto& r : g) out.push_back(std::move(r));
    }
    return out;
}

template <typename F>
std::vector<InstructionRecord> guard_shortfall(std::size_t target, F&& f) {
    try {
        return f();
    } catch (const ProtocolError& e) {
        throw BuildShortfallError(std::string("paraphrase/translation step failed: ") + e.what(), 0, target);
    }
}

}  // namespace

std::string_view to_string(Variant v) noexcept { return kVariantNames[static_cast<int>(v)]; }

Variant variant_from_string(std::string_view s) {
    for (int i = 0; i < 5; ++i) {
        if (kVariantNames[i] == s) return static_cast<Variant>(i);
    }
    throw ConfigError("variant", "unknown variant '" + std::string(s) +
                                     "' (expected full, fluency, diversity, culture or none)");
}

json Recipe::to_json() const {
    json j = {{"variant", to_string(variant)},
              {"topics", {{"cultural", cultural_topics}, {"general", general_topics}}},
              {"dedup", dedup},
              {"transforms", transforms},
              {"extension", extension},
              {"extension_rounds", extension_rounds}};
    if (dedup) j["dedup_threshold"] = dedup_threshold;
    if (sampled > 0) {
        j["sampled"] = sampled;
        j["paraphrases"] = paraphrases;
    }
    if (!source.empty()) j["source"] = source;
    return j;
}

Recipe Recipe::from_json(const json& j) {
    Recipe r;
    r.variant = variant_from_string(j.at("variant").get<std::string>());
    r.cultural_topics = j.at("topics").at("cultural").get<int>();
    r.general_topics = j.at("topics").at("general").get<int>();
    r.dedup = j.at("dedup").get<bool>();
    r.dedup_threshold = j.value("dedup_threshold", 0.0);
    r.transforms = j.at("transforms").get<std::vector<std::string>>();
    r.extension = j.value("extension", "");
    r.extension_rounds = j.value("extension_rounds", 0);
    r.sampled = j.value("sampled", std::size_t{0});
    r.paraphrases = j.value("paraphrases", 0);
    r.source = j.value("source", "");
    return r;
}

PropertyFlags flags_from_recipe(const Recipe& r) {
    return {.fluency = r.transforms.empty(), .culture = r.cultural_topics > 0, .diversity = r.dedup};
}

InstructionRecord round_trip_translate(const InstructionRecord& record, Gateway& gw,
                                       const std::string& pivot) {
    const std::string& lang = record.language;
    if (lang.empty()) throw PreconditionError("round_trip_translate: record " + record.id + " has no language");
    if (lang == pivot) throw PreconditionError("round_trip_translate: pivot equals record language");
    auto there_and_back = [&](const std::string& text) {
        return gw.translate(gw.translate(text, lang, pivot), pivot, lang);
    };
    InstructionRecord out = record;
    out.instruction = there_and_back(record.instruction);
    out.output = there_and_back(record.output);
    if (record.context) out.context = there_and_back(*record.context);
    out.lineage.push_back(round_trip_step(lang, pivot));
    return out;
}

DatasetManifest build_full(Gateway& gw, std::uint64_t seed, std::size_t size, const BuildSettings& s,
                           int cultural, int general) {
    return build_generated({Variant::full, cultural, general, true, false, true}, gw, seed, size, s);
}

DatasetManifest build_fluency_only(Gateway& gw, std::uint64_t seed, std::size_t size,
                                   const BuildSettings& s, int topics) {
    return build_generated({Variant::fluency, 0, topics, false, false, false}, gw, seed, size, s);
}

DatasetManifest build_diversity_only(Gateway& gw, std::uint64_t seed, std::size_t size,
                                     const BuildSettings& s, int topics) {
    return build_generated({Variant::diversity, 0, topics, true, true, true}, gw, seed, size, s);
}

DatasetManifest build_culture_only(const DatasetManifest& full, Gateway& gw, std::uint64_t seed,
                                   std::size_t sample, const BuildSettings& s) {
    if (sample == 0) throw PreconditionError("culture build: sample must be positive");
    if (full.records.size() < sample) {
        throw BuildShortfallError("culture build needs " + std::to_string(sample) + " source records, have " +
                                      std::to_string(full.records.size()),
                                  full.records.size(), sample * (1 + s.paraphrases));
    }
    DatasetManifest m;
    m.seed = seed;
    m.target_size = sample * static_cast<std::size_t>(1 + s.paraphrases);
    m.recipe.variant = Variant::culture;
    m.recipe.cultural_topics = full.recipe.cultural_topics;
    m.recipe.general_topics = full.recipe.general_topics;
    m.recipe.sampled = sample;
    m.recipe.paraphrases = s.paraphrases;
    m.recipe.source = std::string(to_string(full.recipe.variant));
    const std::string lang = s.tasks.language;
    m.recipe.transforms = {translate_step(lang, s.pivot), "paraphrase(x" + std::to_string(s.paraphrases) + ")",
                           translate_step(s.pivot, lang)};

    std::vector<InstructionRecord> originals;
    for (std::size_t i : sample_positions(full.records.size(), sample, derive_seed(seed, "sample"))) {
        originals.push_back(full.records[i]);
    }
    // Into the pivot first; paraphrasing happens there.
    auto pivoted = guard_shortfall(m.target_size, [&] {
        return parallel_map<InstructionRecord>(originals.size(), gw.budget().max_concurrent, [&](std::size_t i) {
            InstructionRecord r = originals[i];
            r.instruction = gw.translate(r.instruction, lang, s.pivot);
            r.output = gw.translate(r.output, lang, s.pivot);
            if (r.context) r.context = gw.translate(*r.context, lang, s.pivot);
            r.lineage.push_back(translate_step(lang, s.pivot));
            r.language = s.pivot;
            return r;
        });
    });
    m.records = guard_shortfall(m.target_size, [&] {
        return paraphrase_and_translate(pivoted, s.pivot, lang, s.paraphrases, gw, derive_seed(seed, "paraphrase"));
    });
    finalize(m);
    return m;
}

DatasetManifest build_no_properties(const std::vector<InstructionRecord>& external, Gateway& gw,
                                    std::uint64_t seed, std::size_t sample, const BuildSettings& s,
                                    const std::string& target_language) {
    if (sample == 0) throw PreconditionError("external build: sample must be positive");
    DatasetManifest m;
    m.seed = seed;
    m.target_size = sample * static_cast<std::size_t>(1 + s.paraphrases);
    if (external.size() < sample) {
        throw BuildShortfallError("external corpus has " + std::to_string(external.size()) + " rows, need " +
                                      std::to_string(sample),
                                  external.size(), m.target_size);
    }
    m.recipe.variant = Variant::none;
    m.recipe.sampled = sample;
    m.recipe.paraphrases = s.paraphrases;
    m.recipe.source = "external";
    std::vector<InstructionRecord> originals;
    for (std::size_t i : sample_positions(external.size(), sample, derive_seed(seed, "sample"))) {
        originals.push_back(external[i]);
    }
    const std::string lang = originals.front().language;
    for (const auto& r : originals) {
        if (r.language != lang) throw PreconditionError("external build: mixed source languages");
    }
    m.recipe.transforms = {"paraphrase(x" + std::to_string(s.paraphrases) + ")",
                           translate_step(lang, target_language)};
    m.records = guard_shortfall(m.target_size, [&] {
        return paraphrase_and_translate(originals, lang, target_language, s.paraphrases, gw,
                                        derive_seed(seed, "paraphrase"));
    });
    finalize(m);
    return m;
}

std::vector<InstructionRecord> read_external_corpus(const std::string& path, const std::string& language) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PreconditionError("cannot open " + path);
    std::vector<InstructionRecord> out;
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t lineno = 0;
    auto text_of = [](const json& row, std::initializer_list<const char*> keys) -> std::optional<std::string> {
        for (const char* k : keys) {
            auto it = row.find(k);
            if (it != row.end() && it->is_string() && !utf8::trim(it->get<std::string>()).empty()) {
                return it->get<std::string>();
            }
        }
        return std::nullopt;
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (utf8::trim(line).empty()) continue;
        if (!utf8::is_valid(line)) throw FormatError(path, lineno, "invalid UTF-8");
        json row;
        try {
            row = json::parse(line);
        } catch (const json::exception& e) {
            throw FormatError(path, lineno, std::string("not JSON: ") + e.what());
        }
        if (!row.is_object()) throw FormatError(path, lineno, "row is not an object");

        InstructionRecord r;
        r.task = TaskKind::conversation;
        r.language = language;
        r.lineage = {"external"};
        if (auto it = row.find("messages"); it != row.end() && it->is_array()) {
            std::optional<std::string> user, reply;
            for (const auto& msg : *it) {
                if (!msg.is_object()) continue;
                const std::string role = msg.value("role", "");
                const auto content = text_of(msg, {"content"});
                if (!content) continue;
                if (!user && role == "user") {
                    user = content;
                } else if (user && role == "assistant") {
                    reply = content;
                    break;
                }
            }
            if (!user) throw FormatError(path, lineno, "no user message");
            if (!reply) throw FormatError(path, lineno, "no assistant reply after the first user message");
            r.instruction = *user;
            r.output = *reply;
        } else {
            const auto ins = text_of(row, {"instruction", "prompt"});
            const auto outp = text_of(row, {"output", "response", "completion"});
            if (!ins) throw FormatError(path, lineno, "missing instruction");
            if (!outp) throw FormatError(path, lineno, "missing output");
            r.instruction = *ins;
            r.output = *outp;
            if (auto ctx = text_of(row, {"context", "input"})) r.context = *ctx;
        }
        if (auto id = text_of(row, {"id", "prompt_id"})) {
            r.id = "ext-" + *id;
        } else {
            char buf[32];
            std::snprintf(buf, sizeof buf, "ext-%06zu", lineno);
            r.id = buf;
        }
        if (!ids.insert(r.id).second) throw FormatError(path, lineno, "duplicate id " + r.id);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace seedforge
