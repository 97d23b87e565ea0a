#include "seedforge/store/codec.hpp"

#include <stdexcept>

namespace seedforge {

using nlohmann::json;

namespace {

const json& field(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw std::invalid_argument(std::string("missing field '") + key + "'");
    return *it;
}

std::string text_field(const json& j, const char* key) {
    const json& v = field(j, key);
    if (!v.is_string()) throw std::invalid_argument(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

}  // namespace

void to_json(json& j, const Provenance& p) {
    j = {{"temperature", p.temperature}, {"seed", p.seed}, {"prompt_hash", p.prompt_hash}, {"seed_path", p.seed_path}};
}

void from_json(const json& j, Provenance& p) {
    p.temperature = j.value("temperature", 0.0);
    p.seed = j.value("seed", std::uint64_t{0});
    p.prompt_hash = j.value("prompt_hash", "");
    p.seed_path = j.value("seed_path", "");
}

void to_json(json& j, const Topic& t) {
    j = {{"text", t.text}, {"category", to_string(t.category)}, {"batch_id", t.batch_id}, {"provenance", t.provenance}};
}

void from_json(const json& j, Topic& t) {
    t.text = text_field(j, "text");
    t.category = topic_category_from_string(text_field(j, "category"));
    t.batch_id = j.value("batch_id", std::int64_t{0});
    if (j.contains("provenance")) t.provenance = j.at("provenance").get<Provenance>();
}

void to_json(json& j, const ContextSource& s) {
    if (s.kind == ContextSourceKind::wiki) {
        j = {{"kind", "wiki"}, {"title", s.title}, {"section", s.section}, {"page_id", s.page_id},
             {"section_index", s.section_index}};
    } else {
        j = {{"kind", "generated"}, {"style", s.style}};
    }
}

void from_json(const json& j, ContextSource& s) {
    s = {};
    const std::string kind = text_field(j, "kind");
    if (kind == "wiki") {
        s.kind = ContextSourceKind::wiki;
        s.title = j.value("title", "");
        s.section = j.value("section", "");
        s.page_id = j.value("page_id", std::int64_t{0});
        s.section_index = j.value("section_index", 0);
    } else if (kind == "generated") {
        s.kind = ContextSourceKind::generated;
        s.style = j.value("style", "");
    } else {
        throw std::invalid_argument("unknown context source kind '" + kind + "'");
    }
}

void to_json(json& j, const ContextDoc& c) {
    j = {{"body", c.body},         {"source", c.source},       {"topic", c.topic},
         {"topic_index", c.topic_index}, {"fallback", c.fallback}, {"rng_path", c.rng_path},
         {"provenance", c.provenance}};
}

void from_json(const json& j, ContextDoc& c) {
    c.body = text_field(j, "body");
    c.source = field(j, "source").get<ContextSource>();
    c.topic = field(j, "topic").get<Topic>();
    c.topic_index = j.value("topic_index", std::int64_t{0});
    c.fallback = j.value("fallback", false);
    c.rng_path = j.value("rng_path", "");
    if (j.contains("provenance")) c.provenance = j.at("provenance").get<Provenance>();
}

void to_json(json& j, const PropertyFlags& f) {
    j = {{"fluency", f.fluency}, {"culture", f.culture}, {"diversity", f.diversity}};
}

void from_json(const json& j, PropertyFlags& f) {
    f.fluency = field(j, "fluency").get<bool>();
    f.culture = field(j, "culture").get<bool>();
    f.diversity = field(j, "diversity").get<bool>();
}

void to_json(json& j, const InstructionRecord& r) {
    j = {{"id", r.id},
         {"task", to_string(r.task)},
         {"instruction", r.instruction},
         {"context", r.context ? json(*r.context) : json(nullptr)},
         {"output", r.output},
         {"topic", r.topic},
         {"language", r.language},
         {"lineage", r.lineage},
         {"flags", r.flags ? json(*r.flags) : json(nullptr)},
         {"provenance", r.provenance},
         {"context_source", r.context_source}};
}

void from_json(const json& j, InstructionRecord& r) {
    if (!j.is_object()) throw std::invalid_argument("record must be a JSON object");
    r = {};
    r.id = text_field(j, "id");
    if (r.id.empty()) throw std::invalid_argument("field 'id' is empty");
    r.task = task_kind_from_string(text_field(j, "task"));
    r.instruction = text_field(j, "instruction");
    const json& ctx = field(j, "context");
    if (!ctx.is_null()) {
        if (!ctx.is_string()) throw std::invalid_argument("field 'context' must be a string or null");
        r.context = ctx.get<std::string>();
    }
    r.output = text_field(j, "output");
    r.topic = field(j, "topic").get<Topic>();
    r.language = text_field(j, "language");
    const json& lineage = field(j, "lineage");
    if (!lineage.is_array()) throw std::invalid_argument("field 'lineage' must be an array");
    r.lineage = lineage.get<std::vector<std::string>>();
    const json& flags = field(j, "flags");
    if (!flags.is_null()) r.flags = flags.get<PropertyFlags>();
    if (j.contains("provenance")) r.provenance = j.at("provenance").get<Provenance>();
    r.context_source = j.value("context_source", "");
}

void to_json(json& j, const GenerationFailure& f) {
    j = {{"id", f.id}, {"task", to_string(f.task)}, {"reason", f.reason}, {"raw", f.raw}};
}

void from_json(const json& j, GenerationFailure& f) {
    f.id = text_field(j, "id");
    f.task = task_kind_from_string(text_field(j, "task"));
    f.reason = j.value("reason", "");
    f.raw = j.value("raw", "");
}

void to_json(json& j, const Removal& r) {
    j = {{"record_id", r.record_id}, {"nearest_id", r.nearest_id}, {"similarity", r.similarity}};
}

void from_json(const json& j, Removal& r) {
    r.record_id = text_field(j, "record_id");
    r.nearest_id = text_field(j, "nearest_id");
    r.similarity = field(j, "similarity").get<double>();
}

}  // namespace seedforge
