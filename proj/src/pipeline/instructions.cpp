#include "seedforge/pipeline/instructions.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <numeric>
#include <optional>
#include <regex>
#include <unordered_set>

#include "seedforge/pipeline/lenient_json.hpp"
#include "seedforge/pipeline/prompts.hpp"
#include "seedforge/util/hash.hpp"
#include "seedforge/util/parallel.hpp"
#include "seedforge/util/utf8.hpp"

namespace seedforge {

using nlohmann::json;

namespace {

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

std::string ascii_lower(std::string s) {
    for (auto& c : s) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return s;
}

// Drops wrapper tags and markdown emphasis that models put around markers.
std::string clean_markup(const std::string& raw) {
    std::string s = raw;
    for (std::string_view tag : {"<format>", "</format>", "<Format>", "</Format>", "**", "__"}) {
        s = replace_all(std::move(s), tag, " ");
    }
    return replace_all(std::move(s), "\r", "");
}

// Case-insensitive (ASCII) search for any of `markers`; returns every match
// as (position, length), sorted by position.
std::vector<std::pair<std::size_t, std::size_t>> find_markers(
    const std::string& text, std::initializer_list<std::string_view> markers) {
    const std::string lower = ascii_lower(text);
    std::vector<std::pair<std::size_t, std::size_t>> hits;
    for (std::string_view m : markers) {
        const std::string lm = ascii_lower(std::string(m));
        for (std::size_t pos = lower.find(lm); pos != std::string::npos;
             pos = lower.find(lm, pos + lm.size())) {
            hits.emplace_back(pos, lm.size());
        }
    }
    std::sort(hits.begin(), hits.end());
    // Overlapping hits (one marker inside another) count once.
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& h : hits) {
        if (!out.empty() && h.first < out.back().first + out.back().second) continue;
        out.push_back(h);
    }
    return out;
}

std::string normalize_choice_text(std::string_view s) {
    return utf8::normalize_key(s);
}

const json* find_key(const json& obj, std::string_view key) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (ascii_lower(utf8::trim(it.key())) == key) return &it.value();
    }
    return nullptr;
}

std::optional<std::string> as_text(const json* v) {
    if (v == nullptr) return std::nullopt;
    if (v->is_string()) return utf8::trim(v->get<std::string>());
    if (v->is_number()) return v->dump();
    return std::nullopt;
}

// Leading "A) ", "(b) ", "ก. " style labels.
std::string strip_choice_label(std::string s) {
    static const std::regex latin(R"(^\(?[A-Da-d][\.\)]\s+)");
    static const std::regex thai(R"(^\(?(ก|ข|ค|ง)[\.\)]\s+)");
    s = std::regex_replace(s, latin, "", std::regex_constants::format_first_only);
    s = std::regex_replace(s, thai, "", std::regex_constants::format_first_only);
    return s;
}

std::string clean_choice(std::string s) {
    s = utf8::collapse_whitespace(s);
    if (s.size() >= 2 && s.front() == '[' && s.back() == ']') {
        s = utf8::trim(std::string_view(s).substr(1, s.size() - 2));
    }
    return utf8::trim(strip_choice_label(s));
}

bool is_bullet_line(std::string_view line, std::string_view& rest) {
    for (std::string_view bullet : {"-", "•", "*", "–"}) {
        if (line.substr(0, bullet.size()) == bullet) {
            rest = line.substr(bullet.size());
            return true;
        }
    }
    return false;
}

std::vector<std::string> split_choices(const std::string& block) {
    std::vector<std::string> lines;
    {
        std::size_t pos = 0;
        while (pos <= block.size()) {
            std::size_t eol = block.find('\n', pos);
            if (eol == std::string::npos) eol = block.size();
            std::string line = utf8::trim(std::string_view(block).substr(pos, eol - pos));
            if (!line.empty()) lines.push_back(std::move(line));
            pos = eol + 1;
        }
    }
    std::vector<std::string> choices;
    const bool line_mode =
        lines.size() >= 2 && std::all_of(lines.begin(), lines.end(), [](const std::string& l) {
            std::string_view rest;
            return is_bullet_line(l, rest);
        });
    if (line_mode) {
        for (const auto& l : lines) {
            std::string_view rest;
            is_bullet_line(l, rest);
            choices.push_back(clean_choice(std::string(rest)));
        }
        return choices;
    }
    // Inline form: "- a - b - c - d".
    const std::string flat = utf8::collapse_whitespace(block);
    if (flat.empty() || flat.front() != '-') return {};
    std::size_t start = 1;
    while (true) {
        const std::size_t sep = flat.find(" - ", start);
        choices.push_back(clean_choice(flat.substr(start, sep == std::string::npos ? std::string::npos
                                                                                  : sep - start)));
        if (sep == std::string::npos) break;
        start = sep + 3;
    }
    return choices;
}

struct OrdinalPattern {
    std::regex re;
    std::string label;
};

const std::vector<OrdinalPattern>& english_ordinals() {
    static const std::vector<OrdinalPattern> patterns = [] {
        const auto icase = std::regex::ECMAScript | std::regex::icase;
        std::vector<OrdinalPattern> p;
        p.push_back({std::regex(R"(\b(all|none|both|neither) of the (above|below|choices|options)\b)", icase),
                     "all/none of the above"});
        p.push_back({std::regex(R"(\ball the above\b)", icase), "all the above"});
        p.push_back({std::regex(R"(\b(first|second|third|fourth|last|1st|2nd|3rd|4th) (answer|choice|option)s?\b)",
                                icase),
                     "positional choice"});
        p.push_back({std::regex(R"(\b(answer|choice|option)s? \(?[1-4]\)?(?![0-9]))", icase),
                     "numbered choice"});
        p.push_back({std::regex(R"(\b([Aa]nswer|[Cc]hoice|[Oo]ption)s? \(?[A-D]\)?(?![A-Za-z]))"),
                     "lettered choice"});
        p.push_back({std::regex(R"(\b[A-D] (and|or|&) [A-D]\b)"), "lettered choices"});
        return p;
    }();
    return patterns;
}

constexpr std::array<std::string_view, 13> kThaiOrdinals = {
    "ทั้งหมดข้างต้น", "ทุกข้อข้างต้น",   "ข้อใดข้อหนึ่งข้างต้น", "ถูกทุกข้อ", "ผิดทุกข้อ",
    "ถูกทั้งหมด",   "ไม่มีข้อใดถูก",  "ข้อแรก",              "ข้อสุดท้าย", "ตัวเลือกแรก",
    "ตัวเลือกที่",   "คำตอบแรก",      "ตัวเลือกสุดท้าย"};

// "ข้อ ก", "ข้อ ข." etc. The letter must stand alone so words such as
// "ข้อ ความ" do not trigger.
std::string find_thai_letter_reference(const std::string& text) {
    const std::string prefix = "ข้อ ";
    for (std::size_t pos = text.find(prefix); pos != std::string::npos;
         pos = text.find(prefix, pos + 1)) {
        const std::size_t at = pos + prefix.size();
        for (std::string_view letter : {"ก", "ข", "ค", "ง"}) {
            if (text.compare(at, letter.size(), letter) != 0) continue;
            const std::size_t after = at + letter.size();
            if (after >= text.size()) return prefix + std::string(letter);
            const auto cps = utf8::decode(std::string_view(text).substr(after, 4));
            if (cps.empty() || !(utf8::is_word(cps[0]) || utf8::is_mark(cps[0]))) {
                return prefix + std::string(letter);
            }
        }
    }
    return {};
}

}  // namespace

void McQuestion::validate() const {
    if (utf8::trim(question).empty()) throw PreconditionError("McQuestion: empty question");
    if (choices.size() < 2) throw PreconditionError("McQuestion: needs at least 2 choices");
    if (correct_index >= choices.size()) throw PreconditionError("McQuestion: correct_index out of range");
    for (const auto& c : choices) {
        if (utf8::trim(c).empty()) throw PreconditionError("McQuestion: empty choice");
    }
}

std::vector<QaPair> parse_closed_qa(const std::string& raw) {
    std::vector<QaPair> pairs;
    const auto list = lenient::find_first(raw, lenient::Want::array, [&](const json& j) {
        if (j.empty()) return false;
        std::vector<QaPair> out;
        for (const auto& e : j) {
            if (!e.is_object()) return false;
            auto q = as_text(find_key(e, "question"));
            auto a = as_text(find_key(e, "answer"));
            if (!q || !a || q->empty() || a->empty()) return false;
            out.push_back({*q, *a});
        }
        pairs = std::move(out);
        return true;
    });
    if (!list) throw ParseError("no list of question/answer dictionaries found", raw);
    return pairs;
}

SummaryPayload parse_summarization(const std::string& raw) {
    SummaryPayload payload;
    const auto obj = lenient::find_first(raw, lenient::Want::object, [&](const json& j) {
        const json* s = find_key(j, "summary");
        auto instruction = as_text(find_key(j, "instruction"));
        if (s == nullptr || !instruction || instruction->empty()) return false;
        std::string summary;
        if (s->is_array()) {
            for (const auto& item : *s) {
                if (!item.is_string()) return false;
                const std::string line = utf8::trim(item.get<std::string>());
                if (line.empty()) continue;
                if (!summary.empty()) summary += '\n';
                summary += line;
            }
        } else if (auto text = as_text(s)) {
            summary = *text;
        } else {
            return false;
        }
        if (summary.empty()) return false;
        payload = {summary, *instruction};
        return true;
    });
    if (!obj) throw ParseError("no dictionary with `summary` and `instruction` found", raw);
    return payload;
}

ConversationPair parse_conversation(const std::string& raw) {
    const std::string text = clean_markup(raw);
    const auto inputs = find_markers(text, {"Input:"});
    const auto outputs = find_markers(text, {"Output:"});
    if (inputs.empty() || outputs.empty()) throw ParseError("missing Input:/Output: markers", raw);
    if (inputs.size() > 1 || outputs.size() > 1) {
        throw ParseError("more than one input-output pair", raw);
    }
    const std::size_t in_end = inputs[0].first + inputs[0].second;
    if (outputs[0].first < in_end) throw ParseError("Output: precedes Input:", raw);
    ConversationPair pair;
    pair.input = utf8::trim(std::string_view(text).substr(in_end, outputs[0].first - in_end));
    pair.output = utf8::trim(std::string_view(text).substr(outputs[0].first + outputs[0].second));
    if (pair.input.empty() || pair.output.empty()) throw ParseError("empty conversation turn", raw);
    return pair;
}

std::string find_ordinal_reference(const std::string& text) {
    for (std::string_view phrase : kThaiOrdinals) {
        if (text.find(phrase) != std::string::npos) return std::string(phrase);
    }
    if (auto th = find_thai_letter_reference(text); !th.empty()) return th;
    for (const auto& p : english_ordinals()) {
        std::smatch m;
        if (std::regex_search(text, m, p.re)) return m.str(0);
    }
    return {};
}

std::string correct_answer_segment(const std::string& answer_text) {
    const auto hits = find_markers(
        answer_text, {"correct answer", "the answer is", "answer is", "answer:", "คำตอบที่ถูกต้อง",
                      "คำตอบคือ", "คำตอบ:", "คำตอบ :", "เฉลย"});
    if (!hits.empty()) {
        std::string seg = answer_text.substr(hits.back().first + hits.back().second);
        // Glue words between the marker and the answer itself.
        bool changed = true;
        while (changed) {
            changed = false;
            seg = utf8::trim(seg);
            for (std::string_view glue : {":", "：", "คือ", "is", "-", "=", "ได้แก่"}) {
                if (seg.compare(0, glue.size(), glue) == 0) {
                    seg.erase(0, glue.size());
                    changed = true;
                }
            }
        }
        if (!seg.empty()) return seg;
    }
    std::string last;
    std::size_t pos = 0;
    while (pos <= answer_text.size()) {
        std::size_t eol = answer_text.find('\n', pos);
        if (eol == std::string::npos) eol = answer_text.size();
        std::string line = utf8::trim(std::string_view(answer_text).substr(pos, eol - pos));
        if (!line.empty()) last = std::move(line);
        pos = eol + 1;
    }
    return last.empty() ? utf8::trim(answer_text) : last;
}

McQuestion parse_multiple_choice(const std::string& raw) {
    const std::string text = clean_markup(raw);
    const auto questions = find_markers(text, {"Question:"});
    if (questions.empty()) throw ParseError("missing Question: marker", raw);
    if (questions.size() > 1) throw ParseError("more than one question", raw);
    const std::size_t q_end = questions[0].first + questions[0].second;

    std::optional<std::pair<std::size_t, std::size_t>> choices_hit;
    for (const auto& h : find_markers(text, {"Choices:", "ตัวเลือก:"})) {
        if (h.first >= q_end) {
            choices_hit = h;
            break;
        }
    }
    if (!choices_hit) throw ParseError("missing Choices: marker", raw);
    const std::size_t c_end = choices_hit->first + choices_hit->second;

    std::optional<std::pair<std::size_t, std::size_t>> answer_hit;
    for (const auto& h : find_markers(text, {"Answer:", "คำตอบ:"})) {
        if (h.first >= c_end) {
            answer_hit = h;
            break;
        }
    }
    if (!answer_hit) throw ParseError("missing Answer: marker", raw);

    McQuestion q;
    q.question = utf8::trim(std::string_view(text).substr(q_end, choices_hit->first - q_end));
    q.choices = split_choices(text.substr(c_end, answer_hit->first - c_end));
    q.answer_text = utf8::trim(std::string_view(text).substr(answer_hit->first + answer_hit->second));
    if (q.question.empty()) throw ParseError("empty question", raw);
    if (q.answer_text.empty()) throw ParseError("empty answer", raw);
    if (q.choices.size() < 2) throw ParseError("fewer than 2 choices", raw);
    std::unordered_set<std::string> distinct;
    for (const auto& c : q.choices) {
        if (c.empty()) throw ParseError("empty choice", raw);
        if (!distinct.insert(normalize_choice_text(c)).second) throw ParseError("duplicate choice", raw);
    }

    const std::string segment = correct_answer_segment(q.answer_text);
    for (const auto& c : q.choices) {
        if (auto hit = find_ordinal_reference(c); !hit.empty()) {
            throw ValidationError("choice uses ordinal reference '" + hit + "'", raw);
        }
    }
    if (auto hit = find_ordinal_reference(segment); !hit.empty()) {
        throw ValidationError("answer uses ordinal reference '" + hit + "'", raw);
    }

    const std::string seg_key = normalize_choice_text(segment);
    std::optional<std::size_t> best;
    std::size_t best_len = 0;
    for (std::size_t i = 0; i < q.choices.size(); ++i) {
        std::string key = normalize_choice_text(q.choices[i]);
        while (!key.empty() && (key.back() == '.' || key.back() == ',')) key.pop_back();
        if (key.empty() || seg_key.find(key) == std::string::npos) continue;
        if (!best || key.size() > best_len) {
            best = i;
            best_len = key.size();
        }
    }
    if (!best) throw ParseError("correct choice not found in answer", raw);
    q.correct_index = *best;
    return q;
}

McQuestion shuffle_choices(const McQuestion& q, Rng& rng) {
    q.validate();
    std::vector<std::size_t> perm(q.choices.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(perm));
    McQuestion out = q;
    for (std::size_t i = 0; i < perm.size(); ++i) {
        out.choices[i] = q.choices[perm[i]];
        if (perm[i] == q.correct_index) out.correct_index = i;
    }
    return out;
}

std::string render_mc_instruction(const McQuestion& q) {
    if (utf8::trim(q.question).empty()) throw PreconditionError("render: empty question");
    std::string out = q.question;
    for (const auto& c : q.choices) out += "\n- " + c;
    return out;
}

std::pair<std::string, std::vector<std::string>> parse_rendered_choices(const std::string& instruction) {
    // Choices are the trailing run of "- " lines.
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos <= instruction.size()) {
        std::size_t eol = instruction.find('\n', pos);
        if (eol == std::string::npos) eol = instruction.size();
        lines.push_back(instruction.substr(pos, eol - pos));
        pos = eol + 1;
    }
    std::size_t first = lines.size();
    while (first > 0 && lines[first - 1].rfind("- ", 0) == 0) --first;
    if (first == 0 || first == lines.size()) {
        throw ParseError("no rendered choice list", instruction);
    }
    std::string question = lines[0];
    for (std::size_t i = 1; i < first; ++i) question += "\n" + lines[i];
    std::vector<std::string> choices;
    for (std::size_t i = first; i < lines.size(); ++i) choices.push_back(lines[i].substr(2));
    return {question, choices};
}

double TaskSettings::temperature(TaskKind t) const {
    switch (t) {
        case TaskKind::closed_qa: return closed_qa_temperature;
        case TaskKind::summarization: return summarization_temperature;
        case TaskKind::conversation: return conversation_temperature;
        case TaskKind::multiple_choice: return multiple_choice_temperature;
    }
    return conversation_temperature;
}

void TaskOutcome::append(TaskOutcome&& other) {
    for (auto& r : other.records) records.push_back(std::move(r));
    for (auto& f : other.failures) failures.push_back(std::move(f));
    calls += other.calls;
}

std::string describe_source(const ContextDoc& ctx) {
    if (ctx.source.kind == ContextSourceKind::wiki) {
        return "wiki:" + ctx.source.title + "#" + std::to_string(ctx.source.section_index);
    }
    return "generated:" + ctx.source.style;
}

namespace {

template <typename T>
struct Attempt {
    std::optional<T> value;
    Provenance provenance;
    std::string raw;
    std::string reason;
    int calls = 0;
};

template <typename T, typename Parse>
Attempt<T> attempt_task(Gateway& gateway, const std::string& prompt, TaskKind task,
                        const TaskSettings& settings, std::uint64_t seed, const std::string& path,
                        Parse&& parse) {
    Attempt<T> out;
    const double temperature = settings.temperature(task);
    for (int a = 0; a < std::max(1, settings.attempts); ++a) {
        GenRequest req;
        req.prompt = prompt;
        req.temperature = temperature;
        req.max_tokens = settings.max_tokens;
        req.seed = derive_seed(seed, "attempt", static_cast<std::uint64_t>(a));
        ++out.calls;
        out.raw = gateway.complete(req);
        try {
            out.value = parse(out.raw);
            out.provenance = {temperature, *req.seed, sha256_hex(prompt),
                              path + "/a" + std::to_string(a)};
            return out;
        } catch (const ParseError& e) {
            out.reason = e.what();
        }
    }
    return out;
}

InstructionRecord base_record(TaskKind task, const Topic& topic, const TaskSettings& settings) {
    InstructionRecord r;
    r.task = task;
    r.topic = topic;
    r.language = settings.language;
    r.lineage = {"generated"};
    return r;
}

std::string record_id(const std::string& prefix, TaskKind task, std::size_t k) {
    return prefix + "-" + std::string(to_string(task)) + "-" + std::to_string(k);
}

void require_context(const ContextDoc& ctx, const char* op) {
    if (utf8::trim(ctx.body).empty()) throw PreconditionError(std::string(op) + ": empty context");
}

GenerationFailure failure(const std::string& prefix, TaskKind task, const std::string& reason,
                          const std::string& raw) {
    return {record_id(prefix, task, 0), task, reason, raw};
}

}  // namespace

TaskOutcome gen_closed_qa(const ContextDoc& ctx, Gateway& gateway, const TaskSettings& settings,
                          std::uint64_t seed, const std::string& id_prefix) {
    require_context(ctx, "gen_closed_qa");
    const std::string prompt = settings.closed_qa_pairs == prompts::kClosedQaPairs
                                   ? prompts::closed_qa_prompt(ctx.body)
                                   : replace_all(prompts::closed_qa_prompt(ctx.body), "Generate 5 ",
                                                 "Generate " + std::to_string(settings.closed_qa_pairs) + " ");
    const std::size_t want = static_cast<std::size_t>(settings.closed_qa_pairs);
    auto result = attempt_task<std::vector<QaPair>>(
        gateway, prompt, TaskKind::closed_qa, settings, seed, id_prefix + "/closed_qa",
        [&](const std::string& raw) {
            auto pairs = parse_closed_qa(raw);
            if (pairs.size() != want) {
                throw ParseError("expected " + std::to_string(want) + " pairs, got " +
                                     std::to_string(pairs.size()),
                                 raw);
            }
            return pairs;
        });
    TaskOutcome out;
    out.calls = static_cast<std::uint64_t>(result.calls);
    if (!result.value) {
        out.failures.push_back(failure(id_prefix, TaskKind::closed_qa, result.reason, result.raw));
        return out;
    }
    for (std::size_t k = 0; k < result.value->size(); ++k) {
        auto r = base_record(TaskKind::closed_qa, ctx.topic, settings);
        r.id = record_id(id_prefix, TaskKind::closed_qa, k);
        r.instruction = (*result.value)[k].question;
        r.context = ctx.body;
        r.output = (*result.value)[k].answer;
        r.provenance = result.provenance;
        r.context_source = describe_source(ctx);
        out.records.push_back(std::move(r));
    }
    return out;
}

TaskOutcome gen_summarization(const ContextDoc& ctx, Gateway& gateway, Rng& rng,
                              const TaskSettings& settings, std::uint64_t seed,
                              const std::string& id_prefix) {
    require_context(ctx, "gen_summarization");
    const std::string style(prompts::kSummaryStyles[rng.uniform_index(prompts::kSummaryStyles.size())]);
    const std::string prompt = prompts::summarization_prompt(style, ctx.topic.text, ctx.body);
    auto result = attempt_task<SummaryPayload>(gateway, prompt, TaskKind::summarization, settings,
                                               seed, id_prefix + "/summarization",
                                               [](const std::string& raw) {
                                                   return parse_summarization(raw);
                                               });
    TaskOutcome out;
    out.calls = static_cast<std::uint64_t>(result.calls);
    if (!result.value) {
        out.failures.push_back(failure(id_prefix, TaskKind::summarization, result.reason, result.raw));
        return out;
    }
    auto r = base_record(TaskKind::summarization, ctx.topic, settings);
    r.id = record_id(id_prefix, TaskKind::summarization, 0);
    r.instruction = result.value->instruction;
    r.context = ctx.body;
    r.output = result.value->summary;
    r.provenance = result.provenance;
    r.provenance.seed_path += ":style=" + style;
    r.context_source = describe_source(ctx);
    out.records.push_back(std::move(r));
    return out;
}

TaskOutcome gen_conversation(const Topic& topic, Gateway& gateway, const TaskSettings& settings,
                             std::uint64_t seed, const std::string& id_prefix) {
    if (utf8::trim(topic.text).empty()) throw PreconditionError("gen_conversation: empty topic");
    const std::string prompt = prompts::conversation_prompt(topic.text);
    auto result = attempt_task<ConversationPair>(gateway, prompt, TaskKind::conversation, settings,
                                                 seed, id_prefix + "/conversation",
                                                 [](const std::string& raw) {
                                                     return parse_conversation(raw);
                                                 });
    TaskOutcome out;
    out.calls = static_cast<std::uint64_t>(result.calls);
    if (!result.value) {
        out.failures.push_back(failure(id_prefix, TaskKind::conversation, result.reason, result.raw));
        return out;
    }
    auto r = base_record(TaskKind::conversation, topic, settings);
    r.id = record_id(id_prefix, TaskKind::conversation, 0);
    r.instruction = result.value->input;
    r.output = result.value->output;
    r.provenance = result.provenance;
    out.records.push_back(std::move(r));
    return out;
}

InstructionRecord mc_to_record(const McQuestion& q, const ContextDoc& ctx) {
    InstructionRecord r;
    r.task = TaskKind::multiple_choice;
    r.instruction = render_mc_instruction(q);
    r.context = ctx.body;
    r.output = q.answer_text;
    r.topic = ctx.topic;
    r.lineage = {"generated"};
    r.context_source = describe_source(ctx);
    return r;
}

TaskOutcome gen_multiple_choice(const ContextDoc& ctx, Gateway& gateway, Rng& rng,
                                const TaskSettings& settings, std::uint64_t seed,
                                const std::string& id_prefix) {
    require_context(ctx, "gen_multiple_choice");
    const std::string prompt = prompts::multiple_choice_prompt(ctx.body);
    auto result = attempt_task<McQuestion>(gateway, prompt, TaskKind::multiple_choice, settings,
                                           seed, id_prefix + "/multiple_choice",
                                           [](const std::string& raw) {
                                               return parse_multiple_choice(raw);
                                           });
    TaskOutcome out;
    out.calls = static_cast<std::uint64_t>(result.calls);
    if (!result.value) {
        out.failures.push_back(
            failure(id_prefix, TaskKind::multiple_choice, result.reason, result.raw));
        return out;
    }
    const McQuestion shuffled = shuffle_choices(*result.value, rng);
    auto r = mc_to_record(shuffled, ctx);
    r.id = record_id(id_prefix, TaskKind::multiple_choice, 0);
    r.language = settings.language;
    r.provenance = result.provenance;
    r.provenance.seed_path += ":correct=" + std::to_string(shuffled.correct_index);
    out.records.push_back(std::move(r));
    return out;
}

TaskOutcome generate_for_context(const ContextDoc& ctx, const std::vector<TaskKind>& tasks,
                                 Gateway& gateway, const TaskSettings& settings,
                                 std::uint64_t seed, const std::string& id_prefix) {
    TaskOutcome out;
    for (TaskKind task : tasks) {
        const std::uint64_t task_seed = derive_seed(seed, to_string(task));
        Rng rng(derive_seed(task_seed, "draws"));
        switch (task) {
            case TaskKind::closed_qa:
                out.append(gen_closed_qa(ctx, gateway, settings, task_seed, id_prefix));
                break;
            case TaskKind::summarization:
                out.append(gen_summarization(ctx, gateway, rng, settings, task_seed, id_prefix));
                break;
            case TaskKind::conversation:
                out.append(gen_conversation(ctx.topic, gateway, settings, task_seed, id_prefix));
                break;
            case TaskKind::multiple_choice:
                out.append(gen_multiple_choice(ctx, gateway, rng, settings, task_seed, id_prefix));
                break;
        }
    }
    return out;
}

TaskOutcome generate_instructions(const std::vector<ContextDoc>& contexts,
                                  const std::vector<TaskKind>& tasks, Gateway& gateway,
                                  const TaskSettings& settings, std::uint64_t seed,
                                  const std::string& id_tag) {
    const std::uint64_t base = derive_seed(seed, "instructions" + id_tag);
    auto parts = parallel_map<TaskOutcome>(
        contexts.size(), gateway.budget().max_concurrent, [&](std::size_t i) {
            char prefix[32];
            std::snprintf(prefix, sizeof prefix, "c%04zu", i);
            return generate_for_context(contexts[i], tasks, gateway, settings,
                                        derive_seed(base, "context", i), id_tag + prefix);
        });
    TaskOutcome out;
    for (auto& p : parts) out.append(std::move(p));
    return out;
}

}  // namespace seedforge
