#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace seedforge {

enum class TopicCategory { general, cultural };

std::string_view to_string(TopicCategory c) noexcept;
TopicCategory topic_category_from_string(std::string_view s);

// Generation metadata attached to anything that came out of a model call.
struct Provenance {
    double temperature = 0.0;
    std::uint64_t seed = 0;
    std::string prompt_hash;  // sha256 of the rendered prompt
    std::string seed_path;    // human-readable derivation of `seed`

    bool operator==(const Provenance&) const = default;
};

struct Topic {
    std::string text;
    TopicCategory category = TopicCategory::general;
    std::int64_t batch_id = 0;
    Provenance provenance;

    bool operator==(const Topic&) const = default;
};

enum class ContextSourceKind { wiki, generated };

struct ContextSource {
    ContextSourceKind kind = ContextSourceKind::generated;
    // wiki
    std::string title;
    std::string section;  // heading; empty for the lead section
    std::int64_t page_id = 0;
    int section_index = 0;
    // generated
    std::string style;

    bool operator==(const ContextSource&) const = default;
};

struct ContextDoc {
    std::string body;
    ContextSource source;
    Topic topic;
    std::int64_t topic_index = 0;
    // True when a wiki draw fell back to a generated context.
    bool fallback = false;
    std::string rng_path;
    Provenance provenance;  // set for generated contexts

    bool operator==(const ContextDoc&) const = default;
};

enum class TaskKind { closed_qa, summarization, conversation, multiple_choice };

std::string_view to_string(TaskKind t) noexcept;
TaskKind task_kind_from_string(std::string_view s);
inline constexpr TaskKind kAllTasks[] = {TaskKind::closed_qa, TaskKind::summarization,
                                         TaskKind::conversation, TaskKind::multiple_choice};

struct PropertyFlags {
    bool fluency = false;
    bool culture = false;
    bool diversity = false;

    bool operator==(const PropertyFlags&) const = default;
};

// "F+ C- D+" style label.
std::string flags_label(const PropertyFlags& f);

struct InstructionRecord {
    std::string id;
    TaskKind task = TaskKind::conversation;
    std::string instruction;
    std::optional<std::string> context;
    std::string output;
    Topic topic;
    std::string language;
    // Ordered transform chain, e.g. {"generated", "translate(th>en)", ...}.
    std::vector<std::string> lineage;
    std::optional<PropertyFlags> flags;
    Provenance provenance;
    // Where the context came from, for traceability ("wiki:<title>#<n>",
    // "generated:<style>" or empty for context-free tasks).
    std::string context_source;

    bool operator==(const InstructionRecord&) const = default;
};

// A task call that produced no usable output after its retry.
struct GenerationFailure {
    std::string id;
    TaskKind task = TaskKind::conversation;
    std::string reason;
    std::string raw;

    bool operator==(const GenerationFailure&) const = default;
};

}  // namespace seedforge
