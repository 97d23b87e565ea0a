#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "seedforge/gateway/gateway.hpp"
#include "seedforge/types.hpp"
#include "seedforge/util/rng.hpp"

namespace seedforge {

struct QaPair {
    std::string question;
    std::string answer;
    bool operator==(const QaPair&) const = default;
};

struct SummaryPayload {
    std::string summary;
    std::string instruction;
    bool operator==(const SummaryPayload&) const = default;
};

struct ConversationPair {
    std::string input;
    std::string output;
    bool operator==(const ConversationPair&) const = default;
};

struct McQuestion {
    std::string question;
    std::vector<std::string> choices;
    // Explanation + reasoning + correct answer, as generated.
    std::string answer_text;
    std::size_t correct_index = 0;

    // Throws PreconditionError when the invariants do not hold.
    void validate() const;
    bool operator==(const McQuestion&) const = default;
};

// ---- parsers: each returns a complete value or throws ParseError ----

// First list of {question, answer} dictionaries (keys matched
// case-insensitively). Does not enforce a count.
std::vector<QaPair> parse_closed_qa(const std::string& raw);

// First dictionary carrying both `summary` and `instruction`. A list-valued
// summary is joined one item per line.
SummaryPayload parse_summarization(const std::string& raw);

// Exactly one "Input: ... Output: ..." pair; <format> tags are ignored.
ConversationPair parse_conversation(const std::string& raw);

// Question / dash-prefixed Choices / Answer blocks. The correct choice is the
// longest choice text found in the answer's correct-answer segment (earliest
// on ties). Throws ValidationError when a choice or the correct-answer
// segment relies on ordinal references.
McQuestion parse_multiple_choice(const std::string& raw);

// The part of an answer that names the correct choice: text after the last
// "correct answer" marker, else the last non-empty line, else everything.
std::string correct_answer_segment(const std::string& answer_text);

// Matched ordinal phrase ("all of the above", "ข้อแรก", ...), or empty.
std::string find_ordinal_reference(const std::string& text);

// ---- choice handling ----

McQuestion shuffle_choices(const McQuestion& q, Rng& rng);

// question, newline, then one "- choice" line per choice.
std::string render_mc_instruction(const McQuestion& q);
// Inverse of render_mc_instruction.
std::pair<std::string, std::vector<std::string>> parse_rendered_choices(const std::string& instruction);

// ---- generation ----

struct TaskSettings {
    double closed_qa_temperature = 0.35;
    double summarization_temperature = 0.35;
    double conversation_temperature = 0.8;
    double multiple_choice_temperature = 0.4;
    int closed_qa_pairs = 5;
    int max_tokens = 2048;
    std::string language = "th";
    // One retry after the first malformed reply.
    int attempts = 2;

    double temperature(TaskKind t) const;
};

struct TaskOutcome {
    std::vector<InstructionRecord> records;
    std::vector<GenerationFailure> failures;
    std::uint64_t calls = 0;

    void append(TaskOutcome&& other);
};

// `id_prefix` identifies the context/topic unit ("t0007"); record ids are
// "<prefix>-<task>-<k>". Seeds derive from `seed`.
TaskOutcome gen_closed_qa(const ContextDoc& ctx, Gateway& gateway, const TaskSettings& settings,
                          std::uint64_t seed, const std::string& id_prefix);
TaskOutcome gen_summarization(const ContextDoc& ctx, Gateway& gateway, Rng& rng,
                              const TaskSettings& settings, std::uint64_t seed,
                              const std::string& id_prefix);
TaskOutcome gen_conversation(const Topic& topic, Gateway& gateway, const TaskSettings& settings,
                             std::uint64_t seed, const std::string& id_prefix);
// Parses, shuffles with `rng`, and renders the record.
TaskOutcome gen_multiple_choice(const ContextDoc& ctx, Gateway& gateway, Rng& rng,
                                const TaskSettings& settings, std::uint64_t seed,
                                const std::string& id_prefix);

InstructionRecord mc_to_record(const McQuestion& q, const ContextDoc& ctx);

// All requested tasks for one context, in task order. Conversation uses the
// context's topic only.
TaskOutcome generate_for_context(const ContextDoc& ctx, const std::vector<TaskKind>& tasks,
                                 Gateway& gateway, const TaskSettings& settings,
                                 std::uint64_t seed, const std::string& id_prefix);

// Every context in parallel; output ordered by context index. Record ids
// start with `id_tag` so later rounds sort after earlier ones.
TaskOutcome generate_instructions(const std::vector<ContextDoc>& contexts,
                                  const std::vector<TaskKind>& tasks, Gateway& gateway,
                                  const TaskSettings& settings, std::uint64_t seed,
                                  const std::string& id_tag = "");

// "wiki:<title>#<section>" or "generated:<style>".
std::string describe_source(const ContextDoc& ctx);

}  // namespace seedforge
