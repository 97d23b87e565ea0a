#pragma once

// Property-controlled dataset variants. Each builder records what it did in
// a Recipe, and the F/C/D flags are computed from that recipe.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "seedforge/diversity/dedup.hpp"
#include "seedforge/gateway/gateway.hpp"
#include "seedforge/pipeline/contexts.hpp"
#include "seedforge/pipeline/instructions.hpp"
#include "seedforge/pipeline/topics.hpp"
#include "seedforge/types.hpp"

namespace seedforge {

inline constexpr std::size_t kDatasetSize = 5000;
inline constexpr int kFullCulturalTopics = 400;
inline constexpr int kFullGeneralTopics = 300;
inline constexpr int kFluencyTopics = 10;
inline constexpr int kDiversityTopics = 750;
inline constexpr std::size_t kSampledOriginals = 1000;
inline constexpr int kParaphrasesPerSample = 4;

enum class Variant { full, fluency, diversity, culture, none };

std::string_view to_string(Variant v) noexcept;
Variant variant_from_string(std::string_view s);

// Stage output store for resumable builds. Keys are content hashes of a
// stage's inputs, so a hit means the stage already ran on identical input.
class Checkpoints {
public:
    virtual ~Checkpoints() = default;
    virtual std::optional<nlohmann::json> load(const std::string& key) = 0;
    virtual void save(const std::string& key, const nlohmann::json& value) = 0;
};

struct BuildSettings {
    TopicGenConfig topics;
    ContextPolicy context;
    TaskSettings tasks;
    std::vector<TaskKind> task_kinds{std::begin(kAllTasks), std::end(kAllTasks)};
    DedupConfig dedup;
    std::string pivot = "en";
    int paraphrases = kParaphrasesPerSample;
    // Extra generation rounds allowed when a build falls short of its size.
    int max_extension_rounds = 8;
    // Optional; generated builds then reuse finished stages. `fingerprint`
    // must change whenever anything outside the stage inputs would change
    // the output (provider choice, prompts, settings).
    Checkpoints* checkpoints = nullptr;
    std::string fingerprint;
};

struct Recipe {
    Variant variant = Variant::full;
    int cultural_topics = 0;  // requested in the first round
    int general_topics = 0;
    // Diversity control applied to the emitted set.
    bool dedup = false;
    double dedup_threshold = 0.0;
    // Degrading transforms applied to every emitted record, in order.
    std::vector<std::string> transforms;
    // How a short build was topped up: "topics" or "context_rounds".
    std::string extension;
    int extension_rounds = 0;
    std::size_t sampled = 0;
    int paraphrases = 0;
    std::string source;  // upstream dataset for derived variants

    nlohmann::json to_json() const;
    static Recipe from_json(const nlohmann::json& j);
};

// fluency: no degrading transform; culture: cultural topics upstream;
// diversity: dedup applied to the emitted set.
PropertyFlags flags_from_recipe(const Recipe& r);

struct SkippedRecord {
    std::string id;
    std::string reason;

    bool operator==(const SkippedRecord&) const = default;
};

struct DatasetManifest {
    std::vector<InstructionRecord> records;
    PropertyFlags flags;
    std::size_t target_size = 0;
    Recipe recipe;
    std::uint64_t seed = 0;
    RemovalLog removals;
    std::vector<GenerationFailure> failures;
    std::vector<SkippedRecord> skipped;
};

// Translates instruction, context and output to `pivot` and back to the
// record's language; appends "round_trip(<lang>><pivot>><lang>)".
InstructionRecord round_trip_translate(const InstructionRecord& record, Gateway& gateway,
                                       const std::string& pivot = "en");

// Generated builds (full, fluency, diversity) run as named stages; a failure
// inside one is thrown as StageError with the cause nested.

// F+ C+ D+: cultural and general topics, full pipeline, dedup.
DatasetManifest build_full(Gateway& gateway, std::uint64_t seed, std::size_t size = kDatasetSize,
                           const BuildSettings& settings = {}, int cultural = kFullCulturalTopics,
                           int general = kFullGeneralTopics);

// F+ C- D-: a handful of general topics, no dedup. Shortfalls are made up
// with further context rounds on the same topics.
DatasetManifest build_fluency_only(Gateway& gateway, std::uint64_t seed,
                                   std::size_t size = kDatasetSize,
                                   const BuildSettings& settings = {}, int topics = kFluencyTopics);

// F- C- D+: general topics, dedup, then a round trip through the pivot.
DatasetManifest build_diversity_only(Gateway& gateway, std::uint64_t seed,
                                     std::size_t size = kDatasetSize,
                                     const BuildSettings& settings = {},
                                     int topics = kDiversityTopics);

// F- C+ D-: samples from a full build, translates to the pivot, adds
// paraphrases and translates everything back. Output size is
// sample * (1 + paraphrases).
DatasetManifest build_culture_only(const DatasetManifest& full, Gateway& gateway,
                                   std::uint64_t seed, std::size_t sample = kSampledOriginals,
                                   const BuildSettings& settings = {});

// F- C- D-: samples an external corpus, adds paraphrases in its language and
// translates everything to `target_language`.
DatasetManifest build_no_properties(const std::vector<InstructionRecord>& external, Gateway& gateway,
                                    std::uint64_t seed, std::size_t sample = kSampledOriginals,
                                    const BuildSettings& settings = {},
                                    const std::string& target_language = "th");

// Reads an instruction corpus in JSON Lines. Accepts chat rows with a
// `messages` list (first user turn and the assistant reply after it) and
// flat rows with instruction/prompt plus output/response. Every row becomes
// a conversation record in `language`. Throws FormatError with the line
// number for rows without a usable reply.
std::vector<InstructionRecord> read_external_corpus(const std::string& path,
                                                    const std::string& language = "en");

}  // namespace seedforge
