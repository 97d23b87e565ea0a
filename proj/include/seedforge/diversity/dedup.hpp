#pragma once

// Semantic near-duplicate removal over embedded records.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "seedforge/diversity/index.hpp"
#include "seedforge/gateway/gateway.hpp"
#include "seedforge/types.hpp"

namespace seedforge {

enum class DedupMode {
    // Walk records in id order; drop a record whose nearest surviving
    // earlier record is more similar than the threshold.
    keep_first,
    // Drop every record whose nearest neighbor in the whole input exceeds
    // the threshold. Both members of a near-duplicate pair go.
    full_set,
};

struct DedupConfig {
    double threshold = 0.95;  // removal needs similarity strictly above this
    // Unset: exact search up to exact_fallback_limit records, HNSW beyond.
    std::optional<IndexKind> index_kind;
    std::size_t exact_fallback_limit = 50000;
    DedupMode mode = DedupMode::keep_first;

    void validate() const;
    IndexKind index_for(std::size_t n) const;
};

struct Removal {
    std::string record_id;
    std::string nearest_id;
    double similarity = 0.0;

    bool operator==(const Removal&) const = default;
};

struct RemovalLog {
    std::vector<Removal> removed;
};

// instruction, context and output joined by single newlines; an absent
// context contributes an empty line.
std::string sample_text(const InstructionRecord& r);

struct DedupDecision {
    std::vector<std::size_t> kept;  // positions in the input, ascending
    // (removed position, nearest position, similarity), in decision order
    std::vector<std::tuple<std::size_t, std::size_t, double>> removed;
};

// Core pass over vectors already in decision order. Throws ProtocolError on
// dimension drift.
DedupDecision dedup_vectors(std::span<const EmbeddingVector> vectors, const DedupConfig& cfg);

struct DedupResult {
    std::vector<InstructionRecord> kept;  // input order
    RemovalLog log;
};

// Embeds sample_text of every record through the gateway and filters them.
// Decisions are made in record-id order.
DedupResult dedup_filter(std::span<const InstructionRecord> records, const DedupConfig& cfg,
                         Gateway& gw);

}  // namespace seedforge
