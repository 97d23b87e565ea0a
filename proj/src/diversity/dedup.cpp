#include "seedforge/diversity/dedup.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "seedforge/errors.hpp"
#include "seedforge/util/parallel.hpp"

namespace seedforge {

namespace {

constexpr std::size_t kEmbedChunk = 256;

}  // namespace

void DedupConfig::validate() const {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw ConfigError("dedup.threshold", "must be in (0, 1], got " + std::to_string(threshold));
    }
    if (exact_fallback_limit == 0) {
        throw ConfigError("dedup.exact_fallback_limit", "must be positive");
    }
}

IndexKind DedupConfig::index_for(std::size_t n) const {
    if (index_kind) return *index_kind;
    return n <= exact_fallback_limit ? IndexKind::exact : IndexKind::approximate;
}

std::string sample_text(const InstructionRecord& r) {
    return r.instruction + "\n" + r.context.value_or("") + "\n" + r.output;
}

DedupDecision dedup_vectors(std::span<const EmbeddingVector> vectors, const DedupConfig& cfg) {
    cfg.validate();
    DedupDecision out;
    if (vectors.empty()) return out;
    const std::size_t dim = vectors.front().dimension();
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i].dimension() != dim) {
            throw ProtocolError("embedding " + std::to_string(i) + " has dimension " +
                                std::to_string(vectors[i].dimension()) + ", expected " +
                                std::to_string(dim));
        }
    }
    auto index = make_index(cfg.index_for(vectors.size()));

    if (cfg.mode == DedupMode::full_set) {
        for (const auto& v : vectors) index->add(v.values);
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            const auto nb = index->nearest(vectors[i].values, i);
            if (nb && nb->similarity > cfg.threshold) {
                out.removed.emplace_back(i, nb->id, nb->similarity);
            } else {
                out.kept.push_back(i);
            }
        }
        return out;
    }

    // The index holds only survivors; index ids map back to input positions.
    std::vector<std::size_t> position;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        const auto nb = index->nearest(vectors[i].values);
        if (nb && nb->similarity > cfg.threshold) {
            out.removed.emplace_back(i, position[nb->id], nb->similarity);
            continue;
        }
        index->add(vectors[i].values);
        position.push_back(i);
        out.kept.push_back(i);
    }
    return out;
}

DedupResult dedup_filter(std::span<const InstructionRecord> records, const DedupConfig& cfg,
                         Gateway& gw) {
    cfg.validate();
    if (records.empty()) throw PreconditionError("dedup_filter: no records");

    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return records[a].id < records[b].id; });
    {
        std::unordered_set<std::string> seen;
        for (const auto& r : records) {
            if (!seen.insert(r.id).second) {
                throw PreconditionError("dedup_filter: duplicate record id " + r.id);
            }
        }
    }

    std::vector<std::string> texts;
    texts.reserve(records.size());
    for (std::size_t i : order) texts.push_back(sample_text(records[i]));

    const std::size_t chunks = (texts.size() + kEmbedChunk - 1) / kEmbedChunk;
    auto parts = parallel_map<std::vector<EmbeddingVector>>(
        chunks, gw.budget().max_concurrent, [&](std::size_t c) {
            const std::size_t begin = c * kEmbedChunk;
            const std::size_t n = std::min(kEmbedChunk, texts.size() - begin);
            return gw.embed(std::span<const std::string>(texts).subspan(begin, n));
        });
    std::vector<EmbeddingVector> vectors;
    vectors.reserve(texts.size());
    for (auto& p : parts) {
        for (auto& v : p) vectors.push_back(std::move(v));
    }

    const DedupDecision d = dedup_vectors(vectors, cfg);
    DedupResult out;
    std::vector<bool> keep(records.size(), false);
    for (std::size_t k : d.kept) keep[order[k]] = true;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (keep[i]) out.kept.push_back(records[i]);
    }
    for (const auto& [r, nb, s] : d.removed) {
        out.log.removed.push_back({records[order[r]].id, records[order[nb]].id, s});
    }
    return out;
}

}  // namespace seedforge
