#include "seedforge/diversity/index.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_set>

#include "seedforge/errors.hpp"
#include "seedforge/simd/similarity.hpp"
#include "seedforge/util/hash.hpp"

namespace seedforge {

namespace {

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

double checked_norm(std::span<const float> v) {
    const double n = std::sqrt(simd::squared_norm(v));
    if (!(n > 0.0)) throw UndefinedSimilarityError("cosine similarity undefined for a zero vector");
    return n;
}

void check_dimension(std::size_t& dim, std::size_t got) {
    if (got == 0) throw PreconditionError("embedding vector is empty");
    if (dim == 0) {
        dim = got;
    } else if (got != dim) {
        throw ProtocolError("embedding dimension " + std::to_string(got) + " differs from index dimension " +
                            std::to_string(dim));
    }
}

struct ByWorst {
    bool operator()(const Neighbor& a, const Neighbor& b) const {
        return a.similarity > b.similarity || (a.similarity == b.similarity && a.id < b.id);
    }
};

struct ByBest {
    bool operator()(const Neighbor& a, const Neighbor& b) const {
        return a.similarity < b.similarity || (a.similarity == b.similarity && a.id > b.id);
    }
};

bool better(const Neighbor& a, const Neighbor& b) { return ByBest{}(b, a); }

}  // namespace

double cosine(std::span<const float> u, std::span<const float> v) {
    if (u.size() != v.size()) {
        throw PreconditionError("cosine: dimensions differ (" + std::to_string(u.size()) + " vs " +
                                std::to_string(v.size()) + ")");
    }
    const double nu = checked_norm(u);
    const double nv = checked_norm(v);
    return clamp_unit(simd::dot(u, v) / (nu * nv));
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
    return cosine(std::span<const float>(u.values), std::span<const float>(v.values));
}

std::size_t ExactIndex::add(std::span<const float> v) {
    check_dimension(dim_, v.size());
    const double n = checked_norm(v);
    rows_.insert(rows_.end(), v.begin(), v.end());
    norms_.push_back(n);
    return norms_.size() - 1;
}

std::optional<Neighbor> ExactIndex::nearest(std::span<const float> query,
                                            std::optional<std::size_t> exclude) const {
    if (norms_.empty()) return std::nullopt;
    if (query.size() != dim_) throw ProtocolError("query dimension differs from index dimension");
    const double qn = checked_norm(query);
    std::vector<double> dots(norms_.size());
    simd::dot_many(query, rows_, dim_, dots);
    std::optional<Neighbor> best;
    for (std::size_t i = 0; i < dots.size(); ++i) {
        if (exclude && *exclude == i) continue;
        const Neighbor cand{i, clamp_unit(dots[i] / (qn * norms_[i]))};
        // Ties resolve to the lowest id.
        if (!best || cand.similarity > best->similarity) best = cand;
    }
    return best;
}

HnswIndex::HnswIndex(HnswParams params)
    : params_(params),
      level_mult_(1.0 / std::log(static_cast<double>(std::max<std::size_t>(params.m, 2)))),
      rng_state_(params.seed) {
    if (params_.m < 2) throw PreconditionError("hnsw: m must be at least 2");
}

std::span<const float> HnswIndex::row(std::size_t id) const {
    return std::span<const float>(rows_).subspan(id * dim_, dim_);
}

double HnswIndex::sim(std::span<const float> q, double q_norm, std::size_t id) const {
    return clamp_unit(simd::dot(q, row(id)) / (q_norm * norms_[id]));
}

std::size_t HnswIndex::greedy(std::span<const float> q, double q_norm, std::size_t entry, int from,
                              int to) const {
    std::size_t cur = entry;
    double cur_sim = sim(q, q_norm, cur);
    for (int layer = from; layer > to; --layer) {
        bool moved = true;
        while (moved) {
            moved = false;
            for (std::size_t nb : nodes_[cur].links[layer]) {
                const double s = sim(q, q_norm, nb);
                if (s > cur_sim) {
                    cur_sim = s;
                    cur = nb;
                    moved = true;
                }
            }
        }
    }
    return cur;
}

std::vector<Neighbor> HnswIndex::search_layer(std::span<const float> q, double q_norm,
                                              std::size_t entry, std::size_t ef, int layer) const {
    std::unordered_set<std::size_t> visited{entry};
    const Neighbor start{entry, sim(q, q_norm, entry)};
    std::priority_queue<Neighbor, std::vector<Neighbor>, ByBest> frontier;  // best on top
    std::priority_queue<Neighbor, std::vector<Neighbor>, ByWorst> found;    // worst on top
    frontier.push(start);
    found.push(start);
    while (!frontier.empty()) {
        const Neighbor c = frontier.top();
        frontier.pop();
        if (found.size() >= ef && c.similarity < found.top().similarity) break;
        for (std::size_t nb : nodes_[c.id].links[layer]) {
            if (!visited.insert(nb).second) continue;
            const Neighbor cand{nb, sim(q, q_norm, nb)};
            if (found.size() < ef || cand.similarity > found.top().similarity) {
                frontier.push(cand);
                found.push(cand);
                if (found.size() > ef) found.pop();
            }
        }
    }
    std::vector<Neighbor> out;
    out.reserve(found.size());
    while (!found.empty()) {
        out.push_back(found.top());
        found.pop();
    }
    std::reverse(out.begin(), out.end());  // best first
    return out;
}

// Neighbor selection heuristic: a candidate is linked only if it is closer
// to the base than to every neighbor already chosen, which keeps links
// spread across clusters. Remaining slots are filled by similarity.
std::vector<std::size_t> HnswIndex::select(std::vector<Neighbor> candidates,
                                           std::size_t limit) const {
    std::sort(candidates.begin(), candidates.end(), better);
    std::vector<std::size_t> chosen;
    std::vector<std::size_t> skipped;
    for (const auto& c : candidates) {
        if (chosen.size() >= limit) break;
        bool keep = true;
        for (std::size_t s : chosen) {
            if (sim(row(c.id), norms_[c.id], s) > c.similarity) {
                keep = false;
                break;
            }
        }
        (keep ? chosen : skipped).push_back(c.id);
    }
    for (std::size_t s : skipped) {
        if (chosen.size() >= limit) break;
        chosen.push_back(s);
    }
    return chosen;
}

void HnswIndex::connect(std::size_t id, const std::vector<Neighbor>& candidates, int layer) {
    const std::size_t limit = layer == 0 ? 2 * params_.m : params_.m;
    auto& mine = nodes_[id].links[layer];
    mine = select(candidates, limit);
    for (std::size_t nb : mine) {
        auto& theirs = nodes_[nb].links[layer];
        theirs.push_back(id);
        if (theirs.size() <= limit) continue;
        std::vector<Neighbor> pool;
        pool.reserve(theirs.size());
        for (std::size_t t : theirs) pool.push_back({t, sim(row(nb), norms_[nb], t)});
        theirs = select(std::move(pool), limit);
    }
}

std::size_t HnswIndex::add(std::span<const float> v) {
    check_dimension(dim_, v.size());
    const double n = checked_norm(v);
    const std::size_t id = norms_.size();
    rows_.insert(rows_.end(), v.begin(), v.end());
    norms_.push_back(n);

    rng_state_ = splitmix64(rng_state_);
    const double u = (static_cast<double>(rng_state_ >> 11) + 0.5) * 0x1.0p-53;
    const int level = static_cast<int>(std::floor(-std::log(u) * level_mult_));
    nodes_.push_back({std::vector<std::vector<std::size_t>>(static_cast<std::size_t>(level) + 1)});

    if (top_layer_ < 0) {
        entry_ = id;
        top_layer_ = level;
        return id;
    }
    const std::span<const float> q = row(id);
    std::size_t ep = greedy(q, n, entry_, top_layer_, level);
    for (int layer = std::min(level, top_layer_); layer >= 0; --layer) {
        auto cands = search_layer(q, n, ep, params_.ef_construction, layer);
        connect(id, cands, layer);
        ep = cands.front().id;
    }
    if (level > top_layer_) {
        top_layer_ = level;
        entry_ = id;
    }
    return id;
}

std::optional<Neighbor> HnswIndex::nearest(std::span<const float> query,
                                           std::optional<std::size_t> exclude) const {
    if (norms_.empty()) return std::nullopt;
    if (query.size() != dim_) throw ProtocolError("query dimension differs from index dimension");
    const double qn = checked_norm(query);
    const std::size_t ep = greedy(query, qn, entry_, top_layer_, 0);
    const std::size_t ef = std::max<std::size_t>(params_.ef_search, exclude ? 2 : 1);
    for (const auto& c : search_layer(query, qn, ep, ef, 0)) {
        if (exclude && *exclude == c.id) continue;
        return c;
    }
    return std::nullopt;
}

std::unique_ptr<NeighborIndex> make_index(IndexKind kind) {
    if (kind == IndexKind::approximate) return std::make_unique<HnswIndex>();
    return std::make_unique<ExactIndex>();
}

std::unique_ptr<NeighborIndex> build_index(std::span<const EmbeddingVector> vectors,
                                           IndexKind kind) {
    if (vectors.empty()) throw PreconditionError("build_index: no vectors");
    auto index = make_index(kind);
    for (const auto& v : vectors) index->add(v.values);
    return index;
}

}  // namespace seedforge
