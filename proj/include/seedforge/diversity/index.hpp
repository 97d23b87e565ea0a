#pragma once

// Nearest-neighbor search by cosine similarity over embedding vectors.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "seedforge/gateway/provider.hpp"

namespace seedforge {

// Cosine similarity in double, clamped to [-1, 1]. Throws PreconditionError
// on a dimension mismatch and UndefinedSimilarityError if either vector is
// all zeros.
double cosine(std::span<const float> u, std::span<const float> v);
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

struct Neighbor {
    std::size_t id = 0;
    double similarity = 0.0;
};

enum class IndexKind { exact, approximate };

class NeighborIndex {
public:
    virtual ~NeighborIndex() = default;

    // Appends a vector and returns its id (ids are dense, in insertion order).
    // The first vector fixes the dimension; a different one later is a
    // ProtocolError. Zero vectors are rejected with UndefinedSimilarityError.
    virtual std::size_t add(std::span<const float> v) = 0;

    // Best match for `query`, optionally skipping one id. Empty when the
    // index holds no eligible vector.
    virtual std::optional<Neighbor> nearest(std::span<const float> query,
                                            std::optional<std::size_t> exclude = {}) const = 0;

    virtual std::size_t size() const = 0;
    virtual std::size_t dimension() const = 0;
};

// Linear scan with the SIMD dot kernels.
class ExactIndex final : public NeighborIndex {
public:
    std::size_t add(std::span<const float> v) override;
    std::optional<Neighbor> nearest(std::span<const float> query,
                                    std::optional<std::size_t> exclude = {}) const override;
    std::size_t size() const override { return norms_.size(); }
    std::size_t dimension() const override { return dim_; }

private:
    std::size_t dim_ = 0;
    std::vector<float> rows_;
    std::vector<double> norms_;
};

struct HnswParams {
    std::size_t m = 16;                 // links per node above layer 0; 2m on layer 0
    std::size_t ef_construction = 200;
    std::size_t ef_search = 256;
    std::uint64_t seed = 0x5eedf0f9e;
};

// Hierarchical navigable small-world graph.
class HnswIndex final : public NeighborIndex {
public:
    explicit HnswIndex(HnswParams params = {});

    std::size_t add(std::span<const float> v) override;
    std::optional<Neighbor> nearest(std::span<const float> query,
                                    std::optional<std::size_t> exclude = {}) const override;
    std::size_t size() const override { return norms_.size(); }
    std::size_t dimension() const override { return dim_; }

private:
    struct Node {
        std::vector<std::vector<std::size_t>> links;  // per layer
    };

    double sim(std::span<const float> q, double q_norm, std::size_t id) const;
    std::span<const float> row(std::size_t id) const;
    std::size_t greedy(std::span<const float> q, double q_norm, std::size_t entry, int from,
                       int to) const;
    std::vector<Neighbor> search_layer(std::span<const float> q, double q_norm,
                                       std::size_t entry, std::size_t ef, int layer) const;
    void connect(std::size_t id, const std::vector<Neighbor>& candidates, int layer);
    std::vector<std::size_t> select(std::vector<Neighbor> candidates, std::size_t limit) const;

    HnswParams params_;
    double level_mult_;
    std::uint64_t rng_state_;
    std::size_t dim_ = 0;
    std::vector<float> rows_;
    std::vector<double> norms_;
    std::vector<Node> nodes_;
    std::size_t entry_ = 0;
    int top_layer_ = -1;
};

std::unique_ptr<NeighborIndex> make_index(IndexKind kind);

// Builds an index over `vectors` (at least one). Mixed dimensions are a
// ProtocolError.
std::unique_ptr<NeighborIndex> build_index(std::span<const EmbeddingVector> vectors,
                                           IndexKind kind);

}  // namespace seedforge
