#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace dacl {

// One prototype vector in projection space. seq_id is globally unique and
// monotonically increasing; it breaks similarity ties and identifies the
// embedding across pools.
struct ClassEmbedding {
    std::vector<double> vec;  // L2-normalized
    int class_id = 0;
    std::optional<double> density;
    enum class Origin { Batch, Bank } origin = Origin::Batch;
    std::uint64_t seq_id = 0;
};

// Per-query nearest neighbors within a candidate pool. Rows may be shorter
// than k when the pool (minus the query itself) is smaller.
struct NeighborGraph {
    int query_count = 0;
    int k = 0;
    std::vector<std::vector<int>> indices;         // positions into the pool
    std::vector<std::vector<double>> similarities; // non-increasing per row
};

// Strictly increasing neighborhood sizes k_1 < ... < k_n.
struct ScaleSet {
    std::vector<int> ks;
};

ScaleSet make_scale_set(std::vector<int> ks);  // validates ordering and positivity

double cosine(const std::vector<double>& a, const std::vector<double>& b);

// Exact exhaustive search. Self-matches (same seq_id) are excluded; ties in
// similarity break by ascending seq_id. k is capped at what the pool offers.
NeighborGraph knn_graph(const std::vector<ClassEmbedding>& queries,
                        const std::vector<ClassEmbedding>& pool, int k);

// Row means of the similarity matrix: the density of each query.
std::vector<double> density_single_scale(const NeighborGraph& graph);

// Mean of single-scale densities over every k in `scales`; capped scales that
// collapse to the same effective k still contribute one term each.
std::vector<double> density_multi_scale(const std::vector<ClassEmbedding>& queries,
                                        const std::vector<ClassEmbedding>& pool,
                                        const ScaleSet& scales);

struct CompactnessReport {
    double silhouette = 0.0;
    double davies_bouldin = 0.0;
    double v_measure = 0.0;
};

// Standard clustering quality metrics, Euclidean distance on the stored
// vectors. v_measure compares predicted[i] against embeddings[i].class_id.
CompactnessReport compactness_report(const std::vector<ClassEmbedding>& embeddings,
                                     const std::vector<int>& predicted);

}  // namespace dacl
