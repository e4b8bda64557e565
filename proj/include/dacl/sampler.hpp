#pragma once

#include <optional>
#include <random>
#include <set>
#include <vector>

#include "dacl/geometry.hpp"

namespace dacl {

// Selected sets for one class. Anchors come sorted by ascending density,
// positives by descending density; the two are disjoint by seq_id.
struct SampleSets {
    int class_id = 0;
    std::vector<ClassEmbedding> anchors;
    std::vector<ClassEmbedding> positives;
    std::vector<double> center;  // L2-normalized cluster center
    std::vector<ClassEmbedding> negatives;
};

// The min(n_q, available) lowest-density batch features, ties by ascending
// seq_id. Every input must carry a density.
std::vector<ClassEmbedding> sample_anchors(const std::vector<ClassEmbedding>& batch_feats, int n_q);

// Top ceil(n_p_plus/2) of the batch (anchors excluded via `exclude_seq`) plus
// top floor(n_p_plus/2) of the bank, by descending density; when one side
// runs short the other back-fills. Result sorted by descending density.
std::vector<ClassEmbedding> sample_positives(const std::vector<ClassEmbedding>& batch_feats,
                                             const std::vector<ClassEmbedding>& bank_snapshot,
                                             int n_p_plus, const std::set<std::uint64_t>& exclude_seq);

struct ClusterCenter {
    std::vector<double> mean;  // plain component-wise mean
    std::vector<double> unit;  // the mean, L2-normalized
};

// Nothing when positives are empty (class skipped this step).
std::optional<ClusterCenter> cluster_center(const std::vector<ClassEmbedding>& positives);

// Uniform sample without replacement from the anchors of every class except
// class_id, capped at availability. anchor_sets[c] holds class c's anchors.
std::vector<ClassEmbedding> sample_negatives(const std::vector<std::vector<ClassEmbedding>>& anchor_sets,
                                             int class_id, int n_p_minus, std::mt19937_64& rng);

// Ablation variants: density-blind uniform picks with the same caps and the
// same anchor/positive disjointness.
std::vector<ClassEmbedding> sample_anchors_random(const std::vector<ClassEmbedding>& batch_feats,
                                                  int n_q, std::mt19937_64& rng);
std::vector<ClassEmbedding> sample_positives_random(const std::vector<ClassEmbedding>& batch_feats,
                                                    const std::vector<ClassEmbedding>& bank_snapshot,
                                                    int n_p_plus,
                                                    const std::set<std::uint64_t>& exclude_seq,
                                                    std::mt19937_64& rng);

}  // namespace dacl
