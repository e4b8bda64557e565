#include "dacl/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dacl/errors.hpp"

namespace dacl {

namespace {

void require_density(const char* who, const std::vector<ClassEmbedding>& feats) {
    for (const auto& e : feats) {
        if (!e.density.has_value()) {
            throw ContractError(std::string(who) + ": seq_id " + std::to_string(e.seq_id) +
                                " has no density");
        }
    }
}

bool asc_density(const ClassEmbedding& a, const ClassEmbedding& b) {
    if (*a.density != *b.density) return *a.density < *b.density;
    return a.seq_id < b.seq_id;
}

bool desc_density(const ClassEmbedding& a, const ClassEmbedding& b) {
    if (*a.density != *b.density) return *a.density > *b.density;
    return a.seq_id < b.seq_id;
}

// deterministic partial Fisher-Yates draw of `take` items
std::vector<ClassEmbedding> draw_without_replacement(std::vector<ClassEmbedding> pool, size_t take,
                                                     std::mt19937_64& rng) {
    std::vector<ClassEmbedding> out;
    out.reserve(take);
    for (size_t i = 0; i < take; ++i) {
        std::uniform_int_distribution<size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
        out.push_back(pool[i]);
    }
    return out;
}

}  // namespace

std::vector<ClassEmbedding> sample_anchors(const std::vector<ClassEmbedding>& batch_feats, int n_q) {
    if (n_q < 1) throw ContractError("sample_anchors: n_q must be >= 1");
    require_density("sample_anchors", batch_feats);
    std::vector<ClassEmbedding> sorted = batch_feats;
    std::sort(sorted.begin(), sorted.end(), asc_density);
    if (sorted.size() > static_cast<size_t>(n_q)) sorted.resize(static_cast<size_t>(n_q));
    return sorted;
}

std::vector<ClassEmbedding> sample_positives(const std::vector<ClassEmbedding>& batch_feats,
                                             const std::vector<ClassEmbedding>& bank_snapshot,
                                             int n_p_plus,
                                             const std::set<std::uint64_t>& exclude_seq) {
    if (n_p_plus < 1) throw ContractError("sample_positives: n_p_plus must be >= 1");
    require_density("sample_positives", batch_feats);
    require_density("sample_positives", bank_snapshot);
    std::vector<ClassEmbedding> batch_cand;
    for (const auto& e : batch_feats) {
        if (!exclude_seq.count(e.seq_id)) batch_cand.push_back(e);
    }
    std::vector<ClassEmbedding> bank_cand = bank_snapshot;
    std::sort(batch_cand.begin(), batch_cand.end(), desc_density);
    std::sort(bank_cand.begin(), bank_cand.end(), desc_density);

    const size_t want = static_cast<size_t>(n_p_plus);
    size_t take_batch = std::min((want + 1) / 2, batch_cand.size());
    size_t take_bank = std::min(want / 2, bank_cand.size());
    // back-fill a short side from the other side's next best
    size_t shortfall = want - take_batch - take_bank;
    const size_t extra_bank = std::min(shortfall, bank_cand.size() - take_bank);
    take_bank += extra_bank;
    shortfall -= extra_bank;
    take_batch += std::min(shortfall, batch_cand.size() - take_batch);

    std::vector<ClassEmbedding> out;
    out.reserve(take_batch + take_bank);
    out.insert(out.end(), batch_cand.begin(), batch_cand.begin() + static_cast<long>(take_batch));
    out.insert(out.end(), bank_cand.begin(), bank_cand.begin() + static_cast<long>(take_bank));
    std::sort(out.begin(), out.end(), desc_density);
    return out;
}

std::optional<ClusterCenter> cluster_center(const std::vector<ClassEmbedding>& positives) {
    if (positives.empty()) return std::nullopt;
    const size_t dim = positives[0].vec.size();
    ClusterCenter c;
    c.mean.assign(dim, 0.0);
    for (const auto& p : positives) {
        if (p.vec.size() != dim) throw ContractError("cluster_center: mixed dimensions");
        for (size_t d = 0; d < dim; ++d) c.mean[d] += p.vec[d];
    }
    for (auto& v : c.mean) v /= static_cast<double>(positives.size());
    double norm = 0.0;
    for (double v : c.mean) norm += v * v;
    norm = std::sqrt(norm);
    if (norm < 1e-12) throw ContractError("cluster_center: degenerate zero-norm center");
    c.unit = c.mean;
    for (auto& v : c.unit) v /= norm;
    return c;
}

std::vector<ClassEmbedding> sample_negatives(
    const std::vector<std::vector<ClassEmbedding>>& anchor_sets, int class_id, int n_p_minus,
    std::mt19937_64& rng) {
    if (n_p_minus < 1) throw ContractError("sample_negatives: n_p_minus must be >= 1");
    std::vector<ClassEmbedding> candidates;
    for (size_t c = 0; c < anchor_sets.size(); ++c) {
        if (static_cast<int>(c) == class_id) continue;
        candidates.insert(candidates.end(), anchor_sets[c].begin(), anchor_sets[c].end());
    }
    const size_t take = std::min(static_cast<size_t>(n_p_minus), candidates.size());
    if (take == candidates.size()) return candidates;
    return draw_without_replacement(std::move(candidates), take, rng);
}

std::vector<ClassEmbedding> sample_anchors_random(const std::vector<ClassEmbedding>& batch_feats,
                                                  int n_q, std::mt19937_64& rng) {
    if (n_q < 1) throw ContractError("sample_anchors_random: n_q must be >= 1");
    const size_t take = std::min(static_cast<size_t>(n_q), batch_feats.size());
    return draw_without_replacement(batch_feats, take, rng);
}

std::vector<ClassEmbedding> sample_positives_random(
    const std::vector<ClassEmbedding>& batch_feats, const std::vector<ClassEmbedding>& bank_snapshot,
    int n_p_plus, const std::set<std::uint64_t>& exclude_seq, std::mt19937_64& rng) {
    if (n_p_plus < 1) throw ContractError("sample_positives_random: n_p_plus must be >= 1");
    std::vector<ClassEmbedding> candidates;
    for (const auto& e : batch_feats) {
        if (!exclude_seq.count(e.seq_id)) candidates.push_back(e);
    }
    candidates.insert(candidates.end(), bank_snapshot.begin(), bank_snapshot.end());
    const size_t take = std::min(static_cast<size_t>(n_p_plus), candidates.size());
    return draw_without_replacement(std::move(candidates), take, rng);
}

}  // namespace dacl
