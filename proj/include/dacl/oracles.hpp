#pragma once

// Reference implementations backing the self-test command and the release
// checks. Written as direct brute-force transcriptions, independent of the
// optimized library paths they are compared against.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "dacl/geometry.hpp"

namespace dacl::oracle {

// Mean cosine to the k nearest neighbors: all pairs, full sort, ties by
// ascending seq_id, k capped at availability.
inline std::vector<double> densities_at_scale(const std::vector<ClassEmbedding>& pool, int k) {
    std::vector<double> out(pool.size(), 0.0);
    for (size_t q = 0; q < pool.size(); ++q) {
        std::vector<std::pair<double, std::uint64_t>> sims;
        for (size_t j = 0; j < pool.size(); ++j) {
            if (pool[j].seq_id == pool[q].seq_id) continue;
            sims.emplace_back(cosine(pool[q].vec, pool[j].vec), pool[j].seq_id);
        }
        std::sort(sims.begin(), sims.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        size_t kk = std::min<size_t>(k, sims.size());
        double s = 0.0;
        for (size_t i = 0; i < kk; ++i) s += sims[i].first;
        out[q] = kk > 0 ? s / static_cast<double>(kk) : 0.0;
    }
    return out;
}

// Mean over scales; every scale contributes one term even when capped.
inline std::vector<double> densities_multi(const std::vector<ClassEmbedding>& pool,
                                           const std::vector<int>& scales) {
    std::vector<double> acc(pool.size(), 0.0);
    for (int k : scales) {
        auto d = densities_at_scale(pool, k);
        for (size_t i = 0; i < d.size(); ++i) acc[i] += d[i];
    }
    for (double& v : acc) v /= static_cast<double>(scales.size());
    return acc;
}

inline std::set<std::uint64_t> anchors_oracle(std::vector<ClassEmbedding> batch, int n_q) {
    std::sort(batch.begin(), batch.end(), [](const ClassEmbedding& a, const ClassEmbedding& b) {
        if (*a.density != *b.density) return *a.density < *b.density;
        return a.seq_id < b.seq_id;
    });
    std::set<std::uint64_t> out;
    for (size_t i = 0; i < std::min<size_t>(n_q, batch.size()); ++i) out.insert(batch[i].seq_id);
    return out;
}

// Half from each side by descending density, the bank back-filling first when
// the other side runs short.
inline std::set<std::uint64_t> positives_oracle(const std::vector<ClassEmbedding>& batch,
                                                std::vector<ClassEmbedding> bank, int n_p_plus,
                                                const std::set<std::uint64_t>& exclude) {
    auto desc = [](const ClassEmbedding& a, const ClassEmbedding& b) {
        if (*a.density != *b.density) return *a.density > *b.density;
        return a.seq_id < b.seq_id;
    };
    std::vector<ClassEmbedding> cand;
    for (const auto& e : batch) {
        if (!exclude.count(e.seq_id)) cand.push_back(e);
    }
    std::sort(cand.begin(), cand.end(), desc);
    std::sort(bank.begin(), bank.end(), desc);
    size_t want = static_cast<size_t>(n_p_plus);
    size_t nb = std::min((want + 1) / 2, cand.size());
    size_t nk = std::min(want / 2, bank.size());
    size_t deficit = want - nb - nk;
    size_t extra = std::min(deficit, bank.size() - nk);
    nk += extra;
    deficit -= extra;
    nb += std::min(deficit, cand.size() - nb);
    std::set<std::uint64_t> out;
    for (size_t i = 0; i < nb; ++i) out.insert(cand[i].seq_id);
    for (size_t i = 0; i < nk; ++i) out.insert(bank[i].seq_id);
    return out;
}

// All out-of-class anchors; the exact expected set whenever the cap does not
// bind (randomized draws are checked by membership instead).
inline std::set<std::uint64_t> negatives_pool_oracle(
    const std::vector<std::vector<ClassEmbedding>>& anchor_sets, int class_id) {
    std::set<std::uint64_t> out;
    for (size_t c = 0; c < anchor_sets.size(); ++c) {
        if (static_cast<int>(c) == class_id) continue;
        for (const auto& e : anchor_sets[c]) out.insert(e.seq_id);
    }
    return out;
}

// Sliding window over everything ever pushed, newest tail preserved.
class FifoOracle {
public:
    explicit FifoOracle(size_t capacity) : capacity_(capacity) {}

    void push(std::vector<ClassEmbedding> items) {
        std::stable_sort(items.begin(), items.end(),
                         [](const ClassEmbedding& a, const ClassEmbedding& b) {
                             return a.seq_id < b.seq_id;
                         });
        for (auto& x : items) window_.push_back(std::move(x));
        if (window_.size() > capacity_) {
            window_.erase(window_.begin(),
                          window_.begin() + static_cast<long>(window_.size() - capacity_));
        }
    }

    const std::vector<ClassEmbedding>& window() const { return window_; }

private:
    size_t capacity_;
    std::vector<ClassEmbedding> window_;
};

// Independent boundary extraction: row-major scan, a mask pixel is boundary
// when it touches the image edge or a 4-neighbor outside the mask.
inline std::vector<std::pair<int, int>> boundary_oracle(const std::vector<std::uint8_t>& labels,
                                                        int w, int h, int class_id) {
    std::vector<std::pair<int, int>> pts;
    auto inside = [&](int x, int y) {
        return x >= 0 && x < w && y >= 0 && y < h && labels[y * w + x] == class_id;
    };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (labels[y * w + x] != class_id) continue;
            if (!inside(x - 1, y) || !inside(x + 1, y) || !inside(x, y - 1) || !inside(x, y + 1)) {
                pts.emplace_back(x, y);
            }
        }
    }
    return pts;
}

struct AsdOracleResult {
    bool defined = false;
    double value = 0.0;
};

// Symmetric mean nearest-boundary distance, quadratic scan. Integer squared
// distances keep the minimum exact; sums run in boundary order.
inline AsdOracleResult asd_oracle(const std::vector<std::uint8_t>& pred,
                                  const std::vector<std::uint8_t>& gt, int w, int h, int class_id) {
    bool p_any = false, g_any = false;
    for (size_t i = 0; i < pred.size(); ++i) {
        p_any = p_any || pred[i] == class_id;
        g_any = g_any || gt[i] == class_id;
    }
    if (!p_any || !g_any) return {false, 0.0};
    auto pb = boundary_oracle(pred, w, h, class_id);
    auto gb = boundary_oracle(gt, w, h, class_id);
    auto directed = [](const std::vector<std::pair<int, int>>& from,
                       const std::vector<std::pair<int, int>>& to) {
        double total = 0.0;
        for (const auto& [ax, ay] : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& [bx, by] : to) {
                double dx = ax - bx, dy = ay - by;
                best = std::min(best, dx * dx + dy * dy);
            }
            total += std::sqrt(best);
        }
        return total;
    };
    double total = directed(pb, gb) + directed(gb, pb);
    return {true, total / static_cast<double>(pb.size() + gb.size())};
}

// Random unit embeddings sharing one class id, densities attached.
inline std::vector<ClassEmbedding> random_pool(std::mt19937_64& rng, int count, int dim,
                                               std::uint64_t& seq, bool with_density = false) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> du(-1.0, 1.0);
    std::vector<ClassEmbedding> pool;
    pool.reserve(count);
    for (int i = 0; i < count; ++i) {
        ClassEmbedding e;
        e.class_id = 0;
        e.seq_id = seq++;
        e.vec.resize(dim);
        double norm = 0.0;
        for (double& v : e.vec) {
            v = g(rng);
            norm += v * v;
        }
        norm = std::sqrt(norm);
        if (norm < 1e-9) {
            e.vec.assign(dim, 0.0);
            e.vec[0] = 1.0;
        } else {
            for (double& v : e.vec) v /= norm;
        }
        if (with_density) e.density = du(rng);
        pool.push_back(std::move(e));
    }
    return pool;
}

}  // namespace dacl::oracle
