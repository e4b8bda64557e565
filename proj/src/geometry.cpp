#include "dacl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "dacl/errors.hpp"

namespace dacl {

namespace {

void check_normalized(const char* who, const ClassEmbedding& e) {
    double s = 0.0;
    for (double x : e.vec) s += x * x;
    if (std::fabs(std::sqrt(s) - 1.0) > 1e-6) {
        throw ContractError(std::string(who) + ": embedding seq_id " + std::to_string(e.seq_id) +
                            " is not L2-normalized (norm " + std::to_string(std::sqrt(s)) + ")");
    }
}

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

// candidates for one query, sorted by (similarity desc, seq_id asc)
struct RankedPool {
    std::vector<int> order;       // pool positions
    std::vector<double> sims;     // aligned with order
};

RankedPool rank_pool(const ClassEmbedding& q, const std::vector<ClassEmbedding>& pool) {
    RankedPool r;
    r.order.reserve(pool.size());
    std::vector<double> all(pool.size());
    for (size_t i = 0; i < pool.size(); ++i) {
        if (pool[i].seq_id == q.seq_id) continue;  // self excluded
        all[i] = cosine(q.vec, pool[i].vec);
        r.order.push_back(static_cast<int>(i));
    }
    std::sort(r.order.begin(), r.order.end(), [&](int a, int b) {
        if (all[static_cast<size_t>(a)] != all[static_cast<size_t>(b)])
            return all[static_cast<size_t>(a)] > all[static_cast<size_t>(b)];
        return pool[static_cast<size_t>(a)].seq_id < pool[static_cast<size_t>(b)].seq_id;
    });
    r.sims.reserve(r.order.size());
    for (int i : r.order) r.sims.push_back(all[static_cast<size_t>(i)]);
    return r;
}

}  // namespace

ScaleSet make_scale_set(std::vector<int> ks) {
    if (ks.empty()) throw ConfigError("scales: at least one k required");
    for (size_t i = 0; i < ks.size(); ++i) {
        if (ks[i] < 1) throw ConfigError("scales: k must be >= 1, got " + std::to_string(ks[i]));
        if (i > 0 && ks[i] <= ks[i - 1]) {
            throw ConfigError("scales: must be strictly increasing, got " + std::to_string(ks[i - 1]) +
                              " then " + std::to_string(ks[i]));
        }
    }
    return ScaleSet{std::move(ks)};
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw DimensionError("cosine: dims " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
    }
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

NeighborGraph knn_graph(const std::vector<ClassEmbedding>& queries,
                        const std::vector<ClassEmbedding>& pool, int k) {
    if (pool.empty()) throw ContractError("knn_graph: empty pool");
    if (k < 1) throw ContractError("knn_graph: k must be >= 1, got " + std::to_string(k));
    for (const auto& e : queries) check_normalized("knn_graph", e);
    for (const auto& e : pool) check_normalized("knn_graph", e);
    NeighborGraph g;
    g.query_count = static_cast<int>(queries.size());
    g.k = k;
    g.indices.resize(queries.size());
    g.similarities.resize(queries.size());
    for (size_t qi = 0; qi < queries.size(); ++qi) {
        RankedPool ranked = rank_pool(queries[qi], pool);
        const size_t take = std::min<size_t>(static_cast<size_t>(k), ranked.order.size());
        g.indices[qi].assign(ranked.order.begin(), ranked.order.begin() + static_cast<long>(take));
        g.similarities[qi].assign(ranked.sims.begin(), ranked.sims.begin() + static_cast<long>(take));
    }
    return g;
}

std::vector<double> density_single_scale(const NeighborGraph& graph) {
    std::vector<double> out(graph.similarities.size());
    for (size_t i = 0; i < graph.similarities.size(); ++i) {
        const auto& row = graph.similarities[i];
        if (row.empty()) {
            throw ContractError("density_single_scale: query " + std::to_string(i) +
                                " has no neighbors");
        }
        double s = 0.0;
        for (double v : row) s += v;
        out[i] = s / static_cast<double>(row.size());
    }
    return out;
}

std::vector<double> density_multi_scale(const std::vector<ClassEmbedding>& queries,
                                        const std::vector<ClassEmbedding>& pool,
                                        const ScaleSet& scales) {
    if (pool.empty()) throw ContractError("knn_graph: empty pool");
    if (scales.ks.empty()) throw ConfigError("scales: at least one k required");
    for (const auto& e : queries) check_normalized("density_multi_scale", e);
    for (const auto& e : pool) check_normalized("density_multi_scale", e);
    std::vector<double> out(queries.size(), 0.0);
    for (size_t qi = 0; qi < queries.size(); ++qi) {
        // one exhaustive ranking serves every scale: the top-k prefix of the
        // full sort is exactly the k-NN graph row
        RankedPool ranked = rank_pool(queries[qi], pool);
        if (ranked.order.empty()) {
            throw ContractError("density_multi_scale: query " + std::to_string(qi) +
                                " has no neighbors");
        }
        double acc = 0.0;
        for (int k : scales.ks) {
            const size_t take = std::min<size_t>(static_cast<size_t>(k), ranked.sims.size());
            double s = 0.0;
            for (size_t i = 0; i < take; ++i) s += ranked.sims[i];
            acc += s / static_cast<double>(take);
        }
        out[qi] = acc / static_cast<double>(scales.ks.size());
    }
    return out;
}

CompactnessReport compactness_report(const std::vector<ClassEmbedding>& embeddings,
                                     const std::vector<int>& predicted) {
    const size_t n = embeddings.size();
    if (predicted.size() != n) {
        throw ContractError("compactness_report: " + std::to_string(predicted.size()) +
                            " predictions for " + std::to_string(n) + " embeddings");
    }
    std::map<int, std::vector<size_t>> by_class;
    for (size_t i = 0; i < n; ++i) by_class[embeddings[i].class_id].push_back(i);
    if (by_class.size() < 2) {
        throw ContractError("compactness_report: need >= 2 classes, got " +
                            std::to_string(by_class.size()));
    }

    CompactnessReport rep;

    // silhouette: mean over points of (b-a)/max(a,b); singleton clusters score 0
    {
        double total = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const int ci = embeddings[i].class_id;
            const auto& own = by_class.at(ci);
            if (own.size() == 1) continue;  // contributes 0
            double a = 0.0;
            for (size_t j : own) {
                if (j != i) a += euclidean(embeddings[i].vec, embeddings[j].vec);
            }
            a /= static_cast<double>(own.size() - 1);
            double b = std::numeric_limits<double>::infinity();
            for (const auto& [cj, members] : by_class) {
                if (cj == ci) continue;
                double d = 0.0;
                for (size_t j : members) d += euclidean(embeddings[i].vec, embeddings[j].vec);
                b = std::min(b, d / static_cast<double>(members.size()));
            }
            const double denom = std::max(a, b);
            if (denom > 0.0) total += (b - a) / denom;
        }
        rep.silhouette = total / static_cast<double>(n);
    }

    // Davies-Bouldin: centroids are plain means; s_i is mean member-to-centroid
    // distance; score is the mean over clusters of the worst (s_i+s_j)/d_ij
    {
        const size_t dim = embeddings[0].vec.size();
        std::vector<std::vector<double>> centroids;
        std::vector<double> spread;
        for (const auto& [c, members] : by_class) {
            std::vector<double> mu(dim, 0.0);
            for (size_t j : members) {
                for (size_t d = 0; d < dim; ++d) mu[d] += embeddings[j].vec[d];
            }
            for (auto& v : mu) v /= static_cast<double>(members.size());
            double s = 0.0;
            for (size_t j : members) s += euclidean(embeddings[j].vec, mu);
            spread.push_back(s / static_cast<double>(members.size()));
            centroids.push_back(std::move(mu));
        }
        double total = 0.0;
        for (size_t i = 0; i < centroids.size(); ++i) {
            double worst = 0.0;
            for (size_t j = 0; j < centroids.size(); ++j) {
                if (j == i) continue;
                worst = std::max(worst, (spread[i] + spread[j]) / euclidean(centroids[i], centroids[j]));
            }
            total += worst;
        }
        rep.davies_bouldin = total / static_cast<double>(centroids.size());
    }

    // V-measure: harmonic mean of homogeneity and completeness from the
    // (true class, predicted class) contingency table, natural-log entropies
    {
        std::map<int, double> nt, np;
        std::map<std::pair<int, int>, double> joint;
        for (size_t i = 0; i < n; ++i) {
            nt[embeddings[i].class_id] += 1.0;
            np[predicted[i]] += 1.0;
            joint[{embeddings[i].class_id, predicted[i]}] += 1.0;
        }
        const double dn = static_cast<double>(n);
        auto entropy = [dn](const std::map<int, double>& counts) {
            double h = 0.0;
            for (const auto& [k, c] : counts) {
                (void)k;
                if (c > 0.0) h -= (c / dn) * std::log(c / dn);
            }
            return h;
        };
        const double h_true = entropy(nt);
        const double h_pred = entropy(np);
        double h_true_given_pred = 0.0;
        double h_pred_given_true = 0.0;
        for (const auto& [tp, c] : joint) {
            if (c <= 0.0) continue;
            h_true_given_pred -= (c / dn) * std::log(c / np.at(tp.second));
            h_pred_given_true -= (c / dn) * std::log(c / nt.at(tp.first));
        }
        const double hom = h_true > 0.0 ? 1.0 - h_true_given_pred / h_true : 1.0;
        const double com = h_pred > 0.0 ? 1.0 - h_pred_given_true / h_pred : 1.0;
        rep.v_measure = (hom + com) > 0.0 ? 2.0 * hom * com / (hom + com) : 0.0;
    }

    return rep;
}

}  // namespace dacl
