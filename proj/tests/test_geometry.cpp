#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "dacl/errors.hpp"
#include "dacl/geometry.hpp"

using dacl::ClassEmbedding;
using dacl::NeighborGraph;

namespace {

ClassEmbedding emb(std::vector<double> v, std::uint64_t seq, int cls = 0) {
    double s = 0.0;
    for (double x : v) s += x * x;
    const double inv = 1.0 / std::sqrt(s);
    for (auto& x : v) x *= inv;
    ClassEmbedding e;
    e.vec = std::move(v);
    e.class_id = cls;
    e.seq_id = seq;
    return e;
}

std::vector<ClassEmbedding> random_unit(std::mt19937& rng, int n, int dim, std::uint64_t seq0) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<ClassEmbedding> out;
    for (int i = 0; i < n; ++i) {
        std::vector<double> v(static_cast<size_t>(dim));
        for (auto& x : v) x = g(rng);
        out.push_back(emb(std::move(v), seq0 + static_cast<std::uint64_t>(i)));
    }
    return out;
}

// repeated max-scan selection, deliberately different from the sort in the library
std::vector<int> oracle_topk(const ClassEmbedding& q, const std::vector<ClassEmbedding>& pool,
                             int k) {
    std::vector<int> cand;
    for (size_t i = 0; i < pool.size(); ++i) {
        if (pool[i].seq_id != q.seq_id) cand.push_back(static_cast<int>(i));
    }
    std::vector<int> picked;
    while (static_cast<int>(picked.size()) < k && !cand.empty()) {
        size_t best = 0;
        for (size_t i = 1; i < cand.size(); ++i) {
            const double si = dacl::cosine(q.vec, pool[static_cast<size_t>(cand[i])].vec);
            const double sb = dacl::cosine(q.vec, pool[static_cast<size_t>(cand[best])].vec);
            if (si > sb || (si == sb && pool[static_cast<size_t>(cand[i])].seq_id <
                                            pool[static_cast<size_t>(cand[best])].seq_id)) {
                best = i;
            }
        }
        picked.push_back(cand[best]);
        cand.erase(cand.begin() + static_cast<long>(best));
    }
    return picked;
}

}  // namespace

TEST_CASE("knn excludes self and ranks by similarity") {
    std::vector<ClassEmbedding> pool{emb({1, 0}, 1), emb({0, 1}, 2), emb({-1, 0}, 3)};
    NeighborGraph g = dacl::knn_graph({pool[0]}, pool, 2);
    REQUIRE(g.indices[0].size() == 2);
    CHECK(pool[static_cast<size_t>(g.indices[0][0])].seq_id == 2);
    CHECK(pool[static_cast<size_t>(g.indices[0][1])].seq_id == 3);
    CHECK(g.similarities[0][0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(g.similarities[0][1] == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("knn caps k at pool availability") {
    std::vector<ClassEmbedding> pool{emb({0, 1}, 7)};
    NeighborGraph g = dacl::knn_graph({emb({1, 0}, 99)}, pool, 5);
    CHECK(g.indices[0].size() == 1);
}

TEST_CASE("knn rejects empty pools and unnormalized vectors") {
    CHECK_THROWS_AS(dacl::knn_graph({emb({1, 0}, 1)}, {}, 3), dacl::ContractError);
    ClassEmbedding bad;
    bad.vec = {3.0, 4.0};
    bad.seq_id = 8;
    CHECK_THROWS_AS(dacl::knn_graph({bad}, {emb({1, 0}, 1)}, 1), dacl::ContractError);
}

TEST_CASE("knn matches a repeated max-scan oracle") {
    std::mt19937 rng(42);
    auto pool = random_unit(rng, 50, 6, 100);
    NeighborGraph g = dacl::knn_graph(pool, pool, 7);
    for (size_t qi = 0; qi < pool.size(); ++qi) {
        auto expect = oracle_topk(pool[qi], pool, 7);
        REQUIRE(g.indices[qi].size() == expect.size());
        for (size_t j = 0; j < expect.size(); ++j) CHECK(g.indices[qi][j] == expect[j]);
    }
}

TEST_CASE("density is the mean neighbor similarity") {
    std::vector<ClassEmbedding> clones{emb({1, 0}, 1), emb({1, 0}, 2), emb({1, 0}, 3)};
    auto d = dacl::density_single_scale(dacl::knn_graph({clones[0]}, clones, 2));
    CHECK(d[0] == doctest::Approx(1.0).epsilon(1e-15));

    std::vector<ClassEmbedding> mix{emb({1, 0}, 1), emb({0, 1}, 2)};
    auto d2 = dacl::density_single_scale(dacl::knn_graph({emb({1, 0}, 9)}, mix, 2));
    CHECK(d2[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("density equals a direct recomputation on random inputs") {
    std::mt19937 rng(7);
    auto pool = random_unit(rng, 30, 5, 0);
    NeighborGraph g = dacl::knn_graph(pool, pool, 4);
    auto d = dacl::density_single_scale(g);
    for (size_t qi = 0; qi < pool.size(); ++qi) {
        double s = 0.0;
        for (int idx : g.indices[qi]) s += dacl::cosine(pool[qi].vec, pool[static_cast<size_t>(idx)].vec);
        CHECK(d[qi] == doctest::Approx(s / 4.0).epsilon(1e-12));
        CHECK(d[qi] >= -1.0);
        CHECK(d[qi] <= 1.0);
    }
}

TEST_CASE("multi-scale density with one scale equals single scale") {
    std::mt19937 rng(11);
    auto pool = random_unit(rng, 20, 4, 0);
    auto single = dacl::density_single_scale(dacl::knn_graph(pool, pool, 5));
    auto multi = dacl::density_multi_scale(pool, pool, dacl::make_scale_set({5}));
    for (size_t i = 0; i < pool.size(); ++i) CHECK(multi[i] == single[i]);
}

TEST_CASE("multi-scale density averages the per-scale densities") {
    std::mt19937 rng(13);
    auto pool = random_unit(rng, 20, 4, 0);
    auto d2 = dacl::density_single_scale(dacl::knn_graph(pool, pool, 2));
    auto d4 = dacl::density_single_scale(dacl::knn_graph(pool, pool, 4));
    auto multi = dacl::density_multi_scale(pool, pool, dacl::make_scale_set({2, 4}));
    for (size_t i = 0; i < pool.size(); ++i) {
        CHECK(std::fabs(multi[i] - 0.5 * (d2[i] + d4[i])) < 1e-12);
    }
}

TEST_CASE("identical points have density one at every scale") {
    std::vector<ClassEmbedding> pool;
    for (int i = 0; i < 6; ++i) pool.push_back(emb({0, 0, 1}, static_cast<std::uint64_t>(i)));
    auto d = dacl::density_multi_scale(pool, pool, dacl::make_scale_set({2, 4, 16}));
    for (double v : d) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("densities are invariant to pool permutation") {
    std::mt19937 rng(17);
    auto pool = random_unit(rng, 25, 4, 50);
    auto queries = random_unit(rng, 5, 4, 1000);
    auto base = dacl::density_multi_scale(queries, pool, dacl::make_scale_set({3, 9}));
    auto shuffled = pool;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto after = dacl::density_multi_scale(queries, shuffled, dacl::make_scale_set({3, 9}));
    for (size_t i = 0; i < queries.size(); ++i) CHECK(base[i] == after[i]);
}

TEST_CASE("adding a closer neighbor never lowers density at that scale") {
    std::mt19937 rng(19);
    for (int trial = 0; trial < 20; ++trial) {
        auto pool = random_unit(rng, 10, 3, static_cast<std::uint64_t>(trial * 100));
        auto q = random_unit(rng, 1, 3, 9999 + static_cast<std::uint64_t>(trial))[0];
        const int k = 4;
        auto g = dacl::knn_graph({q}, pool, k);
        const double before = dacl::density_single_scale(g)[0];
        // craft a vector more similar than the current k-th neighbor: nudge toward q
        auto close = q;
        close.seq_id = 777777 + static_cast<std::uint64_t>(trial);
        auto grown = pool;
        grown.push_back(close);
        const double after = dacl::density_single_scale(dacl::knn_graph({q}, grown, k))[0];
        CHECK(after >= before - 1e-15);
    }
}

TEST_CASE("scale sets must be strictly increasing and positive") {
    CHECK_THROWS_AS(dacl::make_scale_set({}), dacl::ConfigError);
    CHECK_THROWS_AS(dacl::make_scale_set({0, 4}), dacl::ConfigError);
    CHECK_THROWS_AS(dacl::make_scale_set({4, 4}), dacl::ConfigError);
    CHECK_THROWS_AS(dacl::make_scale_set({8, 4}), dacl::ConfigError);
    CHECK(dacl::make_scale_set({4, 8, 16}).ks.size() == 3);
}

TEST_CASE("compactness of perfectly separated antipodal classes") {
    std::vector<ClassEmbedding> embs;
    for (int i = 0; i < 4; ++i) {
        auto e = emb({1, 0}, static_cast<std::uint64_t>(i), 0);
        embs.push_back(e);
    }
    for (int i = 0; i < 4; ++i) {
        auto e = emb({-1, 0}, static_cast<std::uint64_t>(10 + i), 1);
        embs.push_back(e);
    }
    std::vector<int> preds{0, 0, 0, 0, 1, 1, 1, 1};
    auto rep = dacl::compactness_report(embs, preds);
    CHECK(rep.silhouette == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(rep.davies_bouldin == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(rep.v_measure == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("compactness rejects a single class") {
    std::vector<ClassEmbedding> embs{emb({1, 0}, 1, 0), emb({0, 1}, 2, 0)};
    CHECK_THROWS_AS(dacl::compactness_report(embs, {0, 0}), dacl::ContractError);
}

TEST_CASE("silhouette matches a brute-force oracle on gaussian clusters") {
    std::mt19937 rng(23);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<std::vector<double>> centers{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    std::vector<ClassEmbedding> embs;
    std::uint64_t seq = 0;
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < 15; ++i) {
            std::vector<double> v = centers[static_cast<size_t>(c)];
            for (auto& x : v) x += noise(rng);
            embs.push_back(emb(std::move(v), seq++, c));
        }
    }
    std::vector<int> preds;
    for (const auto& e : embs) preds.push_back(e.class_id);
    auto rep = dacl::compactness_report(embs, preds);

    // direct definition, organized point-major instead of class-major
    auto dist = [&](size_t i, size_t j) {
        double s = 0.0;
        for (size_t d = 0; d < embs[i].vec.size(); ++d) {
            const double t = embs[i].vec[d] - embs[j].vec[d];
            s += t * t;
        }
        return std::sqrt(s);
    };
    double total = 0.0;
    for (size_t i = 0; i < embs.size(); ++i) {
        double a = 0.0;
        int na = 0;
        std::vector<double> sums(3, 0.0);
        std::vector<int> counts(3, 0);
        for (size_t j = 0; j < embs.size(); ++j) {
            if (j == i) continue;
            sums[static_cast<size_t>(embs[j].class_id)] += dist(i, j);
            counts[static_cast<size_t>(embs[j].class_id)]++;
        }
        a = sums[static_cast<size_t>(embs[i].class_id)] /
            counts[static_cast<size_t>(embs[i].class_id)];
        (void)na;
        double b = 1e18;
        for (int c = 0; c < 3; ++c) {
            if (c == embs[i].class_id) continue;
            b = std::min(b, sums[static_cast<size_t>(c)] / counts[static_cast<size_t>(c)]);
        }
        total += (b - a) / std::max(a, b);
    }
    CHECK(rep.silhouette == doctest::Approx(total / static_cast<double>(embs.size())).epsilon(1e-9));
    CHECK(rep.v_measure == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("v-measure penalizes merged predictions") {
    std::vector<ClassEmbedding> embs;
    for (int i = 0; i < 3; ++i) embs.push_back(emb({1, 0}, static_cast<std::uint64_t>(i), 0));
    for (int i = 0; i < 3; ++i) embs.push_back(emb({0, 1}, static_cast<std::uint64_t>(10 + i), 1));
    auto merged = dacl::compactness_report(embs, {0, 0, 0, 0, 0, 0});
    auto exact = dacl::compactness_report(embs, {0, 0, 0, 1, 1, 1});
    CHECK(exact.v_measure == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(merged.v_measure < exact.v_measure);
    CHECK(merged.v_measure >= 0.0);
}
