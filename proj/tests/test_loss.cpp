#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dacl/errors.hpp"
#include "dacl/loss.hpp"

using dacl::ClassEmbedding;
using dacl::ClassLossInputs;
using dacl::claim1_verify;
using dacl::positiveness;
using dacl::positiveness_from_logits;
using dacl::soft_contrastive_loss;
namespace tc = dacl::tc;

namespace {

std::vector<double> unit(std::vector<double> v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    for (double& x : v) x /= n;
    return v;
}

ClassEmbedding emb(int class_id, std::vector<double> v, uint64_t seq) {
    ClassEmbedding e;
    e.class_id = class_id;
    e.vec = unit(std::move(v));
    e.seq_id = seq;
    e.density = 0.5;
    return e;
}

std::vector<double> random_unit(std::mt19937_64& rng, int d) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> v(d);
    for (double& x : v) x = g(rng);
    return unit(std::move(v));
}

// Scalar replay of the per-class term for oracle checks.
double term_oracle(const std::vector<std::vector<double>>& anchors, const std::vector<double>& center,
                   const std::vector<std::vector<double>>& negatives, const std::vector<double>& w,
                   double tau, bool infonce) {
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    };
    double total = 0.0;
    for (size_t i = 0; i < anchors.size(); ++i) {
        double pos = dot(anchors[i], center) / tau;
        std::vector<double> den;
        if (infonce) den.push_back(pos);
        for (const auto& n : negatives) den.push_back(dot(anchors[i], n) / tau);
        double mx = den[0];
        for (double v : den) mx = std::max(mx, v);
        double se = 0.0;
        for (double v : den) se += std::exp(v - mx);
        total += (mx + std::log(se)) - pos - std::log(w[i]);
    }
    return total;
}

}  // namespace

TEST_CASE("positiveness matches the softmax example") {
    std::vector<double> w = positiveness_from_logits({0.9, 0.1}, {1.0, 1.0});
    CHECK(w[0] == doctest::Approx(0.6899744811).epsilon(1e-9));
    CHECK(w[1] == doctest::Approx(0.3100255189).epsilon(1e-9));
    CHECK(w[0] + w[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("single anchor gets weight one") {
    std::vector<double> w = positiveness_from_logits({0.37}, {1.0});
    CHECK(w.size() == 1);
    CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("equal similarities split weight evenly") {
    std::vector<double> w = positiveness_from_logits({0.4, 0.4}, {1.0, 1.0});
    CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(w[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("positiveness is shift invariant in the logits") {
    std::vector<double> base = positiveness_from_logits({0.2, -0.4, 0.9}, {1.0, 1.0, 1.0});
    std::vector<double> shifted = positiveness_from_logits({100.2, 99.6, 100.9}, {1.0, 1.0, 1.0});
    for (size_t i = 0; i < base.size(); ++i) {
        CHECK(base[i] == doctest::Approx(shifted[i]).epsilon(1e-12));
    }
}

TEST_CASE("gamma rescales individual weights") {
    std::vector<double> plain = positiveness_from_logits({0.9, 0.1}, {1.0, 1.0});
    std::vector<double> scaled = positiveness_from_logits({0.9, 0.1}, {2.0, 1.0});
    CHECK(scaled[0] == doctest::Approx(plain[0] / 2.0).epsilon(1e-12));
    CHECK(scaled[1] == doctest::Approx(plain[1]).epsilon(1e-12));
}

TEST_CASE("positiveness from embeddings uses anchor-center similarity") {
    std::vector<ClassEmbedding> anchors = {emb(2, {1.0, 0.0}, 7), emb(2, {0.0, 1.0}, 8)};
    auto pv = positiveness(anchors, {1.0, 0.0}, {1.0, 1.0});
    CHECK(pv.class_id == 2);
    double e1 = std::exp(1.0);
    CHECK(pv.w[0] == doctest::Approx(e1 / (e1 + 1.0)).epsilon(1e-12));
    CHECK(pv.w[1] == doctest::Approx(1.0 / (e1 + 1.0)).epsilon(1e-12));
}

TEST_CASE("positiveness sums to one under unit gamma") {
    std::mt19937_64 rng(11);
    std::vector<ClassEmbedding> anchors;
    std::vector<double> center = random_unit(rng, 6);
    for (int i = 0; i < 9; ++i) {
        ClassEmbedding e;
        e.class_id = 1;
        e.vec = random_unit(rng, 6);
        e.seq_id = 100 + i;
        anchors.push_back(e);
    }
    auto pv = positiveness(anchors, center, std::vector<double>(9, 1.0));
    double total = 0.0;
    for (double wi : pv.w) {
        CHECK(wi > 0.0);
        total += wi;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("positiveness validates its inputs") {
    std::vector<ClassEmbedding> anchors = {emb(1, {1.0, 0.0}, 1)};
    CHECK_THROWS_AS(positiveness(anchors, {1.0, 0.0}, {0.0}), dacl::ConfigError);
    CHECK_THROWS_AS(positiveness(anchors, {1.0, 0.0}, {-2.0}), dacl::ConfigError);
    CHECK_THROWS_AS(positiveness(anchors, {1.0, 0.0, 0.0}, {1.0}), dacl::DimensionError);
    CHECK_THROWS_AS(positiveness({}, {1.0}, {}), dacl::ContractError);
    std::vector<ClassEmbedding> mixed = {emb(1, {1.0, 0.0}, 1), emb(2, {0.0, 1.0}, 2)};
    CHECK_THROWS_AS(positiveness(mixed, {1.0, 0.0}, {1.0, 1.0}), dacl::ContractError);
}

TEST_CASE("matched center and negative cancel to a zero term") {
    tc::Tape tape;
    ClassLossInputs cls;
    cls.class_id = 0;
    cls.anchors.push_back(tc::param({1, 2}, {1.0, 0.0}));
    cls.center = {1.0, 0.0};
    cls.negatives = {{1.0, 0.0}};
    cls.w = {1.0};
    auto terms = soft_contrastive_loss(tape, {cls}, 0.4);
    CHECK(terms.contributing == 1);
    CHECK(terms.total.scalar() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("opposed negative yields the -5 closed form") {
    tc::Tape tape;
    ClassLossInputs cls;
    cls.class_id = 0;
    cls.anchors.push_back(tc::param({1, 2}, {1.0, 0.0}));
    cls.center = {1.0, 0.0};
    cls.negatives = {{-1.0, 0.0}};
    cls.w = {1.0};
    auto terms = soft_contrastive_loss(tape, {cls}, 0.4);
    CHECK(terms.total.scalar() == doctest::Approx(-5.0).epsilon(1e-12));
}

TEST_CASE("halving the weight adds log two") {
    auto run = [](double w) {
        tc::Tape tape;
        ClassLossInputs cls;
        cls.class_id = 0;
        cls.anchors.push_back(tc::param({1, 2}, {1.0, 0.0}));
        cls.center = {1.0, 0.0};
        cls.negatives = {{-1.0, 0.0}};
        cls.w = {w};
        return soft_contrastive_loss(tape, {cls}, 0.4).total.scalar();
    };
    CHECK(run(0.5) - run(1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("duplicate negatives add log of their count") {
    tc::Tape tape;
    ClassLossInputs cls;
    cls.class_id = 0;
    cls.anchors.push_back(tc::param({1, 2}, {1.0, 0.0}));
    cls.center = {1.0, 0.0};
    cls.negatives = {{1.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}};
    cls.w = {1.0};
    auto terms = soft_contrastive_loss(tape, {cls}, 0.4);
    CHECK(terms.total.scalar() == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("per-class terms are sorted and sum to the total") {
    tc::Tape tape;
    ClassLossInputs a, b;
    a.class_id = 3;
    a.anchors.push_back(tc::param({1, 2}, {1.0, 0.0}));
    a.center = {1.0, 0.0};
    a.negatives = {{-1.0, 0.0}};
    a.w = {1.0};
    b.class_id = 1;
    b.anchors.push_back(tc::param({1, 2}, {0.0, 1.0}));
    b.center = {0.0, 1.0};
    b.negatives = {{0.0, 1.0}};
    b.w = {0.5};
    auto terms = soft_contrastive_loss(tape, {a, b}, 0.4);
    REQUIRE(terms.per_class.size() == 2);
    CHECK(terms.contributing == 2);
    CHECK(terms.per_class[0].first == 1);
    CHECK(terms.per_class[1].first == 3);
    CHECK(terms.per_class[0].second == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(terms.per_class[1].second == doctest::Approx(-5.0).epsilon(1e-12));
    CHECK(terms.total.scalar() ==
          doctest::Approx(terms.per_class[0].second + terms.per_class[1].second).epsilon(1e-12));
}

TEST_CASE("classes without anchors or negatives contribute nothing") {
    tc::Tape tape;
    ClassLossInputs no_neg;
    no_neg.class_id = 0;
    no_neg.anchors.push_back(tc::param({1, 2}, {1.0, 0.0}));
    no_neg.center = {1.0, 0.0};
    no_neg.w = {1.0};
    ClassLossInputs no_anchor;
    no_anchor.class_id = 1;
    no_anchor.center = {1.0, 0.0};
    no_anchor.negatives = {{0.0, 1.0}};
    auto terms = soft_contrastive_loss(tape, {no_neg, no_anchor}, 0.4);
    CHECK(terms.contributing == 0);
    CHECK(terms.per_class.empty());
    CHECK(terms.total.scalar() == 0.0);
    CHECK(terms.total.node < 0);
}

TEST_CASE("loss validates tau, weights, and dimensions") {
    tc::Tape tape;
    ClassLossInputs cls;
    cls.class_id = 0;
    cls.anchors.push_back(tc::param({1, 2}, {1.0, 0.0}));
    cls.center = {1.0, 0.0};
    cls.negatives = {{-1.0, 0.0}};
    cls.w = {1.0};
    CHECK_THROWS_AS(soft_contrastive_loss(tape, {cls}, 0.0), dacl::ConfigError);
    CHECK_THROWS_AS(soft_contrastive_loss(tape, {cls}, -0.4), dacl::ConfigError);
    ClassLossInputs bad_w = cls;
    bad_w.w = {0.0};
    CHECK_THROWS_AS(soft_contrastive_loss(tape, {bad_w}, 0.4), dacl::ContractError);
    ClassLossInputs bad_count = cls;
    bad_count.w = {1.0, 1.0};
    CHECK_THROWS_AS(soft_contrastive_loss(tape, {bad_count}, 0.4), dacl::ContractError);
    ClassLossInputs bad_neg = cls;
    bad_neg.negatives = {{1.0, 0.0, 0.0}};
    CHECK_THROWS_AS(soft_contrastive_loss(tape, {bad_neg}, 0.4), dacl::DimensionError);
}

TEST_CASE("higher center similarity strictly lowers the term") {
    // The anchor and negatives stay fixed so only the center term moves.
    auto run = [](double theta) {
        tc::Tape tape;
        ClassLossInputs cls;
        cls.class_id = 0;
        cls.anchors.push_back(tc::param({1, 2}, {1.0, 0.0}));
        cls.center = {std::cos(theta), std::sin(theta)};
        cls.negatives = {{0.0, -1.0}, {-0.6, 0.8}};
        cls.w = {1.0};
        return soft_contrastive_loss(tape, {cls}, 0.4).total.scalar();
    };
    double prev = run(1.2);
    for (double theta : {0.9, 0.6, 0.3, 0.0}) {
        double cur = run(theta);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("keeping the positive in the denominator matches the wider logsumexp") {
    tc::Tape tape;
    ClassLossInputs cls;
    cls.class_id = 0;
    cls.anchors.push_back(tc::param({1, 2}, {1.0, 0.0}));
    cls.center = {1.0, 0.0};
    cls.negatives = {{-1.0, 0.0}};
    cls.w = {1.0};
    auto terms = soft_contrastive_loss(tape, {cls}, 0.4, true);
    CHECK(terms.total.scalar() == doctest::Approx(std::log(1.0 + std::exp(-5.0))).epsilon(1e-12));
    CHECK(terms.total.scalar() > 0.0);
}

TEST_CASE("random instances match a scalar oracle under both denominators") {
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> dim_d(2, 8), cnt_d(1, 5);
    std::uniform_real_distribution<double> w_d(0.05, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        int d = dim_d(rng), na = cnt_d(rng), nn = cnt_d(rng);
        bool infonce = trial % 2 == 1;
        std::vector<std::vector<double>> anchor_vals, negatives;
        std::vector<double> w;
        tc::Tape tape;
        ClassLossInputs cls;
        cls.class_id = 0;
        for (int i = 0; i < na; ++i) {
            anchor_vals.push_back(random_unit(rng, d));
            cls.anchors.push_back(tc::param({1, d}, anchor_vals.back()));
            w.push_back(w_d(rng));
        }
        for (int i = 0; i < nn; ++i) negatives.push_back(random_unit(rng, d));
        cls.center = random_unit(rng, d);
        cls.negatives = negatives;
        cls.w = w;
        auto terms = soft_contrastive_loss(tape, {cls}, 0.4, infonce);
        double expect = term_oracle(anchor_vals, cls.center, negatives, w, 0.4, infonce);
        CHECK(terms.total.scalar() == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("anchor gradients match central differences; keys stay detached") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> dim_d(2, 6), cnt_d(1, 4);
    std::uniform_real_distribution<double> w_d(0.1, 1.0);
    const double h = 1e-5;
    int checked = 0;
    for (int trial = 0; trial < 10; ++trial) {
        int d = dim_d(rng), na = cnt_d(rng), nn = cnt_d(rng);
        std::vector<std::vector<double>> raw;
        std::vector<std::vector<double>> negatives;
        std::vector<double> center = random_unit(rng, d);
        std::vector<double> w;
        for (int i = 0; i < na; ++i) {
            raw.push_back(random_unit(rng, d));
            w.push_back(w_d(rng));
        }
        for (int i = 0; i < nn; ++i) negatives.push_back(random_unit(rng, d));

        // Anchors flow through l2_normalize so the encoder path is exercised.
        auto eval = [&](const std::vector<std::vector<double>>& vals, std::vector<double>* center_grad,
                        std::vector<std::vector<double>>* grads_out) {
            tc::Tape tape;
            ClassLossInputs cls;
            cls.class_id = 0;
            std::vector<tc::Tensor> params;
            for (const auto& v : vals) {
                tc::Tensor p = tc::param({1, d}, v);
                params.push_back(p);
                cls.anchors.push_back(tc::l2_normalize_lastdim(tape, p));
            }
            tc::Tensor cp = tc::param({1, d}, center);
            cls.center = center;
            cls.negatives = negatives;
            cls.w = w;
            auto terms = soft_contrastive_loss(tape, {cls}, 0.4);
            if (grads_out) {
                tape.backward(terms.total);
                for (const tc::Tensor& p : params) grads_out->push_back(*p.grad);
                if (center_grad) *center_grad = *cp.grad;
            }
            return terms.total.scalar();
        };

        std::vector<std::vector<double>> grads;
        std::vector<double> center_grad;
        eval(raw, &center_grad, &grads);
        for (double g : center_grad) CHECK(g == 0.0);

        for (int i = 0; i < na; ++i) {
            for (int c = 0; c < d; ++c) {
                auto hi = raw, lo = raw;
                hi[i][c] += h;
                lo[i][c] -= h;
                double fd = (eval(hi, nullptr, nullptr) - eval(lo, nullptr, nullptr)) / (2.0 * h);
                double ad = grads[i][c];
                double rel = std::abs(ad - fd) / std::max({1e-2, std::abs(ad), std::abs(fd)});
                CHECK(rel < 1e-4);
                ++checked;
            }
        }
    }
    CHECK(checked > 50);
}

TEST_CASE("anchor gradients are nonzero for a live instance") {
    tc::Tape tape;
    ClassLossInputs cls;
    cls.class_id = 0;
    tc::Tensor a = tc::param({1, 2}, {0.6, 0.8});
    cls.anchors.push_back(a);
    cls.center = {1.0, 0.0};
    cls.negatives = {{0.0, 1.0}};
    cls.w = {1.0};
    auto terms = soft_contrastive_loss(tape, {cls}, 0.4);
    tape.backward(terms.total);
    double mag = std::abs((*a.grad)[0]) + std::abs((*a.grad)[1]);
    CHECK(mag > 1e-6);
}

TEST_CASE("claim one holds on the worked examples") {
    auto s1 = claim1_verify({1.0, 1.0}, 50000, 0.5);
    CHECK(s1[0] == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(s1[1] == doctest::Approx(0.5).epsilon(1e-5));

    auto s2 = claim1_verify({0.2, 0.8}, 50000, 0.5);
    CHECK(s2[0] == doctest::Approx(0.2).epsilon(1e-5));
    CHECK(s2[1] == doctest::Approx(0.8).epsilon(1e-5));

    auto s3 = claim1_verify({1.0, 2.0, 3.0}, 50000, 0.5);
    CHECK(s3[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-5));
    CHECK(s3[1] == doctest::Approx(2.0 / 6.0).epsilon(1e-5));
    CHECK(s3[2] == doctest::Approx(3.0 / 6.0).epsilon(1e-5));
}

TEST_CASE("claim one optimum is invariant to rescaling the weights") {
    auto base = claim1_verify({1.0, 2.0, 3.0}, 50000, 0.5);
    auto scaled = claim1_verify({2.0, 4.0, 6.0}, 50000, 0.5);
    for (size_t i = 0; i < base.size(); ++i) {
        CHECK(base[i] == doctest::Approx(scaled[i]).epsilon(1e-5));
    }
}

TEST_CASE("claim one holds for random weights across dimensions") {
    std::mt19937_64 rng(47);
    std::uniform_int_distribution<int> dim_d(2, 16);
    std::uniform_real_distribution<double> w_d(0.05, 2.0);
    for (int trial = 0; trial < 10; ++trial) {
        int k = dim_d(rng);
        std::vector<double> w(k);
        double sum = 0.0;
        for (double& wi : w) {
            wi = w_d(rng);
            sum += wi;
        }
        auto s = claim1_verify(w, 50000, 0.5);
        double total = 0.0;
        for (int i = 0; i < k; ++i) {
            CHECK(std::abs(s[i] - w[i] / sum) < 1e-4);
            total += s[i];
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("claim one verification rejects bad arguments and non-convergence") {
    CHECK_THROWS_AS(claim1_verify({}, 100, 0.5), dacl::ConfigError);
    CHECK_THROWS_AS(claim1_verify({1.0, 0.0}, 100, 0.5), dacl::ConfigError);
    CHECK_THROWS_AS(claim1_verify({1.0, -1.0}, 100, 0.5), dacl::ConfigError);
    CHECK_THROWS_AS(claim1_verify({1.0, 2.0}, 0, 0.5), dacl::ConfigError);
    CHECK_THROWS_AS(claim1_verify({1.0, 2.0}, 100, 0.0), dacl::ConfigError);
    CHECK_THROWS_AS(claim1_verify({1.0, 2.0}, 1, 0.5), dacl::ContractError);
}
