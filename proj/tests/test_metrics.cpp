#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "dacl/errors.hpp"
#include "dacl/metrics.hpp"

using dacl::AsdResult;
using dacl::DiceJaccard;
using dacl::EvalReport;

namespace {

std::vector<uint8_t> blank(int w, int h) { return std::vector<uint8_t>(static_cast<size_t>(w) * h, 0); }

// Independent boundary test via set lookups, same traversal order.
double asd_oracle(const std::vector<uint8_t>& pred, const std::vector<uint8_t>& gt, int w, int h,
                  int cls) {
    auto boundary = [&](const std::vector<uint8_t>& lab) {
        std::set<std::pair<int, int>> in_mask;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (lab[y * w + x] == cls) in_mask.insert({x, y});
            }
        }
        std::vector<std::pair<int, int>> out;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (!in_mask.count({x, y})) continue;
                bool exposed = false;
                const int dx[] = {-1, 1, 0, 0}, dy[] = {0, 0, -1, 1};
                for (int k = 0; k < 4 && !exposed; ++k) {
                    int xx = x + dx[k], yy = y + dy[k];
                    if (xx < 0 || xx >= w || yy < 0 || yy >= h || !in_mask.count({xx, yy})) {
                        exposed = true;
                    }
                }
                if (exposed) out.push_back({x, y});
            }
        }
        return out;
    };
    auto pb = boundary(pred), gb = boundary(gt);
    auto directed = [](const std::vector<std::pair<int, int>>& from,
                       const std::vector<std::pair<int, int>>& to) {
        double total = 0.0;
        for (auto& a : from) {
            double best = std::numeric_limits<double>::infinity();
            for (auto& b : to) {
                double ddx = a.first - b.first, ddy = a.second - b.second;
                best = std::min(best, ddx * ddx + ddy * ddy);
            }
            total += std::sqrt(best);
        }
        return total;
    };
    return (directed(pb, gb) + directed(gb, pb)) / static_cast<double>(pb.size() + gb.size());
}

std::vector<uint8_t> random_labels(std::mt19937_64& rng, int n, int n_classes) {
    std::uniform_int_distribution<int> d(0, n_classes - 1);
    std::vector<uint8_t> out(n);
    for (auto& v : out) v = static_cast<uint8_t>(d(rng));
    return out;
}

}  // namespace

TEST_CASE("perfect agreement scores one hundred and zero distance") {
    auto gt = blank(8, 8);
    for (int i = 10; i < 30; ++i) gt[i] = 1;
    DiceJaccard dj = dacl::dice_jaccard(gt, gt, 1);
    CHECK(dj.dice == 100.0);
    CHECK(dj.jaccard == 100.0);
    AsdResult a = dacl::asd(gt, gt, 8, 8, 1);
    CHECK(a.defined);
    CHECK(a.value == 0.0);
}

TEST_CASE("disjoint equal-size masks score zero") {
    auto pred = blank(8, 8), gt = blank(8, 8);
    for (int i = 0; i < 10; ++i) pred[i] = 1;
    for (int i = 20; i < 30; ++i) gt[i] = 1;
    DiceJaccard dj = dacl::dice_jaccard(pred, gt, 1);
    CHECK(dj.dice == 0.0);
    CHECK(dj.jaccard == 0.0);
}

TEST_CASE("half overlap gives dice fifty and jaccard a third") {
    auto pred = blank(16, 16), gt = blank(16, 16);
    for (int i = 0; i < 100; ++i) pred[i] = 1;
    for (int i = 50; i < 150; ++i) gt[i] = 1;
    DiceJaccard dj = dacl::dice_jaccard(pred, gt, 1);
    CHECK(dj.dice == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(dj.jaccard == doctest::Approx(100.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("empty mask conventions") {
    auto a = blank(4, 4), b = blank(4, 4);
    DiceJaccard both = dacl::dice_jaccard(a, b, 2);
    CHECK(both.dice == 100.0);
    CHECK(both.jaccard == 100.0);
    b[5] = 2;
    DiceJaccard one = dacl::dice_jaccard(a, b, 2);
    CHECK(one.dice == 0.0);
    CHECK(one.jaccard == 0.0);
    AsdResult undef = dacl::asd(a, b, 4, 4, 2);
    CHECK_FALSE(undef.defined);
}

TEST_CASE("jaccard equals dice over two minus dice") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        auto pred = random_labels(rng, 49, 4);
        auto gt = random_labels(rng, 49, 4);
        for (int cls = 0; cls < 4; ++cls) {
            DiceJaccard dj = dacl::dice_jaccard(pred, gt, cls);
            double d = dj.dice / 100.0, j = dj.jaccard / 100.0;
            CHECK(std::abs(j - d / (2.0 - d)) < 1e-12);
        }
    }
}

TEST_CASE("dice and asd are symmetric in their arguments") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 40; ++trial) {
        auto pred = random_labels(rng, 64, 3);
        auto gt = random_labels(rng, 64, 3);
        DiceJaccard fw = dacl::dice_jaccard(pred, gt, 1), bw = dacl::dice_jaccard(gt, pred, 1);
        CHECK(fw.dice == bw.dice);
        CHECK(fw.jaccard == bw.jaccard);
        AsdResult af = dacl::asd(pred, gt, 8, 8, 1), ab = dacl::asd(gt, pred, 8, 8, 1);
        CHECK(af.defined == ab.defined);
        if (af.defined) CHECK(af.value == ab.value);
    }
}

TEST_CASE("single pixels three apart have distance three") {
    auto pred = blank(8, 8), gt = blank(8, 8);
    pred[2 * 8 + 1] = 1;
    gt[2 * 8 + 4] = 1;
    AsdResult a = dacl::asd(pred, gt, 8, 8, 1);
    CHECK(a.defined);
    CHECK(a.value == 3.0);
}

TEST_CASE("asd equals the brute-force oracle") {
    std::mt19937_64 rng(7);
    std::bernoulli_distribution coin(0.3);
    int compared = 0;
    for (int trial = 0; trial < 60; ++trial) {
        int w = 6 + trial % 4, h = 6 + trial % 3;
        std::vector<uint8_t> pred(static_cast<size_t>(w) * h, 0), gt(pred.size(), 0);
        for (auto& v : pred) v = coin(rng);
        for (auto& v : gt) v = coin(rng);
        AsdResult a = dacl::asd(pred, gt, w, h, 1);
        if (!a.defined) continue;
        CHECK(a.value == asd_oracle(pred, gt, w, h, 1));
        ++compared;
    }
    CHECK(compared > 40);
}

TEST_CASE("asd is invariant when both masks translate together") {
    std::mt19937_64 rng(8);
    std::bernoulli_distribution coin(0.4);
    for (int trial = 0; trial < 20; ++trial) {
        const int w = 12, h = 12;
        std::vector<uint8_t> pred(w * h, 0), gt(w * h, 0), pred_s(w * h, 0), gt_s(w * h, 0);
        for (int y = 2; y < 6; ++y) {
            for (int x = 2; x < 6; ++x) {
                pred[y * w + x] = coin(rng);
                gt[y * w + x] = coin(rng);
            }
        }
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (pred[y * w + x]) pred_s[(y + 3) * w + x + 2] = 1;
                if (gt[y * w + x]) gt_s[(y + 3) * w + x + 2] = 1;
            }
        }
        AsdResult a = dacl::asd(pred, gt, w, h, 1);
        AsdResult b = dacl::asd(pred_s, gt_s, w, h, 1);
        CHECK(a.defined == b.defined);
        if (a.defined) CHECK(a.value == b.value);
    }
}

TEST_CASE("boundary extraction handles interiors and image edges") {
    std::vector<uint8_t> full(9, 1);
    auto b1 = dacl::boundary_points(full, 3, 3);
    CHECK(b1.size() == 8);  // center pixel is interior
    for (auto& [x, y] : b1) CHECK((x != 1 || y != 1));

    std::vector<uint8_t> tiny(4, 1);
    CHECK(dacl::boundary_points(tiny, 2, 2).size() == 4);  // edge rule alone

    std::vector<uint8_t> block(25, 0);
    for (int y = 1; y <= 3; ++y) {
        for (int x = 1; x <= 3; ++x) block[y * 5 + x] = 1;
    }
    CHECK(dacl::boundary_points(block, 5, 5).size() == 8);
}

TEST_CASE("evaluate_cases averages per class and over foreground") {
    const int w = 6, h = 6;
    auto gt = blank(w, h);
    for (int i = 0; i < 6; ++i) gt[i] = 1;
    for (int i = 12; i < 16; ++i) gt[i] = 2;
    auto perfect = gt;
    auto miss2 = gt;
    for (int i = 12; i < 16; ++i) miss2[i] = 0;  // class 2 never predicted

    EvalReport report = dacl::evaluate_cases({perfect, miss2}, {gt, gt}, w, h, 3);
    CHECK(report.n_cases == 2);
    CHECK(report.per_class.at(1).dice == 100.0);
    CHECK(report.per_class.at(2).dice == 50.0);  // 100 then 0
    CHECK(report.per_class.at(2).asd_cases == 1);
    CHECK(report.per_class.at(2).asd_undefined == 1);
    CHECK(report.macro.dice == 75.0);
    CHECK(report.macro.asd_undefined == 1);

    nlohmann::json j = dacl::eval_report_json(report);
    CHECK(j.dump() == dacl::eval_report_json(report).dump());
    CHECK(j["per_class"]["2"]["asd_undefined"] == 1);
    CHECK(j["macro"]["dice"] == 75.0);

    EvalReport never = dacl::evaluate_cases({miss2}, {gt}, w, h, 3);
    CHECK(dacl::eval_report_json(never)["per_class"]["2"]["asd"].is_null());
}

TEST_CASE("aggregation matches the worked example") {
    auto mk = [](double dice) {
        EvalReport r;
        r.macro.dice = dice;
        r.macro.jaccard = dice / (2.0 - dice / 100.0);
        r.macro.asd = 1.0;
        r.macro.asd_cases = 1;
        return r;
    };
    dacl::RunAggregate agg = dacl::aggregate_runs({mk(88.0), mk(90.0), mk(92.0)});
    CHECK(agg.n_runs == 3);
    CHECK(agg.dice.mean == doctest::Approx(90.0).epsilon(1e-12));
    CHECK(agg.dice.std_dev == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(agg.dice.has_std);

    dacl::RunAggregate same = dacl::aggregate_runs({mk(90.0), mk(90.0)});
    CHECK(same.dice.std_dev == 0.0);

    dacl::RunAggregate single = dacl::aggregate_runs({mk(90.0)});
    CHECK_FALSE(single.dice.has_std);
    CHECK(single.dice.mean == 90.0);

    CHECK_THROWS_AS(dacl::aggregate_runs({}), dacl::ContractError);
}

TEST_CASE("mean and std match a direct formula oracle") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> v(0.0, 100.0);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 2 + trial % 7;
        std::vector<double> xs(n);
        for (double& x : xs) x = v(rng);
        dacl::MeanStd ms = dacl::mean_std(xs);
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= n;
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        CHECK(ms.mean == doctest::Approx(mean).epsilon(1e-12));
        CHECK(ms.std_dev == doctest::Approx(std::sqrt(ss / (n - 1))).epsilon(1e-12));
    }
    CHECK_THROWS_AS(dacl::mean_std({}), dacl::ContractError);
}

TEST_CASE("metric inputs are validated") {
    CHECK_THROWS_AS(dacl::dice_jaccard(blank(4, 4), blank(4, 5), 1), dacl::ContractError);
    CHECK_THROWS_AS(dacl::asd(blank(4, 4), blank(4, 4), 5, 4, 1), dacl::ContractError);
    CHECK_THROWS_AS(dacl::evaluate_cases({}, {}, 4, 4, 3), dacl::ContractError);
    CHECK_THROWS_AS(dacl::evaluate_cases({blank(4, 4)}, {blank(4, 4)}, 4, 4, 1), dacl::ConfigError);
}
