#include "dacl/metrics.hpp"

#include <cmath>
#include <fstream>

#include "dacl/errors.hpp"

namespace dacl {

DiceJaccard dice_jaccard(const std::vector<uint8_t>& pred, const std::vector<uint8_t>& gt,
                         int class_id) {
    if (pred.size() != gt.size()) {
        throw ContractError("dice_jaccard: size mismatch, " + std::to_string(pred.size()) + " vs " +
                            std::to_string(gt.size()));
    }
    long p = 0, g = 0, both = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
        bool in_p = pred[i] == class_id, in_g = gt[i] == class_id;
        p += in_p;
        g += in_g;
        both += in_p && in_g;
    }
    if (p == 0 && g == 0) return {100.0, 100.0};
    if (p == 0 || g == 0) return {0.0, 0.0};
    DiceJaccard out;
    out.dice = 200.0 * static_cast<double>(both) / static_cast<double>(p + g);
    out.jaccard = 100.0 * static_cast<double>(both) / static_cast<double>(p + g - both);
    return out;
}

std::vector<std::pair<int, int>> boundary_points(const std::vector<uint8_t>& mask, int w, int h) {
    if (static_cast<size_t>(w) * h != mask.size()) {
        throw ContractError("boundary_points: mask size does not match " + std::to_string(w) + "x" +
                            std::to_string(h));
    }
    std::vector<std::pair<int, int>> pts;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask[y * w + x]) continue;
            bool edge = x == 0 || x == w - 1 || y == 0 || y == h - 1;
            bool exposed = edge || !mask[y * w + (x - 1)] || !mask[y * w + (x + 1)] ||
                           !mask[(y - 1) * w + x] || !mask[(y + 1) * w + x];
            if (exposed) pts.emplace_back(x, y);
        }
    }
    return pts;
}

namespace {

double directed_sum(const std::vector<std::pair<int, int>>& from,
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
}

}  // namespace

AsdResult asd(const std::vector<uint8_t>& pred, const std::vector<uint8_t>& gt, int w, int h,
              int class_id) {
    if (pred.size() != gt.size() || static_cast<size_t>(w) * h != pred.size()) {
        throw ContractError("asd: label maps must both be " + std::to_string(w) + "x" +
                            std::to_string(h));
    }
    std::vector<uint8_t> pm(pred.size()), gm(gt.size());
    bool p_any = false, g_any = false;
    for (size_t i = 0; i < pred.size(); ++i) {
        pm[i] = pred[i] == class_id;
        gm[i] = gt[i] == class_id;
        p_any |= pm[i] != 0;
        g_any |= gm[i] != 0;
    }
    if (!p_any || !g_any) return {false, 0.0};
    std::vector<std::pair<int, int>> pb = boundary_points(pm, w, h);
    std::vector<std::pair<int, int>> gb = boundary_points(gm, w, h);
    double total = directed_sum(pb, gb) + directed_sum(gb, pb);
    return {true, total / static_cast<double>(pb.size() + gb.size())};
}

EvalReport evaluate_cases(const std::vector<std::vector<uint8_t>>& preds,
                          const std::vector<std::vector<uint8_t>>& gts, int w, int h,
                          int n_classes) {
    if (preds.size() != gts.size()) {
        throw ContractError("evaluate_cases: " + std::to_string(preds.size()) + " predictions vs " +
                            std::to_string(gts.size()) + " ground truths");
    }
    if (preds.empty()) throw ContractError("evaluate_cases: no cases");
    if (n_classes < 2) throw ConfigError("evaluate_cases: need at least two classes");

    EvalReport report;
    report.n_cases = static_cast<int>(preds.size());
    report.n_classes = n_classes;

    for (int c = 0; c < n_classes; ++c) {
        ClassMetrics m;
        double asd_total = 0.0;
        for (size_t i = 0; i < preds.size(); ++i) {
            DiceJaccard dj = dice_jaccard(preds[i], gts[i], c);
            m.dice += dj.dice;
            m.jaccard += dj.jaccard;
            AsdResult a = asd(preds[i], gts[i], w, h, c);
            if (a.defined) {
                asd_total += a.value;
                ++m.asd_cases;
            } else {
                ++m.asd_undefined;
            }
        }
        m.dice /= report.n_cases;
        m.jaccard /= report.n_cases;
        m.asd = m.asd_cases > 0 ? asd_total / m.asd_cases : 0.0;
        report.per_class[c] = m;
    }

    ClassMetrics& macro = report.macro;
    int asd_classes = 0;
    for (int c = 1; c < n_classes; ++c) {
        const ClassMetrics& m = report.per_class[c];
        macro.dice += m.dice;
        macro.jaccard += m.jaccard;
        macro.asd_cases += m.asd_cases;
        macro.asd_undefined += m.asd_undefined;
        if (m.asd_cases > 0) {
            macro.asd += m.asd;
            ++asd_classes;
        }
    }
    macro.dice /= n_classes - 1;
    macro.jaccard /= n_classes - 1;
    macro.asd = asd_classes > 0 ? macro.asd / asd_classes : 0.0;
    return report;
}

namespace {

nlohmann::json metrics_json(const ClassMetrics& m) {
    nlohmann::json j;
    j["dice"] = m.dice;
    j["jaccard"] = m.jaccard;
    j["asd"] = m.asd_cases > 0 ? nlohmann::json(m.asd) : nlohmann::json(nullptr);
    j["asd_cases"] = m.asd_cases;
    j["asd_undefined"] = m.asd_undefined;
    return j;
}

}  // namespace

nlohmann::json eval_report_json(const EvalReport& report) {
    nlohmann::json j;
    j["n_cases"] = report.n_cases;
    j["n_classes"] = report.n_classes;
    nlohmann::json pc;
    for (const auto& [cls, m] : report.per_class) pc[std::to_string(cls)] = metrics_json(m);
    j["per_class"] = pc;
    j["macro"] = metrics_json(report.macro);
    return j;
}

void save_eval_report(const EvalReport& report, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ContractError("save_eval_report: cannot open " + path);
    os << eval_report_json(report).dump(2) << "\n";
}

MeanStd mean_std(const std::vector<double>& xs) {
    if (xs.empty()) throw ContractError("mean_std: no values");
    MeanStd out;
    for (double x : xs) out.mean += x;
    out.mean /= static_cast<double>(xs.size());
    if (xs.size() >= 2) {
        double ss = 0.0;
        for (double x : xs) ss += (x - out.mean) * (x - out.mean);
        out.std_dev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
        out.has_std = true;
    }
    return out;
}

RunAggregate aggregate_runs(const std::vector<EvalReport>& reports) {
    if (reports.empty()) throw ContractError("aggregate_runs: no reports");
    std::vector<double> dice, jacc, asd_vals;
    for (const EvalReport& r : reports) {
        dice.push_back(r.macro.dice);
        jacc.push_back(r.macro.jaccard);
        if (r.macro.asd_cases > 0) asd_vals.push_back(r.macro.asd);
    }
    RunAggregate agg;
    agg.n_runs = static_cast<int>(reports.size());
    agg.dice = mean_std(dice);
    agg.jaccard = mean_std(jacc);
    if (!asd_vals.empty()) agg.asd = mean_std(asd_vals);
    return agg;
}

}  // namespace dacl
