#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace dacl {

struct DiceJaccard {
    double dice = 0.0;     // percent
    double jaccard = 0.0;  // percent
};

// Overlap between pred==class_id and gt==class_id. Both masks empty scores a
// perfect 100; exactly one empty scores 0.
DiceJaccard dice_jaccard(const std::vector<uint8_t>& pred, const std::vector<uint8_t>& gt,
                         int class_id);

// Mask pixels 4-adjacent to a non-mask pixel or lying on the image edge,
// as (x, y) pixel centers.
std::vector<std::pair<int, int>> boundary_points(const std::vector<uint8_t>& mask, int w, int h);

struct AsdResult {
    bool defined = false;
    double value = 0.0;  // pixels
};

// Mean nearest-boundary distance pooled over both directions. Either side
// empty leaves the result undefined.
AsdResult asd(const std::vector<uint8_t>& pred, const std::vector<uint8_t>& gt, int w, int h,
              int class_id);

struct ClassMetrics {
    double dice = 0.0;
    double jaccard = 0.0;
    double asd = 0.0;       // mean over defined cases; meaningful only when asd_cases > 0
    int asd_cases = 0;      // cases where ASD was defined
    int asd_undefined = 0;  // cases excluded for an empty mask
};

struct EvalReport {
    int n_cases = 0;
    int n_classes = 0;
    std::map<int, ClassMetrics> per_class;  // every class, background included
    ClassMetrics macro;                     // averaged over foreground classes only
};

EvalReport evaluate_cases(const std::vector<std::vector<uint8_t>>& preds,
                          const std::vector<std::vector<uint8_t>>& gts, int w, int h, int n_classes);

// Stable key order; undefined ASD serializes as null.
nlohmann::json eval_report_json(const EvalReport& report);
void save_eval_report(const EvalReport& report, const std::string& path);

struct MeanStd {
    double mean = 0.0;
    double std_dev = 0.0;  // sample std, n-1 denominator
    bool has_std = false;  // false for a single value
};

MeanStd mean_std(const std::vector<double>& xs);

struct RunAggregate {
    MeanStd dice;
    MeanStd jaccard;
    MeanStd asd;
    int n_runs = 0;
};

// Macro metrics pooled across repeated runs; ASD aggregates over the runs
// where it was defined.
RunAggregate aggregate_runs(const std::vector<EvalReport>& reports);

}  // namespace dacl
