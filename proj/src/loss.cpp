#include "dacl/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dacl/errors.hpp"

namespace dacl {

namespace {

void check_gamma(const std::vector<double>& gamma) {
    for (double g : gamma) {
        if (!(g > 0.0)) {
            throw ConfigError("positiveness: gamma must be positive, got " + std::to_string(g));
        }
    }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

std::vector<double> positiveness_from_logits(const std::vector<double>& logits,
                                             const std::vector<double>& gamma) {
    if (logits.empty()) throw ContractError("positiveness: empty logit vector");
    if (gamma.size() != logits.size()) {
        throw ContractError("positiveness: gamma size " + std::to_string(gamma.size()) +
                            " does not match logit count " + std::to_string(logits.size()));
    }
    check_gamma(gamma);
    double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> w(logits.size());
    double denom = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        w[i] = std::exp(logits[i] - mx);
        denom += w[i];
    }
    for (size_t i = 0; i < w.size(); ++i) w[i] = w[i] / denom / gamma[i];
    return w;
}

PositivenessVector positiveness(const std::vector<ClassEmbedding>& anchors,
                                const std::vector<double>& center_unit,
                                const std::vector<double>& gamma) {
    if (anchors.empty()) throw ContractError("positiveness: no anchors");
    PositivenessVector out;
    out.class_id = anchors.front().class_id;
    out.gamma = gamma;
    std::vector<double> logits(anchors.size());
    for (size_t i = 0; i < anchors.size(); ++i) {
        if (anchors[i].class_id != out.class_id) {
            throw ContractError("positiveness: mixed class ids in anchor set");
        }
        if (anchors[i].vec.size() != center_unit.size()) {
            throw DimensionError("positiveness: anchor dim " + std::to_string(anchors[i].vec.size()) +
                                 " vs center dim " + std::to_string(center_unit.size()));
        }
        logits[i] = dot(anchors[i].vec, center_unit);
    }
    out.w = positiveness_from_logits(logits, gamma);
    return out;
}

ContrastiveTerms soft_contrastive_loss(tc::Tape& tape, std::vector<ClassLossInputs> classes,
                                       double tau, bool infonce_denominator) {
    if (!(tau > 0.0)) {
        throw ConfigError("soft_contrastive_loss: tau must be positive, got " + std::to_string(tau));
    }
    std::stable_sort(classes.begin(), classes.end(),
                     [](const ClassLossInputs& a, const ClassLossInputs& b) { return a.class_id < b.class_id; });

    ContrastiveTerms out;
    out.tau = tau;
    tc::Tensor total;
    bool have_total = false;

    for (const ClassLossInputs& cls : classes) {
        if (cls.anchors.empty() || cls.negatives.empty()) continue;
        const size_t d = cls.center.size();
        if (d == 0) throw ContractError("soft_contrastive_loss: empty center for class " + std::to_string(cls.class_id));
        if (cls.w.size() != cls.anchors.size()) {
            throw ContractError("soft_contrastive_loss: weight count " + std::to_string(cls.w.size()) +
                                " does not match anchor count " + std::to_string(cls.anchors.size()));
        }
        for (const tc::Tensor& a : cls.anchors) {
            if (a.shape.size() != 2 || a.shape[0] != 1 || static_cast<size_t>(a.shape[1]) != d) {
                throw DimensionError("soft_contrastive_loss: anchors must be (1, " + std::to_string(d) + ")");
            }
        }
        double log_w_sum = 0.0;
        for (double wi : cls.w) {
            if (!(wi > 0.0)) {
                throw ContractError("soft_contrastive_loss: weights must be positive, got " + std::to_string(wi));
            }
            log_w_sum += std::log(wi);
        }

        const int k = static_cast<int>(cls.anchors.size());
        tc::Tensor anchor_mat = tc::concat_rows(tape, cls.anchors);  // (K, D)

        tc::Tensor center_col = tc::constant({static_cast<int>(d), 1}, cls.center);
        tc::Tensor sim_pos = tc::matmul(tape, anchor_mat, center_col);  // (K, 1)

        // Key matrix columns: optional center first, then the negatives.
        const int j = static_cast<int>(cls.negatives.size()) + (infonce_denominator ? 1 : 0);
        std::vector<double> keys(d * static_cast<size_t>(j), 0.0);
        int col = 0;
        if (infonce_denominator) {
            for (size_t r = 0; r < d; ++r) keys[r * j] = cls.center[r];
            col = 1;
        }
        for (const std::vector<double>& neg : cls.negatives) {
            if (neg.size() != d) {
                throw DimensionError("soft_contrastive_loss: negative dim " + std::to_string(neg.size()) +
                                     " vs center dim " + std::to_string(d));
            }
            for (size_t r = 0; r < d; ++r) keys[r * j + col] = neg[r];
            ++col;
        }
        tc::Tensor key_mat = tc::constant({static_cast<int>(d), j}, keys);
        tc::Tensor sim_den = tc::matmul(tape, anchor_mat, key_mat);  // (K, J)
        tc::Tensor logits = tc::scale(tape, sim_den, 1.0 / tau);

        // Detached row maxes keep exp in range without entering the graph.
        const std::vector<double>& lv = logits.values();
        std::vector<double> row_max(k), neg_max(static_cast<size_t>(k) * j);
        for (int r = 0; r < k; ++r) {
            double mx = lv[static_cast<size_t>(r) * j];
            for (int c = 1; c < j; ++c) mx = std::max(mx, lv[static_cast<size_t>(r) * j + c]);
            row_max[r] = mx;
            for (int c = 0; c < j; ++c) neg_max[static_cast<size_t>(r) * j + c] = -mx;
        }
        tc::Tensor shifted = tc::add(tape, logits, tc::constant({k, j}, neg_max));
        tc::Tensor exp_sum = tc::sum_lastdim(tape, tc::exp(tape, shifted));  // (K, 1)
        tc::Tensor lse = tc::add(tape, tc::log(tape, exp_sum), tc::constant({k, 1}, row_max));

        // -log w_i - m_i.c/tau + lse_i, summed over anchors.
        tc::Tensor body = tc::add(tape, lse, tc::scale(tape, sim_pos, -1.0 / tau));
        tc::Tensor term = tc::add(tape, tc::sum(tape, body), tc::scalar_constant(-log_w_sum));

        out.per_class.emplace_back(cls.class_id, term.scalar());
        ++out.contributing;
        total = have_total ? tc::add(tape, total, term) : term;
        have_total = true;
    }

    out.total = have_total ? total : tc::scalar_constant(0.0);
    return out;
}

std::vector<double> claim1_verify(const std::vector<double>& w, int steps, double lr) {
    if (w.empty()) throw ConfigError("claim1_verify: empty weight vector");
    for (double wi : w) {
        if (!(wi > 0.0)) {
            throw ConfigError("claim1_verify: weights must be positive, got " + std::to_string(wi));
        }
    }
    if (steps < 1) throw ConfigError("claim1_verify: steps must be >= 1");
    if (!(lr > 0.0)) throw ConfigError("claim1_verify: lr must be positive");

    const int k = static_cast<int>(w.size());
    double w_sum = 0.0;
    for (double wi : w) w_sum += wi;

    std::vector<double> z(k, 0.0);
    double resid = 0.0;
    for (int step = 0; step < steps; ++step) {
        tc::Tape tape;
        tc::Tensor zt = tc::param({1, k}, z);
        tc::Tensor s = tc::softmax_lastdim(tape, zt);
        tc::Tensor weighted = tc::mul(tape, tc::constant({1, k}, w), tc::log(tape, s));
        tc::Tensor objective = tc::scale(tape, tc::sum(tape, weighted), -1.0);
        tape.backward(objective);

        const std::vector<double>& sv = s.values();
        resid = 0.0;
        for (int i = 0; i < k; ++i) resid = std::max(resid, std::abs(sv[i] - w[i] / w_sum));
        if (resid <= 1e-6) return sv;

        const std::vector<double>& g = *zt.grad;
        for (int i = 0; i < k; ++i) z[i] -= lr * g[i] / w_sum;
    }
    throw ContractError("claim1_verify: did not converge, residual " + std::to_string(resid));
}

}  // namespace dacl
