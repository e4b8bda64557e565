#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dacl/config.hpp"
#include "dacl/memory_bank.hpp"
#include "dacl/metrics.hpp"
#include "dacl/model.hpp"
#include "dacl/synth.hpp"
#include "dacl/tensor.hpp"

namespace dacl {

// Gaussian ramp base * exp(-sharpness * (1 - t/t_max)^2), valid on [0, t_max].
// Reaches exactly `base` at t = t_max.
double warmup_lambda(int t, int t_max, double base, double sharpness);

struct Lambdas {
    double cl = 0.0;
    double cross = 1.0;
};

// Loss weights at step t (0-based). During the gate (t < warmup_gate_iters)
// the contrastive weight is zero and the cross weight is pinned to 1; after
// it the ramp applies, unless a non-negative override replaces it.
Lambdas effective_lambdas(const TrainConfig& cfg, int t);

// Pixel-mean cross entropy of softmax(logits) against hard labels.
tc::Tensor pixel_cross_entropy(tc::Tape& tape, const tc::Tensor& logits,
                               const std::vector<std::uint8_t>& labels, int n_classes);

// 0.5 * (CE + (1 - mean soft Dice over all classes)), one image.
tc::Tensor supervised_ce_dice(tc::Tape& tape, const tc::Tensor& logits,
                              const std::vector<std::uint8_t>& labels, int n_classes);

// Row-wise argmax over (rows, n_cols) scores; ties go to the lowest index.
std::vector<std::uint8_t> argmax_labels(const std::vector<double>& scores, int n_cols);

// Row-wise softmax values, detached numeric helper.
std::vector<double> softmax_rows(const std::vector<double>& scores, int n_cols);

struct StepStats {
    int t = 0;
    double loss_total = 0.0;
    double loss_sup = 0.0;
    double loss_cross = 0.0;
    double loss_cl = 0.0;
    double lambda_cl = 0.0;
    std::vector<int> bank_fill;          // per class, after this step's pushes
    std::vector<int> anchors_per_class;  // anchors that entered the loss
};

// One JSONL record with fixed key order and %.17g floats; byte-stable for
// identical runs.
std::string step_stats_json(const StepStats& s);

// Cross-supervised pair of segmentation models with the density-aware
// contrastive branch. Owns the dataset copy, banks, optimizers, and the
// derived RNG streams; a fixed (dataset, config) pair makes the whole
// trajectory reproducible bit for bit.
class Trainer {
public:
    Trainer(Dataset dataset, TrainConfig cfg);

    StepStats step();

    // Ensemble prediction: mean of both models' softmax, argmax, ties low.
    std::vector<std::uint8_t> predict(const ToyScene& scene) const;
    EvalReport evaluate() const;  // over the test split

    int t() const { return t_; }
    const TrainConfig& config() const { return cfg_; }
    const Dataset& dataset() const { return data_; }
    const GridMaps& maps() const { return maps_; }
    const SegModel& model_a() const { return model_a_; }
    const SegModel& model_b() const { return model_b_; }
    const BankSet& banks() const { return banks_; }

    // Model parameters and the step counter; banks, optimizer momentum, and
    // RNG streams restart fresh on load.
    void save_checkpoint(const std::string& path) const;
    void load_checkpoint(const std::string& path);

private:
    TrainConfig cfg_;
    Dataset data_;
    GridMaps maps_;
    SegModel model_a_;
    SegModel model_b_;
    tc::Sgd opt_a_;
    tc::Sgd opt_b_;
    BankSet banks_;
    std::mt19937_64 batch_rng_;
    std::mt19937_64 sampler_rng_;
    std::mt19937_64 dropout_rng_;
    std::uint64_t seq_counter_ = 0;
    int t_ = 0;
};

}  // namespace dacl
