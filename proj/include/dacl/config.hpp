#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace dacl {

struct TrainConfig {
    // sampling
    int n_q = 256;
    int n_p_plus = 512;
    int n_p_minus = 512;
    double tau = 0.4;
    double phi = 0.5;
    int bank_capacity = 1000;
    std::vector<int> scales = {4, 8, 16};
    double gamma = 1.0;
    // schedule
    double lambda_cross = 1.0;
    double warmup_base = 0.1;
    double warmup_sharpness = 5.0;
    int t_max = 3000;
    int warmup_gate_iters = 1000;
    double lambda_cl_override = -1.0;  // >= 0 replaces the schedule after the gate
    // optimizer
    double lr = 0.01;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    // loop
    int batch_size = 4;
    double labeled_fraction = 0.05;
    uint64_t seed = 1;
    int eval_every = 0;  // 0 = final evaluation only
    // model dims
    int conv1_channels = 6;
    int conv2_channels = 12;
    int proj_hidden = 12;
    int d_proj = 8;
    // ablation toggles
    bool pcl_random_sampling = false;
    bool single_scale = false;
    bool no_bank = false;
    bool uniform_w = false;
    bool infonce_denominator = false;
    bool decoder_dropout = false;
};

// Applies one key=value pair; unknown keys and unparseable values raise
// ConfigError naming the key.
void apply_config_kv(TrainConfig& cfg, const std::string& key, const std::string& value);

// key=value lines; blank lines and #-comments ignored.
std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string& path);

// Field-by-field range checks; raises ConfigError naming the first bad field.
void validate_config(const TrainConfig& cfg);

// Every field as "key=value" lines in a fixed order; doubles round-trip.
std::string canonical_config_string(const TrainConfig& cfg);

// FNV-1a over the canonical string.
uint64_t config_hash(const TrainConfig& cfg);

}  // namespace dacl
