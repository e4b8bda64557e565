#include "dacl/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dacl/errors.hpp"
#include "dacl/geometry.hpp"

namespace dacl {

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* want) {
    throw ConfigError("config key '" + key + "': expected " + want + ", got '" + value + "'");
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        int v = std::stoi(value, &pos);
        if (pos != value.size()) bad_value(key, value, "an integer");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        bad_value(key, value, "an integer");
    }
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size() || value.front() == '-') bad_value(key, value, "an unsigned integer");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        bad_value(key, value, "an unsigned integer");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) bad_value(key, value, "a real number");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        bad_value(key, value, "a real number");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    bad_value(key, value, "a boolean (true/false/1/0)");
}

std::vector<int> parse_scales(const std::string& key, const std::string& value) {
    std::vector<int> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_int(key, item));
    if (out.empty()) bad_value(key, value, "comma-separated neighborhood sizes");
    return out;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void apply_config_kv(TrainConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "n_q") cfg.n_q = parse_int(key, value);
    else if (key == "n_p_plus") cfg.n_p_plus = parse_int(key, value);
    else if (key == "n_p_minus") cfg.n_p_minus = parse_int(key, value);
    else if (key == "tau") cfg.tau = parse_double(key, value);
    else if (key == "phi") cfg.phi = parse_double(key, value);
    else if (key == "bank_capacity") cfg.bank_capacity = parse_int(key, value);
    else if (key == "scales") cfg.scales = parse_scales(key, value);
    else if (key == "gamma") cfg.gamma = parse_double(key, value);
    else if (key == "lambda_cross") cfg.lambda_cross = parse_double(key, value);
    else if (key == "warmup_base") cfg.warmup_base = parse_double(key, value);
    else if (key == "warmup_sharpness") cfg.warmup_sharpness = parse_double(key, value);
    else if (key == "t_max") cfg.t_max = parse_int(key, value);
    else if (key == "warmup_gate_iters") cfg.warmup_gate_iters = parse_int(key, value);
    else if (key == "lambda_cl") cfg.lambda_cl_override = parse_double(key, value);
    else if (key == "lr") cfg.lr = parse_double(key, value);
    else if (key == "momentum") cfg.momentum = parse_double(key, value);
    else if (key == "weight_decay") cfg.weight_decay = parse_double(key, value);
    else if (key == "batch_size") cfg.batch_size = parse_int(key, value);
    else if (key == "labeled_fraction") cfg.labeled_fraction = parse_double(key, value);
    else if (key == "seed") cfg.seed = parse_u64(key, value);
    else if (key == "eval_every") cfg.eval_every = parse_int(key, value);
    else if (key == "conv1_channels") cfg.conv1_channels = parse_int(key, value);
    else if (key == "conv2_channels") cfg.conv2_channels = parse_int(key, value);
    else if (key == "proj_hidden") cfg.proj_hidden = parse_int(key, value);
    else if (key == "d_proj") cfg.d_proj = parse_int(key, value);
    else if (key == "pcl_random_sampling") cfg.pcl_random_sampling = parse_bool(key, value);
    else if (key == "single_scale") cfg.single_scale = parse_bool(key, value);
    else if (key == "no_bank") cfg.no_bank = parse_bool(key, value);
    else if (key == "uniform_w") cfg.uniform_w = parse_bool(key, value);
    else if (key == "infonce_denominator") cfg.infonce_denominator = parse_bool(key, value);
    else if (key == "decoder_dropout") cfg.decoder_dropout = parse_bool(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file '" + path + "'");
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        size_t b = line.find_last_not_of(" \t\r");
        line = line.substr(a, b - a + 1);
        size_t eq = line.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value, got '" +
                              line + "'");
        }
        auto strip = [](std::string s) {
            size_t x = s.find_first_not_of(" \t");
            size_t y = s.find_last_not_of(" \t");
            return x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
        };
        out.emplace_back(strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
    }
    return out;
}

void validate_config(const TrainConfig& cfg) {
    auto positive_int = [](const char* name, int v) {
        if (v < 1) throw ConfigError(std::string("config key '") + name + "': must be positive");
    };
    positive_int("n_q", cfg.n_q);
    positive_int("n_p_plus", cfg.n_p_plus);
    positive_int("n_p_minus", cfg.n_p_minus);
    positive_int("bank_capacity", cfg.bank_capacity);
    positive_int("t_max", cfg.t_max);
    positive_int("conv1_channels", cfg.conv1_channels);
    positive_int("conv2_channels", cfg.conv2_channels);
    positive_int("proj_hidden", cfg.proj_hidden);
    positive_int("d_proj", cfg.d_proj);
    if (!(cfg.tau > 0.0)) throw ConfigError("config key 'tau': must be positive");
    if (!(cfg.phi >= 0.0 && cfg.phi < 1.0)) throw ConfigError("config key 'phi': must be in [0, 1)");
    make_scale_set(cfg.scales);  // strictly increasing, all >= 1
    if (!(cfg.gamma > 0.0)) throw ConfigError("config key 'gamma': must be positive");
    if (cfg.lambda_cross < 0.0) throw ConfigError("config key 'lambda_cross': must be non-negative");
    if (!(cfg.warmup_base > 0.0)) throw ConfigError("config key 'warmup_base': must be positive");
    if (cfg.warmup_sharpness < 0.0) {
        throw ConfigError("config key 'warmup_sharpness': must be non-negative");
    }
    if (cfg.warmup_gate_iters < 0) {
        throw ConfigError("config key 'warmup_gate_iters': must be non-negative");
    }
    if (!(cfg.lr > 0.0)) throw ConfigError("config key 'lr': must be positive");
    if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) {
        throw ConfigError("config key 'momentum': must be in [0, 1)");
    }
    if (cfg.weight_decay < 0.0) throw ConfigError("config key 'weight_decay': must be non-negative");
    if (cfg.batch_size < 2) {
        throw ConfigError("config key 'batch_size': must be at least 2 to mix labeled and unlabeled");
    }
    if (!(cfg.labeled_fraction > 0.0 && cfg.labeled_fraction <= 1.0)) {
        throw ConfigError("config key 'labeled_fraction': must be in (0, 1]");
    }
    if (cfg.eval_every < 0) throw ConfigError("config key 'eval_every': must be non-negative");
}

std::string canonical_config_string(const TrainConfig& cfg) {
    std::string scales;
    for (size_t i = 0; i < cfg.scales.size(); ++i) {
        if (i) scales += ',';
        scales += std::to_string(cfg.scales[i]);
    }
    std::string out;
    auto kv = [&out](const std::string& k, const std::string& v) { out += k + "=" + v + "\n"; };
    kv("n_q", std::to_string(cfg.n_q));
    kv("n_p_plus", std::to_string(cfg.n_p_plus));
    kv("n_p_minus", std::to_string(cfg.n_p_minus));
    kv("tau", fmt(cfg.tau));
    kv("phi", fmt(cfg.phi));
    kv("bank_capacity", std::to_string(cfg.bank_capacity));
    kv("scales", scales);
    kv("gamma", fmt(cfg.gamma));
    kv("lambda_cross", fmt(cfg.lambda_cross));
    kv("warmup_base", fmt(cfg.warmup_base));
    kv("warmup_sharpness", fmt(cfg.warmup_sharpness));
    kv("t_max", std::to_string(cfg.t_max));
    kv("warmup_gate_iters", std::to_string(cfg.warmup_gate_iters));
    kv("lambda_cl", fmt(cfg.lambda_cl_override));
    kv("lr", fmt(cfg.lr));
    kv("momentum", fmt(cfg.momentum));
    kv("weight_decay", fmt(cfg.weight_decay));
    kv("batch_size", std::to_string(cfg.batch_size));
    kv("labeled_fraction", fmt(cfg.labeled_fraction));
    kv("seed", std::to_string(cfg.seed));
    kv("eval_every", std::to_string(cfg.eval_every));
    kv("conv1_channels", std::to_string(cfg.conv1_channels));
    kv("conv2_channels", std::to_string(cfg.conv2_channels));
    kv("proj_hidden", std::to_string(cfg.proj_hidden));
    kv("d_proj", std::to_string(cfg.d_proj));
    kv("pcl_random_sampling", cfg.pcl_random_sampling ? "true" : "false");
    kv("single_scale", cfg.single_scale ? "true" : "false");
    kv("no_bank", cfg.no_bank ? "true" : "false");
    kv("uniform_w", cfg.uniform_w ? "true" : "false");
    kv("infonce_denominator", cfg.infonce_denominator ? "true" : "false");
    kv("decoder_dropout", cfg.decoder_dropout ? "true" : "false");
    return out;
}

uint64_t config_hash(const TrainConfig& cfg) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_config_string(cfg)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace dacl
