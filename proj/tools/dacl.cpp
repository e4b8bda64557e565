#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dacl/config.hpp"
#include "dacl/errors.hpp"
#include "dacl/geometry.hpp"
#include "dacl/loss.hpp"
#include "dacl/memory_bank.hpp"
#include "dacl/metrics.hpp"
#include "dacl/oracles.hpp"
#include "dacl/runner.hpp"
#include "dacl/sampler.hpp"
#include "dacl/synth.hpp"
#include "dacl/tensor.hpp"
#include "dacl/trainer.hpp"

#ifndef DACL_BUILD_ID
#define DACL_BUILD_ID "unknown"
#endif

namespace fs = std::filesystem;
using namespace dacl;

namespace {

struct CliOpts {
    std::string config_path;
    std::uint64_t seed = 1;
    std::string out;
    std::string data = "dataset";
    std::string ckpt;
    std::string ablate = "none";
    double lambda_cl = -1.0;
    int eval_every = 0;
    int scenes = 100;
    double labeled_frac = 0.05;
    bool force = false;

    CLI::Option* seed_opt = nullptr;
    CLI::Option* lambda_opt = nullptr;
    CLI::Option* eval_opt = nullptr;
    CLI::Option* ablate_opt = nullptr;
};

void apply_ablation(TrainConfig& cfg, const std::string& name) {
    cfg.pcl_random_sampling = false;
    cfg.single_scale = false;
    cfg.no_bank = false;
    cfg.uniform_w = false;
    if (name == "none") return;
    if (name == "pcl") {
        cfg.pcl_random_sampling = cfg.no_bank = cfg.uniform_w = true;
    } else if (name == "da") {
        cfg.single_scale = cfg.no_bank = cfg.uniform_w = true;
    } else if (name == "ms") {
        cfg.no_bank = cfg.uniform_w = true;
    } else if (name == "bank") {
        cfg.uniform_w = true;
    } else {
        throw ConfigError("unknown ablation '" + name + "' (expected none, pcl, da, ms, bank)");
    }
}

// Defaults, then config-file keys, then flags, in that strict order. The
// dataset's labeled fraction seeds the default so resolved configs describe
// the data actually trained on.
TrainConfig build_config(const Dataset& data, const CliOpts& o) {
    TrainConfig cfg;
    cfg.labeled_fraction = data.labeled_fraction;
    if (!o.config_path.empty()) {
        for (const auto& [key, value] : parse_config_file(o.config_path)) {
            apply_config_kv(cfg, key, value);
        }
    }
    if (o.seed_opt && o.seed_opt->count() > 0) cfg.seed = o.seed;
    if (o.ablate_opt && o.ablate_opt->count() > 0) apply_ablation(cfg, o.ablate);
    if (o.lambda_opt && o.lambda_opt->count() > 0) cfg.lambda_cl_override = o.lambda_cl;
    if (o.eval_opt && o.eval_opt->count() > 0) cfg.eval_every = o.eval_every;
    validate_config(cfg);
    return cfg;
}

int cmd_gen_data(const CliOpts& o) {
    fs::path dir(o.out);
    if (fs::exists(dir) && fs::is_directory(dir) && !fs::is_empty(dir) && !o.force) {
        std::fprintf(stderr, "refusing to write into non-empty directory '%s' (pass --force to overwrite)\n",
                     o.out.c_str());
        return 3;
    }
    write_dataset(o.out, o.scenes, o.labeled_frac, o.seed, SceneConfig{});
    Dataset d = load_dataset(o.out);
    std::printf("wrote %zu scenes to %s (labeled %zu, unlabeled %zu, test %zu)\n", d.scenes.size(),
                o.out.c_str(), d.split.labeled.size(), d.split.unlabeled.size(),
                d.split.test.size());
    return 0;
}

int cmd_train(const CliOpts& o) {
    Dataset data = load_dataset(o.data);
    TrainConfig cfg = build_config(data, o);
    RunPaths paths;
    EvalReport rep = run_training(data, cfg, o.out, DACL_BUILD_ID, &paths);
    std::printf("trained %d steps; test macro dice %.2f, jaccard %.2f over %d scenes\n", cfg.t_max,
                rep.macro.dice, rep.macro.jaccard, rep.n_cases);
    std::printf("outputs: %s, %s, %s\n", paths.train_log.c_str(), paths.eval_report.c_str(),
                paths.checkpoint.c_str());
    return 0;
}

int cmd_eval(const CliOpts& o) {
    Dataset data = load_dataset(o.data);
    TrainConfig cfg = build_config(data, o);
    EvalReport rep = run_eval(data, cfg, o.ckpt, o.out, DACL_BUILD_ID);
    std::printf("test macro dice %.2f, jaccard %.2f over %d scenes\n", rep.macro.dice,
                rep.macro.jaccard, rep.n_cases);
    for (const auto& [c, m] : rep.per_class) {
        std::printf("  class %d: dice %.2f, jaccard %.2f", c, m.dice, m.jaccard);
        if (m.asd_cases > 0) std::printf(", asd %.3f px (%d cases)", m.asd, m.asd_cases);
        std::printf("\n");
    }
    return 0;
}

int cmd_dump_embeddings(const CliOpts& o) {
    Dataset data = load_dataset(o.data);
    TrainConfig cfg = build_config(data, o);
    EmbeddingDump dump = run_dump_embeddings(data, cfg, o.ckpt, o.out, DACL_BUILD_ID);
    std::printf("wrote %d prototypes to %s\n", dump.rows, dump.csv_path.c_str());
    std::printf("compactness: silhouette %.4f, davies-bouldin %.4f, v-measure %.4f\n",
                dump.compactness.silhouette, dump.compactness.davies_bouldin,
                dump.compactness.v_measure);
    return 0;
}

// ---- selftest ----------------------------------------------------------

struct CheckResult {
    std::string id;
    bool ok = true;
    std::string detail;
};

CheckResult check_claim1() {
    CheckResult r{"dacl-loss/claim1-simplex-optimum", true, ""};
    std::vector<double> s = claim1_verify({1.0, 2.0, 3.0}, 50000, 0.5);
    std::vector<double> want = {1.0 / 6.0, 1.0 / 3.0, 1.0 / 2.0};
    double err = 0.0;
    for (size_t i = 0; i < want.size(); ++i) err = std::max(err, std::abs(s[i] - want[i]));
    r.ok = err < 1e-4;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "observed s*=[%.6f, %.6f, %.6f], expected [1/6, 1/3, 1/2] within 1e-4", s[0], s[1],
                  s[2]);
    r.detail = buf;
    return r;
}

CheckResult check_warmup() {
    CheckResult r{"cotrain-framework/warmup-endpoint", true, ""};
    double end = warmup_lambda(3000, 3000, 0.1, 5.0);
    double mid = warmup_lambda(1500, 3000, 0.1, 5.0);
    double mid_want = 0.1 * std::exp(-1.25);
    TrainConfig cfg;
    Lambdas gate = effective_lambdas(cfg, 999);
    bool end_ok = end == 0.1;
    bool mid_ok = std::abs(mid - mid_want) < 1e-12;
    bool gate_ok = gate.cl == 0.0 && gate.cross == 1.0;
    r.ok = end_ok && mid_ok && gate_ok;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "observed lambda(t_max)=%.17g (want 0.1 exact), lambda(t_max/2)-0.1e^-1.25=%.3g, "
                  "gated (cl, cross)=(%g, %g) (want (0, 1))",
                  end, mid - mid_want, gate.cl, gate.cross);
    r.detail = buf;
    return r;
}

CheckResult check_density_oracle() {
    CheckResult r{"geometry-density/multiscale-oracle", true, ""};
    std::mt19937_64 rng(411);
    std::uniform_int_distribution<int> size_d(2, 60), dim_d(2, 16);
    std::uint64_t seq = 0;
    std::vector<int> scales = {2, 5, 9};
    double err = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        auto pool = oracle::random_pool(rng, size_d(rng), dim_d(rng), seq);
        auto got = density_multi_scale(pool, pool, make_scale_set(scales));
        auto want = oracle::densities_multi(pool, scales);
        for (size_t i = 0; i < want.size(); ++i) err = std::max(err, std::abs(got[i] - want[i]));
    }
    r.ok = err < 1e-12;
    char buf[120];
    std::snprintf(buf, sizeof buf, "observed max abs err %.3g vs oracle, expected < 1e-12", err);
    r.detail = buf;
    return r;
}

CheckResult check_sampler_oracle() {
    CheckResult r{"sampler/topk-oracle", true, ""};
    std::mt19937_64 rng(412);
    std::uniform_int_distribution<int> size_d(0, 30), n_d(1, 12);
    std::uint64_t seq = 0;
    int bad = 0;
    for (int trial = 0; trial < 20; ++trial) {
        auto batch = oracle::random_pool(rng, size_d(rng) + 1, 6, seq, true);
        auto bank = oracle::random_pool(rng, size_d(rng), 6, seq, true);
        int n_q = n_d(rng);
        auto anchors = sample_anchors(batch, n_q);
        std::set<std::uint64_t> got_a, exclude;
        for (const auto& e : anchors) got_a.insert(e.seq_id);
        exclude = got_a;
        if (got_a != oracle::anchors_oracle(batch, n_q)) ++bad;
        std::vector<std::vector<ClassEmbedding>> sets(3);
        for (int c = 0; c < 3; ++c) {
            sets[c] = oracle::random_pool(rng, size_d(rng) % 6, 4, seq, true);
            for (auto& e : sets[c]) e.class_id = c;
        }
        auto negs = sample_negatives(sets, 0, 1000, rng);
        std::set<std::uint64_t> got_n;
        for (const auto& e : negs) got_n.insert(e.seq_id);
        if (got_n != oracle::negatives_pool_oracle(sets, 0)) ++bad;
    }
    // positives get their own strict pass with a fixed request size
    for (int trial = 0; trial < 20; ++trial) {
        auto batch = oracle::random_pool(rng, size_d(rng) + 1, 5, seq, true);
        auto bank = oracle::random_pool(rng, size_d(rng), 5, seq, true);
        std::set<std::uint64_t> exclude;
        for (const auto& e : sample_anchors(batch, 3)) exclude.insert(e.seq_id);
        int n_p = n_d(rng);
        auto positives = sample_positives(batch, bank, n_p, exclude);
        std::set<std::uint64_t> got;
        for (const auto& e : positives) got.insert(e.seq_id);
        if (got != oracle::positives_oracle(batch, bank, n_p, exclude)) ++bad;
    }
    r.ok = bad == 0;
    char buf[120];
    std::snprintf(buf, sizeof buf, "observed %d mismatched trials vs full-sort oracles, expected 0",
                  bad);
    r.detail = buf;
    return r;
}

CheckResult check_gradients() {
    CheckResult r{"dacl-loss/anchor-gradcheck", true, ""};
    std::mt19937_64 rng(413);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> w_d(0.1, 1.0);
    const double h = 1e-5;
    double worst = 0.0;
    bool detached_ok = true;
    auto unit = [&](int d) {
        std::vector<double> v(d);
        double n = 0.0;
        for (double& x : v) {
            x = g(rng);
            n += x * x;
        }
        n = std::sqrt(n);
        for (double& x : v) x /= n;
        return v;
    };
    for (int trial = 0; trial < 5; ++trial) {
        int d = 4, na = 2, nn = 3;
        std::vector<std::vector<double>> raw, negatives;
        std::vector<double> center = unit(d), w;
        for (int i = 0; i < na; ++i) {
            raw.push_back(unit(d));
            w.push_back(w_d(rng));
        }
        for (int i = 0; i < nn; ++i) negatives.push_back(unit(d));
        auto eval = [&](const std::vector<std::vector<double>>& vals,
                        std::vector<std::vector<double>>* grads_out, bool* zeros_ok) {
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
            tc::Tensor np = tc::param({1, d}, negatives[0]);
            cls.center = center;
            cls.negatives = negatives;
            cls.w = w;
            auto terms = soft_contrastive_loss(tape, {cls}, 0.4);
            if (grads_out) {
                tape.backward(terms.total);
                for (const tc::Tensor& p : params) grads_out->push_back(*p.grad);
                if (zeros_ok) {
                    for (double v : *cp.grad) *zeros_ok = *zeros_ok && v == 0.0;
                    for (double v : *np.grad) *zeros_ok = *zeros_ok && v == 0.0;
                }
            }
            return terms.total.scalar();
        };
        std::vector<std::vector<double>> grads;
        eval(raw, &grads, &detached_ok);
        for (int i = 0; i < na; ++i) {
            for (int c = 0; c < d; ++c) {
                auto hi = raw, lo = raw;
                hi[i][c] += h;
                lo[i][c] -= h;
                double fd = (eval(hi, nullptr, nullptr) - eval(lo, nullptr, nullptr)) / (2.0 * h);
                double ad = grads[i][c];
                double rel = std::abs(ad - fd) / std::max({1e-2, std::abs(ad), std::abs(fd)});
                worst = std::max(worst, rel);
            }
        }
    }
    r.ok = worst < 1e-4 && detached_ok;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "observed worst rel err %.3g vs central differences (want < 1e-4), detached "
                  "grads zero: %s",
                  worst, detached_ok ? "yes" : "NO");
    r.detail = buf;
    return r;
}

CheckResult check_fifo() {
    CheckResult r{"memory-bank/fifo-window", true, ""};
    std::mt19937_64 rng(414);
    std::uniform_int_distribution<int> n_d(0, 5);
    ClassMemoryBank bank(0, 7);
    oracle::FifoOracle ref(7);
    std::uint64_t seq = 0;
    int bad = 0;
    for (int push = 0; push < 200; ++push) {
        auto items = oracle::random_pool(rng, n_d(rng), 3, seq, true);
        ref.push(items);
        bank.push(std::move(items));
        auto got = bank.snapshot();
        const auto& want = ref.window();
        if (got.size() != want.size()) {
            ++bad;
            continue;
        }
        for (size_t i = 0; i < got.size(); ++i) {
            if (got[i].seq_id != want[i].seq_id || got[i].vec != want[i].vec) {
                ++bad;
                break;
            }
        }
    }
    r.ok = bad == 0;
    char buf[120];
    std::snprintf(buf, sizeof buf,
                  "observed %d of 200 pushes diverging from the sliding-window oracle, expected 0",
                  bad);
    r.detail = buf;
    return r;
}

CheckResult check_metrics() {
    CheckResult r{"metrics/dice-jaccard-asd-identities", true, ""};
    std::mt19937_64 rng(415);
    std::uniform_int_distribution<int> cls(0, 3);
    const int w = 12, h = 9;
    double id_err = 0.0;
    int asd_bad = 0;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::uint8_t> pred(w * h), gt(w * h);
        for (auto& v : pred) v = static_cast<std::uint8_t>(cls(rng));
        for (auto& v : gt) v = static_cast<std::uint8_t>(cls(rng));
        for (int c = 0; c < 4; ++c) {
            DiceJaccard dj = dice_jaccard(pred, gt, c);
            id_err = std::max(id_err, std::abs(dj.jaccard - 100.0 * dj.dice / (200.0 - dj.dice)));
            AsdResult got = asd(pred, gt, w, h, c);
            auto want = oracle::asd_oracle(pred, gt, w, h, c);
            if (got.defined != want.defined || (got.defined && got.value != want.value)) ++asd_bad;
        }
    }
    r.ok = id_err < 1e-12 && asd_bad == 0;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "observed J=D/(2-D) max err %.3g (want < 1e-12), %d ASD mismatches vs brute "
                  "force (want 0)",
                  id_err, asd_bad);
    r.detail = buf;
    return r;
}

int cmd_selftest() {
    std::vector<CheckResult> results = {
        check_claim1(),  check_warmup(), check_density_oracle(), check_sampler_oracle(),
        check_gradients(), check_fifo(),   check_metrics(),
    };
    int failures = 0;
    for (const auto& r : results) {
        if (r.ok) {
            std::printf("[ pass ] %s\n", r.id.c_str());
        } else {
            ++failures;
            std::printf("[ FAIL ] %s: %s\n", r.id.c_str(), r.detail.c_str());
        }
    }
    if (failures > 0) {
        std::printf("%d of %zu checks failed\n", failures, results.size());
        return 4;
    }
    std::printf("all %zu checks passed\n", results.size());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"density-aware contrastive co-training on synthetic scenes"};
    app.require_subcommand(1);

    CliOpts o;

    CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic dataset directory");
    gen->add_option("--out", o.out, "dataset directory")->capture_default_str();
    gen->add_option("--scenes", o.scenes, "number of scenes")->capture_default_str();
    gen->add_option("--labeled-frac", o.labeled_frac, "fraction of train scenes kept labeled")
        ->capture_default_str();
    gen->add_option("--seed", o.seed, "generation seed")->capture_default_str();
    gen->add_flag("--force", o.force, "overwrite a non-empty directory");

    CLI::App* train = app.add_subcommand("train", "run the co-training loop");
    train->add_option("--data", o.data, "dataset directory")->capture_default_str();
    train->add_option("--out", o.out, "run output directory")->capture_default_str();
    train->add_option("--config", o.config_path, "key=value config file");
    o.seed_opt = train->add_option("--seed", o.seed, "training seed");
    o.ablate_opt = train->add_option("--ablate", o.ablate,
                                     "ablation preset: none, pcl, da, ms, bank");
    o.lambda_opt = train->add_option("--lambda-cl", o.lambda_cl,
                                     "fixed contrastive weight replacing the warm-up");
    o.eval_opt = train->add_option("--eval-every", o.eval_every,
                                   "periodic test evaluation interval (0 = final only)");

    CLI::App* ev = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
    ev->add_option("--data", o.data, "dataset directory")->capture_default_str();
    ev->add_option("--ckpt", o.ckpt, "checkpoint file")->required();
    ev->add_option("--out", o.out, "evaluation output directory")->capture_default_str();
    ev->add_option("--config", o.config_path, "config file matching the checkpoint");
    // eval and dump reuse the train seed/ablate flags so a resolved config replays exactly
    CLI::Option* ev_seed = ev->add_option("--seed", o.seed, "seed recorded at training time");
    CLI::Option* ev_ablate = ev->add_option("--ablate", o.ablate, "ablation preset");

    CLI::App* dump = app.add_subcommand("dump-embeddings", "dump test-split prototypes to CSV");
    dump->add_option("--data", o.data, "dataset directory")->capture_default_str();
    dump->add_option("--ckpt", o.ckpt, "checkpoint file")->required();
    dump->add_option("--out", o.out, "dump output directory")->capture_default_str();
    dump->add_option("--config", o.config_path, "config file matching the checkpoint");
    CLI::Option* dump_seed = dump->add_option("--seed", o.seed, "seed recorded at training time");
    CLI::Option* dump_ablate = dump->add_option("--ablate", o.ablate, "ablation preset");

    CLI::App* self = app.add_subcommand("selftest", "run the built-in invariant checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (ev->parsed()) {
        o.seed_opt = ev_seed;
        o.ablate_opt = ev_ablate;
        o.lambda_opt = o.eval_opt = nullptr;
        if (o.out.empty()) o.out = "eval_out";
    } else if (dump->parsed()) {
        o.seed_opt = dump_seed;
        o.ablate_opt = dump_ablate;
        o.lambda_opt = o.eval_opt = nullptr;
        if (o.out.empty()) o.out = "dump_out";
    } else if (gen->parsed()) {
        if (o.out.empty()) o.out = "dataset";
    } else if (train->parsed()) {
        if (o.out.empty()) o.out = "run";
    }

    try {
        if (gen->parsed()) return cmd_gen_data(o);
        if (train->parsed()) return cmd_train(o);
        if (ev->parsed()) return cmd_eval(o);
        if (dump->parsed()) return cmd_dump_embeddings(o);
        if (self->parsed()) return cmd_selftest();
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
