#include "dacl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_map>

#include "dacl/binio.hpp"
#include "dacl/errors.hpp"
#include "dacl/loss.hpp"
#include "dacl/prototyping.hpp"
#include "dacl/rng.hpp"
#include "dacl/sampler.hpp"

namespace dacl {

namespace {

constexpr double kDiceEps = 1e-6;
constexpr double kDropProb = 0.5;

std::string fmt_f64(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void check_labels(const std::vector<std::uint8_t>& labels, int wh, int n_classes) {
    if (static_cast<int>(labels.size()) != wh) {
        throw DimensionError("labels cover " + std::to_string(labels.size()) + " pixels, logits " +
                             std::to_string(wh));
    }
    for (std::uint8_t l : labels) {
        if (l >= n_classes) throw ContractError("label " + std::to_string(int(l)) + " out of range");
    }
}

tc::Tensor mean_of(tc::Tape& tape, const std::vector<tc::Tensor>& xs) {
    tc::Tensor acc = xs.front();
    for (size_t i = 1; i < xs.size(); ++i) acc = tc::add(tape, acc, xs[i]);
    return tc::scale(tape, acc, 1.0 / static_cast<double>(xs.size()));
}

}  // namespace

double warmup_lambda(int t, int t_max, double base, double sharpness) {
    if (t_max <= 0) throw ConfigError("warmup: t_max must be positive");
    if (t < 0 || t > t_max) {
        throw ContractError("warmup: t=" + std::to_string(t) + " outside [0, " +
                            std::to_string(t_max) + "]");
    }
    double r = 1.0 - static_cast<double>(t) / static_cast<double>(t_max);
    return base * std::exp(-sharpness * r * r);
}

Lambdas effective_lambdas(const TrainConfig& cfg, int t) {
    if (t < cfg.warmup_gate_iters) return {0.0, 1.0};
    double cl = cfg.lambda_cl_override >= 0.0
                    ? cfg.lambda_cl_override
                    : warmup_lambda(std::min(t, cfg.t_max), cfg.t_max, cfg.warmup_base,
                                    cfg.warmup_sharpness);
    return {cl, cfg.lambda_cross};
}

tc::Tensor pixel_cross_entropy(tc::Tape& tape, const tc::Tensor& logits,
                               const std::vector<std::uint8_t>& labels, int n_classes) {
    int wh = logits.rows();
    if (logits.cols() != n_classes) {
        throw DimensionError("cross entropy: logits have " + std::to_string(logits.cols()) +
                             " columns, expected " + std::to_string(n_classes));
    }
    check_labels(labels, wh, n_classes);
    std::vector<double> onehot(static_cast<size_t>(wh) * n_classes, 0.0);
    for (int px = 0; px < wh; ++px) onehot[static_cast<size_t>(px) * n_classes + labels[px]] = 1.0;
    auto logp = tc::log(tape, tc::softmax_lastdim(tape, logits));
    auto picked = tc::mul(tape, logp, tc::constant({wh, n_classes}, std::move(onehot)));
    return tc::scale(tape, tc::sum(tape, picked), -1.0 / wh);
}

tc::Tensor supervised_ce_dice(tc::Tape& tape, const tc::Tensor& logits,
                              const std::vector<std::uint8_t>& labels, int n_classes) {
    int wh = logits.rows();
    if (logits.cols() != n_classes) {
        throw DimensionError("supervised loss: logits have " + std::to_string(logits.cols()) +
                             " columns, expected " + std::to_string(n_classes));
    }
    check_labels(labels, wh, n_classes);

    std::vector<double> onehot(static_cast<size_t>(wh) * n_classes, 0.0);
    std::vector<double> class_count(n_classes, 0.0);
    for (int px = 0; px < wh; ++px) {
        onehot[static_cast<size_t>(px) * n_classes + labels[px]] = 1.0;
        class_count[labels[px]] += 1.0;
    }

    auto p = tc::softmax_lastdim(tape, logits);
    auto logp = tc::log(tape, p);
    auto oh = tc::constant({wh, n_classes}, onehot);
    auto ce = tc::scale(tape, tc::sum(tape, tc::mul(tape, logp, oh)), -1.0 / wh);

    tc::Tensor dice_sum = tc::scalar_constant(0.0);
    for (int c = 0; c < n_classes; ++c) {
        std::vector<double> gc(wh);
        for (int px = 0; px < wh; ++px) gc[px] = onehot[static_cast<size_t>(px) * n_classes + c];
        auto pc = tc::slice_lastdim(tape, p, c, 1);
        auto inter = tc::sum(tape, tc::mul(tape, pc, tc::constant({wh, 1}, std::move(gc))));
        auto num = tc::add(tape, tc::scale(tape, inter, 2.0), tc::scalar_constant(kDiceEps));
        auto den = tc::add(tape, tc::sum(tape, pc), tc::scalar_constant(class_count[c] + kDiceEps));
        dice_sum = tc::add(tape, dice_sum, tc::div(tape, num, den));
    }
    auto dice_mean = tc::scale(tape, dice_sum, 1.0 / n_classes);
    auto dice_loss = tc::add(tape, tc::scalar_constant(1.0), tc::scale(tape, dice_mean, -1.0));
    return tc::scale(tape, tc::add(tape, ce, dice_loss), 0.5);
}

std::vector<std::uint8_t> argmax_labels(const std::vector<double>& scores, int n_cols) {
    if (n_cols < 1 || scores.size() % n_cols != 0) {
        throw DimensionError("argmax: " + std::to_string(scores.size()) +
                             " values do not split into rows of " + std::to_string(n_cols));
    }
    size_t rows = scores.size() / n_cols;
    std::vector<std::uint8_t> out(rows);
    for (size_t r = 0; r < rows; ++r) {
        int best = 0;
        double bv = scores[r * n_cols];
        for (int c = 1; c < n_cols; ++c) {
            double v = scores[r * n_cols + c];
            if (v > bv) {
                bv = v;
                best = c;
            }
        }
        out[r] = static_cast<std::uint8_t>(best);
    }
    return out;
}

std::vector<double> softmax_rows(const std::vector<double>& scores, int n_cols) {
    if (n_cols < 1 || scores.size() % n_cols != 0) {
        throw DimensionError("softmax_rows: " + std::to_string(scores.size()) +
                             " values do not split into rows of " + std::to_string(n_cols));
    }
    std::vector<double> out(scores.size());
    size_t rows = scores.size() / n_cols;
    for (size_t r = 0; r < rows; ++r) {
        const double* in = scores.data() + r * n_cols;
        double mx = in[0];
        for (int c = 1; c < n_cols; ++c) mx = std::max(mx, in[c]);
        double z = 0.0;
        for (int c = 0; c < n_cols; ++c) z += std::exp(in[c] - mx);
        for (int c = 0; c < n_cols; ++c) out[r * n_cols + c] = std::exp(in[c] - mx) / z;
    }
    return out;
}

std::string step_stats_json(const StepStats& s) {
    auto ints = [](const std::vector<int>& xs) {
        std::string out = "[";
        for (size_t i = 0; i < xs.size(); ++i) {
            if (i) out += ',';
            out += std::to_string(xs[i]);
        }
        return out + "]";
    };
    std::string out = "{\"anchors_per_class\":" + ints(s.anchors_per_class);
    out += ",\"bank_fill\":" + ints(s.bank_fill);
    out += ",\"lambda_cl\":" + fmt_f64(s.lambda_cl);
    out += ",\"loss_cl\":" + fmt_f64(s.loss_cl);
    out += ",\"loss_cross\":" + fmt_f64(s.loss_cross);
    out += ",\"loss_sup\":" + fmt_f64(s.loss_sup);
    out += ",\"loss_total\":" + fmt_f64(s.loss_total);
    out += ",\"t\":" + std::to_string(s.t) + "}";
    return out;
}

namespace {

ModelDims dims_from(const TrainConfig& cfg, int n_classes) {
    ModelDims d;
    d.n_classes = n_classes;
    d.conv1_channels = cfg.conv1_channels;
    d.conv2_channels = cfg.conv2_channels;
    d.proj_hidden = cfg.proj_hidden;
    d.d_proj = cfg.d_proj;
    return d;
}

void check_dataset(const Dataset& data) {
    if (data.scenes.empty()) throw ConfigError("dataset has no scenes");
    if (data.split.labeled.empty()) throw ConfigError("dataset split has no labeled scenes");
    int w = data.scenes.front().w;
    int h = data.scenes.front().h;
    int n = data.scenes.front().n_classes;
    for (const auto& s : data.scenes) {
        if (s.w != w || s.h != h || s.n_classes != n) {
            throw ConfigError("dataset scenes disagree on geometry");
        }
    }
    auto in_range = [&](const std::vector<int>& ids) {
        for (int id : ids) {
            if (id < 0 || id >= static_cast<int>(data.scenes.size())) {
                throw ConfigError("split references scene " + std::to_string(id));
            }
        }
    };
    in_range(data.split.labeled);
    in_range(data.split.unlabeled);
    in_range(data.split.test);
}

}  // namespace

Trainer::Trainer(Dataset dataset, TrainConfig cfg)
    : cfg_(std::move(cfg)),
      data_(std::move(dataset)),
      maps_((check_dataset(data_), validate_config(cfg_),
             make_grid_maps(data_.scenes.front().w, data_.scenes.front().h))),
      model_a_(dims_from(cfg_, data_.scenes.front().n_classes), mix_seed(cfg_.seed, 101)),
      model_b_(dims_from(cfg_, data_.scenes.front().n_classes), mix_seed(cfg_.seed, 202)),
      opt_a_(model_a_.params(), cfg_.lr, cfg_.momentum, cfg_.weight_decay),
      opt_b_(model_b_.params(), cfg_.lr, cfg_.momentum, cfg_.weight_decay),
      banks_(make_bank_set(data_.scenes.front().n_classes, cfg_.bank_capacity)),
      batch_rng_(mix_seed(cfg_.seed, 303)),
      sampler_rng_(mix_seed(cfg_.seed, 404)),
      dropout_rng_(mix_seed(cfg_.seed, 505)) {}

StepStats Trainer::step() {
    const int t = t_;
    const int n_classes = data_.scenes.front().n_classes;
    const int wh = maps_.w * maps_.h;
    const Lambdas lam = effective_lambdas(cfg_, t);
    const bool run_dacl = lam.cl > 0.0;

    StepStats stats;
    stats.t = t;
    stats.lambda_cl = lam.cl;
    stats.anchors_per_class.assign(n_classes, 0);

    std::string stage = "batch";
    try {
        // batch: half labeled, half unlabeled, drawn with replacement
        int n_lab = cfg_.batch_size / 2;
        int n_unl = cfg_.batch_size - n_lab;
        if (data_.split.unlabeled.empty()) {
            n_lab = cfg_.batch_size;
            n_unl = 0;
        }
        std::vector<int> ids;
        std::vector<bool> labeled;
        std::uniform_int_distribution<size_t> pick_lab(0, data_.split.labeled.size() - 1);
        for (int i = 0; i < n_lab; ++i) {
            ids.push_back(data_.split.labeled[pick_lab(batch_rng_)]);
            labeled.push_back(true);
        }
        if (n_unl > 0) {
            std::uniform_int_distribution<size_t> pick_unl(0, data_.split.unlabeled.size() - 1);
            for (int i = 0; i < n_unl; ++i) {
                ids.push_back(data_.split.unlabeled[pick_unl(batch_rng_)]);
                labeled.push_back(false);
            }
        }
        const int b = static_cast<int>(ids.size());

        stage = "forward";
        tc::Tape tape;
        std::vector<ForwardOut> fa(b), fb(b);
        for (int i = 0; i < b; ++i) {
            const auto& img = data_.scenes[ids[i]].image;
            fa[i] = model_a_.forward(tape, maps_, img);
            if (cfg_.decoder_dropout) {
                std::vector<double> mask(cfg_.conv2_channels);
                std::bernoulli_distribution drop(kDropProb);
                for (double& m : mask) m = drop(dropout_rng_) ? 0.0 : 1.0 / (1.0 - kDropProb);
                fb[i] = model_b_.forward(tape, maps_, img, &mask);
            } else {
                fb[i] = model_b_.forward(tape, maps_, img);
            }
        }

        stage = "supervised";
        std::vector<tc::Tensor> sup_a, sup_b;
        for (int i = 0; i < b; ++i) {
            if (!labeled[i]) continue;
            const auto& gt = data_.scenes[ids[i]].label;
            sup_a.push_back(supervised_ce_dice(tape, fa[i].logits, gt, n_classes));
            sup_b.push_back(supervised_ce_dice(tape, fb[i].logits, gt, n_classes));
        }
        if (sup_a.empty()) throw ContractError("batch carries no labeled sample");
        auto sup = tc::scale(tape, tc::add(tape, mean_of(tape, sup_a), mean_of(tape, sup_b)), 0.5);

        stage = "cross";
        std::vector<tc::Tensor> ce_a, ce_b;
        for (int i = 0; i < b; ++i) {
            auto pseudo_a = argmax_labels(fa[i].logits.values(), n_classes);
            auto pseudo_b = argmax_labels(fb[i].logits.values(), n_classes);
            ce_a.push_back(pixel_cross_entropy(tape, fa[i].logits, pseudo_b, n_classes));
            ce_b.push_back(pixel_cross_entropy(tape, fb[i].logits, pseudo_a, n_classes));
        }
        auto cross = tc::add(tape, mean_of(tape, ce_a), mean_of(tape, ce_b));

        ContrastiveTerms cl_terms;
        std::vector<std::vector<ClassEmbedding>> push_items(n_classes);
        if (run_dacl) {
            stage = "prototypes";
            // labeled images guide with ground truth; unlabeled ones with the
            // counterpart's softmax
            std::vector<tc::Tensor> proj_a(b), proj_b(b);
            std::vector<std::vector<ActivationMask>> masks_a(b), masks_b(b);
            for (int i = 0; i < b; ++i) {
                proj_a[i] = fa[i].proj;
                proj_b[i] = fb[i].proj;
                if (labeled[i]) {
                    const auto& gt = data_.scenes[ids[i]].label;
                    std::vector<ActivationMask> ms(n_classes);
                    for (int c = 0; c < n_classes; ++c) {
                        ms[c].class_id = c;
                        ms[c].source = ActivationMask::Source::GroundTruth;
                        ms[c].scores.assign(wh, 0.0);
                        for (int px = 0; px < wh; ++px)
                            if (gt[px] == c) ms[c].scores[px] = 1.0;
                    }
                    masks_a[i] = ms;
                    masks_b[i] = std::move(ms);
                } else {
                    auto prob_a = softmax_rows(fa[i].logits.values(), n_classes);
                    auto prob_b = softmax_rows(fb[i].logits.values(), n_classes);
                    auto build = [&](const std::vector<double>& probs) {
                        std::vector<ActivationMask> ms(n_classes);
                        for (int c = 0; c < n_classes; ++c) {
                            ms[c].class_id = c;
                            ms[c].source = ActivationMask::Source::PseudoLabel;
                            ms[c].scores.resize(wh);
                            for (int px = 0; px < wh; ++px)
                                ms[c].scores[px] = probs[static_cast<size_t>(px) * n_classes + c];
                        }
                        return ms;
                    };
                    masks_a[i] = build(prob_b);
                    masks_b[i] = build(prob_a);
                }
            }
            auto protos_a = batch_prototypes(tape, proj_a, masks_a, cfg_.phi, seq_counter_);
            auto protos_b = batch_prototypes(tape, proj_b, masks_b, cfg_.phi, seq_counter_);

            std::unordered_map<std::uint64_t, tc::Tensor> live;
            std::vector<std::vector<ClassEmbedding>> batch_snaps(n_classes);
            for (const auto* protos : {&protos_a, &protos_b}) {
                for (const auto& p : *protos) {
                    live.emplace(p.snapshot.seq_id, p.unit_vec);
                    batch_snaps[p.snapshot.class_id].push_back(p.snapshot);
                }
            }

            stage = "density";
            ScaleSet scale_set = make_scale_set(
                cfg_.single_scale ? std::vector<int>{cfg_.scales.front()} : cfg_.scales);
            std::vector<std::vector<ClassEmbedding>> fresh_batch(n_classes), fresh_bank(n_classes);
            for (int c = 0; c < n_classes; ++c) {
                if (batch_snaps[c].empty()) continue;
                auto bank_snap = cfg_.no_bank ? std::vector<ClassEmbedding>{}
                                              : banks_.banks[c].snapshot();
                auto pool = union_pool(bank_snap, batch_snaps[c]);
                if (pool.size() < 2) continue;  // a lone embedding has no neighbors
                auto dens = density_multi_scale(pool, pool, scale_set);
                for (size_t j = 0; j < pool.size(); ++j) pool[j].density = dens[j];
                fresh_bank[c].assign(pool.begin(), pool.begin() + bank_snap.size());
                fresh_batch[c].assign(pool.begin() + bank_snap.size(), pool.end());
                push_items[c] = fresh_batch[c];
            }

            stage = "sampling";
            std::vector<std::vector<ClassEmbedding>> anchor_sets(n_classes);
            std::vector<std::vector<ClassEmbedding>> positive_sets(n_classes);
            for (int c = 0; c < n_classes; ++c) {
                if (fresh_batch[c].empty()) continue;
                auto anchors = cfg_.pcl_random_sampling
                                   ? sample_anchors_random(fresh_batch[c], cfg_.n_q, sampler_rng_)
                                   : sample_anchors(fresh_batch[c], cfg_.n_q);
                std::set<std::uint64_t> exclude;
                for (const auto& a : anchors) exclude.insert(a.seq_id);
                auto positives =
                    cfg_.pcl_random_sampling
                        ? sample_positives_random(fresh_batch[c], fresh_bank[c], cfg_.n_p_plus,
                                                  exclude, sampler_rng_)
                        : sample_positives(fresh_batch[c], fresh_bank[c], cfg_.n_p_plus, exclude);
                anchor_sets[c] = std::move(anchors);
                positive_sets[c] = std::move(positives);
            }

            stage = "loss";
            std::vector<ClassLossInputs> class_inputs;
            for (int c = 0; c < n_classes; ++c) {
                if (anchor_sets[c].empty()) continue;
                auto center = cluster_center(positive_sets[c]);
                if (!center) continue;
                auto negatives = sample_negatives(anchor_sets, c, cfg_.n_p_minus, sampler_rng_);
                if (negatives.empty()) continue;

                ClassLossInputs in;
                in.class_id = c;
                in.center = center->unit;
                for (const auto& n : negatives) in.negatives.push_back(n.vec);
                for (const auto& a : anchor_sets[c]) in.anchors.push_back(live.at(a.seq_id));
                if (cfg_.uniform_w) {
                    in.w.assign(anchor_sets[c].size(), 1.0 / anchor_sets[c].size());
                } else {
                    std::vector<double> gamma(anchor_sets[c].size(), cfg_.gamma);
                    in.w = positiveness(anchor_sets[c], center->unit, gamma).w;
                }
                stats.anchors_per_class[c] = static_cast<int>(anchor_sets[c].size());
                class_inputs.push_back(std::move(in));
            }
            cl_terms = soft_contrastive_loss(tape, std::move(class_inputs), cfg_.tau,
                                             cfg_.infonce_denominator);
            if (cl_terms.contributing == 0) {
                std::fprintf(stderr,
                             "warning: step %d: contrastive weight %.6g active but no class "
                             "contributed\n",
                             t, lam.cl);
            }
        }

        stage = "total";
        auto total = tc::add(tape, sup, tc::scale(tape, cross, lam.cross));
        if (run_dacl) total = tc::add(tape, total, tc::scale(tape, cl_terms.total, lam.cl));

        stats.loss_sup = sup.scalar();
        stats.loss_cross = cross.scalar();
        stats.loss_cl = run_dacl ? cl_terms.total.scalar() : 0.0;
        stats.loss_total = total.scalar();

        stage = "backward";
        tape.backward(total);

        stage = "sgd";
        opt_a_.step();
        opt_b_.step();

        stage = "bank";
        if (run_dacl && !cfg_.no_bank) {
            for (int c = 0; c < n_classes; ++c) {
                if (!push_items[c].empty()) banks_.banks[c].push(std::move(push_items[c]));
            }
        }
        for (int c = 0; c < n_classes; ++c) {
            stats.bank_fill.push_back(static_cast<int>(banks_.banks[c].size()));
        }
    } catch (const std::exception& e) {
        throw ContractError("train step " + std::to_string(t) + " [" + stage + "]: " + e.what());
    }

    ++t_;
    return stats;
}

std::vector<std::uint8_t> Trainer::predict(const ToyScene& scene) const {
    tc::Tape tape;
    auto oa = model_a_.forward(tape, maps_, scene.image);
    auto ob = model_b_.forward(tape, maps_, scene.image);
    int n = data_.scenes.front().n_classes;
    auto pa = softmax_rows(oa.logits.values(), n);
    auto pb = softmax_rows(ob.logits.values(), n);
    for (size_t i = 0; i < pa.size(); ++i) pa[i] = 0.5 * (pa[i] + pb[i]);
    return argmax_labels(pa, n);
}

EvalReport Trainer::evaluate() const {
    if (data_.split.test.empty()) throw ContractError("evaluate: test split is empty");
    std::vector<std::vector<std::uint8_t>> preds, gts;
    for (int id : data_.split.test) {
        preds.push_back(predict(data_.scenes[id]));
        gts.push_back(data_.scenes[id].label);
    }
    return evaluate_cases(preds, gts, maps_.w, maps_.h, data_.scenes.front().n_classes);
}

void Trainer::save_checkpoint(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ContractError("cannot open checkpoint for writing: " + path);
    io::write_magic(os, "DACLCKPT");
    io::write_u32(os, 1);
    io::write_u64(os, config_hash(cfg_));
    io::write_u32(os, static_cast<std::uint32_t>(t_));
    for (const SegModel* m : {&model_a_, &model_b_}) {
        for (const auto& p : m->params()) {
            io::write_u32(os, static_cast<std::uint32_t>(p.numel()));
            for (double v : *p.data) io::write_f64(os, v);
        }
    }
    if (!os) throw ContractError("checkpoint write failed: " + path);
}

void Trainer::load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ContractError("cannot open checkpoint: " + path);
    io::expect_magic(is, "DACLCKPT");
    std::uint32_t version = io::read_u32(is);
    if (version != 1) throw ContractError("unsupported checkpoint version " + std::to_string(version));
    std::uint64_t hash = io::read_u64(is);
    if (hash != config_hash(cfg_)) {
        throw ContractError("checkpoint was written under a different config");
    }
    int t = static_cast<int>(io::read_u32(is));
    for (const SegModel* m : {&model_a_, &model_b_}) {
        for (const auto& p : m->params()) {
            std::uint32_t len = io::read_u32(is);
            if (len != static_cast<std::uint32_t>(p.numel())) {
                throw ContractError("checkpoint parameter size mismatch");
            }
            for (std::uint32_t i = 0; i < len; ++i) (*p.data)[i] = io::read_f64(is);
        }
    }
    if (!is) throw ContractError("checkpoint truncated: " + path);
    t_ = t;
}

}  // namespace dacl
