#include "dacl/runner.hpp"

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "dacl/errors.hpp"
#include "dacl/prototyping.hpp"
#include "dacl/trainer.hpp"

namespace fs = std::filesystem;

namespace dacl {

namespace {

std::string utc_now() {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

std::string fmt_f64(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

nlohmann::json config_json(const TrainConfig& cfg) {
    nlohmann::json j;
    std::string canon = canonical_config_string(cfg);
    size_t pos = 0;
    while (pos < canon.size()) {
        size_t nl = canon.find('\n', pos);
        std::string line = canon.substr(pos, nl - pos);
        pos = nl + 1;
        size_t eq = line.find('=');
        j[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return j;
}

nlohmann::json base_manifest(const char* command, const Dataset& data, const TrainConfig& cfg,
                             const std::string& build_id) {
    nlohmann::json m;
    m["command"] = command;
    m["build"] = build_id;
    m["seed"] = cfg.seed;
    m["config"] = config_json(cfg);
    char hex[24];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
    m["config_hash"] = hex;
    m["ablation"] = {{"pcl_random_sampling", cfg.pcl_random_sampling},
                     {"single_scale", cfg.single_scale},
                     {"no_bank", cfg.no_bank},
                     {"uniform_w", cfg.uniform_w},
                     {"infonce_denominator", cfg.infonce_denominator},
                     {"decoder_dropout", cfg.decoder_dropout}};
    m["dataset"] = {{"n_scenes", data.scenes.size()},
                    {"labeled", data.split.labeled.size()},
                    {"unlabeled", data.split.unlabeled.size()},
                    {"test", data.split.test.size()}};
    m["started_utc"] = utc_now();
    return m;
}

void write_manifest(nlohmann::json m, const std::string& path) {
    m["finished_utc"] = utc_now();
    std::ofstream os(path);
    if (!os) throw ContractError("cannot write manifest: " + path);
    os << m.dump(2) << "\n";
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw ContractError("cannot write " + path);
    os << text;
}

}  // namespace

EvalReport run_training(const Dataset& data, const TrainConfig& cfg, const std::string& out_dir,
                        const std::string& build_id, RunPaths* paths) {
    fs::create_directories(out_dir);
    RunPaths p;
    p.train_log = (fs::path(out_dir) / "train_log.jsonl").string();
    p.eval_report = (fs::path(out_dir) / "eval_report.json").string();
    p.checkpoint = (fs::path(out_dir) / "checkpoint.bin").string();
    p.config_resolved = (fs::path(out_dir) / "config.resolved").string();
    p.manifest = (fs::path(out_dir) / "run_manifest.json").string();

    nlohmann::json manifest = base_manifest("train", data, cfg, build_id);

    Trainer trainer(data, cfg);
    write_text(p.config_resolved, canonical_config_string(cfg));

    std::ofstream log(p.train_log);
    if (!log) throw ContractError("cannot write " + p.train_log);
    for (int t = 0; t < cfg.t_max; ++t) {
        StepStats stats = trainer.step();
        log << step_stats_json(stats) << "\n";
        if (cfg.eval_every > 0 && (t + 1) % cfg.eval_every == 0 && t + 1 < cfg.t_max) {
            EvalReport rep = trainer.evaluate();
            save_eval_report(rep,
                             (fs::path(out_dir) / ("eval_step_" + std::to_string(t + 1) + ".json"))
                                 .string());
        }
    }
    log.close();
    if (!log) throw ContractError("train log write failed: " + p.train_log);

    EvalReport report = trainer.evaluate();
    save_eval_report(report, p.eval_report);
    trainer.save_checkpoint(p.checkpoint);

    manifest["outputs"] = {{"train_log", p.train_log},
                           {"eval_report", p.eval_report},
                           {"checkpoint", p.checkpoint},
                           {"config_resolved", p.config_resolved}};
    write_manifest(std::move(manifest), p.manifest);
    if (paths != nullptr) *paths = p;
    return report;
}

EvalReport run_eval(const Dataset& data, const TrainConfig& cfg, const std::string& checkpoint,
                    const std::string& out_dir, const std::string& build_id) {
    fs::create_directories(out_dir);
    Trainer trainer(data, cfg);
    trainer.load_checkpoint(checkpoint);
    EvalReport report = trainer.evaluate();
    save_eval_report(report, (fs::path(out_dir) / "eval_report.json").string());

    nlohmann::json manifest = base_manifest("eval", data, cfg, build_id);
    manifest["checkpoint"] = checkpoint;
    manifest["checkpoint_step"] = trainer.t();
    manifest["outputs"] = {{"eval_report", (fs::path(out_dir) / "eval_report.json").string()}};
    write_manifest(std::move(manifest), (fs::path(out_dir) / "run_manifest.json").string());
    return report;
}

EmbeddingDump run_dump_embeddings(const Dataset& data, const TrainConfig& cfg,
                                  const std::string& checkpoint, const std::string& out_dir,
                                  const std::string& build_id) {
    fs::create_directories(out_dir);
    Trainer trainer(data, cfg);
    trainer.load_checkpoint(checkpoint);
    if (data.split.test.empty()) throw ContractError("dump-embeddings: test split is empty");

    const int n_classes = data.scenes.front().n_classes;
    const int wh = trainer.maps().w * trainer.maps().h;

    struct Row {
        int scene_id = 0;
        ClassEmbedding emb;
        int predicted = 0;
    };
    std::vector<Row> rows;
    std::uint64_t seq = 0;
    for (int id : data.split.test) {
        const ToyScene& scene = data.scenes[id];
        std::vector<ActivationMask> masks(n_classes);
        for (int c = 0; c < n_classes; ++c) {
            masks[c].class_id = c;
            masks[c].source = ActivationMask::Source::GroundTruth;
            masks[c].scores.assign(wh, 0.0);
            for (int px = 0; px < wh; ++px)
                if (scene.label[px] == c) masks[c].scores[px] = 1.0;
        }
        tc::Tape tape;
        for (const SegModel* m : {&trainer.model_a(), &trainer.model_b()}) {
            auto out = m->forward(tape, trainer.maps(), scene.image);
            std::vector<tc::Tensor> projections{out.proj};
            std::vector<std::vector<ActivationMask>> image_masks{masks};
            auto protos = batch_prototypes(tape, projections, image_masks, cfg.phi, seq);
            auto probs = softmax_rows(out.logits.values(), n_classes);
            for (const auto& proto : protos) {
                int c = proto.snapshot.class_id;
                std::vector<double> acc(n_classes, 0.0);
                for (int px = 0; px < wh; ++px) {
                    if (scene.label[px] != c) continue;
                    for (int k = 0; k < n_classes; ++k)
                        acc[k] += probs[static_cast<size_t>(px) * n_classes + k];
                }
                int pred = 0;
                for (int k = 1; k < n_classes; ++k)
                    if (acc[k] > acc[pred]) pred = k;
                rows.push_back({id, proto.snapshot, pred});
            }
        }
    }

    // fresh multi-scale densities over each class's dumped pool
    ScaleSet scales =
        make_scale_set(cfg.single_scale ? std::vector<int>{cfg.scales.front()} : cfg.scales);
    for (int c = 0; c < n_classes; ++c) {
        std::vector<size_t> idx;
        std::vector<ClassEmbedding> pool;
        for (size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].emb.class_id == c) {
                idx.push_back(i);
                pool.push_back(rows[i].emb);
            }
        }
        if (pool.size() >= 2) {
            auto dens = density_multi_scale(pool, pool, scales);
            for (size_t j = 0; j < idx.size(); ++j) rows[idx[j]].emb.density = dens[j];
        } else {
            for (size_t j : idx) rows[j].emb.density = 0.0;
        }
    }

    EmbeddingDump dump;
    dump.csv_path = (fs::path(out_dir) / "embeddings.csv").string();
    std::ofstream csv(dump.csv_path);
    if (!csv) throw ContractError("cannot write " + dump.csv_path);
    const int d_proj = cfg.d_proj;
    csv << "scene_id,class_id,origin,density";
    for (int d = 0; d < d_proj; ++d) csv << ",dim_" << d;
    csv << "\n";
    for (const auto& row : rows) {
        csv << row.scene_id << "," << row.emb.class_id << ",batch," << fmt_f64(*row.emb.density);
        for (double v : row.emb.vec) csv << "," << fmt_f64(v);
        csv << "\n";
    }
    csv.close();
    if (!csv) throw ContractError("embeddings write failed: " + dump.csv_path);

    std::vector<ClassEmbedding> embs;
    std::vector<int> predicted;
    for (const auto& row : rows) {
        embs.push_back(row.emb);
        predicted.push_back(row.predicted);
    }
    dump.compactness = compactness_report(embs, predicted);
    dump.rows = static_cast<int>(rows.size());

    nlohmann::json cj;
    cj["silhouette"] = dump.compactness.silhouette;
    cj["davies_bouldin"] = dump.compactness.davies_bouldin;
    cj["v_measure"] = dump.compactness.v_measure;
    cj["rows"] = dump.rows;
    write_text((fs::path(out_dir) / "compactness.json").string(), cj.dump(2) + "\n");

    nlohmann::json manifest = base_manifest("dump-embeddings", data, cfg, build_id);
    manifest["checkpoint"] = checkpoint;
    manifest["outputs"] = {{"embeddings", dump.csv_path}};
    write_manifest(std::move(manifest), (fs::path(out_dir) / "run_manifest.json").string());
    return dump;
}

}  // namespace dacl
