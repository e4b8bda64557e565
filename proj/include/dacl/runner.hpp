#pragma once

#include <string>

#include "dacl/config.hpp"
#include "dacl/geometry.hpp"
#include "dacl/metrics.hpp"
#include "dacl/synth.hpp"

namespace dacl {

struct RunPaths {
    std::string train_log;
    std::string eval_report;
    std::string checkpoint;
    std::string config_resolved;
    std::string manifest;
};

// Full training run into out_dir: step loop with JSONL log, periodic eval
// every cfg.eval_every steps, final report, checkpoint, resolved config, and
// a replayable manifest. Returns the final report.
EvalReport run_training(const Dataset& data, const TrainConfig& cfg, const std::string& out_dir,
                        const std::string& build_id = "unknown", RunPaths* paths = nullptr);

// Evaluates a checkpoint on the dataset's test split; writes eval_report.json
// and a manifest into out_dir.
EvalReport run_eval(const Dataset& data, const TrainConfig& cfg, const std::string& checkpoint,
                    const std::string& out_dir, const std::string& build_id = "unknown");

struct EmbeddingDump {
    std::string csv_path;
    CompactnessReport compactness;
    int rows = 0;
};

// Dumps one prototype per (test scene, model, present class) through a
// trained checkpoint into embeddings.csv, with per-class multi-scale
// densities over the dumped pool, and scores the dump's clustering quality.
EmbeddingDump run_dump_embeddings(const Dataset& data, const TrainConfig& cfg,
                                  const std::string& checkpoint, const std::string& out_dir,
                                  const std::string& build_id = "unknown");

}  // namespace dacl
