#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dacl {

struct SceneConfig {
    int w = 32;
    int h = 32;
    int n_classes = 4;
    int min_organ_px = 8;
    double blur = 0.8;
    double noise_sigma = 0.08;
    int max_place_tries = 200;
};

// Single-channel image with exact labels. Foreground blobs never touch, so
// each boundary belongs to exactly one class.
struct ToyScene {
    int w = 0;
    int h = 0;
    int n_classes = 0;
    uint64_t seed = 0;
    std::vector<double> image;   // w*h, row-major, values in [0, 1]
    std::vector<uint8_t> label;  // w*h, class ids in [0, n_classes)
};

// Places one large ellipse, one medium ring, and one small disc (classes
// 1..3; extra classes become small discs) on a darker background, blurs the
// boundaries, and adds clipped Gaussian noise.
ToyScene generate_scene(uint64_t seed, const SceneConfig& cfg);

// Scene ids per role. Unlabeled scenes keep their labels on disk; the split
// only decides whether training may look at them.
struct DatasetSplit {
    std::vector<int> labeled;
    std::vector<int> unlabeled;
    std::vector<int> test;
};

// Shuffles ids deterministically, carves a fixed 20% test set first, then
// takes labeled_fraction of the remaining train scenes as labeled.
DatasetSplit make_split(int n_scenes, double labeled_fraction, uint64_t seed);

void save_scene(const ToyScene& scene, const std::string& path);
ToyScene load_scene(const std::string& path);

// Generates scenes 0..n-1 into dir as scene_<id>.bin plus manifest.json.
// Scene i is seeded from (seed, i), so the corpus is a pure function of the
// arguments.
void write_dataset(const std::string& dir, int n_scenes, double labeled_fraction, uint64_t seed,
                   const SceneConfig& cfg);

struct Dataset {
    std::vector<ToyScene> scenes;  // indexed by scene id
    DatasetSplit split;
    SceneConfig config;
    uint64_t seed = 0;
    double labeled_fraction = 0.0;
};

Dataset load_dataset(const std::string& dir);

}  // namespace dacl
