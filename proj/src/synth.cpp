#include "dacl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "dacl/binio.hpp"
#include "dacl/errors.hpp"
#include "dacl/rng.hpp"

namespace fs = std::filesystem;

namespace dacl {

namespace {

constexpr char kSceneMagic[] = "DACLSCN";

void check_config(const SceneConfig& cfg) {
    if (cfg.w < 16 || cfg.h < 16) throw ConfigError("scene size must be at least 16x16");
    if (cfg.n_classes < 2) throw ConfigError("n_classes must be at least 2 (class 0 is background)");
    if (cfg.min_organ_px < 1) throw ConfigError("min_organ_px must be positive");
    if (cfg.blur < 0.0) throw ConfigError("blur must be non-negative");
    if (cfg.noise_sigma < 0.0) throw ConfigError("noise_sigma must be non-negative");
    if (cfg.max_place_tries < 1) throw ConfigError("max_place_tries must be positive");
}

double class_base_intensity(int class_id) {
    switch (class_id) {
        case 0: return 0.15;
        case 1: return 0.80;
        case 2: return 0.50;
        case 3: return 0.68;
        default: {
            double f = 0.37 * class_id;
            return 0.25 + 0.5 * (f - std::floor(f));
        }
    }
}

// Pixel indices covered by one blob, clipped to the image.
std::vector<int> raster_blob(int kind, int w, int h, std::mt19937_64& rng) {
    std::vector<int> px;
    if (kind == 0) {  // large tilted ellipse
        std::uniform_real_distribution<double> cx_d(8.0, w - 9.0), cy_d(8.0, h - 9.0);
        std::uniform_real_distribution<double> a_d(6.5, 9.5), b_d(4.5, 7.0), phi_d(0.0, 3.14159265358979);
        double cx = cx_d(rng), cy = cy_d(rng), a = a_d(rng), b = b_d(rng), phi = phi_d(rng);
        double c = std::cos(phi), s = std::sin(phi);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double dx = x - cx, dy = y - cy;
                double u = (dx * c + dy * s) / a, v = (-dx * s + dy * c) / b;
                if (u * u + v * v <= 1.0) px.push_back(y * w + x);
            }
        }
    } else if (kind == 1) {  // medium ring
        std::uniform_real_distribution<double> cx_d(6.0, w - 7.0), cy_d(6.0, h - 7.0);
        std::uniform_real_distribution<double> ro_d(4.5, 6.0), ratio_d(0.40, 0.55);
        double cx = cx_d(rng), cy = cy_d(rng), ro = ro_d(rng), ri = ro * ratio_d(rng);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double dx = x - cx, dy = y - cy, d2 = dx * dx + dy * dy;
                if (d2 >= ri * ri && d2 <= ro * ro) px.push_back(y * w + x);
            }
        }
    } else {  // small disc
        std::uniform_real_distribution<double> cx_d(4.0, w - 5.0), cy_d(4.0, h - 5.0);
        std::uniform_real_distribution<double> r_d(2.0, 3.2);
        double cx = cx_d(rng), cy = cy_d(rng), r = r_d(rng);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double dx = x - cx, dy = y - cy;
                if (dx * dx + dy * dy <= r * r) px.push_back(y * w + x);
            }
        }
    }
    return px;
}

void gaussian_blur(std::vector<double>& img, int w, int h, double sigma) {
    int radius = static_cast<int>(std::ceil(3.0 * sigma));
    if (radius < 1) radius = 1;
    std::vector<double> kernel(2 * radius + 1);
    double total = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
        total += kernel[k + radius];
    }
    for (double& v : kernel) v /= total;

    std::vector<double> tmp(img.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                int xx = std::clamp(x + k, 0, w - 1);
                acc += kernel[k + radius] * img[y * w + xx];
            }
            tmp[y * w + x] = acc;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                int yy = std::clamp(y + k, 0, h - 1);
                acc += kernel[k + radius] * tmp[yy * w + x];
            }
            img[y * w + x] = acc;
        }
    }
}

}  // namespace

ToyScene generate_scene(uint64_t seed, const SceneConfig& cfg) {
    check_config(cfg);
    const int w = cfg.w, h = cfg.h;
    std::mt19937_64 rng(seed);

    std::uniform_real_distribution<double> jitter(-0.04, 0.04);
    std::vector<double> intensity(cfg.n_classes);
    for (int c = 0; c < cfg.n_classes; ++c) {
        intensity[c] = std::clamp(class_base_intensity(c) + jitter(rng), 0.0, 1.0);
    }

    ToyScene scene;
    scene.w = w;
    scene.h = h;
    scene.n_classes = cfg.n_classes;
    scene.seed = seed;
    scene.label.assign(static_cast<size_t>(w) * h, 0);

    // Blobs plus an 8-neighborhood halo, so distinct blobs never touch.
    std::vector<uint8_t> blocked(static_cast<size_t>(w) * h, 0);
    for (int class_id = 1; class_id < cfg.n_classes; ++class_id) {
        int kind = std::min(class_id - 1, 2);
        bool placed = false;
        for (int attempt = 0; attempt < cfg.max_place_tries && !placed; ++attempt) {
            std::vector<int> px = raster_blob(kind, w, h, rng);
            if (static_cast<int>(px.size()) < cfg.min_organ_px) continue;
            bool clash = false;
            for (int p : px) {
                if (blocked[p]) {
                    clash = true;
                    break;
                }
            }
            if (clash) continue;
            for (int p : px) {
                scene.label[p] = static_cast<uint8_t>(class_id);
                int x = p % w, y = p / w;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        int xx = x + dx, yy = y + dy;
                        if (xx >= 0 && xx < w && yy >= 0 && yy < h) blocked[yy * w + xx] = 1;
                    }
                }
            }
            placed = true;
        }
        if (!placed) {
            throw GenerationError("could not place class " + std::to_string(class_id) + " after " +
                                  std::to_string(cfg.max_place_tries) + " tries (seed " +
                                  std::to_string(seed) + ")");
        }
    }

    scene.image.resize(scene.label.size());
    for (size_t i = 0; i < scene.label.size(); ++i) scene.image[i] = intensity[scene.label[i]];

    if (cfg.blur > 0.0) gaussian_blur(scene.image, w, h, cfg.blur);
    if (cfg.noise_sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
        for (double& v : scene.image) v = std::clamp(v + noise(rng), 0.0, 1.0);
    }
    return scene;
}

DatasetSplit make_split(int n_scenes, double labeled_fraction, uint64_t seed) {
    if (n_scenes < 1) throw ConfigError("make_split: n_scenes must be positive");
    if (!(labeled_fraction > 0.0) || labeled_fraction > 1.0) {
        throw ConfigError("make_split: labeled_fraction must be in (0, 1], got " +
                          std::to_string(labeled_fraction));
    }
    std::vector<int> ids(n_scenes);
    for (int i = 0; i < n_scenes; ++i) ids[i] = i;
    std::mt19937_64 rng(seed);
    for (int i = n_scenes - 1; i > 0; --i) {
        std::uniform_int_distribution<int> pick(0, i);
        std::swap(ids[i], ids[pick(rng)]);
    }

    int test_count = static_cast<int>(std::llround(0.2 * n_scenes));
    int train_count = n_scenes - test_count;
    if (test_count < 1 || train_count < 1) {
        throw ConfigError("make_split: " + std::to_string(n_scenes) +
                          " scenes cannot fill both train and test");
    }
    int labeled_count = static_cast<int>(std::llround(labeled_fraction * train_count));
    labeled_count = std::clamp(labeled_count, 1, train_count);

    DatasetSplit split;
    split.test.assign(ids.begin(), ids.begin() + test_count);
    split.labeled.assign(ids.begin() + test_count, ids.begin() + test_count + labeled_count);
    split.unlabeled.assign(ids.begin() + test_count + labeled_count, ids.end());
    std::sort(split.test.begin(), split.test.end());
    std::sort(split.labeled.begin(), split.labeled.end());
    std::sort(split.unlabeled.begin(), split.unlabeled.end());
    return split;
}

void save_scene(const ToyScene& scene, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ContractError("save_scene: cannot open " + path);
    io::write_magic(os, kSceneMagic);
    io::write_u32(os, static_cast<uint32_t>(scene.w));
    io::write_u32(os, static_cast<uint32_t>(scene.h));
    io::write_u32(os, static_cast<uint32_t>(scene.n_classes));
    for (double v : scene.image) io::write_f64(os, v);
    for (uint8_t v : scene.label) io::write_u8(os, v);
    if (!os) throw ContractError("save_scene: write failed for " + path);
}

ToyScene load_scene(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ContractError("load_scene: cannot open " + path);
    io::expect_magic(is, kSceneMagic);
    ToyScene scene;
    scene.w = static_cast<int>(io::read_u32(is));
    scene.h = static_cast<int>(io::read_u32(is));
    scene.n_classes = static_cast<int>(io::read_u32(is));
    if (scene.w < 1 || scene.w > 4096 || scene.h < 1 || scene.h > 4096 || scene.n_classes < 2 ||
        scene.n_classes > 256) {
        throw ContractError("load_scene: implausible header in " + path);
    }
    size_t n = static_cast<size_t>(scene.w) * scene.h;
    scene.image.resize(n);
    scene.label.resize(n);
    for (size_t i = 0; i < n; ++i) scene.image[i] = io::read_f64(is);
    for (size_t i = 0; i < n; ++i) scene.label[i] = io::read_u8(is);
    for (size_t i = 0; i < n; ++i) {
        if (!std::isfinite(scene.image[i]) || scene.image[i] < 0.0 || scene.image[i] > 1.0) {
            throw ContractError("load_scene: image value out of range in " + path);
        }
        if (scene.label[i] >= scene.n_classes) {
            throw ContractError("load_scene: label id out of range in " + path);
        }
    }
    return scene;
}

void write_dataset(const std::string& dir, int n_scenes, double labeled_fraction, uint64_t seed,
                   const SceneConfig& cfg) {
    check_config(cfg);
    DatasetSplit split = make_split(n_scenes, labeled_fraction, seed);
    fs::create_directories(dir);

    nlohmann::json manifest;
    manifest["n_scenes"] = n_scenes;
    manifest["seed"] = seed;
    manifest["labeled_fraction"] = labeled_fraction;
    manifest["scene_config"] = {
        {"w", cfg.w},
        {"h", cfg.h},
        {"n_classes", cfg.n_classes},
        {"min_organ_px", cfg.min_organ_px},
        {"blur", cfg.blur},
        {"noise_sigma", cfg.noise_sigma},
        {"max_place_tries", cfg.max_place_tries},
    };
    manifest["split"] = {
        {"labeled", split.labeled},
        {"unlabeled", split.unlabeled},
        {"test", split.test},
    };
    std::vector<std::string> names;
    for (int id = 0; id < n_scenes; ++id) {
        std::string name = "scene_" + std::to_string(id) + ".bin";
        save_scene(generate_scene(mix_seed(seed, static_cast<uint64_t>(id)), cfg),
                   (fs::path(dir) / name).string());
        names.push_back(name);
    }
    manifest["scenes"] = names;

    std::ofstream os(fs::path(dir) / "manifest.json");
    if (!os) throw ContractError("write_dataset: cannot open manifest in " + dir);
    os << manifest.dump(2) << "\n";
}

Dataset load_dataset(const std::string& dir) {
    std::ifstream is(fs::path(dir) / "manifest.json");
    if (!is) throw ContractError("load_dataset: missing manifest.json in " + dir);
    nlohmann::json manifest;
    try {
        is >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw ContractError("load_dataset: bad manifest.json: " + std::string(e.what()));
    }

    Dataset ds;
    try {
        ds.seed = manifest.at("seed").get<uint64_t>();
        ds.labeled_fraction = manifest.at("labeled_fraction").get<double>();
        const auto& sc = manifest.at("scene_config");
        ds.config.w = sc.at("w").get<int>();
        ds.config.h = sc.at("h").get<int>();
        ds.config.n_classes = sc.at("n_classes").get<int>();
        ds.config.min_organ_px = sc.at("min_organ_px").get<int>();
        ds.config.blur = sc.at("blur").get<double>();
        ds.config.noise_sigma = sc.at("noise_sigma").get<double>();
        ds.config.max_place_tries = sc.at("max_place_tries").get<int>();
        const auto& sp = manifest.at("split");
        ds.split.labeled = sp.at("labeled").get<std::vector<int>>();
        ds.split.unlabeled = sp.at("unlabeled").get<std::vector<int>>();
        ds.split.test = sp.at("test").get<std::vector<int>>();
        int n = manifest.at("n_scenes").get<int>();
        const auto& names = manifest.at("scenes");
        if (static_cast<int>(names.size()) != n) {
            throw ContractError("load_dataset: scene list length disagrees with n_scenes");
        }
        for (int id = 0; id < n; ++id) {
            ToyScene scene = load_scene((fs::path(dir) / names[id].get<std::string>()).string());
            if (scene.w != ds.config.w || scene.h != ds.config.h ||
                scene.n_classes != ds.config.n_classes) {
                throw ContractError("load_dataset: scene " + std::to_string(id) +
                                    " disagrees with manifest config");
            }
            scene.seed = mix_seed(ds.seed, static_cast<uint64_t>(id));
            ds.scenes.push_back(std::move(scene));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ContractError("load_dataset: bad manifest.json: " + std::string(e.what()));
    }
    return ds;
}

}  // namespace dacl
