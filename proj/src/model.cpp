#include "dacl/model.hpp"

#include <cmath>
#include <random>

#include "dacl/errors.hpp"

namespace dacl {

namespace {

std::shared_ptr<const std::vector<int>> unfold_indices(int w, int h) {
    std::vector<int> idx;
    idx.reserve(static_cast<size_t>(w) * h * 9);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    int ny = y + dy;
                    int nx = x + dx;
                    bool in = ny >= 0 && ny < h && nx >= 0 && nx < w;
                    idx.push_back(in ? ny * w + nx : -1);
                }
            }
        }
    }
    return std::make_shared<const std::vector<int>>(std::move(idx));
}

}  // namespace

GridMaps make_grid_maps(int w, int h) {
    if (w < 2 || h < 2 || w % 2 != 0 || h % 2 != 0) {
        throw ConfigError("grid dims must be even and >= 2, got " + std::to_string(w) + "x" +
                          std::to_string(h));
    }
    int ww = w / 2;
    int hh = h / 2;
    GridMaps m;
    m.w = w;
    m.h = h;
    m.unfold_full = unfold_indices(w, h);
    m.unfold_half = unfold_indices(ww, hh);

    std::vector<int> pool;
    pool.reserve(static_cast<size_t>(ww) * hh);
    for (int y = 0; y < hh; ++y)
        for (int x = 0; x < ww; ++x) pool.push_back(2 * y * w + 2 * x);
    m.pool_half = std::make_shared<const std::vector<int>>(std::move(pool));

    std::vector<int> up;
    up.reserve(static_cast<size_t>(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) up.push_back((y / 2) * ww + x / 2);
    m.upsample = std::make_shared<const std::vector<int>>(std::move(up));

    m.zeros_full = std::make_shared<const std::vector<int>>(std::vector<int>(w * h, 0));
    m.zeros_half = std::make_shared<const std::vector<int>>(std::vector<int>(ww * hh, 0));
    return m;
}

namespace {

void check_dims(const ModelDims& d) {
    if (d.n_classes < 2) throw ConfigError("model needs at least 2 classes");
    if (d.conv1_channels < 1 || d.conv2_channels < 1 || d.proj_hidden < 1 || d.d_proj < 1) {
        throw ConfigError("model channel counts must be positive");
    }
}

tc::Tensor he_weight(std::mt19937_64& rng, int fan_in, int fan_out) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
    std::vector<double> v(static_cast<size_t>(fan_in) * fan_out);
    for (double& x : v) x = dist(rng);
    return tc::param({fan_in, fan_out}, std::move(v));
}

tc::Tensor zero_bias(int n) { return tc::param({1, n}, std::vector<double>(n, 0.0)); }

}  // namespace

SegModel::SegModel(const ModelDims& dims, std::uint64_t init_seed) : dims_(dims) {
    check_dims(dims);
    std::mt19937_64 rng(init_seed);
    int c1 = dims.conv1_channels;
    int c2 = dims.conv2_channels;
    int n = dims.n_classes;
    int ph = dims.proj_hidden;

    w1_ = he_weight(rng, 9, c1);
    b1_ = zero_bias(c1);
    w2_ = he_weight(rng, 9 * c1, c2);
    b2_ = zero_bias(c2);
    wd_skip_ = he_weight(rng, c1, n);
    wd_deep_ = he_weight(rng, c2, n);
    bd_ = zero_bias(n);
    wp_skip_ = he_weight(rng, c1, ph);
    wp_deep_ = he_weight(rng, c2, ph);
    bp_h_ = zero_bias(ph);
    wp_out_ = he_weight(rng, ph, dims.d_proj);
    bp_out_ = zero_bias(dims.d_proj);

    params_ = {w1_, b1_, w2_, b2_, wd_skip_, wd_deep_, bd_, wp_skip_, wp_deep_, bp_h_, wp_out_,
               bp_out_};
}

ForwardOut SegModel::forward(tc::Tape& tape, const GridMaps& maps,
                             const std::vector<double>& image,
                             const std::vector<double>* channel_mask) const {
    int wh = maps.w * maps.h;
    int wh4 = wh / 4;
    if (static_cast<int>(image.size()) != wh) {
        throw DimensionError("forward: image has " + std::to_string(image.size()) +
                             " pixels, grid expects " + std::to_string(wh));
    }
    int c1 = dims_.conv1_channels;
    int c2 = dims_.conv2_channels;

    tc::Tensor x = tc::constant({wh, 1}, image);
    auto n9 = tc::reshape(tc::gather_rows(tape, x, maps.unfold_full), {wh, 9});
    auto h1 = tc::relu(
        tape, tc::add(tape, tc::matmul(tape, n9, w1_), tc::gather_rows(tape, b1_, maps.zeros_full)));
    auto h1p = tc::gather_rows(tape, h1, maps.pool_half);
    auto n9h = tc::reshape(tc::gather_rows(tape, h1p, maps.unfold_half), {wh4, 9 * c1});
    auto h2 = tc::relu(
        tape, tc::add(tape, tc::matmul(tape, n9h, w2_), tc::gather_rows(tape, b2_, maps.zeros_half)));
    auto up = tc::gather_rows(tape, h2, maps.upsample);
    if (channel_mask != nullptr) {
        if (static_cast<int>(channel_mask->size()) != c2) {
            throw DimensionError("forward: channel mask size " +
                                 std::to_string(channel_mask->size()) + " != " +
                                 std::to_string(c2));
        }
        auto mask_row = tc::constant({1, c2}, *channel_mask);
        up = tc::mul(tape, up, tc::gather_rows(tape, mask_row, maps.zeros_full));
    }

    auto logits = tc::add(
        tape, tc::add(tape, tc::matmul(tape, h1, wd_skip_), tc::matmul(tape, up, wd_deep_)),
        tc::gather_rows(tape, bd_, maps.zeros_full));
    auto ph = tc::relu(
        tape,
        tc::add(tape, tc::add(tape, tc::matmul(tape, h1, wp_skip_), tc::matmul(tape, up, wp_deep_)),
                tc::gather_rows(tape, bp_h_, maps.zeros_full)));
    auto proj = tc::add(tape, tc::matmul(tape, ph, wp_out_),
                        tc::gather_rows(tape, bp_out_, maps.zeros_full));
    return {logits, proj};
}

}  // namespace dacl
