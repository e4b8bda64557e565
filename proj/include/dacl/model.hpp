#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "dacl/tensor.hpp"

namespace dacl {

// Precomputed index maps that express the spatial ops (3x3 unfold, stride-2
// pooling, nearest upsampling, bias broadcast) as row gathers.
struct GridMaps {
    int w = 0;
    int h = 0;
    std::shared_ptr<const std::vector<int>> unfold_full;  // (w*h*9) into full grid, -1 pads
    std::shared_ptr<const std::vector<int>> pool_half;    // (w/2*h/2) top-left subsample
    std::shared_ptr<const std::vector<int>> unfold_half;  // (w/2*h/2*9) into half grid
    std::shared_ptr<const std::vector<int>> upsample;     // (w*h) nearest from half grid
    std::shared_ptr<const std::vector<int>> zeros_full;   // (w*h) all zero, bias broadcast
    std::shared_ptr<const std::vector<int>> zeros_half;   // (w/2*h/2) all zero
};

GridMaps make_grid_maps(int w, int h);

struct ModelDims {
    int n_classes = 4;
    int conv1_channels = 6;
    int conv2_channels = 12;
    int proj_hidden = 12;
    int d_proj = 8;
};

struct ForwardOut {
    tc::Tensor logits;  // (w*h, n_classes), raw scores
    tc::Tensor proj;    // (w*h, d_proj), unnormalized embeddings
};

// Two-level convolutional encoder with a skip connection into both heads: a
// pixel decoder producing per-class logits and a projection head producing
// embeddings for contrastive use.
class SegModel {
public:
    SegModel(const ModelDims& dims, std::uint64_t init_seed);

    const ModelDims& dims() const { return dims_; }
    // Parameter tensors in fixed declaration order (checkpoint layout).
    const std::vector<tc::Tensor>& params() const { return params_; }

    // channel_mask, when given, multiplies the upsampled deep features
    // channelwise (values are pre-scaled, e.g. 0 or 1/keep_prob).
    ForwardOut forward(tc::Tape& tape, const GridMaps& maps, const std::vector<double>& image,
                       const std::vector<double>* channel_mask = nullptr) const;

private:
    ModelDims dims_;
    std::vector<tc::Tensor> params_;
    tc::Tensor w1_, b1_, w2_, b2_;
    tc::Tensor wd_skip_, wd_deep_, bd_;
    tc::Tensor wp_skip_, wp_deep_, bp_h_, wp_out_, bp_out_;
};

}  // namespace dacl
