#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dacl/geometry.hpp"
#include "dacl/tensor.hpp"

namespace dacl {

// Per-class reliability map over one image, flattened row-major to W*H.
// Ground-truth masks hold one-hot scores; pseudo-label masks hold the
// counterpart model's softmax probabilities.
struct ActivationMask {
    int class_id = 0;
    std::vector<double> scores;  // each in [0,1]
    enum class Source { GroundTruth, PseudoLabel } source = Source::GroundTruth;
};

// Strict threshold: cell is 1 iff score > phi. phi must lie in [0,1).
std::vector<std::uint8_t> binarize_mask(const ActivationMask& mask, double phi);

// Masked average pooling over the (W*H, D_proj) projection map. Stays on the
// tape so the contrastive loss reaches the encoder. Returns nothing when the
// mask selects no pixels. The result is the raw mean, not yet normalized.
std::optional<tc::Tensor> masked_average_pool(tc::Tape& tape, const tc::Tensor& projections,
                                              const std::vector<std::uint8_t>& mask01);

// One pooled prototype: the tape-resident normalized vector plus a detached
// snapshot for density estimation and bank storage.
struct BatchPrototype {
    tc::Tensor unit_vec;      // (1, D_proj), L2-normalized, on the tape
    ClassEmbedding snapshot;  // detached copy; origin=Batch, fresh seq_id
    int image_index = 0;
};

// At most one prototype per (image, class); absent classes are skipped.
// masks[i] carries the per-class masks of image i. seq_counter supplies
// globally unique seq_ids and is advanced per emitted prototype.
std::vector<BatchPrototype> batch_prototypes(tc::Tape& tape,
                                             const std::vector<tc::Tensor>& image_projections,
                                             const std::vector<std::vector<ActivationMask>>& masks,
                                             double phi, std::uint64_t& seq_counter);

}  // namespace dacl
