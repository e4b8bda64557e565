#include "dacl/prototyping.hpp"

#include <string>

#include "dacl/errors.hpp"

namespace dacl {

std::vector<std::uint8_t> binarize_mask(const ActivationMask& mask, double phi) {
    if (!(phi >= 0.0 && phi < 1.0)) {
        throw ConfigError("binarize_mask: phi must be in [0,1), got " + std::to_string(phi));
    }
    std::vector<std::uint8_t> out(mask.scores.size());
    for (size_t i = 0; i < mask.scores.size(); ++i) {
        const double s = mask.scores[i];
        if (!(s >= 0.0 && s <= 1.0)) {
            throw ContractError("binarize_mask: score " + std::to_string(s) + " outside [0,1]");
        }
        out[i] = s > phi ? 1 : 0;
    }
    return out;
}

std::optional<tc::Tensor> masked_average_pool(tc::Tape& tape, const tc::Tensor& projections,
                                              const std::vector<std::uint8_t>& mask01) {
    if (static_cast<std::int64_t>(mask01.size()) != projections.rows()) {
        throw ContractError("masked_average_pool: mask of " + std::to_string(mask01.size()) +
                            " cells for projection map " + tc::shape_str(projections.shape));
    }
    std::vector<int> active;
    for (size_t i = 0; i < mask01.size(); ++i) {
        if (mask01[i]) active.push_back(static_cast<int>(i));
    }
    if (active.empty()) return std::nullopt;
    const double inv = 1.0 / static_cast<double>(active.size());
    tc::Tensor picked = tc::gather_rows(tape, projections, std::move(active));
    tc::Tensor weights = tc::full({1, picked.rows()}, inv);
    return tc::matmul(tape, weights, picked);
}

std::vector<BatchPrototype> batch_prototypes(tc::Tape& tape,
                                             const std::vector<tc::Tensor>& image_projections,
                                             const std::vector<std::vector<ActivationMask>>& masks,
                                             double phi, std::uint64_t& seq_counter) {
    if (image_projections.size() != masks.size()) {
        throw ContractError("batch_prototypes: " + std::to_string(masks.size()) +
                            " mask sets for " + std::to_string(image_projections.size()) + " images");
    }
    std::vector<BatchPrototype> out;
    for (size_t img = 0; img < image_projections.size(); ++img) {
        for (const auto& mask : masks[img]) {
            auto mask01 = binarize_mask(mask, phi);
            auto pooled = masked_average_pool(tape, image_projections[img], mask01);
            if (!pooled.has_value()) continue;
            BatchPrototype proto;
            proto.unit_vec = tc::l2_normalize_lastdim(tape, *pooled);
            proto.snapshot.vec = proto.unit_vec.values();
            proto.snapshot.class_id = mask.class_id;
            proto.snapshot.origin = ClassEmbedding::Origin::Batch;
            proto.snapshot.seq_id = seq_counter++;
            proto.image_index = static_cast<int>(img);
            out.push_back(std::move(proto));
        }
    }
    return out;
}

}  // namespace dacl
