#pragma once

#include <utility>
#include <vector>

#include "dacl/geometry.hpp"
#include "dacl/tensor.hpp"

namespace dacl {

// Per-anchor soft weights for one class: softmax of anchor-to-center
// similarity, scaled by 1/gamma.
struct PositivenessVector {
    int class_id = 0;
    std::vector<double> w;
    std::vector<double> gamma;
};

// softmax(logits)/gamma, elementwise. Exposed separately so shift invariance
// can be tested without constructing embeddings.
std::vector<double> positiveness_from_logits(const std::vector<double>& logits,
                                             const std::vector<double>& gamma);

PositivenessVector positiveness(const std::vector<ClassEmbedding>& anchors,
                                const std::vector<double>& center_unit,
                                const std::vector<double>& gamma);

// Inputs for one class's contrastive term. Anchors are live (1, D) tape
// tensors; the center and negatives are plain detached vectors, so gradient
// reaches the encoder through anchors only.
struct ClassLossInputs {
    int class_id = 0;
    std::vector<tc::Tensor> anchors;
    std::vector<double> center;
    std::vector<std::vector<double>> negatives;
    std::vector<double> w;  // aligned with anchors
};

struct ContrastiveTerms {
    std::vector<std::pair<int, double>> per_class;  // class_id -> term value
    tc::Tensor total;                               // scalar; constant zero when nothing contributed
    double tau = 0.0;
    int contributing = 0;
};

// L = -sum_n sum_i log[ w_i exp(m_i.c/tau) / sum_j exp(m_i.p-_j/tau) ].
// The denominator holds negatives only, so terms can be negative. With
// infonce_denominator the center's own term joins the denominator. Classes
// missing anchors or negatives contribute nothing.
ContrastiveTerms soft_contrastive_loss(tc::Tape& tape, std::vector<ClassLossInputs> classes,
                                       double tau, bool infonce_denominator = false);

// Minimizes -sum_i w_i log s_i over the probability simplex (softmax
// parametrization, gradient descent on the tape) and returns the optimum,
// which lands on w/sum(w). Library self-test, not part of training.
std::vector<double> claim1_verify(const std::vector<double>& w, int steps, double lr);

}  // namespace dacl
