#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace dacl::tc {

// Dense row-major f64 tensor. Copies share the underlying buffers; `node`
// links the tensor to the tape that recorded its producing op (-1 for leaves
// and constants).
struct Tensor {
    std::vector<int> shape;
    std::shared_ptr<std::vector<double>> data;
    std::shared_ptr<std::vector<double>> grad;  // non-null iff requires_grad
    bool requires_grad = false;
    int node = -1;

    std::int64_t numel() const;
    int rows() const;  // first dim of a 2-d tensor
    int cols() const;  // last dim of a 2-d tensor
    bool is_scalar() const { return numel() == 1; }
    double scalar() const;

    double at(std::int64_t i) const { return (*data)[static_cast<size_t>(i)]; }
    std::vector<double> values() const { return *data; }
};

std::string shape_str(const std::vector<int>& shape);

Tensor constant(std::vector<int> shape, std::vector<double> values);
Tensor scalar_constant(double v);
Tensor zeros(std::vector<int> shape);
Tensor full(std::vector<int> shape, double v);
// Gradient-carrying leaf (a trainable parameter).
Tensor param(std::vector<int> shape, std::vector<double> values);

// Define-by-run gradient tape. Rebuilt per iteration; nodes are stored in
// creation order so every node's parents precede it.
class Tape {
public:
    struct Node {
        std::vector<int> parents;
        std::shared_ptr<std::vector<double>> out_grad;
        std::function<void()> backward;
    };

    int record(std::vector<int> parents, std::shared_ptr<std::vector<double>> out_grad,
               std::function<void()> backward_fn);
    // Seeds d(loss)/d(loss)=1 and walks the tape in reverse. Leaf grads
    // accumulate across calls; intermediate grads are scratch, consumed and
    // cleared as the walk passes them.
    void backward(const Tensor& loss);
    size_t size() const { return nodes_.size(); }

private:
    std::vector<Node> nodes_;
};

// Recorded ops. Shapes are strict (no implicit broadcasting); mismatches throw
// DimensionError naming the op and shapes.
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor div(Tape& tape, const Tensor& a, const Tensor& b);
Tensor scale(Tape& tape, const Tensor& a, double c);
Tensor relu(Tape& tape, const Tensor& a);
Tensor exp(Tape& tape, const Tensor& a);
Tensor log(Tape& tape, const Tensor& a);
Tensor softmax_lastdim(Tape& tape, const Tensor& a);
Tensor l2_normalize_lastdim(Tape& tape, const Tensor& a);
Tensor sum(Tape& tape, const Tensor& a);           // full reduction -> shape {1}
Tensor mean(Tape& tape, const Tensor& a);          // full reduction -> shape {1}
Tensor sum_lastdim(Tape& tape, const Tensor& a);   // (R,C) -> (R,1)
Tensor concat_rows(Tape& tape, std::span<const Tensor> parts);
Tensor slice_rows(Tape& tape, const Tensor& a, int row0, int nrows);
Tensor slice_lastdim(Tape& tape, const Tensor& a, int offset, int len);
// Row gather; index -1 yields a zero row. Also serves as explicit broadcast.
Tensor gather_rows(Tape& tape, const Tensor& a, std::shared_ptr<const std::vector<int>> indices);
Tensor gather_rows(Tape& tape, const Tensor& a, std::vector<int> indices);
// Metadata-only: shares data and grad buffers with `a`.
Tensor reshape(const Tensor& a, std::vector<int> new_shape);

// SGD with classical momentum: v <- momentum*v + grad + weight_decay*param,
// param <- param - lr*v. step() zeroes the gradients it consumed.
class Sgd {
public:
    Sgd(std::vector<Tensor> params, double lr, double momentum, double weight_decay);
    void step();

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> velocity_;
    double lr_;
    double momentum_;
    double weight_decay_;
};

}  // namespace dacl::tc
