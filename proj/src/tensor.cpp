#include "dacl/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dacl/errors.hpp"
#include "dacl/parallel.hpp"

namespace dacl::tc {

namespace {

constexpr double kNormEps = 1e-12;

std::int64_t numel_of(const std::vector<int>& shape) {
    std::int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
}

int lastdim(const Tensor& t) {
    if (t.shape.empty()) throw ContractError("lastdim: rank-0 tensor");
    return t.shape.back();
}

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape != b.shape) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape) + " vs " +
                             shape_str(b.shape));
    }
}

Tensor make_result(std::vector<int> shape, bool requires_grad) {
    Tensor t;
    t.shape = std::move(shape);
    const auto n = static_cast<size_t>(numel_of(t.shape));
    t.data = std::make_shared<std::vector<double>>(n, 0.0);
    t.requires_grad = requires_grad;
    if (requires_grad) t.grad = std::make_shared<std::vector<double>>(n, 0.0);
    return t;
}

bool any_grad(std::span<const Tensor> ts) {
    for (const auto& t : ts) {
        if (t.requires_grad) return true;
    }
    return false;
}

std::vector<int> parent_nodes(std::span<const Tensor> ts) {
    std::vector<int> p;
    for (const auto& t : ts) {
        if (t.node >= 0) p.push_back(t.node);
    }
    return p;
}

}  // namespace

std::int64_t Tensor::numel() const { return numel_of(shape); }

int Tensor::rows() const {
    if (shape.size() != 2) throw ContractError("rows: tensor is not 2-d, shape " + shape_str(shape));
    return shape[0];
}

int Tensor::cols() const {
    if (shape.size() != 2) throw ContractError("cols: tensor is not 2-d, shape " + shape_str(shape));
    return shape[1];
}

double Tensor::scalar() const {
    if (numel() != 1) throw ContractError("scalar: tensor has " + std::to_string(numel()) + " elements");
    return (*data)[0];
}

std::string shape_str(const std::vector<int>& shape) {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

Tensor constant(std::vector<int> shape, std::vector<double> values) {
    if (numel_of(shape) != static_cast<std::int64_t>(values.size())) {
        throw DimensionError("constant: " + std::to_string(values.size()) + " values for shape " +
                             shape_str(shape));
    }
    Tensor t;
    t.shape = std::move(shape);
    t.data = std::make_shared<std::vector<double>>(std::move(values));
    return t;
}

Tensor scalar_constant(double v) { return constant({1}, {v}); }

Tensor zeros(std::vector<int> shape) {
    auto n = static_cast<size_t>(numel_of(shape));
    Tensor t;
    t.shape = std::move(shape);
    t.data = std::make_shared<std::vector<double>>(n, 0.0);
    return t;
}

Tensor full(std::vector<int> shape, double v) {
    auto n = static_cast<size_t>(numel_of(shape));
    Tensor t;
    t.shape = std::move(shape);
    t.data = std::make_shared<std::vector<double>>(n, v);
    return t;
}

Tensor param(std::vector<int> shape, std::vector<double> values) {
    Tensor t = constant(std::move(shape), std::move(values));
    t.requires_grad = true;
    t.grad = std::make_shared<std::vector<double>>(t.data->size(), 0.0);
    return t;
}

int Tape::record(std::vector<int> parents, std::shared_ptr<std::vector<double>> out_grad,
                 std::function<void()> backward_fn) {
    for (int p : parents) {
        if (p < 0 || p >= static_cast<int>(nodes_.size())) {
            throw ContractError("tape: parent node " + std::to_string(p) + " out of order");
        }
    }
    nodes_.push_back(Node{std::move(parents), std::move(out_grad), std::move(backward_fn)});
    return static_cast<int>(nodes_.size()) - 1;
}

void Tape::backward(const Tensor& loss) {
    if (loss.numel() != 1) {
        throw ContractError("backward: loss must be scalar, got shape " + shape_str(loss.shape));
    }
    if (!loss.requires_grad || !loss.grad) {
        throw ContractError("backward: loss does not require grad (not recorded on the tape)");
    }
    (*loss.grad)[0] += 1.0;
    if (loss.node < 0) return;
    std::vector<char> needed(nodes_.size(), 0);
    needed[static_cast<size_t>(loss.node)] = 1;
    for (int i = loss.node; i >= 0; --i) {
        if (!needed[static_cast<size_t>(i)]) continue;
        Node& node = nodes_[static_cast<size_t>(i)];
        for (int p : node.parents) needed[static_cast<size_t>(p)] = 1;
        node.backward();
        std::fill(node.out_grad->begin(), node.out_grad->end(), 0.0);
    }
}

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
    if (a.shape.size() != 2 || b.shape.size() != 2 || a.shape[1] != b.shape[0]) {
        throw DimensionError("matmul: incompatible shapes " + shape_str(a.shape) + " x " +
                             shape_str(b.shape));
    }
    const int M = a.shape[0], K = a.shape[1], N = b.shape[1];
    Tensor out = make_result({M, N}, any_grad({{a, b}}));
    {
        const double* pa = a.data->data();
        const double* pb = b.data->data();
        double* pc = out.data->data();
        auto body = [&](std::int64_t r0, std::int64_t r1) {
            for (std::int64_t i = r0; i < r1; ++i) {
                const double* arow = pa + i * K;
                double* crow = pc + i * N;
                for (int k = 0; k < K; ++k) {
                    const double av = arow[k];
                    const double* brow = pb + static_cast<std::int64_t>(k) * N;
                    for (int j = 0; j < N; ++j) crow[j] += av * brow[j];
                }
            }
        };
        if (static_cast<std::int64_t>(M) * K * N >= 1 << 16) {
            parallel_for(M, body);
        } else {
            body(0, M);
        }
    }
    if (out.requires_grad) {
        out.node = tape.record(parent_nodes({{a, b}}), out.grad, [a, b, out, M, K, N] {
            const double* gout = out.grad->data();
            if (a.requires_grad) {
                const double* pb = b.data->data();
                double* ga = a.grad->data();
                parallel_for(M, [&](std::int64_t r0, std::int64_t r1) {
                    for (std::int64_t i = r0; i < r1; ++i) {
                        const double* grow = gout + i * N;
                        double* garow = ga + i * K;
                        for (int k = 0; k < K; ++k) {
                            const double* brow = pb + static_cast<std::int64_t>(k) * N;
                            double s = 0.0;
                            for (int j = 0; j < N; ++j) s += grow[j] * brow[j];
                            garow[k] += s;
                        }
                    }
                });
            }
            if (b.requires_grad) {
                const double* pa = a.data->data();
                double* gb = b.grad->data();
                for (int i = 0; i < M; ++i) {
                    const double* arow = pa + static_cast<std::int64_t>(i) * K;
                    const double* grow = gout + static_cast<std::int64_t>(i) * N;
                    for (int k = 0; k < K; ++k) {
                        const double av = arow[k];
                        double* gbrow = gb + static_cast<std::int64_t>(k) * N;
                        for (int j = 0; j < N; ++j) gbrow[j] += av * grow[j];
                    }
                }
            }
        });
    }
    return out;
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
    check_same_shape("add", a, b);
    Tensor out = make_result(a.shape, any_grad({{a, b}}));
    const auto n = static_cast<size_t>(out.numel());
    const double* pa = a.data->data();
    const double* pb = b.data->data();
    double* pc = out.data->data();
    for (size_t i = 0; i < n; ++i) pc[i] = pa[i] + pb[i];
    if (out.requires_grad) {
        out.node = tape.record(parent_nodes({{a, b}}), out.grad, [a, b, out, n] {
            const double* g = out.grad->data();
            if (a.requires_grad) {
                double* ga = a.grad->data();
                for (size_t i = 0; i < n; ++i) ga[i] += g[i];
            }
            if (b.requires_grad) {
                double* gb = b.grad->data();
                for (size_t i = 0; i < n; ++i) gb[i] += g[i];
            }
        });
    }
    return out;
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
    check_same_shape("mul", a, b);
    Tensor out = make_result(a.shape, any_grad({{a, b}}));
    const auto n = static_cast<size_t>(out.numel());
    const double* pa = a.data->data();
    const double* pb = b.data->data();
    double* pc = out.data->data();
    for (size_t i = 0; i < n; ++i) pc[i] = pa[i] * pb[i];
    if (out.requires_grad) {
        out.node = tape.record(parent_nodes({{a, b}}), out.grad, [a, b, out, n] {
            const double* g = out.grad->data();
            if (a.requires_grad) {
                const double* pb2 = b.data->data();
                double* ga = a.grad->data();
                for (size_t i = 0; i < n; ++i) ga[i] += g[i] * pb2[i];
            }
            if (b.requires_grad) {
                const double* pa2 = a.data->data();
                double* gb = b.grad->data();
                for (size_t i = 0; i < n; ++i) gb[i] += g[i] * pa2[i];
            }
        });
    }
    return out;
}

Tensor div(Tape& tape, const Tensor& a, const Tensor& b) {
    check_same_shape("div", a, b);
    Tensor out = make_result(a.shape, any_grad({{a, b}}));
    const auto n = static_cast<size_t>(out.numel());
    const double* pa = a.data->data();
    const double* pb = b.data->data();
    double* pc = out.data->data();
    for (size_t i = 0; i < n; ++i) pc[i] = pa[i] / pb[i];
    if (out.requires_grad) {
        out.node = tape.record(parent_nodes({{a, b}}), out.grad, [a, b, out, n] {
            const double* g = out.grad->data();
            const double* pa2 = a.data->data();
            const double* pb2 = b.data->data();
            if (a.requires_grad) {
                double* ga = a.grad->data();
                for (size_t i = 0; i < n; ++i) ga[i] += g[i] / pb2[i];
            }
            if (b.requires_grad) {
                double* gb = b.grad->data();
                for (size_t i = 0; i < n; ++i) gb[i] -= g[i] * pa2[i] / (pb2[i] * pb2[i]);
            }
        });
    }
    return out;
}

Tensor scale(Tape& tape, const Tensor& a, double c) {
    Tensor out = make_result(a.shape, a.requires_grad);
    const auto n = static_cast<size_t>(out.numel());
    const double* pa = a.data->data();
    double* pc = out.data->data();
    for (size_t i = 0; i < n; ++i) pc[i] = c * pa[i];
    if (out.requires_grad) {
        out.node = tape.record(parent_nodes({{a}}), out.grad, [a, out, c, n] {
            const double* g = out.grad->data();
            double* ga = a.grad->data();
            for (size_t i = 0; i < n; ++i) ga[i] += c * g[i];
        });
    }
    return out;
}

Tensor relu(Tape& tape, const Tensor& a) {
    Tensor out = make_result(a.shape, a.requires_grad);
    const auto n = static_cast<size_t>(out.numel());
    const double* pa = a.data->data();
    double* pc = out.data->data();
    for (size_t i = 0; i < n; ++i) pc[i] = pa[i] > 0.0 ? pa[i] : 0.0;
    if (out.requires_grad) {
        out.node = tape.record(parent_nodes({{a}}), out.grad, [a, out, n] {
            const double* g = out.grad->data();
            const double* pa2 = a.data->data();
            double* ga = a.grad->data();
            for (size_t i = 0; i < n; ++i) {
                if (pa2[i] > 0.0) ga[i] += g[i];
            }
        });
    }
    return out;
}

Tensor exp(Tape& tape, const Tensor& a) {
    Tensor out = make_result(a.shape, a.requires_grad);
    const auto n = static_cast<size_t>(out.numel());
    const double* pa = a.data->data();
    double* pc = out.data->data();
    for (size_t i = 0; i < n; ++i) pc[i] = std::exp(pa[i]);
    if (out.requires_grad) {
        out.node = tape.record(parent_nodes({{a}}), out.grad, [a, out, n] {
            const double* g = out.grad->data();
            const double* pc2 = out.data->data();
            double* ga = a.grad->data();
            for (size_t i = 0; i < n; ++i) ga[i] += g[i] * pc2[i];
        });
    }
    return out;
}

Tensor log(Tape& tape, const Tensor& a) {
    Tensor out = make_result(a.shape, a.requires_grad);
    const auto n = static_cast<size_t>(out.numel());
    const double* pa = a.data->data();
    double* pc = out.data->data();
    for (size_t i = 0; i < n; ++i) pc[i] = std::log(pa[i]);
    if (out.requires_grad) {
        out.node = tape.record(parent_nodes({{a}}), out.grad, [a, out, n] {
            const double* g = out.grad->data();
            const double* pa2 = a.data->data();
            double* ga = a.grad->data();
            for (size_t i = 0; i < n; ++i) ga[i] += g[i] / pa2[i];
        });
    }
    return out;
}

Tensor softmax_lastdim(Tape& tape, const Tensor& a) {
    const int C = lastdim(a);
    const std::int64_t R = a.numel() / C;
    Tensor out = make_result(a.shape, a.requires_grad);
    const double* pa = a.data->data();
    double* pc = out.data->data();
    for (std::int64_t r = 0; r < R; ++r) {
        const double* x = pa + r * C;
        double* y = pc + r * C;
        double m = x[0];
        for (int j = 1; j < C; ++j) m = std::max(m, x[j]);
        double s = 0.0;
        for (int j = 0; j < C; ++j) {
            y[j] = std::exp(x[j] - m);
            s += y[j];
        }
        for (int j = 0; j < C; ++j) y[j] /= s;
    }
    if (out.requires_grad) {
        out.node = tape.record(parent_nodes({{a}}), out.grad, [a, out, R, C] {
            const double* g = out.grad->data();
            const double* y = out.data->data();
            double* ga = a.grad->data();
            for (std::int64_t r = 0; r < R; ++r) {
                const double* grow = g + r * C;
                const double* yrow = y + r * C;
                double* garow = ga + r * C;
                double dot = 0.0;
                for (int j = 0; j < C; ++j) dot += grow[j] * yrow[j];
                for (int j = 0; j < C; ++j) garow[j] += yrow[j] * (grow[j] - dot);
            }
        });
    }
    return out;
}

Tensor l2_normalize_lastdim(Tape& tape, const Tensor& a) {
    const int C = lastdim(a);
    const std::int64_t R = a.numel() / C;
    Tensor out = make_result(a.shape, a.requires_grad);
    const double* pa = a.data->data();
    double* pc = out.data->data();
    for (std::int64_t r = 0; r < R; ++r) {
        const double* x = pa + r * C;
        double* y = pc + r * C;
        double s = 0.0;
        for (int j = 0; j < C; ++j) s += x[j] * x[j];
        const double inv = 1.0 / std::max(std::sqrt(s), kNormEps);
        for (int j = 0; j < C; ++j) y[j] = x[j] * inv;
    }
    if (out.requires_grad) {
        out.node = tape.record(parent_nodes({{a}}), out.grad, [a, out, R, C] {
            const double* g = out.grad->data();
            const double* pa2 = a.data->data();
            const double* y = out.data->data();
            double* ga = a.grad->data();
            for (std::int64_t r = 0; r < R; ++r) {
                const double* xrow = pa2 + r * C;
                const double* grow = g + r * C;
                const double* yrow = y + r * C;
                double* garow = ga + r * C;
                double s = 0.0;
                for (int j = 0; j < C; ++j) s += xrow[j] * xrow[j];
                const double norm = std::sqrt(s);
                const double inv = 1.0 / std::max(norm, kNormEps);
                if (norm > kNormEps) {
                    double dot = 0.0;
                    for (int j = 0; j < C; ++j) dot += grow[j] * yrow[j];
                    for (int j = 0; j < C; ++j) garow[j] += (grow[j] - yrow[j] * dot) * inv;
                } else {
                    for (int j = 0; j < C; ++j) garow[j] += grow[j] * inv;
                }
            }
        });
    }
    return out;
}

Tensor sum(Tape& tape, const Tensor& a) {
    Tensor out = make_result({1}, a.requires_grad);
    const auto n = static_cast<size_t>(a.numel());
    const double* pa = a.data->data();
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += pa[i];
    (*out.data)[0] = s;
    if (out.requires_grad) {
        out.node = tape.record(parent_nodes({{a}}), out.grad, [a, out, n] {
            const double g = (*out.grad)[0];
            double* ga = a.grad->data();
            for (size_t i = 0; i < n; ++i) ga[i] += g;
        });
    }
    return out;
}

Tensor mean(Tape& tape, const Tensor& a) {
    const auto n = static_cast<size_t>(a.numel());
    if (n == 0) throw ContractError("mean: empty tensor");
    Tensor out = make_result({1}, a.requires_grad);
    const double* pa = a.data->data();
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += pa[i];
    (*out.data)[0] = s / static_cast<double>(n);
    if (out.requires_grad) {
        out.node = tape.record(parent_nodes({{a}}), out.grad, [a, out, n] {
            const double g = (*out.grad)[0] / static_cast<double>(n);
            double* ga = a.grad->data();
            for (size_t i = 0; i < n; ++i) ga[i] += g;
        });
    }
    return out;
}

Tensor sum_lastdim(Tape& tape, const Tensor& a) {
    const int C = lastdim(a);
    const std::int64_t R = a.numel() / C;
    std::vector<int> out_shape = a.shape;
    out_shape.back() = 1;
    Tensor out = make_result(out_shape, a.requires_grad);
    const double* pa = a.data->data();
    double* pc = out.data->data();
    for (std::int64_t r = 0; r < R; ++r) {
        const double* x = pa + r * C;
        double s = 0.0;
        for (int j = 0; j < C; ++j) s += x[j];
        pc[r] = s;
    }
    if (out.requires_grad) {
        out.node = tape.record(parent_nodes({{a}}), out.grad, [a, out, R, C] {
            const double* g = out.grad->data();
            double* ga = a.grad->data();
            for (std::int64_t r = 0; r < R; ++r) {
                for (int j = 0; j < C; ++j) ga[r * C + j] += g[r];
            }
        });
    }
    return out;
}

Tensor concat_rows(Tape& tape, std::span<const Tensor> parts) {
    if (parts.empty()) throw ContractError("concat_rows: no inputs");
    const int C = parts[0].cols();
    int R = 0;
    for (const auto& p : parts) {
        if (p.cols() != C) {
            throw DimensionError("concat_rows: column mismatch " + shape_str(p.shape) + " vs " +
                                 std::to_string(C) + " cols");
        }
        R += p.rows();
    }
    Tensor out = make_result({R, C}, any_grad(parts));
    double* pc = out.data->data();
    std::int64_t off = 0;
    for (const auto& p : parts) {
        const auto n = static_cast<size_t>(p.numel());
        std::copy_n(p.data->data(), n, pc + off);
        off += static_cast<std::int64_t>(n);
    }
    if (out.requires_grad) {
        std::vector<Tensor> held(parts.begin(), parts.end());
        out.node = tape.record(parent_nodes(parts), out.grad, [held = std::move(held), out] {
            const double* g = out.grad->data();
            std::int64_t off2 = 0;
            for (const auto& p : held) {
                const auto n = static_cast<std::int64_t>(p.numel());
                if (p.requires_grad) {
                    double* gp = p.grad->data();
                    for (std::int64_t i = 0; i < n; ++i) gp[i] += g[off2 + i];
                }
                off2 += n;
            }
        });
    }
    return out;
}

Tensor slice_rows(Tape& tape, const Tensor& a, int row0, int nrows) {
    const int R = a.rows(), C = a.cols();
    if (row0 < 0 || nrows <= 0 || row0 + nrows > R) {
        throw DimensionError("slice_rows: rows [" + std::to_string(row0) + "," +
                             std::to_string(row0 + nrows) + ") of " + shape_str(a.shape));
    }
    Tensor out = make_result({nrows, C}, a.requires_grad);
    std::copy_n(a.data->data() + static_cast<std::int64_t>(row0) * C,
                static_cast<size_t>(nrows) * C, out.data->data());
    if (out.requires_grad) {
        out.node = tape.record(parent_nodes({{a}}), out.grad, [a, out, row0, nrows, C] {
            const double* g = out.grad->data();
            double* ga = a.grad->data() + static_cast<std::int64_t>(row0) * C;
            const auto n = static_cast<size_t>(nrows) * C;
            for (size_t i = 0; i < n; ++i) ga[i] += g[i];
        });
    }
    return out;
}

Tensor slice_lastdim(Tape& tape, const Tensor& a, int offset, int len) {
    const int C = lastdim(a);
    if (offset < 0 || len <= 0 || offset + len > C) {
        throw DimensionError("slice_lastdim: cols [" + std::to_string(offset) + "," +
                             std::to_string(offset + len) + ") of " + shape_str(a.shape));
    }
    const std::int64_t R = a.numel() / C;
    std::vector<int> out_shape = a.shape;
    out_shape.back() = len;
    Tensor out = make_result(out_shape, a.requires_grad);
    const double* pa = a.data->data();
    double* pc = out.data->data();
    for (std::int64_t r = 0; r < R; ++r) {
        std::copy_n(pa + r * C + offset, static_cast<size_t>(len), pc + r * len);
    }
    if (out.requires_grad) {
        out.node = tape.record(parent_nodes({{a}}), out.grad, [a, out, R, C, offset, len] {
            const double* g = out.grad->data();
            double* ga = a.grad->data();
            for (std::int64_t r = 0; r < R; ++r) {
                for (int j = 0; j < len; ++j) ga[r * C + offset + j] += g[r * len + j];
            }
        });
    }
    return out;
}

Tensor gather_rows(Tape& tape, const Tensor& a, std::shared_ptr<const std::vector<int>> indices) {
    const int R = a.rows(), C = a.cols();
    const auto& idx = *indices;
    for (int i : idx) {
        if (i < -1 || i >= R) {
            throw DimensionError("gather_rows: index " + std::to_string(i) + " out of range for " +
                                 shape_str(a.shape));
        }
    }
    Tensor out = make_result({static_cast<int>(idx.size()), C}, a.requires_grad);
    const double* pa = a.data->data();
    double* pc = out.data->data();
    for (size_t r = 0; r < idx.size(); ++r) {
        if (idx[r] >= 0) {
            std::copy_n(pa + static_cast<std::int64_t>(idx[r]) * C, static_cast<size_t>(C),
                        pc + static_cast<std::int64_t>(r) * C);
        }
        // index -1 keeps the zero row (padding)
    }
    if (out.requires_grad) {
        out.node = tape.record(parent_nodes({{a}}), out.grad, [a, out, indices, C] {
            const double* g = out.grad->data();
            double* ga = a.grad->data();
            const auto& idx2 = *indices;
            for (size_t r = 0; r < idx2.size(); ++r) {
                if (idx2[r] < 0) continue;
                double* garow = ga + static_cast<std::int64_t>(idx2[r]) * C;
                const double* grow = g + static_cast<std::int64_t>(r) * C;
                for (int j = 0; j < C; ++j) garow[j] += grow[j];
            }
        });
    }
    return out;
}

Tensor gather_rows(Tape& tape, const Tensor& a, std::vector<int> indices) {
    return gather_rows(tape, a, std::make_shared<const std::vector<int>>(std::move(indices)));
}

Tensor reshape(const Tensor& a, std::vector<int> new_shape) {
    if (numel_of(new_shape) != a.numel()) {
        throw DimensionError("reshape: " + shape_str(a.shape) + " to " + shape_str(new_shape));
    }
    Tensor out = a;
    out.shape = std::move(new_shape);
    return out;
}

Sgd::Sgd(std::vector<Tensor> params, double lr, double momentum, double weight_decay)
    : params_(std::move(params)), lr_(lr), momentum_(momentum), weight_decay_(weight_decay) {
    velocity_.reserve(params_.size());
    for (const auto& p : params_) {
        if (!p.requires_grad || !p.grad) {
            throw ContractError("sgd: parameter has no gradient buffer");
        }
        velocity_.emplace_back(p.data->size(), 0.0);
    }
}

void Sgd::step() {
    for (size_t pi = 0; pi < params_.size(); ++pi) {
        auto& p = params_[pi];
        auto& v = velocity_[pi];
        double* pd = p.data->data();
        double* pg = p.grad->data();
        for (size_t i = 0; i < v.size(); ++i) {
            v[i] = momentum_ * v[i] + pg[i] + weight_decay_ * pd[i];
            pd[i] -= lr_ * v[i];
            pg[i] = 0.0;
        }
    }
}

}  // namespace dacl::tc
