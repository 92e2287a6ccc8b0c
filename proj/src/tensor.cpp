#include "cogen/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

#include "cogen/kernels.hpp"
#include "cogen/rng.hpp"

namespace cogen {

namespace {

thread_local Tape* g_tape = nullptr;

void check_finite(const Tensor& t, const char* op) {
    if (kernels::has_nonfinite(t.data(), t.numel()))
        throw NumericError(std::string("non-finite value produced by op '") + op + "'");
}

bool want_grad(std::initializer_list<const Tensor*> inputs) {
    if (!g_tape) return false;
    for (const Tensor* t : inputs)
        if (t->requires_grad()) return true;
    return false;
}

// b broadcasts over the leading axes of a; returns rows of a per copy of b.
std::int64_t broadcast_rows(const Shape& a, const Shape& b, const char* op) {
    if (b.size() > a.size()) throw ShapeError(std::string(op) + ": rhs rank exceeds lhs");
    const std::size_t off = a.size() - b.size();
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (a[off + i] != b[i])
            throw ShapeError(std::string(op) + ": shapes " + shape_str(a) + " and " + shape_str(b) +
                             " are not suffix-compatible");
    }
    std::int64_t rows = 1;
    for (std::size_t i = 0; i < off; ++i) rows *= a[i];
    return rows;
}

}  // namespace

std::int64_t shape_numel(const Shape& s) {
    std::int64_t n = 1;
    for (auto d : s) n *= d;
    return n;
}

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << "]";
    return os.str();
}

Tensor make_tensor(Shape shape, std::vector<double> data) {
    auto impl = std::make_shared<TensorImpl>();
    impl->shape = std::move(shape);
    impl->data = std::move(data);
    if (shape_numel(impl->shape) != static_cast<std::int64_t>(impl->data.size()))
        throw ShapeError("tensor data length does not match shape " + shape_str(impl->shape));
    return Tensor(std::move(impl));
}

Tensor Tensor::zeros(Shape shape) {
    auto n = shape_numel(shape);
    return make_tensor(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), 0.0));
}

Tensor Tensor::full(Shape shape, double value) {
    auto n = shape_numel(shape);
    return make_tensor(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), value));
}

Tensor Tensor::from(Shape shape, std::vector<double> values) {
    return make_tensor(std::move(shape), std::move(values));
}

Tensor Tensor::scalar(double value) { return make_tensor({1}, {value}); }

Tensor Tensor::randn(Shape shape, std::uint64_t seed, double sc) {
    auto t = Tensor::zeros(std::move(shape));
    fill_normal({t.mutable_data(), static_cast<std::size_t>(t.numel())}, seed);
    if (sc != 1.0)
        for (std::int64_t i = 0; i < t.numel(); ++i) t.mutable_data()[i] *= sc;
    return t;
}

double Tensor::item() const {
    if (numel() != 1) throw ShapeError("item() on non-scalar tensor " + shape_str(shape()));
    return p_->data[0];
}

void Tape::record(std::string op, std::function<void(Tape&)> bw) {
    nodes_.push_back({std::move(op), std::move(bw)});
}

std::vector<double>& Tape::grad_buffer(const TensorImpl* t) {
    auto it = grads_.find(t);
    if (it == grads_.end()) {
        it = grads_.emplace(t, std::vector<double>(t->data.size(), 0.0)).first;
    }
    return it->second;
}

const std::vector<double>* Tape::grad(const Tensor& t) const { return grad(t.impl()); }

const std::vector<double>* Tape::grad(const TensorImpl* t) const {
    auto it = grads_.find(t);
    return it == grads_.end() ? nullptr : &it->second;
}

void Tape::clear() {
    nodes_.clear();
    grads_.clear();
}

TapeScope::TapeScope(Tape& tape) : prev_(g_tape) { g_tape = &tape; }
TapeScope::~TapeScope() { g_tape = prev_; }

Tape* current_tape() { return g_tape; }

void backward(Tape& tape, const Tensor& loss) {
    if (loss.numel() != 1) throw ShapeError("backward() requires a scalar loss");
    tape.grad_buffer(loss.impl())[0] += 1.0;
    for (auto it = tape.nodes_.rbegin(); it != tape.nodes_.rend(); ++it) {
        it->backward(tape);
    }
}

// ---------------------------------------------------------------- matmul

namespace {

Tensor matmul_impl(const Tensor& a, const Tensor& b, bool b_transposed) {
    const char* op = b_transposed ? "matmul_t" : "matmul";
    std::int64_t batch = 1, m, k, n;
    bool batched = false;
    if (a.ndim() == 2 && b.ndim() == 2) {
        m = a.dim(0);
        k = a.dim(1);
    } else if (a.ndim() == 3 && b.ndim() == 3 && a.dim(0) == b.dim(0)) {
        batched = true;
        batch = a.dim(0);
        m = a.dim(1);
        k = a.dim(2);
    } else {
        throw ShapeError(std::string(op) + ": unsupported ranks " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
    }
    const std::int64_t bk = b.dim(batched ? 1 : 0);
    const std::int64_t bn = b.dim(batched ? 2 : 1);
    if (b_transposed) {
        n = bk;
        if (bn != k)
            throw ShapeError(std::string(op) + ": inner dims " + shape_str(a.shape()) + " x " +
                             shape_str(b.shape()));
    } else {
        n = bn;
        if (bk != k)
            throw ShapeError(std::string(op) + ": inner dims " + shape_str(a.shape()) + " x " +
                             shape_str(b.shape()));
    }

    Shape out_shape = batched ? Shape{batch, m, n} : Shape{m, n};
    Tensor out = Tensor::zeros(out_shape);
    for (std::int64_t s = 0; s < batch; ++s) {
        const double* ap = a.data() + s * m * k;
        const double* bp = b.data() + s * (b_transposed ? n * k : k * n);
        double* cp = out.mutable_data() + s * m * n;
        if (b_transposed)
            kernels::matmul_bt(ap, bp, cp, m, k, n, false);
        else
            kernels::matmul(ap, bp, cp, m, k, n, false);
    }
    check_finite(out, op);

    if (want_grad({&a, &b})) {
        out.set_requires_grad(true);
        Tensor av = a, bv = b, ov = out;
        g_tape->record(op, [av, bv, ov, batch, m, k, n, b_transposed](Tape& tape) {
            const auto* og = tape.grad(ov);
            if (!og) return;
            const double* dc = og->data();
            if (av.requires_grad()) {
                double* da = tape.grad_buffer(av.impl()).data();
                for (std::int64_t s = 0; s < batch; ++s) {
                    const double* bp = bv.data() + s * (b_transposed ? n * k : k * n);
                    if (b_transposed)  // y = a b^T : da += dy * b
                        kernels::matmul(dc + s * m * n, bp, da + s * m * k, m, n, k, true);
                    else  // y = a b : da += dy * b^T
                        kernels::matmul_bt(dc + s * m * n, bp, da + s * m * k, m, n, k, true);
                }
            }
            if (bv.requires_grad()) {
                double* db = tape.grad_buffer(bv.impl()).data();
                for (std::int64_t s = 0; s < batch; ++s) {
                    const double* ap = av.data() + s * m * k;
                    if (b_transposed)  // db += dy^T * a
                        kernels::matmul_at(dc + s * m * n, ap, db + s * n * k, n, m, k, true);
                    else  // db += a^T * dy
                        kernels::matmul_at(ap, dc + s * m * n, db + s * k * n, k, m, n, true);
                }
            }
        });
    }
    return out;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) { return matmul_impl(a, b, false); }

// a * b^T without materializing the transpose; used by attention.
Tensor matmul_t(const Tensor& a, const Tensor& b) { return matmul_impl(a, b, true); }

// ------------------------------------------------------------- elementwise

Tensor add(const Tensor& a, const Tensor& b) {
    const std::int64_t rows = broadcast_rows(a.shape(), b.shape(), "add");
    const std::int64_t cols = b.numel();
    Tensor out = Tensor::zeros(a.shape());
    const double* ap = a.data();
    const double* bp = b.data();
    double* op = out.mutable_data();
    const std::int64_t n = a.numel();
#pragma omp parallel for schedule(static) if (n > (1 << 15))
    for (std::int64_t i = 0; i < n; ++i) op[i] = ap[i] + bp[i % cols];
    check_finite(out, "add");

    if (want_grad({&a, &b})) {
        out.set_requires_grad(true);
        Tensor av = a, bv = b, ov = out;
        g_tape->record("add", [av, bv, ov, rows, cols](Tape& tape) {
            const auto* og = tape.grad(ov);
            if (!og) return;
            if (av.requires_grad())
                kernels::axpy(1.0, og->data(), tape.grad_buffer(av.impl()).data(), av.numel());
            if (bv.requires_grad()) {
                double* db = tape.grad_buffer(bv.impl()).data();
                const double* dout = og->data();
                for (std::int64_t r = 0; r < rows; ++r)
                    for (std::int64_t j = 0; j < cols; ++j) db[j] += dout[r * cols + j];
            }
        });
    }
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    const std::int64_t rows = broadcast_rows(a.shape(), b.shape(), "mul");
    const std::int64_t cols = b.numel();
    Tensor out = Tensor::zeros(a.shape());
    const double* ap = a.data();
    const double* bp = b.data();
    double* op = out.mutable_data();
    const std::int64_t n = a.numel();
#pragma omp parallel for schedule(static) if (n > (1 << 15))
    for (std::int64_t i = 0; i < n; ++i) op[i] = ap[i] * bp[i % cols];
    check_finite(out, "mul");

    if (want_grad({&a, &b})) {
        out.set_requires_grad(true);
        Tensor av = a, bv = b, ov = out;
        g_tape->record("mul", [av, bv, ov, rows, cols](Tape& tape) {
            const auto* og = tape.grad(ov);
            if (!og) return;
            const double* dout = og->data();
            if (av.requires_grad()) {
                double* da = tape.grad_buffer(av.impl()).data();
                const double* bp2 = bv.data();
                const std::int64_t n2 = av.numel();
                for (std::int64_t i = 0; i < n2; ++i) da[i] += dout[i] * bp2[i % cols];
            }
            if (bv.requires_grad()) {
                double* db = tape.grad_buffer(bv.impl()).data();
                const double* ap2 = av.data();
                for (std::int64_t r = 0; r < rows; ++r)
                    for (std::int64_t j = 0; j < cols; ++j)
                        db[j] += dout[r * cols + j] * ap2[r * cols + j];
            }
        });
    }
    return out;
}

Tensor scale(const Tensor& a, double s) {
    Tensor out = Tensor::zeros(a.shape());
    const std::int64_t n = a.numel();
    const double* ap = a.data();
    double* op = out.mutable_data();
#pragma omp parallel for schedule(static) if (n > (1 << 15))
    for (std::int64_t i = 0; i < n; ++i) op[i] = ap[i] * s;
    check_finite(out, "scale");
    if (want_grad({&a})) {
        out.set_requires_grad(true);
        Tensor av = a, ov = out;
        g_tape->record("scale", [av, ov, s](Tape& tape) {
            const auto* og = tape.grad(ov);
            if (!og) return;
            if (av.requires_grad())
                kernels::axpy(s, og->data(), tape.grad_buffer(av.impl()).data(), av.numel());
        });
    }
    return out;
}

Tensor add_scalar(const Tensor& a, double c) {
    Tensor out = Tensor::zeros(a.shape());
    const std::int64_t n = a.numel();
    const double* ap = a.data();
    double* op = out.mutable_data();
    for (std::int64_t i = 0; i < n; ++i) op[i] = ap[i] + c;
    check_finite(out, "add_scalar");
    if (want_grad({&a})) {
        out.set_requires_grad(true);
        Tensor av = a, ov = out;
        g_tape->record("add_scalar", [av, ov](Tape& tape) {
            const auto* og = tape.grad(ov);
            if (!og) return;
            if (av.requires_grad())
                kernels::axpy(1.0, og->data(), tape.grad_buffer(av.impl()).data(), av.numel());
        });
    }
    return out;
}

// ----------------------------------------------------------- shape movers

Tensor reshape(const Tensor& a, Shape shape) {
    if (shape_numel(shape) != a.numel())
        throw ShapeError("reshape: numel mismatch " + shape_str(a.shape()) + " -> " + shape_str(shape));
    Tensor out = make_tensor(std::move(shape), a.values());
    if (want_grad({&a})) {
        out.set_requires_grad(true);
        Tensor av = a, ov = out;
        g_tape->record("reshape", [av, ov](Tape& tape) {
            const auto* og = tape.grad(ov);
            if (!og) return;
            if (av.requires_grad())
                kernels::axpy(1.0, og->data(), tape.grad_buffer(av.impl()).data(), av.numel());
        });
    }
    return out;
}

namespace {

std::vector<std::int64_t> strides_of(const Shape& s) {
    std::vector<std::int64_t> st(s.size(), 1);
    for (int i = static_cast<int>(s.size()) - 2; i >= 0; --i) st[i] = st[i + 1] * s[i + 1];
    return st;
}

void permute_copy(const double* src, double* dst, const Shape& in_shape,
                  const std::vector<int>& perm, bool accumulate) {
    const int nd = static_cast<int>(in_shape.size());
    Shape out_shape(nd);
    for (int i = 0; i < nd; ++i) out_shape[i] = in_shape[static_cast<std::size_t>(perm[i])];
    const auto in_st = strides_of(in_shape);
    const auto out_st = strides_of(out_shape);
    const std::int64_t n = shape_numel(in_shape);
#pragma omp parallel for schedule(static) if (n > (1 << 15))
    for (std::int64_t oi = 0; oi < n; ++oi) {
        std::int64_t rem = oi, src_idx = 0;
        for (int d = 0; d < nd; ++d) {
            const std::int64_t coord = rem / out_st[d];
            rem -= coord * out_st[d];
            src_idx += coord * in_st[static_cast<std::size_t>(perm[d])];
        }
        if (accumulate)
            dst[src_idx] += src[oi];  // inverse scatter for backward
        else
            dst[oi] = src[src_idx];
    }
}

}  // namespace

Tensor transpose(const Tensor& a, const std::vector<int>& perm) {
    if (static_cast<int>(perm.size()) != a.ndim()) throw ShapeError("transpose: bad permutation size");
    Shape out_shape(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) out_shape[i] = a.dim(perm[i]);
    Tensor out = Tensor::zeros(out_shape);
    permute_copy(a.data(), out.mutable_data(), a.shape(), perm, false);
    if (want_grad({&a})) {
        out.set_requires_grad(true);
        Tensor av = a, ov = out;
        std::vector<int> p = perm;
        g_tape->record("transpose", [av, ov, p](Tape& tape) {
            const auto* og = tape.grad(ov);
            if (!og) return;
            if (av.requires_grad())
                permute_copy(og->data(), tape.grad_buffer(av.impl()).data(), av.shape(), p, true);
        });
    }
    return out;
}

Tensor slice(const Tensor& a, int axis, std::int64_t start, std::int64_t len) {
    if (axis < 0 || axis >= a.ndim()) throw ShapeError("slice: bad axis");
    const std::int64_t dim = a.dim(axis);
    if (start < 0 || len <= 0 || start + len > dim) throw ShapeError("slice: range out of bounds");
    Shape out_shape = a.shape();
    out_shape[static_cast<std::size_t>(axis)] = len;
    std::int64_t outer = 1, inner = 1;
    for (int i = 0; i < axis; ++i) outer *= a.dim(i);
    for (int i = axis + 1; i < a.ndim(); ++i) inner *= a.dim(i);

    Tensor out = Tensor::zeros(out_shape);
    const double* src = a.data();
    double* dst = out.mutable_data();
    for (std::int64_t o = 0; o < outer; ++o)
        std::memcpy(dst + o * len * inner, src + (o * dim + start) * inner,
                    sizeof(double) * static_cast<std::size_t>(len * inner));

    if (want_grad({&a})) {
        out.set_requires_grad(true);
        Tensor av = a, ov = out;
        g_tape->record("slice", [av, ov, outer, inner, dim, start, len](Tape& tape) {
            const auto* og = tape.grad(ov);
            if (!og) return;
            if (!av.requires_grad()) return;
            double* da = tape.grad_buffer(av.impl()).data();
            const double* dout = og->data();
            for (std::int64_t o = 0; o < outer; ++o)
                kernels::axpy(1.0, dout + o * len * inner, da + (o * dim + start) * inner, len * inner);
        });
    }
    return out;
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
    if (parts.empty()) throw ShapeError("concat: no inputs");
    const int nd = parts[0].ndim();
    if (axis < 0 || axis >= nd) throw ShapeError("concat: bad axis");
    Shape out_shape = parts[0].shape();
    std::int64_t total = 0;
    for (const auto& p : parts) {
        if (p.ndim() != nd) throw ShapeError("concat: rank mismatch");
        for (int i = 0; i < nd; ++i)
            if (i != axis && p.dim(i) != out_shape[static_cast<std::size_t>(i)])
                throw ShapeError("concat: shape mismatch " + shape_str(p.shape()));
        total += p.dim(axis);
    }
    out_shape[static_cast<std::size_t>(axis)] = total;

    std::int64_t outer = 1, inner = 1;
    for (int i = 0; i < axis; ++i) outer *= out_shape[static_cast<std::size_t>(i)];
    for (int i = axis + 1; i < nd; ++i) inner *= out_shape[static_cast<std::size_t>(i)];

    Tensor out = Tensor::zeros(out_shape);
    double* dst = out.mutable_data();
    std::int64_t offset = 0;
    for (const auto& p : parts) {
        const std::int64_t len = p.dim(axis);
        const double* src = p.data();
        for (std::int64_t o = 0; o < outer; ++o)
            std::memcpy(dst + (o * total + offset) * inner, src + o * len * inner,
                        sizeof(double) * static_cast<std::size_t>(len * inner));
        offset += len;
    }

    bool any_grad = false;
    for (const auto& p : parts) any_grad |= p.requires_grad();
    if (g_tape && any_grad) {
        out.set_requires_grad(true);
        std::vector<Tensor> pv = parts;
        Tensor ov = out;
        g_tape->record("concat", [pv, ov, outer, inner, total, axis](Tape& tape) {
            (void)axis;
            const auto* og = tape.grad(ov);
            if (!og) return;
            const double* dout = og->data();
            std::int64_t offset2 = 0;
            for (const auto& p : pv) {
                const std::int64_t len = p.dim(axis);
                if (p.requires_grad()) {
                    double* dp = tape.grad_buffer(p.impl()).data();
                    for (std::int64_t o = 0; o < outer; ++o)
                        kernels::axpy(1.0, dout + (o * total + offset2) * inner, dp + o * len * inner,
                                      len * inner);
                }
                offset2 += len;
            }
        });
    }
    return out;
}

// ------------------------------------------------------------ nonlinear

Tensor softmax(const Tensor& a) {
    if (a.ndim() < 1) throw ShapeError("softmax: rank 0");
    const std::int64_t cols = a.dim(a.ndim() - 1);
    const std::int64_t rows = a.numel() / cols;
    Tensor out = Tensor::zeros(a.shape());
    kernels::softmax_rows(a.data(), out.mutable_data(), rows, cols);
    check_finite(out, "softmax");
    if (want_grad({&a})) {
        out.set_requires_grad(true);
        Tensor av = a, ov = out;
        g_tape->record("softmax", [av, ov, rows, cols](Tape& tape) {
            const auto* og = tape.grad(ov);
            if (!og) return;
            if (!av.requires_grad()) return;
            double* da = tape.grad_buffer(av.impl()).data();
            const double* y = ov.data();
            const double* dy = og->data();
            for (std::int64_t r = 0; r < rows; ++r) {
                double dot = 0.0;
                for (std::int64_t j = 0; j < cols; ++j) dot += dy[r * cols + j] * y[r * cols + j];
                for (std::int64_t j = 0; j < cols; ++j)
                    da[r * cols + j] += y[r * cols + j] * (dy[r * cols + j] - dot);
            }
        });
    }
    return out;
}

Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& bias, double eps) {
    const std::int64_t cols = a.dim(a.ndim() - 1);
    if (gain.numel() != cols || bias.numel() != cols)
        throw ShapeError("layer_norm: gain/bias must match last axis");
    const std::int64_t rows = a.numel() / cols;
    Tensor out = Tensor::zeros(a.shape());
    auto xhat = std::make_shared<std::vector<double>>(static_cast<std::size_t>(rows * cols));
    auto inv_std = std::make_shared<std::vector<double>>(static_cast<std::size_t>(rows));
    kernels::layer_norm_rows(a.data(), gain.data(), bias.data(), out.mutable_data(), xhat->data(),
                             inv_std->data(), rows, cols, eps);
    check_finite(out, "layer_norm");
    if (want_grad({&a, &gain, &bias})) {
        out.set_requires_grad(true);
        Tensor av = a, gv = gain, bv = bias, ov = out;
        g_tape->record("layer_norm", [av, gv, bv, ov, xhat, inv_std, rows, cols](Tape& tape) {
            const auto* og = tape.grad(ov);
            if (!og) return;
            const double* dy = og->data();
            const double* xh = xhat->data();
            if (gv.requires_grad()) {
                double* dg = tape.grad_buffer(gv.impl()).data();
                for (std::int64_t r = 0; r < rows; ++r)
                    for (std::int64_t j = 0; j < cols; ++j) dg[j] += dy[r * cols + j] * xh[r * cols + j];
            }
            if (bv.requires_grad()) {
                double* db = tape.grad_buffer(bv.impl()).data();
                for (std::int64_t r = 0; r < rows; ++r)
                    for (std::int64_t j = 0; j < cols; ++j) db[j] += dy[r * cols + j];
            }
            if (av.requires_grad()) {
                double* da = tape.grad_buffer(av.impl()).data();
                const double* g = gv.data();
                const double n = static_cast<double>(cols);
                for (std::int64_t r = 0; r < rows; ++r) {
                    double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
                    for (std::int64_t j = 0; j < cols; ++j) {
                        const double dxh = dy[r * cols + j] * g[j];
                        sum_dxhat += dxh;
                        sum_dxhat_xhat += dxh * xh[r * cols + j];
                    }
                    const double is = (*inv_std)[static_cast<std::size_t>(r)];
                    for (std::int64_t j = 0; j < cols; ++j) {
                        const double dxh = dy[r * cols + j] * g[j];
                        da[r * cols + j] +=
                            is / n * (n * dxh - sum_dxhat - xh[r * cols + j] * sum_dxhat_xhat);
                    }
                }
            }
        });
    }
    return out;
}

Tensor silu(const Tensor& a) {
    Tensor out = Tensor::zeros(a.shape());
    const std::int64_t n = a.numel();
    const double* x = a.data();
    double* y = out.mutable_data();
#pragma omp parallel for schedule(static) if (n > (1 << 15))
    for (std::int64_t i = 0; i < n; ++i) {
        const double s = 1.0 / (1.0 + std::exp(-x[i]));
        y[i] = x[i] * s;
    }
    check_finite(out, "silu");
    if (want_grad({&a})) {
        out.set_requires_grad(true);
        Tensor av = a, ov = out;
        g_tape->record("silu", [av, ov](Tape& tape) {
            const auto* og = tape.grad(ov);
            if (!og) return;
            if (!av.requires_grad()) return;
            double* da = tape.grad_buffer(av.impl()).data();
            const double* x2 = av.data();
            const double* dy = og->data();
            const std::int64_t n2 = av.numel();
            for (std::int64_t i = 0; i < n2; ++i) {
                const double s = 1.0 / (1.0 + std::exp(-x2[i]));
                da[i] += dy[i] * s * (1.0 + x2[i] * (1.0 - s));
            }
        });
    }
    return out;
}

Tensor embedding(const Tensor& table, const std::vector<std::int64_t>& ids) {
    if (table.ndim() != 2) throw ShapeError("embedding: table must be 2D");
    const std::int64_t v = table.dim(0);
    const std::int64_t d = table.dim(1);
    for (auto id : ids)
        if (id < 0 || id >= v) throw ShapeError("embedding: id out of range");
    Tensor out = Tensor::zeros({static_cast<std::int64_t>(ids.size()), d});
    for (std::size_t i = 0; i < ids.size(); ++i)
        std::memcpy(out.mutable_data() + static_cast<std::int64_t>(i) * d,
                    table.data() + ids[i] * d, sizeof(double) * static_cast<std::size_t>(d));
    if (want_grad({&table})) {
        out.set_requires_grad(true);
        Tensor tv = table, ov = out;
        std::vector<std::int64_t> idv = ids;
        g_tape->record("embedding", [tv, ov, idv, d](Tape& tape) {
            const auto* og = tape.grad(ov);
            if (!og) return;
            if (!tv.requires_grad()) return;
            double* dt = tape.grad_buffer(tv.impl()).data();
            for (std::size_t i = 0; i < idv.size(); ++i)
                for (std::int64_t j = 0; j < d; ++j)
                    dt[idv[i] * d + j] += og->data()[static_cast<std::int64_t>(i) * d + j];
        });
    }
    return out;
}

Tensor mse(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        throw ShapeError("mse: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    const std::int64_t n = a.numel();
    const double v = kernels::reduce_sqdiff(a.data(), b.data(), n) / static_cast<double>(n);
    Tensor out = Tensor::scalar(v);
    check_finite(out, "mse");
    if (want_grad({&a, &b})) {
        out.set_requires_grad(true);
        Tensor av = a, bv = b, ov = out;
        g_tape->record("mse", [av, bv, ov, n](Tape& tape) {
            const auto* og = tape.grad(ov);
            if (!og) return;
            const double g = og->at(0) * 2.0 / static_cast<double>(n);
            const double* ap = av.data();
            const double* bp = bv.data();
            if (av.requires_grad()) {
                double* da = tape.grad_buffer(av.impl()).data();
                for (std::int64_t i = 0; i < n; ++i) da[i] += g * (ap[i] - bp[i]);
            }
            if (bv.requires_grad()) {
                double* db = tape.grad_buffer(bv.impl()).data();
                for (std::int64_t i = 0; i < n; ++i) db[i] -= g * (ap[i] - bp[i]);
            }
        });
    }
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) { return add(a, scale(b, -1.0)); }

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) { return add(matmul(x, w), b); }

double grad_check(const std::function<Tensor()>& f, const std::vector<Tensor>& params, double h) {
    Tape tape;
    std::vector<std::vector<double>> analytic;
    {
        TapeScope scope(tape);
        Tensor loss = f();
        backward(tape, loss);
        for (const auto& p : params) {
            const auto* g = tape.grad(p);
            analytic.push_back(g ? *g : std::vector<double>(static_cast<std::size_t>(p.numel()), 0.0));
        }
    }
    double max_rel = 0.0;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Tensor p = params[pi];
        double* pd = p.mutable_data();
        for (std::int64_t i = 0; i < p.numel(); ++i) {
            const double saved = pd[i];
            pd[i] = saved + h;
            const double fp = f().item();
            pd[i] = saved - h;
            const double fm = f().item();
            pd[i] = saved;
            const double numeric = (fp - fm) / (2.0 * h);
            const double a = analytic[pi][static_cast<std::size_t>(i)];
            const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
            max_rel = std::max(max_rel, std::abs(a - numeric) / denom);
        }
    }
    return max_rel;
}

}  // namespace cogen
