#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cogen/error.hpp"

namespace cogen {

using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);

struct TensorImpl {
    Shape shape;
    std::vector<double> data;
    bool requires_grad = false;
};

// Cheap-to-copy handle over an immutable-by-convention f64 buffer. Ops
// never mutate their inputs; mutation is reserved for the optimizer, which
// owns the parameters.
class Tensor {
  public:
    Tensor() = default;

    static Tensor zeros(Shape shape);
    static Tensor full(Shape shape, double value);
    static Tensor from(Shape shape, std::vector<double> values);
    static Tensor scalar(double value);
    static Tensor randn(Shape shape, std::uint64_t seed, double scale = 1.0);

    bool defined() const { return static_cast<bool>(p_); }
    const Shape& shape() const { return p_->shape; }
    std::int64_t numel() const { return static_cast<std::int64_t>(p_->data.size()); }
    std::int64_t dim(int i) const { return p_->shape[static_cast<std::size_t>(i)]; }
    int ndim() const { return static_cast<int>(p_->shape.size()); }

    const double* data() const { return p_->data.data(); }
    double* mutable_data() { return p_->data.data(); }
    const std::vector<double>& values() const { return p_->data; }

    double item() const;

    bool requires_grad() const { return p_->requires_grad; }
    Tensor& set_requires_grad(bool v) {
        p_->requires_grad = v;
        return *this;
    }

    TensorImpl* impl() const { return p_.get(); }

  private:
    explicit Tensor(std::shared_ptr<TensorImpl> p) : p_(std::move(p)) {}
    std::shared_ptr<TensorImpl> p_;
    friend Tensor make_tensor(Shape, std::vector<double>);
};

Tensor make_tensor(Shape shape, std::vector<double> data);

// Reverse-mode tape. Nodes are recorded in execution order (topological by
// construction); gradients live in a tape-local map so concurrent tapes on
// different threads never share state.
class Tape {
  public:
    struct Node {
        std::string op;
        std::function<void(Tape&)> backward;
    };

    void record(std::string op, std::function<void(Tape&)> backward);

    // Get-or-create a zero-initialized gradient buffer for t.
    std::vector<double>& grad_buffer(const TensorImpl* t);
    // Null if no gradient reached t.
    const std::vector<double>* grad(const Tensor& t) const;
    const std::vector<double>* grad(const TensorImpl* t) const;

    std::size_t size() const { return nodes_.size(); }
    void clear();

    friend void backward(Tape& tape, const Tensor& loss);

  private:
    std::vector<Node> nodes_;
    std::unordered_map<const TensorImpl*, std::vector<double>> grads_;
};

// RAII activation of a tape for the current thread. Ops record onto the
// innermost active tape; with none active they are pure forward compute.
class TapeScope {
  public:
    explicit TapeScope(Tape& tape);
    ~TapeScope();
    TapeScope(const TapeScope&) = delete;
    TapeScope& operator=(const TapeScope&) = delete;

  private:
    Tape* prev_;
};

Tape* current_tape();

// Reverse accumulation from a scalar loss. Parameters not reachable from
// the loss simply have no buffer (read as zero).
void backward(Tape& tape, const Tensor& loss);

// ---- primitives ----
Tensor matmul(const Tensor& a, const Tensor& b);    // 2D or batched 3D
Tensor matmul_t(const Tensor& a, const Tensor& b);  // a * b^T, same rank rules
Tensor add(const Tensor& a, const Tensor& b);     // equal shapes or suffix-broadcast b
Tensor mul(const Tensor& a, const Tensor& b);     // equal shapes or suffix-broadcast b
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double c);
Tensor reshape(const Tensor& a, Shape shape);
Tensor transpose(const Tensor& a, const std::vector<int>& perm);
Tensor slice(const Tensor& a, int axis, std::int64_t start, std::int64_t len);
Tensor concat(const std::vector<Tensor>& parts, int axis);
Tensor softmax(const Tensor& a);  // last axis
Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& bias, double eps = 1e-5);
Tensor silu(const Tensor& a);
Tensor embedding(const Tensor& table, const std::vector<std::int64_t>& ids);
Tensor mse(const Tensor& a, const Tensor& b);  // scalar mean squared error

// ---- conveniences (compositions) ----
Tensor sub(const Tensor& a, const Tensor& b);
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);  // x*w + b

// Central-difference gradient verification. `f` must rebuild the graph
// deterministically from the current parameter values. Returns the max
// relative error with denominator max(|analytic|, |numeric|, 1e-8).
double grad_check(const std::function<Tensor()>& f, const std::vector<Tensor>& params,
                  double h = 1e-5);

}  // namespace cogen
