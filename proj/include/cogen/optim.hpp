#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cogen/tensor.hpp"

namespace cogen {

// Named parameter registry. Order is the canonical manifest order used by
// checkpoints and by the optimizer's moment buffers.
class ParamStore {
  public:
    struct Entry {
        std::string name;
        Tensor tensor;
    };

    Tensor add(std::string name, Tensor t) {
        t.set_requires_grad(true);
        entries_.push_back({std::move(name), t});
        return t;
    }

    // Registers without marking trainable (fixed buffers, e.g. positional tables).
    Tensor add_fixed(std::string name, Tensor t) {
        t.set_requires_grad(false);
        entries_.push_back({std::move(name), t});
        return t;
    }

    const std::vector<Entry>& entries() const { return entries_; }
    std::vector<Entry>& entries() { return entries_; }
    Tensor find(const std::string& name) const;
    bool contains(const std::string& name) const;

  private:
    std::vector<Entry> entries_;
};

struct AdamWConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 3e-2;
    double max_grad_norm = 0.5;
    std::int64_t warmup_steps = 100;
};

// Decoupled AdamW with global-norm clipping and linear warmup. Moments are
// kept per parameter in registration order; a non-finite gradient rejects
// the whole step and leaves the counter unchanged.
class AdamW {
  public:
    AdamW(const AdamWConfig& cfg, const std::vector<Tensor>& params);

    // grads[i] aligned with params[i]; empty vector means zero gradient.
    // Returns false if the step was rejected for non-finite gradients.
    bool step(const std::vector<Tensor>& params, const std::vector<std::vector<double>>& grads);

    std::int64_t step_count() const { return step_count_; }
    const AdamWConfig& config() const { return cfg_; }
    double last_lr() const { return last_lr_; }

    // Moment access for checkpointing.
    std::vector<std::vector<double>>& moments1() { return m_; }
    std::vector<std::vector<double>>& moments2() { return v_; }
    void set_step_count(std::int64_t s) { step_count_ = s; }

  private:
    AdamWConfig cfg_;
    std::vector<std::vector<double>> m_, v_;
    std::int64_t step_count_ = 0;
    double last_lr_ = 0.0;
};

}  // namespace cogen
