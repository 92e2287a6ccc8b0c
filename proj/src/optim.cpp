#include "cogen/optim.hpp"

#include <cmath>

#include "cogen/kernels.hpp"

namespace cogen {

Tensor ParamStore::find(const std::string& name) const {
    for (const auto& e : entries_)
        if (e.name == name) return e.tensor;
    throw DataError("parameter not found: " + name);
}

bool ParamStore::contains(const std::string& name) const {
    for (const auto& e : entries_)
        if (e.name == name) return true;
    return false;
}

AdamW::AdamW(const AdamWConfig& cfg, const std::vector<Tensor>& params) : cfg_(cfg) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const auto& p : params) {
        m_.emplace_back(static_cast<std::size_t>(p.numel()), 0.0);
        v_.emplace_back(static_cast<std::size_t>(p.numel()), 0.0);
    }
}

bool AdamW::step(const std::vector<Tensor>& params, const std::vector<std::vector<double>>& grads) {
    if (params.size() != grads.size() || params.size() != m_.size())
        throw ShapeError("AdamW::step: parameter/gradient count mismatch");

    double sq = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (grads[i].empty()) continue;
        if (static_cast<std::int64_t>(grads[i].size()) != params[i].numel())
            throw ShapeError("AdamW::step: gradient shape mismatch at index " + std::to_string(i));
        if (kernels::has_nonfinite(grads[i].data(), static_cast<std::int64_t>(grads[i].size())))
            return false;
        for (double g : grads[i]) sq += g * g;
    }
    const double gnorm = std::sqrt(sq);
    const double clip = (cfg_.max_grad_norm > 0.0 && gnorm > cfg_.max_grad_norm)
                            ? cfg_.max_grad_norm / gnorm
                            : 1.0;

    step_count_ += 1;
    const double t = static_cast<double>(step_count_);
    double lr = cfg_.lr;
    if (cfg_.warmup_steps > 0 && step_count_ <= cfg_.warmup_steps)
        lr = cfg_.lr * t / static_cast<double>(cfg_.warmup_steps);
    last_lr_ = lr;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t);

    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor p = params[i];
        double* pd = p.mutable_data();
        const std::int64_t n = p.numel();
        double* m = m_[i].data();
        double* v = v_[i].data();
        const double* g = grads[i].empty() ? nullptr : grads[i].data();
#pragma omp parallel for schedule(static) if (n > (1 << 15))
        for (std::int64_t j = 0; j < n; ++j) {
            const double gj = g ? g[j] * clip : 0.0;
            m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * gj;
            v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * gj * gj;
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            pd[j] = pd[j] * (1.0 - lr * cfg_.weight_decay) - lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
    return true;
}

}  // namespace cogen
