#include "cogen/model.hpp"

#include <algorithm>
#include <cmath>

#include "cogen/checkpoint.hpp"
#include "cogen/rng.hpp"

namespace cogen {

namespace {

constexpr std::int64_t kTimeFeatures = 128;  // 64 sin + 64 cos

std::uint64_t name_seed(std::uint64_t base, const std::string& name) {
    return seed_chain(base, fnv1a64(name.data(), name.size()));
}

Tensor sinusoidal_table(std::int64_t rows, std::int64_t dim) {
    Tensor t = Tensor::zeros({rows, dim});
    double* d = t.mutable_data();
    for (std::int64_t p = 0; p < rows; ++p) {
        for (std::int64_t i = 0; i < dim / 2; ++i) {
            const double omega = std::pow(10000.0, -2.0 * static_cast<double>(i) / static_cast<double>(dim));
            d[p * dim + 2 * i] = std::sin(static_cast<double>(p) * omega);
            d[p * dim + 2 * i + 1] = std::cos(static_cast<double>(p) * omega);
        }
    }
    return t;
}

Tensor time_features(double t) {
    Tensor f = Tensor::zeros({1, kTimeFeatures});
    double* d = f.mutable_data();
    for (std::int64_t i = 0; i < kTimeFeatures / 2; ++i) {
        const double omega =
            std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(kTimeFeatures / 2));
        d[i] = std::sin(1000.0 * t * omega);
        d[kTimeFeatures / 2 + i] = std::cos(1000.0 * t * omega);
    }
    return f;
}

struct Builder {
    ParamStore& store;
    std::uint64_t seed;

    LinearP make_linear(const std::string& name, std::int64_t in, std::int64_t out, double gain) {
        LinearP p;
        const double std = gain / std::sqrt(static_cast<double>(in));
        p.w = store.add(name + ".w", gain == 0.0 ? Tensor::zeros({in, out})
                                                 : Tensor::randn({in, out}, name_seed(seed, name), std));
        p.b = store.add(name + ".b", Tensor::zeros({out}));
        return p;
    }

    AttnP make_attn(const std::string& name, std::int64_t q_in, std::int64_t kv_in, std::int64_t dm,
                    double out_gain) {
        AttnP a;
        a.q = make_linear(name + ".q", q_in, dm, 1.0);
        a.k = make_linear(name + ".k", kv_in, dm, 1.0);
        a.v = make_linear(name + ".v", kv_in, dm, 1.0);
        a.o = make_linear(name + ".o", dm, q_in, out_gain);
        return a;
    }

    BlockP make_block(const std::string& name, const ModelConfig& cfg, double resid_gain) {
        BlockP b;
        b.self_attn = make_attn(name + ".self", cfg.width, cfg.width, cfg.width, resid_gain);
        b.cross_attn = make_attn(name + ".cross", cfg.width, cfg.width, cfg.width, resid_gain);
        b.ffn_in = make_linear(name + ".ffn_in", cfg.width, cfg.ffn_width, 1.0);
        b.ffn_out = make_linear(name + ".ffn_out", cfg.ffn_width, cfg.width, resid_gain);
        b.ada = make_linear(name + ".ada", cfg.width, 6 * cfg.width, 0.0);  // identity modulation at init
        return b;
    }

    BranchP make_branch(const std::string& name, const ModelConfig& cfg, std::int64_t c_in,
                        std::int64_t c_out) {
        BranchP br;
        br.patch = make_linear(name + ".patch", c_in, cfg.width, 1.0);
        const double resid_gain = 1.0 / std::sqrt(2.0 * cfg.blocks);
        for (int i = 0; i < cfg.blocks; ++i)
            br.blocks.push_back(make_block(name + ".block" + std::to_string(i), cfg, resid_gain));
        br.head = make_linear(name + ".head", cfg.width, c_out, 1.0);
        return br;
    }
};

void check_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(what) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
}

}  // namespace

const char* ablation_name(AblationMode m) {
    switch (m) {
        case AblationMode::kFull: return "full";
        case AblationMode::kNoMotion: return "no-motion";
        case AblationMode::kNormalOnly: return "normal-only";
        case AblationMode::kSemanticOnly: return "semantic-only";
        case AblationMode::kJointLatent: return "joint-latent";
        case AblationMode::kDistributedCopy: return "distributed-copy";
        case AblationMode::kFusedToMotion: return "fused-to-motion";
    }
    return "unknown";
}

AblationMode ablation_from_name(const std::string& name) {
    for (int i = 0; i <= 6; ++i) {
        const auto m = static_cast<AblationMode>(i);
        if (name == ablation_name(m)) return m;
    }
    throw DataError("unknown ablation mode: " + name);
}

DualModelParams init_model(const ModelConfig& cfg, std::uint64_t seed) {
    if (cfg.width % cfg.heads != 0 || cfg.query_dim % cfg.module_a_heads != 0)
        throw ShapeError("model width must be divisible by head count");
    DualModelParams m;
    m.cfg = cfg;
    Builder bld{m.store, seed};

    const bool joint = cfg.ablation == AblationMode::kJointLatent;
    const std::int64_t c_io = joint ? 2 * cfg.latent_channels : cfg.latent_channels;
    m.video = bld.make_branch("video", cfg, c_io, c_io);

    const bool has_motion_branch = !cfg.single_branch();
    if (has_motion_branch) {
        if (cfg.ablation == AblationMode::kDistributedCopy) {
            ModelConfig half = cfg;
            half.blocks = cfg.blocks / 2;
            m.motion = bld.make_branch("motion", half, c_io, c_io);
        } else {
            m.motion = bld.make_branch("motion", cfg, c_io, c_io);
        }
        for (int i = 0; i < cfg.blocks; ++i) {
            m.zl_a.push_back(bld.make_linear("zl." + std::to_string(i) + ".a", cfg.width, cfg.width, 0.0));
            m.zl_b.push_back(bld.make_linear("zl." + std::to_string(i) + ".b", cfg.width, cfg.width, 0.0));
        }
    }

    if (cfg.ablation != AblationMode::kNoMotion) {
        m.module_a.embed = bld.make_linear("module_a.embed", cfg.pose_dim(), cfg.query_dim, 1.0);
        for (int l = 0; l < cfg.module_a_layers; ++l) {
            const std::string ln = "module_a.layer" + std::to_string(l);
            ModuleALayerP lp;
            // Residual out-projections start at zero so the module is the
            // identity on its query stream at init.
            lp.self_attn = bld.make_attn(ln + ".self", cfg.query_dim, cfg.query_dim, cfg.query_dim, 0.0);
            lp.cross_attn = bld.make_attn(ln + ".cross", cfg.query_dim, cfg.width, cfg.query_dim, 0.0);
            lp.ffn_in = bld.make_linear(ln + ".ffn_in", cfg.query_dim, 4 * cfg.query_dim, 1.0);
            lp.ffn_out = bld.make_linear(ln + ".ffn_out", 4 * cfg.query_dim, cfg.query_dim, 0.0);
            m.module_a.layers.push_back(lp);
        }
        m.module_a.out = bld.make_linear("module_a.out", cfg.query_dim, cfg.pose_dim(), 0.0);
    }

    m.cond_embed = m.store.add(
        "cond_embed", Tensor::randn({cfg.vocab_size + 1, cfg.width}, name_seed(seed, "cond_embed"),
                                    1.0 / std::sqrt(static_cast<double>(cfg.width))));
    m.time_in = bld.make_linear("time.in", kTimeFeatures, cfg.width, 1.0);
    m.time_out = bld.make_linear("time.out", cfg.width, cfg.width, 1.0);

    m.pos_tokens = sinusoidal_table(cfg.tokens(), cfg.width);
    m.pos_query = sinusoidal_table(cfg.frames, cfg.query_dim);
    m.ones_d = Tensor::full({cfg.width}, 1.0);
    m.zeros_d = Tensor::zeros({cfg.width});
    m.ones_q = Tensor::full({cfg.query_dim}, 1.0);
    m.zeros_q = Tensor::zeros({cfg.query_dim});
    return m;
}

std::vector<std::string> trainable_names(const DualModelParams& m, int stage) {
    std::vector<std::string> prefixes;
    const bool joint = m.cfg.ablation == AblationMode::kJointLatent;
    const bool no_motion = m.cfg.ablation == AblationMode::kNoMotion;
    if (stage == 0) {
        prefixes = {"video.", "cond_embed", "time."};
    } else if (stage == 1) {
        prefixes = no_motion || joint ? std::vector<std::string>{"video."}
                                      : std::vector<std::string>{"motion."};
    } else if (stage == 2) {
        if (no_motion)
            prefixes = {"video."};
        else if (joint)
            prefixes = {"video.", "module_a."};
        else
            prefixes = {"motion.", "zl.", "module_a."};
    } else {
        throw ShapeError("unknown training stage " + std::to_string(stage));
    }
    std::vector<std::string> names;
    for (const auto& e : m.store.entries()) {
        for (const auto& p : prefixes) {
            if (e.name.rfind(p, 0) == 0) {
                names.push_back(e.name);
                break;
            }
        }
    }
    return names;
}

NoisySample make_noisy(const Tensor& x0, const Tensor& eps, double t) {
    check_same_shape(x0, eps, "make_noisy");
    if (x0.ndim() != 4) throw ShapeError("make_noisy expects a [C,T,h,w] latent");
    if (t < 0.0 || t > 1.0) throw ShapeError("make_noisy: t must lie in [0,1]");
    NoisySample s;
    s.t = t;
    s.eps = eps;
    const std::int64_t c = x0.dim(0), tl = x0.dim(1), hw = x0.dim(2) * x0.dim(3);
    s.clean_mask.assign(static_cast<std::size_t>(tl), false);
    s.clean_mask[0] = true;
    s.x_t = Tensor::zeros(x0.shape());
    const double* xp = x0.data();
    const double* ep = eps.data();
    double* out = s.x_t.mutable_data();
#pragma omp parallel for schedule(static)
    for (std::int64_t ci = 0; ci < c; ++ci) {
        for (std::int64_t ti = 0; ti < tl; ++ti) {
            const std::int64_t base = (ci * tl + ti) * hw;
            if (ti == 0) {
                for (std::int64_t i = 0; i < hw; ++i) out[base + i] = xp[base + i];
            } else {
                for (std::int64_t i = 0; i < hw; ++i)
                    out[base + i] = (1.0 - t) * ep[base + i] + t * xp[base + i];
            }
        }
    }
    return s;
}

Tensor velocity_target(const Tensor& x0, const Tensor& eps) {
    check_same_shape(x0, eps, "velocity_target");
    Tensor v = Tensor::zeros(x0.shape());
    const double* xp = x0.data();
    const double* ep = eps.data();
    double* vp = v.mutable_data();
    const std::int64_t n = x0.numel();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) vp[i] = xp[i] - ep[i];
    return v;
}

// ---------------------------------------------------------------- forward

namespace {

Tensor attention(const Tensor& xq, const Tensor& xkv, const AttnP& p, int heads) {
    const std::int64_t n = xq.dim(0);
    const std::int64_t mkv = xkv.dim(0);
    const std::int64_t dm = p.q.w.dim(1);
    const std::int64_t hd = dm / heads;
    Tensor q = linear(xq, p.q.w, p.q.b);
    Tensor k = linear(xkv, p.k.w, p.k.b);
    Tensor v = linear(xkv, p.v.w, p.v.b);
    Tensor q3 = transpose(reshape(q, {n, heads, hd}), {1, 0, 2});
    Tensor k3 = transpose(reshape(k, {mkv, heads, hd}), {1, 0, 2});
    Tensor v3 = transpose(reshape(v, {mkv, heads, hd}), {1, 0, 2});
    Tensor probs = softmax(scale(matmul_t(q3, k3), 1.0 / std::sqrt(static_cast<double>(hd))));
    Tensor o = reshape(transpose(matmul(probs, v3), {1, 0, 2}), {n, dm});
    return linear(o, p.o.w, p.o.b);
}

Tensor modulate(const Tensor& h, const Tensor& shift, const Tensor& scale_vec) {
    return add(mul(h, add_scalar(scale_vec, 1.0)), shift);
}

Tensor time_vector(const DualModelParams& m, double t) {
    Tensor f = time_features(t);
    return linear(silu(linear(f, m.time_in.w, m.time_in.b)), m.time_out.w, m.time_out.b);
}

Tensor dit_block_run(const DualModelParams& m, const BlockP& p, const Tensor& x, const Tensor& cond,
                     const Tensor& tvec) {
    const std::int64_t d = m.cfg.width;
    Tensor ada = linear(silu(tvec), p.ada.w, p.ada.b);  // [1, 6d]
    auto piece = [&](int i) { return reshape(slice(ada, 1, i * d, d), {d}); };
    Tensor h1 = modulate(layer_norm(x, m.ones_d, m.zeros_d), piece(0), piece(1));
    Tensor x1 = add(x, attention(h1, h1, p.self_attn, m.cfg.heads));
    Tensor h2 = modulate(layer_norm(x1, m.ones_d, m.zeros_d), piece(2), piece(3));
    Tensor x2 = add(x1, attention(h2, cond, p.cross_attn, m.cfg.heads));
    Tensor h3 = modulate(layer_norm(x2, m.ones_d, m.zeros_d), piece(4), piece(5));
    return add(x2, linear(silu(linear(h3, p.ffn_in.w, p.ffn_in.b)), p.ffn_out.w, p.ffn_out.b));
}

Tensor tokens_from_latent(const Tensor& latent) {
    const std::int64_t c = latent.dim(0);
    const std::int64_t n = latent.dim(1) * latent.dim(2) * latent.dim(3);
    return reshape(transpose(latent, {1, 2, 3, 0}), {n, c});
}

Tensor latent_from_tokens(const Tensor& tokens, const Shape& latent_shape) {
    Tensor t4 = reshape(tokens, {latent_shape[1], latent_shape[2], latent_shape[3], latent_shape[0]});
    return transpose(t4, {3, 0, 1, 2});
}

Tensor embed_tokens(const DualModelParams& m, const BranchP& branch, const Tensor& latent) {
    Tensor x = linear(tokens_from_latent(latent), branch.patch.w, branch.patch.b);
    return add(x, m.pos_tokens);
}

Tensor head_out(const DualModelParams& m, const BranchP& branch, const Tensor& x,
                const Shape& latent_shape) {
    Tensor h = layer_norm(x, m.ones_d, m.zeros_d);
    return latent_from_tokens(linear(h, branch.head.w, branch.head.b), latent_shape);
}

}  // namespace

BranchResult branch_forward(const DualModelParams& m, const BranchP& branch, const Tensor& latent,
                            const std::vector<std::int64_t>& cond_ids, double t) {
    if (latent.ndim() != 4) throw ShapeError("branch_forward expects a [C,T,h,w] latent");
    BranchResult r;
    Tensor tvec = time_vector(m, t);
    Tensor cond = embedding(m.cond_embed, cond_ids);
    Tensor x = embed_tokens(m, branch, latent);
    for (const auto& blk : branch.blocks) {
        x = dit_block_run(m, blk, x, cond, tvec);
        r.block_outputs.push_back(x);
    }
    r.velocity = head_out(m, branch, x, latent.shape());
    return r;
}

FusedPair fuse_features(const Tensor& x_motion, const Tensor& x_video, const LinearP& zl_a,
                        const LinearP& zl_b) {
    check_same_shape(x_motion, x_video, "fuse_features");
    FusedPair fp;
    fp.fused = add(x_motion, linear(x_video, zl_a.w, zl_a.b));
    fp.video_out = add(x_video, linear(x_motion, zl_b.w, zl_b.b));
    return fp;
}

Tensor init_motion_query(const DualModelParams& m, const PoseVector& m0) {
    const std::int64_t j3 = m.cfg.pose_dim();
    if (static_cast<std::int64_t>(m0.rotations.size()) * 3 != j3)
        throw ShapeError("init_motion_query: pose joint count does not match model");
    std::vector<double> flat(static_cast<std::size_t>(j3));
    for (std::size_t j = 0; j < m0.rotations.size(); ++j) {
        flat[3 * j + 0] = m0.rotations[j].x;
        flat[3 * j + 1] = m0.rotations[j].y;
        flat[3 * j + 2] = m0.rotations[j].z;
    }
    Tensor row = linear(Tensor::from({1, j3}, std::move(flat)), m.module_a.embed.w, m.module_a.embed.b);
    return matmul(Tensor::full({m.cfg.frames, 1}, 1.0), row);  // broadcast to all F rows
}

Tensor regroup_queries(const Tensor& q, std::int64_t frames) {
    if (q.ndim() != 2 || q.dim(0) != frames)
        throw ShapeError("regroup_queries: expected [F, C] with F = " + std::to_string(frames));
    if (frames < 5 || (frames - 1) % kTemporalStride != 0)
        throw ShapeError("regroup_queries: F must satisfy F = 1 (mod 4), F >= 5");
    const std::int64_t g = (frames - 1) / kTemporalStride;
    return reshape(slice(q, 0, 1, frames - 1), {g, kTemporalStride, q.dim(1)});
}

std::vector<Tensor> module_a_forward(const DualModelParams& m, const PoseVector& m0,
                                     const std::vector<Tensor>& fused_layers) {
    if (fused_layers.empty()) throw ShapeError("module_a_forward: at least one fused layer required");
    const auto& cfg = m.cfg;
    const std::int64_t hw = cfg.latent_h() * cfg.latent_w();
    const std::int64_t groups = cfg.groups();
    const std::int64_t f = cfg.frames;

    std::vector<double> flat(static_cast<std::size_t>(cfg.pose_dim()));
    for (std::size_t j = 0; j < m0.rotations.size(); ++j) {
        flat[3 * j + 0] = m0.rotations[j].x;
        flat[3 * j + 1] = m0.rotations[j].y;
        flat[3 * j + 2] = m0.rotations[j].z;
    }
    Tensor m0_row = Tensor::from({cfg.pose_dim()}, flat);

    std::vector<Tensor> preds;
    for (const auto& x_f : fused_layers) {
        if (x_f.dim(0) != (groups + 1) * hw)
            throw ShapeError("module_a_forward: fused feature has " + std::to_string(x_f.dim(0)) +
                             " tokens, expected " + std::to_string((groups + 1) * hw) +
                             " (temporal tokens != G+1)");
        Tensor q = add(init_motion_query(m, m0), m.pos_query);
        for (const auto& layer : m.module_a.layers) {
            Tensor hs = layer_norm(q, m.ones_q, m.zeros_q);
            q = add(q, attention(hs, hs, layer.self_attn, cfg.module_a_heads));

            Tensor hc = layer_norm(q, m.ones_q, m.zeros_q);
            Tensor frame0_kv = slice(x_f, 0, 0, hw);
            std::vector<Tensor> rows;
            rows.push_back(Tensor::zeros({1, cfg.query_dim}));  // row 0 passes through
            for (std::int64_t g = 0; g < groups; ++g) {
                Tensor qg = slice(hc, 0, 1 + g * kTemporalStride, kTemporalStride);
                Tensor kv = concat({frame0_kv, slice(x_f, 0, (g + 1) * hw, hw)}, 0);
                rows.push_back(attention(qg, kv, layer.cross_attn, cfg.module_a_heads));
            }
            q = add(q, concat(rows, 0));

            Tensor hf = layer_norm(q, m.ones_q, m.zeros_q);
            q = add(q, linear(silu(linear(hf, layer.ffn_in.w, layer.ffn_in.b)), layer.ffn_out.w,
                              layer.ffn_out.b));
        }
        Tensor deltas = linear(slice(q, 0, 1, f - 1), m.module_a.out.w, m.module_a.out.b);
        preds.push_back(add(deltas, m0_row));
    }
    return preds;
}

DualForwardResult dual_forward(const DualModelParams& m, const Tensor& noisy_motion,
                               const Tensor& noisy_video, const std::vector<std::int64_t>& cond_ids,
                               double t, const PoseVector& m0,
                               const std::vector<int>& layer_selection) {
    const auto& cfg = m.cfg;
    DualForwardResult r;
    std::vector<int> sel = layer_selection;
    std::sort(sel.begin(), sel.end());
    if (!sel.empty()) {
        for (int s : sel)
            if (s < 1 || s > cfg.blocks) throw ShapeError("dual_forward: layer selection out of range");
        if (sel.back() != cfg.blocks)
            throw ShapeError("dual_forward: layer selection must include the final layer");
    }
    r.selected_layers = sel;

    if (cfg.ablation == AblationMode::kNoMotion) {
        r.v_video = branch_forward(m, m.video, noisy_video, cond_ids, t).velocity;
        return r;
    }

    if (cfg.ablation == AblationMode::kJointLatent) {
        Tensor joint = concat({noisy_video, noisy_motion}, 0);  // [2C, T, h, w]
        BranchResult br = branch_forward(m, m.video, joint, cond_ids, t);
        const std::int64_t c = cfg.latent_channels;
        r.v_video = slice(br.velocity, 0, 0, c);
        r.v_motion = slice(br.velocity, 0, c, c);
        if (!sel.empty()) {
            std::vector<Tensor> fused;
            for (int s : sel) fused.push_back(br.block_outputs[static_cast<std::size_t>(s - 1)]);
            r.motion_preds = module_a_forward(m, m0, fused);
        }
        return r;
    }

    check_same_shape(noisy_motion, noisy_video, "dual_forward");
    Tensor tvec = time_vector(m, t);
    Tensor cond = embedding(m.cond_embed, cond_ids);
    Tensor xm = embed_tokens(m, m.motion, noisy_motion);
    Tensor xv = embed_tokens(m, m.video, noisy_video);

    const bool distributed = cfg.ablation == AblationMode::kDistributedCopy;
    std::vector<Tensor> fused_selected;
    for (int i = 0; i < cfg.blocks; ++i) {
        // Distributed copy: the motion branch only covers every other block.
        const bool motion_here = !distributed || (i % 2 == 1);
        int mi = distributed ? i / 2 : i;
        if (motion_here)
            xm = dit_block_run(m, m.motion.blocks[static_cast<std::size_t>(mi)], xm, cond, tvec);
        xv = dit_block_run(m, m.video.blocks[static_cast<std::size_t>(i)], xv, cond, tvec);
        if (motion_here) {
            FusedPair fp = fuse_features(xm, xv, m.zl_a[static_cast<std::size_t>(i)],
                                         m.zl_b[static_cast<std::size_t>(i)]);
            if (std::find(sel.begin(), sel.end(), i + 1) != sel.end())
                fused_selected.push_back(fp.fused);
            xv = fp.video_out;
            if (cfg.ablation == AblationMode::kFusedToMotion) xm = fp.fused;
        }
    }
    r.v_motion = head_out(m, m.motion, xm, noisy_motion.shape());
    r.v_video = head_out(m, m.video, xv, noisy_video.shape());
    if (!sel.empty()) {
        if (fused_selected.empty())
            throw ShapeError("dual_forward: selection produced no fused features");
        r.motion_preds = module_a_forward(m, m0, fused_selected);
    }
    return r;
}

LossBreakdown total_loss(const Tensor& v_hat_motion, const Tensor& v_motion,
                         const Tensor& v_hat_video, const Tensor& v_video,
                         const std::vector<Tensor>& motion_preds, const Tensor& gt_motion,
                         std::int64_t frames) {
    LossBreakdown lb;
    auto masked_mse = [](const Tensor& pred, const Tensor& target) {
        check_same_shape(pred, target, "total_loss");
        const std::int64_t tl = pred.dim(1);
        return mse(slice(pred, 1, 1, tl - 1), slice(target, 1, 1, tl - 1));
    };
    lb.video = masked_mse(v_hat_video, v_video);
    Tensor total = lb.video;
    if (v_hat_motion.defined()) {
        lb.motion = masked_mse(v_hat_motion, v_motion);
        lb.has_motion = true;
        total = add(total, lb.motion);
    }
    if (!motion_preds.empty()) {
        // ||m_i - GT||^2 summed over a frame's J*3 entries, averaged over
        // frames 1..F-1: equals the all-entry MSE scaled by J*3.
        const std::int64_t j3 = gt_motion.dim(1);
        if (gt_motion.dim(0) != frames - 1)
            throw ShapeError("total_loss: gt motion must cover frames 1..F-1");
        Tensor acc;
        for (const auto& p : motion_preds) {
            Tensor term = scale(mse(p, gt_motion), static_cast<double>(j3));
            acc = acc.defined() ? add(acc, term) : term;
        }
        lb.smpl = scale(acc, 1.0 / static_cast<double>(motion_preds.size()));
        lb.has_smpl = true;
        total = add(total, lb.smpl);
    }
    lb.total = total;
    return lb;
}

Tensor pose_targets(const std::vector<PoseVector>& poses, int joints) {
    if (poses.size() < 2) throw ShapeError("pose_targets: need at least 2 frames");
    const std::int64_t f1 = static_cast<std::int64_t>(poses.size()) - 1;
    const std::int64_t j3 = static_cast<std::int64_t>(joints) * 3;
    Tensor t = Tensor::zeros({f1, j3});
    double* d = t.mutable_data();
    for (std::int64_t i = 0; i < f1; ++i) {
        const auto& p = poses[static_cast<std::size_t>(i + 1)];
        if (static_cast<int>(p.rotations.size()) != joints)
            throw ShapeError("pose_targets: joint count mismatch");
        for (int j = 0; j < joints; ++j) {
            d[i * j3 + 3 * j + 0] = p.rotations[static_cast<std::size_t>(j)].x;
            d[i * j3 + 3 * j + 1] = p.rotations[static_cast<std::size_t>(j)].y;
            d[i * j3 + 3 * j + 2] = p.rotations[static_cast<std::size_t>(j)].z;
        }
    }
    return t;
}

void save_model(const DualModelParams& m, const std::string& path,
                const std::map<std::string, std::uint64_t>& extra_meta,
                const std::vector<std::pair<std::string, Tensor>>& extra_tensors) {
    TensorContainer c;
    const auto& cfg = m.cfg;
    c.meta["cfg.width"] = static_cast<std::uint64_t>(cfg.width);
    c.meta["cfg.blocks"] = static_cast<std::uint64_t>(cfg.blocks);
    c.meta["cfg.heads"] = static_cast<std::uint64_t>(cfg.heads);
    c.meta["cfg.ffn_width"] = static_cast<std::uint64_t>(cfg.ffn_width);
    c.meta["cfg.query_dim"] = static_cast<std::uint64_t>(cfg.query_dim);
    c.meta["cfg.module_a_layers"] = static_cast<std::uint64_t>(cfg.module_a_layers);
    c.meta["cfg.module_a_heads"] = static_cast<std::uint64_t>(cfg.module_a_heads);
    c.meta["cfg.vocab_size"] = static_cast<std::uint64_t>(cfg.vocab_size);
    c.meta["cfg.joints"] = static_cast<std::uint64_t>(cfg.joints);
    c.meta["cfg.frames"] = static_cast<std::uint64_t>(cfg.frames);
    c.meta["cfg.height"] = static_cast<std::uint64_t>(cfg.height);
    c.meta["cfg.width_px"] = static_cast<std::uint64_t>(cfg.width_px);
    c.meta["cfg.ablation"] = static_cast<std::uint64_t>(cfg.ablation);
    for (const auto& [k, v] : extra_meta) c.meta[k] = v;
    for (const auto& e : m.store.entries()) c.add(e.name, e.tensor);
    for (const auto& [name, t] : extra_tensors) c.add(name, t);
    write_container(c, path);
}

LoadedModel load_model(const std::string& path) {
    TensorContainer c = read_container(path);
    ModelConfig cfg;
    auto need = [&](const char* key) {
        auto it = c.meta.find(key);
        if (it == c.meta.end()) throw DataError(std::string("checkpoint missing meta key ") + key);
        return it->second;
    };
    cfg.width = static_cast<std::int64_t>(need("cfg.width"));
    cfg.blocks = static_cast<int>(need("cfg.blocks"));
    cfg.heads = static_cast<int>(need("cfg.heads"));
    cfg.ffn_width = static_cast<std::int64_t>(need("cfg.ffn_width"));
    cfg.query_dim = static_cast<std::int64_t>(need("cfg.query_dim"));
    cfg.module_a_layers = static_cast<int>(need("cfg.module_a_layers"));
    cfg.module_a_heads = static_cast<int>(need("cfg.module_a_heads"));
    cfg.vocab_size = static_cast<std::int64_t>(need("cfg.vocab_size"));
    cfg.joints = static_cast<int>(need("cfg.joints"));
    cfg.frames = static_cast<std::int64_t>(need("cfg.frames"));
    cfg.height = static_cast<std::int64_t>(need("cfg.height"));
    cfg.width_px = static_cast<std::int64_t>(need("cfg.width_px"));
    cfg.ablation = static_cast<AblationMode>(need("cfg.ablation"));

    LoadedModel lm{init_model(cfg, 0), c.meta, {}};
    for (auto& e : lm.params.store.entries()) {
        Tensor src = c.find(e.name);
        if (src.shape() != e.tensor.shape())
            throw DataError("checkpoint tensor shape mismatch for " + e.name);
        std::copy(src.data(), src.data() + src.numel(), e.tensor.mutable_data());
    }
    for (const auto& [name, t] : c.tensors) {
        if (!lm.params.store.contains(name)) lm.extra.emplace_back(name, t);
    }
    return lm;
}

}  // namespace cogen
