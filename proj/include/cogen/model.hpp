#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cogen/body.hpp"
#include "cogen/latent.hpp"
#include "cogen/optim.hpp"
#include "cogen/tensor.hpp"

namespace cogen {

// Architecture switches mirroring the ablation axes: representation
// variants are handled by the data generator, the rest change the model
// wiring itself.
enum class AblationMode {
    kFull = 0,
    kNoMotion = 1,         // video branch fine-tune only
    kNormalOnly = 2,       // motion frames without part semantics (datagen)
    kSemanticOnly = 3,     // motion frames without normals (datagen)
    kJointLatent = 4,      // channel-concat single branch, doubled embed/head
    kDistributedCopy = 5,  // motion branch covers every other block
    kFusedToMotion = 6,    // motion branch consumes the fused feature
};

const char* ablation_name(AblationMode m);
AblationMode ablation_from_name(const std::string& name);

struct ModelConfig {
    std::int64_t latent_channels = kLatentChannels;
    std::int64_t width = 128;       // token dim d
    int blocks = 4;                 // L
    int heads = 4;
    std::int64_t ffn_width = 512;
    std::int64_t query_dim = 64;    // C_q
    int module_a_layers = 6;
    int module_a_heads = 4;
    std::int64_t vocab_size = 16;   // condition tokens; id vocab_size is the CFG null token
    int joints = 8;                 // J
    std::int64_t frames = 17;       // F
    std::int64_t height = 64, width_px = 64;
    AblationMode ablation = AblationMode::kFull;

    std::int64_t latent_t() const { return (frames - 1) / kTemporalStride + 1; }
    std::int64_t latent_h() const { return height / kSpatialStride; }
    std::int64_t latent_w() const { return width_px / kSpatialStride; }
    std::int64_t tokens() const { return latent_t() * latent_h() * latent_w(); }
    std::int64_t groups() const { return (frames - 1) / kTemporalStride; }
    std::int64_t pose_dim() const { return static_cast<std::int64_t>(joints) * 3; }
    std::int64_t null_token() const { return vocab_size; }
    bool single_branch() const {
        return ablation == AblationMode::kNoMotion || ablation == AblationMode::kJointLatent;
    }
};

struct LinearP {
    Tensor w, b;
};

struct AttnP {
    LinearP q, k, v, o;
};

struct BlockP {
    AttnP self_attn;
    AttnP cross_attn;
    LinearP ffn_in, ffn_out;
    LinearP ada;  // silu(t_vec) -> 6 (shift,scale) vectors
};

struct BranchP {
    LinearP patch;  // C_in -> d
    std::vector<BlockP> blocks;
    LinearP head;   // d -> C_out
};

struct ModuleALayerP {
    AttnP self_attn;   // C_q
    AttnP cross_attn;  // queries C_q, keys/values from token dim d
    LinearP ffn_in, ffn_out;
};

struct ModuleAP {
    LinearP embed;  // J*3 -> C_q
    std::vector<ModuleALayerP> layers;
    LinearP out;    // C_q -> J*3, zero-initialized (predictions are deltas on m0)
};

// Full parameter set for both DiT branches, the per-block zero-linears, the
// shared 3D-2D cross-attention module, and the condition/time embeddings.
// The motion branch is a structural copy of the video branch.
struct DualModelParams {
    ModelConfig cfg;
    BranchP video;
    BranchP motion;                       // empty in single-branch modes
    std::vector<LinearP> zl_a, zl_b;      // fusion zero-linears per block
    ModuleAP module_a;
    Tensor cond_embed;                    // (vocab+1) x d
    LinearP time_in, time_out;            // sinusoidal features -> d -> d

    // Fixed buffers (not trained, not checkpoint-managed by the optimizer).
    Tensor pos_tokens;  // N x d
    Tensor pos_query;   // F x C_q
    Tensor ones_d, zeros_d, ones_q, zeros_q;

    ParamStore store;
};

DualModelParams init_model(const ModelConfig& cfg, std::uint64_t seed);

// Registered trainable parameter names for each training phase.
// stage 0: video branch + embeddings; stage 1: motion branch only;
// stage 2: motion branch + zero-linears + module A.
std::vector<std::string> trainable_names(const DualModelParams& m, int stage);

// ---- flow matching ----

struct NoisySample {
    Tensor x_t;          // latent-shaped
    double t = 0.0;
    Tensor eps;
    std::vector<bool> clean_mask;  // per temporal token; token 0 true
};

// x_t = (1-t) eps + t x0 on noised tokens; temporal token 0 stays clean.
NoisySample make_noisy(const Tensor& x0, const Tensor& eps, double t);

// Constant velocity target of the straight path: x0 - eps.
Tensor velocity_target(const Tensor& x0, const Tensor& eps);

// ---- forward passes ----

struct BranchResult {
    Tensor velocity;                    // latent-shaped
    std::vector<Tensor> block_outputs;  // token tensors after each block
};

// Single-branch DiT: patch embed + positional table, L blocks with
// time-modulated pre-norms, final norm + velocity head.
BranchResult branch_forward(const DualModelParams& m, const BranchP& branch, const Tensor& latent,
                            const std::vector<std::int64_t>& cond_ids, double t);

// Zero-linear mutual fusion after a block: the fused feature feeds the
// 3D-2D cross-attention; the motion branch itself continues unchanged.
struct FusedPair {
    Tensor fused;      // x_motion + zl_a(x_video)
    Tensor video_out;  // x_video + zl_b(x_motion)
};
FusedPair fuse_features(const Tensor& x_motion, const Tensor& x_video, const LinearP& zl_a,
                        const LinearP& zl_b);

// Broadcast of the initial pose's embedding to all F query rows.
Tensor init_motion_query(const DualModelParams& m, const PoseVector& m0);

// [F, C] -> [(F-1)/4, 4, C]; row 0 is kept as key-side context, outputs
// cover frames 1..F-1.
Tensor regroup_queries(const Tensor& q, std::int64_t frames);

// Shared 6-layer self/cross/FFN stack mapping fused features (one per
// selected layer) plus the initial pose to per-frame pose predictions.
// Returns one [F-1, J*3] prediction per provided fused feature.
std::vector<Tensor> module_a_forward(const DualModelParams& m, const PoseVector& m0,
                                     const std::vector<Tensor>& fused_layers);

struct DualForwardResult {
    Tensor v_motion;  // undefined in single-branch modes
    Tensor v_video;
    std::vector<Tensor> motion_preds;     // one per selected layer, final layer last
    std::vector<int> selected_layers;     // 1-based block indices
};

// Runs both branches with fusion after every block; fused features are
// captured at `layer_selection` (1-based, must contain the final block) and
// fed to module A. Pass an empty selection to skip module A entirely.
DualForwardResult dual_forward(const DualModelParams& m, const Tensor& noisy_motion,
                               const Tensor& noisy_video, const std::vector<std::int64_t>& cond_ids,
                               double t, const PoseVector& m0,
                               const std::vector<int>& layer_selection);

// ---- losses ----

struct LossBreakdown {
    Tensor total;
    Tensor motion;  // undefined when the motion branch is disabled
    Tensor video;
    Tensor smpl;    // undefined when module A is disabled
    bool has_motion = false;
    bool has_smpl = false;
};

// L = L_motion + L_video + L_smpl with unit weights. Velocity terms are
// mean squared error over the non-clean temporal tokens; the pose term is
// the per-frame squared norm averaged over frames 1..F-1 and over the
// selected layers.
LossBreakdown total_loss(const Tensor& v_hat_motion, const Tensor& v_motion,
                         const Tensor& v_hat_video, const Tensor& v_video,
                         const std::vector<Tensor>& motion_preds, const Tensor& gt_motion,
                         std::int64_t frames);

// GT pose tensor [F-1, J*3] from per-frame pose vectors 1..F-1.
Tensor pose_targets(const std::vector<PoseVector>& poses, int joints);

// ---- checkpoint plumbing ----
void save_model(const DualModelParams& m, const std::string& path,
                const std::map<std::string, std::uint64_t>& extra_meta,
                const std::vector<std::pair<std::string, Tensor>>& extra_tensors);
struct LoadedModel {
    DualModelParams params;
    std::map<std::string, std::uint64_t> meta;
    std::vector<std::pair<std::string, Tensor>> extra;
};
LoadedModel load_model(const std::string& path);

}  // namespace cogen
