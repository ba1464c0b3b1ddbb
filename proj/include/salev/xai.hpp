#ifndef SALEV_XAI_HPP
#define SALEV_XAI_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "salev/data.hpp"
#include "salev/tensor.hpp"

namespace salev {

enum class WrapperKind { None, SmoothGrad, VarGrad };

struct XaiConfig {
    std::string method_id = "VG"; // OC, LIME, KS, VG, IxG, IG, EG, GC
    WrapperKind wrapper = WrapperKind::None;

    // occlusion
    std::size_t kernel_size = 2;
    std::size_t kernel_stride = 1;
    // shared baseline for OC / LIME / KS / IG
    double baseline_value = 0.0;

    // feature-mask surrogates (LIME / KS)
    std::size_t patch_size = 4;
    std::size_t n_surrogate_samples = 0; // 0 -> 4 * n_groups
    double keep_prob = 0.5;
    double regularization = 1e-3;

    // IG
    std::size_t n_steps = 32;
    // EG and SmoothGrad/VarGrad wrappers
    std::size_t n_samples = 32;
    double noise_sd = 0.1;

    // GC
    int target_layer = -1; // -1 -> last conv layer

    std::uint64_t seed = 0;
};

// Per-element group assignment for surrogate methods: image pixels in
// patch_size^2 patches (channels grouped together), voxels in patch_size^3
// blocks, one group per point for clouds. Edge groups may be smaller.
struct FeatureMask {
    std::vector<int> group; // per element
    int n_groups = 0;
};

FeatureMask build_feature_mask(Modality modality, const std::vector<std::size_t>& shape,
                               std::size_t patch_size);

// Everything the generators may need; model must stay alive while explaining.
struct XaiContext {
    const ModelOracle* model = nullptr;
    const ActivationOracle* activations = nullptr;   // GC
    const std::vector<Tensor>* baseline_pool = nullptr; // EG
};

// Raw (signed, pre-postprocessing) attributions. Images/volumes return
// input-shaped tensors; point clouds return one value per point.
Tensor occlusion_raw(const ModelOracle& model, const InputSample& x, std::size_t target,
                     const XaiConfig& cfg);
Tensor lime_raw(const ModelOracle& model, const InputSample& x, std::size_t target,
                const FeatureMask& mask, const XaiConfig& cfg);
Tensor kernel_shap_raw(const ModelOracle& model, const InputSample& x, std::size_t target,
                       const FeatureMask& mask, const XaiConfig& cfg);
// Per-group Kernel SHAP coefficients; on <= 16 groups these come from the
// fully enumerated Shapley-kernel regression and equal exact Shapley values.
std::vector<double> kernel_shap_coefficients(const ModelOracle& model, const InputSample& x,
                                             std::size_t target, const FeatureMask& mask,
                                             const XaiConfig& cfg);
Tensor vanilla_gradient_raw(const ModelOracle& model, const InputSample& x, std::size_t target);
Tensor input_x_gradient_raw(const ModelOracle& model, const InputSample& x, std::size_t target);
Tensor integrated_gradients_raw(const ModelOracle& model, const InputSample& x,
                                std::size_t target, const Tensor& baseline,
                                std::size_t n_steps);
Tensor expected_gradients_raw(const ModelOracle& model, const InputSample& x,
                              std::size_t target, std::span<const Tensor> baseline_pool,
                              std::size_t n_samples, std::uint64_t seed);
Tensor gradcam_raw(const ActivationOracle& acts, const InputSample& x, std::size_t target,
                   int target_layer);

// Dispatch by method id, applying the SmoothGrad/VarGrad wrapper when
// configured. explain() postprocesses; explain_raw() does not.
Tensor explain_raw(const XaiContext& ctx, const InputSample& x, std::size_t target,
                   const XaiConfig& cfg);
SaliencyMap explain(const XaiContext& ctx, const InputSample& x, std::size_t target,
                    const XaiConfig& cfg);

const std::vector<std::string>& builtin_method_ids();

// Binds (model, method, config, target) into a deterministic map-values
// function of the input tensor; robustness metrics re-explain through this.
using ExplainFn = std::function<Tensor(const Tensor&)>;
ExplainFn make_explain_fn(const XaiContext& ctx, const InputSample& prototype,
                          std::size_t target, const XaiConfig& cfg);

} // namespace salev

#endif
