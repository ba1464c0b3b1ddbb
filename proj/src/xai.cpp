#include "salev/xai.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "linalg.hpp"
#include "salev/elements.hpp"
#include "salev/errors.hpp"
#include "salev/rng.hpp"

namespace salev {

namespace {

constexpr std::size_t kPredictChunk = 64;

// Target logits for many perturbed inputs, chunked through the model.
std::vector<double> batched_target_logits(const ModelOracle& model,
                                          const std::vector<Tensor>& inputs,
                                          std::size_t target) {
    std::vector<double> out;
    out.reserve(inputs.size());
    std::vector<Tensor> chunk;
    for (std::size_t i = 0; i < inputs.size();) {
        chunk.clear();
        const std::size_t end = std::min(i + kPredictChunk, inputs.size());
        for (std::size_t j = i; j < end; ++j) chunk.push_back(inputs[j]);
        const Tensor logits = model.predict(chunk);
        const std::size_t classes = model.num_classes();
        for (std::size_t j = 0; j < chunk.size(); ++j) {
            out.push_back(logits[j * classes + target]);
        }
        i = end;
    }
    return out;
}

// Sum per-scalar attributions into map space: identity for grids, per-point
// sums for clouds.
Tensor to_map_space(const InputSample& x, const Tensor& per_scalar, bool absolute) {
    if (x.modality != Modality::PointCloud) {
        if (!absolute) return per_scalar;
        Tensor out = per_scalar;
        for (auto& v : out.values()) v = std::abs(v);
        return out;
    }
    const std::size_t n = x.data.shape()[0];
    Tensor out({n});
    for (std::size_t p = 0; p < n; ++p) {
        double acc = 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
            const double v = per_scalar[p * 3 + j];
            acc += absolute ? std::abs(v) : v;
        }
        out[p] = acc;
    }
    return out;
}

// Sliding window start positions covering the whole axis, including a flush
// final position when stride does not land on it.
std::vector<std::size_t> window_starts(std::size_t dim, std::size_t kernel,
                                       std::size_t stride) {
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s + kernel <= dim; s += stride) starts.push_back(s);
    if (starts.empty() || starts.back() + kernel < dim) starts.push_back(dim - kernel);
    return starts;
}

} // namespace

FeatureMask build_feature_mask(Modality modality, const std::vector<std::size_t>& shape,
                               std::size_t patch_size) {
    validate_modality_shape(modality, shape);
    const ElementLayout layout(modality, shape);
    FeatureMask mask;
    mask.group.resize(layout.count());

    if (modality == Modality::PointCloud) {
        for (std::size_t p = 0; p < layout.count(); ++p) mask.group[p] = static_cast<int>(p);
        mask.n_groups = static_cast<int>(layout.count());
        return mask;
    }
    if (patch_size == 0) raise(ErrorCode::InvalidSpec, "patch size must be >= 1");

    const std::size_t dims = modality == Modality::Image ? 2 : 3;
    std::vector<std::size_t> extent(dims);
    for (std::size_t d = 0; d < dims; ++d) {
        extent[d] = shape[d];
        if (patch_size > extent[d]) {
            raise(ErrorCode::InvalidSpec, "patch does not fit inside the input");
        }
    }
    std::vector<std::size_t> cells(dims);
    for (std::size_t d = 0; d < dims; ++d) {
        cells[d] = (extent[d] + patch_size - 1) / patch_size;
    }

    for (std::size_t e = 0; e < layout.count(); ++e) {
        std::size_t rest = e;
        std::size_t gid = 0;
        for (std::size_t d = 0; d < dims; ++d) {
            std::size_t stride = 1;
            for (std::size_t k = d + 1; k < dims; ++k) stride *= extent[k];
            const std::size_t coord = rest / stride;
            rest %= stride;
            gid = gid * cells[d] + coord / patch_size;
        }
        mask.group[e] = static_cast<int>(gid);
    }
    mask.n_groups = static_cast<int>(
        std::accumulate(cells.begin(), cells.end(), std::size_t{1}, std::multiplies<>()));
    return mask;
}

Tensor occlusion_raw(const ModelOracle& model, const InputSample& x, std::size_t target,
                     const XaiConfig& cfg) {
    const ElementLayout layout(x.modality, x.data.shape());
    const std::size_t k = cfg.kernel_size;
    const std::size_t stride = std::max<std::size_t>(1, cfg.kernel_stride);

    // Window = list of covered elements.
    std::vector<std::vector<std::size_t>> windows;
    if (x.modality == Modality::PointCloud) {
        // One point per window, no overlap.
        windows.resize(layout.count());
        for (std::size_t p = 0; p < layout.count(); ++p) windows[p] = {p};
    } else if (x.modality == Modality::Image) {
        const std::size_t w = x.data.shape()[0], h = x.data.shape()[1];
        if (k > w || k > h) raise(ErrorCode::KernelTooLarge, "occlusion kernel exceeds input");
        for (std::size_t wx : window_starts(w, k, stride)) {
            for (std::size_t hy : window_starts(h, k, stride)) {
                std::vector<std::size_t> cover;
                cover.reserve(k * k);
                for (std::size_t i = 0; i < k; ++i) {
                    for (std::size_t j = 0; j < k; ++j) {
                        cover.push_back((wx + i) * h + (hy + j));
                    }
                }
                windows.push_back(std::move(cover));
            }
        }
    } else {
        const auto& s = x.data.shape();
        if (k > s[0] || k > s[1] || k > s[2]) {
            raise(ErrorCode::KernelTooLarge, "occlusion kernel exceeds input");
        }
        for (std::size_t ax : window_starts(s[0], k, stride)) {
            for (std::size_t ay : window_starts(s[1], k, stride)) {
                for (std::size_t az : window_starts(s[2], k, stride)) {
                    std::vector<std::size_t> cover;
                    cover.reserve(k * k * k);
                    for (std::size_t i = 0; i < k; ++i) {
                        for (std::size_t j = 0; j < k; ++j) {
                            for (std::size_t l = 0; l < k; ++l) {
                                cover.push_back(((ax + i) * s[1] + (ay + j)) * s[2] + (az + l));
                            }
                        }
                    }
                    windows.push_back(std::move(cover));
                }
            }
        }
    }

    std::vector<Tensor> occluded;
    occluded.reserve(windows.size());
    for (const auto& cover : windows) {
        Tensor perturbed = x.data;
        for (std::size_t e : cover) layout.set_value(perturbed, e, cfg.baseline_value);
        occluded.push_back(std::move(perturbed));
    }
    const double base_logit = predict_logit(model, x.data, target);
    const auto logits = batched_target_logits(model, occluded, target);

    std::vector<double> sum(layout.count(), 0.0);
    std::vector<std::size_t> hits(layout.count(), 0);
    for (std::size_t wi = 0; wi < windows.size(); ++wi) {
        const double drop = base_logit - logits[wi];
        for (std::size_t e : windows[wi]) {
            sum[e] += drop;
            ++hits[e];
        }
    }

    if (x.modality == Modality::PointCloud) {
        Tensor out({layout.count()});
        for (std::size_t e = 0; e < layout.count(); ++e) {
            out[e] = sum[e] / static_cast<double>(hits[e]);
        }
        return out;
    }
    Tensor out(x.data.shape());
    for (std::size_t e = 0; e < layout.count(); ++e) {
        const double v = sum[e] / static_cast<double>(hits[e]);
        for (std::size_t s = 0; s < layout.scalars_per_element(); ++s) {
            out.values()[layout.scalar_offset(e, s)] = v;
        }
    }
    return out;
}

namespace {

// Applies a coalition row: groups that are off fall back to the baseline.
Tensor masked_input(const InputSample& x, const ElementLayout& layout, const FeatureMask& mask,
                    const std::vector<std::uint8_t>& on, double baseline) {
    Tensor out = x.data;
    for (std::size_t e = 0; e < layout.count(); ++e) {
        if (!on[static_cast<std::size_t>(mask.group[e])]) {
            layout.set_value(out, e, baseline);
        }
    }
    return out;
}

Tensor broadcast_group_values(const InputSample& x, const ElementLayout& layout,
                              const FeatureMask& mask, const std::vector<double>& coeff) {
    if (x.modality == Modality::PointCloud) {
        Tensor out({layout.count()});
        for (std::size_t e = 0; e < layout.count(); ++e) {
            out[e] = coeff[static_cast<std::size_t>(mask.group[e])];
        }
        return out;
    }
    Tensor out(x.data.shape());
    for (std::size_t e = 0; e < layout.count(); ++e) {
        const double v = coeff[static_cast<std::size_t>(mask.group[e])];
        for (std::size_t s = 0; s < layout.scalars_per_element(); ++s) {
            out.values()[layout.scalar_offset(e, s)] = v;
        }
    }
    return out;
}

// Cyclic coordinate descent for lasso on centered data:
// min (1/2n)||y - Z b||^2 + lambda ||b||_1.
std::vector<double> lasso_fit(const std::vector<std::vector<double>>& z,
                              const std::vector<double>& y, double lambda) {
    const std::size_t n = y.size();
    const std::size_t g = z.empty() ? 0 : z[0].size();
    std::vector<double> beta(g, 0.0), residual = y;
    std::vector<double> col_sq(g, 0.0);
    for (std::size_t j = 0; j < g; ++j) {
        for (std::size_t i = 0; i < n; ++i) col_sq[j] += z[i][j] * z[i][j];
    }
    for (int iter = 0; iter < 500; ++iter) {
        double delta = 0.0;
        for (std::size_t j = 0; j < g; ++j) {
            if (col_sq[j] <= 0.0) continue;
            double rho = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                rho += z[i][j] * (residual[i] + z[i][j] * beta[j]);
            }
            rho /= static_cast<double>(n);
            const double denom = col_sq[j] / static_cast<double>(n);
            double next;
            if (rho > lambda) next = (rho - lambda) / denom;
            else if (rho < -lambda) next = (rho + lambda) / denom;
            else next = 0.0;
            const double change = next - beta[j];
            if (change != 0.0) {
                for (std::size_t i = 0; i < n; ++i) residual[i] -= z[i][j] * change;
                delta = std::max(delta, std::abs(change));
                beta[j] = next;
            }
        }
        if (delta < 1e-10) break;
    }
    return beta;
}

bool ridge_fit(const std::vector<std::vector<double>>& z, const std::vector<double>& y,
               double lambda, std::vector<double>& beta) {
    const std::size_t n = y.size();
    const std::size_t g = z.empty() ? 0 : z[0].size();
    std::vector<double> a(g * g, 0.0), b(g, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < g; ++j) {
            b[j] += z[i][j] * y[i];
            for (std::size_t k = j; k < g; ++k) a[j * g + k] += z[i][j] * z[i][k];
        }
    }
    for (std::size_t j = 0; j < g; ++j) {
        a[j * g + j] += lambda * static_cast<double>(n);
        for (std::size_t k = 0; k < j; ++k) a[j * g + k] = a[k * g + j];
    }
    return linalg::solve(std::move(a), std::move(b), g, beta);
}

} // namespace

Tensor lime_raw(const ModelOracle& model, const InputSample& x, std::size_t target,
                const FeatureMask& mask, const XaiConfig& cfg) {
    const ElementLayout layout(x.modality, x.data.shape());
    const std::size_t g = static_cast<std::size_t>(mask.n_groups);
    if (g < 2) raise(ErrorCode::InvalidArgument, "need at least 2 feature groups");

    const std::size_t n = cfg.n_surrogate_samples > 0 ? cfg.n_surrogate_samples : 4 * g;
    Rng rng(Rng::mix(cfg.seed, 0x6c696d65u));

    std::vector<std::vector<std::uint8_t>> rows(n, std::vector<std::uint8_t>(g));
    std::vector<Tensor> inputs;
    inputs.reserve(n);
    for (auto& row : rows) {
        for (auto& bit : row) bit = rng.uniform() < cfg.keep_prob ? 1 : 0;
        inputs.push_back(masked_input(x, layout, mask, row, cfg.baseline_value));
    }
    const auto ys = batched_target_logits(model, inputs, target);

    // Center features and response; the intercept drops out.
    std::vector<double> col_mean(g, 0.0);
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < g; ++j) col_mean[j] += row[j];
    }
    for (auto& m : col_mean) m /= static_cast<double>(n);
    const double y_mean = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(n);

    std::vector<std::vector<double>> z(n, std::vector<double>(g));
    std::vector<double> yc(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < g; ++j) z[i][j] = rows[i][j] - col_mean[j];
        yc[i] = ys[i] - y_mean;
    }

    // Ridge regression for point clouds, lasso otherwise.
    std::vector<double> beta;
    if (x.modality == Modality::PointCloud) {
        if (!ridge_fit(z, yc, cfg.regularization, beta)) {
            if (!ridge_fit(z, yc, cfg.regularization * 10.0, beta)) {
                raise(ErrorCode::SingularFit, "ridge system is singular");
            }
        }
    } else {
        beta = lasso_fit(z, yc, cfg.regularization);
    }
    return broadcast_group_values(x, layout, mask, beta);
}

std::vector<double> kernel_shap_coefficients(const ModelOracle& model, const InputSample& x,
                                             std::size_t target, const FeatureMask& mask,
                                             const XaiConfig& cfg) {
    const ElementLayout layout(x.modality, x.data.shape());
    const std::size_t g = static_cast<std::size_t>(mask.n_groups);
    if (g < 2) raise(ErrorCode::InvalidArgument, "need at least 2 feature groups");

    std::vector<std::vector<std::uint8_t>> rows;
    std::vector<double> weights;
    const bool exact = g <= 16;
    if (exact) {
        // Every proper coalition with the Shapley kernel weight
        // pi(s) = (G - 1) / (C(G, s) * s * (G - s)).
        std::vector<double> log_fact(g + 1, 0.0);
        for (std::size_t i = 2; i <= g; ++i) {
            log_fact[i] = log_fact[i - 1] + std::log(static_cast<double>(i));
        }
        auto choose = [&](std::size_t n_, std::size_t k_) {
            return std::exp(log_fact[n_] - log_fact[k_] - log_fact[n_ - k_]);
        };
        const std::size_t total = std::size_t{1} << g;
        for (std::size_t bits = 1; bits + 1 < total; ++bits) {
            std::vector<std::uint8_t> row(g);
            std::size_t s = 0;
            for (std::size_t j = 0; j < g; ++j) {
                row[j] = (bits >> j) & 1u;
                s += row[j];
            }
            rows.push_back(std::move(row));
            weights.push_back(static_cast<double>(g - 1) /
                              (choose(g, s) * static_cast<double>(s) *
                               static_cast<double>(g - s)));
        }
    } else {
        // Importance sampling: coalition sizes drawn proportional to the
        // kernel, members uniform within a size; weights become uniform.
        const std::size_t n = cfg.n_surrogate_samples > 0 ? cfg.n_surrogate_samples
                                                          : 2 * g + 2048;
        Rng rng(Rng::mix(cfg.seed, 0x73686170u));
        std::vector<double> size_weight(g, 0.0); // index s = 1..g-1
        double norm = 0.0;
        for (std::size_t s = 1; s < g; ++s) {
            size_weight[s] = 1.0 / (static_cast<double>(s) * static_cast<double>(g - s));
            norm += size_weight[s];
        }
        std::vector<std::size_t> pool(g);
        std::iota(pool.begin(), pool.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            double u = rng.uniform() * norm;
            std::size_t s = 1;
            while (s + 1 < g && u > size_weight[s]) {
                u -= size_weight[s];
                ++s;
            }
            rng.shuffle(pool.begin(), pool.end());
            std::vector<std::uint8_t> row(g, 0);
            for (std::size_t j = 0; j < s; ++j) row[pool[j]] = 1;
            rows.push_back(std::move(row));
            weights.push_back(1.0);
        }
    }

    std::vector<Tensor> inputs;
    inputs.reserve(rows.size());
    for (const auto& row : rows) {
        inputs.push_back(masked_input(x, layout, mask, row, cfg.baseline_value));
    }
    const auto v = batched_target_logits(model, inputs, target);

    const std::vector<std::uint8_t> none(g, 0), all(g, 1);
    const double v0 =
        predict_logit(model, masked_input(x, layout, mask, none, cfg.baseline_value), target);
    const double v1 = predict_logit(model, x.data, target);
    const double delta = v1 - v0;

    // Constrained weighted least squares with the last coefficient
    // eliminated by the completeness constraint sum(phi) = v1 - v0.
    const std::size_t m = g - 1;
    std::vector<double> a(m * m, 0.0), b(m, 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double zg = rows[i][g - 1];
        const double yi = v[i] - v0 - zg * delta;
        for (std::size_t j = 0; j < m; ++j) {
            const double fj = static_cast<double>(rows[i][j]) - zg;
            if (fj == 0.0) continue;
            b[j] += weights[i] * fj * yi;
            for (std::size_t k = j; k < m; ++k) {
                const double fk = static_cast<double>(rows[i][k]) - zg;
                a[j * m + k] += weights[i] * fj * fk;
            }
        }
    }
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t k = 0; k < j; ++k) a[j * m + k] = a[k * m + j];
    }

    std::vector<double> phi_head;
    if (!linalg::solve(a, b, m, phi_head)) {
        // Tiny jitter as a one-shot fallback.
        for (std::size_t j = 0; j < m; ++j) a[j * m + j] += 1e-10;
        if (!linalg::solve(std::move(a), std::move(b), m, phi_head)) {
            raise(ErrorCode::SingularFit, "kernel shap regression is singular");
        }
    }
    std::vector<double> phi(g, 0.0);
    double head_sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        phi[j] = phi_head[j];
        head_sum += phi_head[j];
    }
    phi[g - 1] = delta - head_sum;
    return phi;
}

Tensor kernel_shap_raw(const ModelOracle& model, const InputSample& x, std::size_t target,
                       const FeatureMask& mask, const XaiConfig& cfg) {
    const ElementLayout layout(x.modality, x.data.shape());
    const auto phi = kernel_shap_coefficients(model, x, target, mask, cfg);
    return broadcast_group_values(x, layout, mask, phi);
}

Tensor vanilla_gradient_raw(const ModelOracle& model, const InputSample& x,
                            std::size_t target) {
    if (!model.has_gradient()) {
        raise(ErrorCode::NoGradientCapability, "vanilla gradient needs input gradients");
    }
    const Tensor grad = model.gradient({x.data}, target)[0];
    return to_map_space(x, grad, /*absolute=*/true);
}

Tensor input_x_gradient_raw(const ModelOracle& model, const InputSample& x,
                            std::size_t target) {
    if (!model.has_gradient()) {
        raise(ErrorCode::NoGradientCapability, "input x gradient needs input gradients");
    }
    Tensor grad = model.gradient({x.data}, target)[0];
    for (std::size_t i = 0; i < grad.size(); ++i) grad.values()[i] *= x.data[i];
    return to_map_space(x, grad, /*absolute=*/false);
}

Tensor integrated_gradients_raw(const ModelOracle& model, const InputSample& x,
                                std::size_t target, const Tensor& baseline,
                                std::size_t n_steps) {
    if (!model.has_gradient()) {
        raise(ErrorCode::NoGradientCapability, "integrated gradients needs input gradients");
    }
    if (!baseline.same_shape(x.data)) {
        raise(ErrorCode::ShapeMismatch, "baseline shape differs from input");
    }
    if (n_steps < 8) raise(ErrorCode::InvalidArgument, "need n_steps >= 8");

    Tensor mean_grad(x.data.shape());
    std::vector<Tensor> points;
    points.reserve(n_steps);
    for (std::size_t j = 0; j < n_steps; ++j) {
        // Midpoint sampling along the straight-line path.
        const double alpha =
            (static_cast<double>(j) + 0.5) / static_cast<double>(n_steps);
        Tensor p(x.data.shape());
        for (std::size_t i = 0; i < p.size(); ++i) {
            p.values()[i] = baseline[i] + alpha * (x.data[i] - baseline[i]);
        }
        points.push_back(std::move(p));
    }
    for (std::size_t start = 0; start < points.size(); start += kPredictChunk) {
        const std::size_t end = std::min(start + kPredictChunk, points.size());
        std::vector<Tensor> chunk(points.begin() + start, points.begin() + end);
        const auto grads = model.gradient(chunk, target);
        for (const auto& gt : grads) {
            for (std::size_t i = 0; i < mean_grad.size(); ++i) mean_grad.values()[i] += gt[i];
        }
    }
    Tensor attr(x.data.shape());
    for (std::size_t i = 0; i < attr.size(); ++i) {
        attr.values()[i] =
            (x.data[i] - baseline[i]) * mean_grad[i] / static_cast<double>(n_steps);
    }
    return to_map_space(x, attr, /*absolute=*/false);
}

Tensor expected_gradients_raw(const ModelOracle& model, const InputSample& x,
                              std::size_t target, std::span<const Tensor> baseline_pool,
                              std::size_t n_samples, std::uint64_t seed) {
    if (!model.has_gradient()) {
        raise(ErrorCode::NoGradientCapability, "expected gradients needs input gradients");
    }
    if (baseline_pool.empty()) raise(ErrorCode::EmptyPool, "baseline pool is empty");

    Rng rng(Rng::mix(seed, 0x65677261u));
    Tensor attr(x.data.shape());
    for (std::size_t s = 0; s < n_samples; ++s) {
        const Tensor& b = baseline_pool[rng.uniform_index(baseline_pool.size())];
        const double alpha = rng.uniform();
        Tensor p(x.data.shape());
        for (std::size_t i = 0; i < p.size(); ++i) {
            p.values()[i] = b[i] + alpha * (x.data[i] - b[i]);
        }
        const Tensor grad = model.gradient({p}, target)[0];
        for (std::size_t i = 0; i < attr.size(); ++i) {
            attr.values()[i] += (x.data[i] - b[i]) * grad[i];
        }
    }
    for (auto& v : attr.values()) v /= static_cast<double>(n_samples);
    return to_map_space(x, attr, /*absolute=*/false);
}

Tensor gradcam_raw(const ActivationOracle& acts, const InputSample& x, std::size_t target,
                   int target_layer) {
    if (x.modality != Modality::Image) {
        raise(ErrorCode::WrongModality, "gradcam is image-only here");
    }
    const int layer = target_layer >= 0 ? target_layer : acts.default_conv_layer();
    if (layer < 0) {
        raise(ErrorCode::NoActivationCapability, "model has no convolutional layer");
    }
    const auto [activation, grad] =
        acts.layer_activation_gradient(x.data, static_cast<std::size_t>(layer), target);
    if (activation.rank() != 3) {
        raise(ErrorCode::NoActivationCapability, "target layer is not a 2d conv output");
    }
    const std::size_t wp = activation.shape()[0], hp = activation.shape()[1],
                      kc = activation.shape()[2];

    // Channel weights: spatially averaged gradients.
    std::vector<double> wk(kc, 0.0);
    for (std::size_t i = 0; i < wp * hp; ++i) {
        for (std::size_t k = 0; k < kc; ++k) wk[k] += grad[i * kc + k];
    }
    for (auto& v : wk) v /= static_cast<double>(wp * hp);

    Tensor cam({wp, hp});
    for (std::size_t i = 0; i < wp * hp; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < kc; ++k) acc += wk[k] * activation[i * kc + k];
        cam[i] = std::max(acc, 0.0);
    }

    // Nearest-neighbor upscale to the input plane, broadcast over channels.
    const std::size_t w = x.data.shape()[0], h = x.data.shape()[1], c = x.data.shape()[2];
    Tensor out({w, h, c});
    for (std::size_t i = 0; i < w; ++i) {
        const std::size_t si = std::min(wp - 1, i * wp / w);
        for (std::size_t j = 0; j < h; ++j) {
            const std::size_t sj = std::min(hp - 1, j * hp / h);
            const double v = cam[si * hp + sj];
            for (std::size_t ch = 0; ch < c; ++ch) out[(i * h + j) * c + ch] = v;
        }
    }
    return out;
}

namespace {

Tensor explain_raw_base(const XaiContext& ctx, const InputSample& x, std::size_t target,
                        const XaiConfig& cfg) {
    if (ctx.model == nullptr) raise(ErrorCode::InvalidArgument, "context has no model");
    const ModelOracle& model = *ctx.model;
    const std::string& id = cfg.method_id;
    if (id == "OC") return occlusion_raw(model, x, target, cfg);
    if (id == "LIME" || id == "KS") {
        const FeatureMask mask =
            build_feature_mask(x.modality, x.data.shape(), cfg.patch_size);
        return id == "LIME" ? lime_raw(model, x, target, mask, cfg)
                            : kernel_shap_raw(model, x, target, mask, cfg);
    }
    if (id == "VG") return vanilla_gradient_raw(model, x, target);
    if (id == "IxG") return input_x_gradient_raw(model, x, target);
    if (id == "IG") {
        Tensor baseline(x.data.shape(), cfg.baseline_value);
        return integrated_gradients_raw(model, x, target, baseline, cfg.n_steps);
    }
    if (id == "EG") {
        if (ctx.baseline_pool == nullptr || ctx.baseline_pool->empty()) {
            raise(ErrorCode::EmptyPool, "expected gradients needs a baseline pool");
        }
        return expected_gradients_raw(model, x, target, *ctx.baseline_pool, cfg.n_samples,
                                      cfg.seed);
    }
    if (id == "GC") {
        if (ctx.activations == nullptr) {
            raise(ErrorCode::NoActivationCapability, "context has no activation oracle");
        }
        return gradcam_raw(*ctx.activations, x, target, cfg.target_layer);
    }
    raise(ErrorCode::InvalidArgument, "unknown method '" + id + "'");
}

} // namespace

Tensor explain_raw(const XaiContext& ctx, const InputSample& x, std::size_t target,
                   const XaiConfig& cfg) {
    if (cfg.wrapper == WrapperKind::None) {
        return explain_raw_base(ctx, x, target, cfg);
    }
    if (cfg.n_samples < 1) raise(ErrorCode::InvalidArgument, "wrapper needs n_samples >= 1");
    if (cfg.noise_sd < 0.0) raise(ErrorCode::InvalidArgument, "noise sd must be >= 0");

    Rng rng(Rng::mix(cfg.seed, 0x77726170u));
    Tensor mean, m2;
    for (std::size_t s = 0; s < cfg.n_samples; ++s) {
        InputSample noisy = x;
        for (auto& v : noisy.data.values()) v += rng.normal(0.0, cfg.noise_sd);
        const Tensor raw = explain_raw_base(ctx, noisy, target, cfg);
        if (s == 0) {
            mean = Tensor(raw.shape());
            m2 = Tensor(raw.shape());
        }
        for (std::size_t i = 0; i < raw.size(); ++i) {
            mean.values()[i] += raw[i];
            m2.values()[i] += raw[i] * raw[i];
        }
    }
    const double n = static_cast<double>(cfg.n_samples);
    for (auto& v : mean.values()) v /= n;
    if (cfg.wrapper == WrapperKind::SmoothGrad) return mean;
    Tensor var(mean.shape());
    for (std::size_t i = 0; i < var.size(); ++i) {
        var.values()[i] = std::max(m2[i] / n - mean[i] * mean[i], 0.0);
    }
    return var;
}

SaliencyMap explain(const XaiContext& ctx, const InputSample& x, std::size_t target,
                    const XaiConfig& cfg) {
    std::string label = cfg.method_id;
    if (cfg.wrapper == WrapperKind::SmoothGrad) label += "+SG";
    if (cfg.wrapper == WrapperKind::VarGrad) label += "+VAR";
    SaliencyMap map = postprocess_saliency(explain_raw(ctx, x, target, cfg), label);
    validate_pair(x, map);
    return map;
}

const std::vector<std::string>& builtin_method_ids() {
    static const std::vector<std::string> ids = {"OC", "LIME", "KS", "VG",
                                                 "IxG", "IG", "EG", "GC"};
    return ids;
}

ExplainFn make_explain_fn(const XaiContext& ctx, const InputSample& prototype,
                          std::size_t target, const XaiConfig& cfg) {
    return [ctx, prototype, target, cfg](const Tensor& input) {
        InputSample sample = prototype;
        sample.data = input;
        return explain(ctx, sample, target, cfg).values;
    };
}

} // namespace salev
