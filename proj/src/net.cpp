#include "salev/net.hpp"

#include <algorithm>
#include <cmath>

#include "salev/errors.hpp"
#include "salev/rng.hpp"

namespace salev {

namespace {

std::size_t conv_out_dim(std::size_t in, std::size_t kernel, std::size_t stride) {
    if (kernel == 0 || kernel > in) {
        raise(ErrorCode::InvalidSpec, "kernel does not fit input dimension");
    }
    return (in - kernel) / stride + 1;
}

} // namespace

Network::Network(Modality modality, std::vector<std::size_t> input_shape,
                 std::vector<LayerSpec> layers, std::uint64_t seed)
    : modality_(modality), input_shape_(std::move(input_shape)) {
    if (layers.empty()) raise(ErrorCode::InvalidSpec, "network needs at least one layer");

    std::vector<std::size_t> shape = input_shape_;
    std::size_t offset = 0;
    for (const auto& spec : layers) {
        LayerInfo info;
        info.spec = spec;
        info.in_shape = shape;
        info.param_offset = offset;
        switch (spec.kind) {
        case LayerKind::Dense: {
            if (shape.size() != 1) {
                raise(ErrorCode::InvalidSpec, "Dense expects a flat input; add Flatten");
            }
            if (spec.units == 0) raise(ErrorCode::InvalidSpec, "Dense needs units > 0");
            info.out_shape = {spec.units};
            info.param_count = spec.units * shape[0] + spec.units;
            break;
        }
        case LayerKind::Conv2D: {
            if (shape.size() != 3) {
                raise(ErrorCode::InvalidSpec, "Conv2D expects (W, H, C) input");
            }
            const std::size_t wo = conv_out_dim(shape[0], spec.kernel, spec.stride);
            const std::size_t ho = conv_out_dim(shape[1], spec.kernel, spec.stride);
            info.out_shape = {wo, ho, spec.channels};
            info.param_count = spec.channels * spec.kernel * spec.kernel * shape[2] +
                               spec.channels;
            break;
        }
        case LayerKind::Conv3D: {
            // Rank-3 volume input is treated as a single channel.
            std::size_t cin = 1;
            if (shape.size() == 4) {
                cin = shape[3];
            } else if (shape.size() != 3) {
                raise(ErrorCode::InvalidSpec, "Conv3D expects (X, Y, Z[, C]) input");
            }
            const std::size_t xo = conv_out_dim(shape[0], spec.kernel, spec.stride);
            const std::size_t yo = conv_out_dim(shape[1], spec.kernel, spec.stride);
            const std::size_t zo = conv_out_dim(shape[2], spec.kernel, spec.stride);
            info.out_shape = {xo, yo, zo, spec.channels};
            info.param_count =
                spec.channels * spec.kernel * spec.kernel * spec.kernel * cin + spec.channels;
            break;
        }
        case LayerKind::ReLU:
            info.out_shape = shape;
            break;
        case LayerKind::GlobalAvgPool: {
            if (shape.size() < 2) {
                raise(ErrorCode::InvalidSpec, "GlobalAvgPool expects rank >= 2");
            }
            info.out_shape = {shape.back()};
            break;
        }
        case LayerKind::Flatten:
            info.out_shape = {shape_size(shape)};
            break;
        }
        offset += info.param_count;
        shape = info.out_shape;
        layers_.push_back(std::move(info));
    }
    if (shape.size() != 1) {
        raise(ErrorCode::InvalidSpec, "final layer must output a flat logit vector");
    }
    num_classes_ = shape[0];

    // Glorot uniform initialization, seeded per layer in declaration order.
    weights_.assign(offset, 0.0);
    Rng rng(Rng::mix(seed, 0x6e657477u));
    for (const auto& info : layers_) {
        if (info.param_count == 0) continue;
        double fan_in = 1.0, fan_out = 1.0;
        std::size_t bias_count = 0;
        if (info.spec.kind == LayerKind::Dense) {
            fan_in = static_cast<double>(info.in_shape[0]);
            fan_out = static_cast<double>(info.spec.units);
            bias_count = info.spec.units;
        } else {
            const std::size_t cin = info.in_shape.size() == info.out_shape.size()
                                        ? info.in_shape.back()
                                        : 1;
            const double k = static_cast<double>(info.spec.kernel);
            const double kd = info.spec.kind == LayerKind::Conv2D ? k * k : k * k * k;
            fan_in = kd * static_cast<double>(cin);
            fan_out = kd * static_cast<double>(info.spec.channels);
            bias_count = info.spec.channels;
        }
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        for (std::size_t i = 0; i < info.param_count - bias_count; ++i) {
            weights_[info.param_offset + i] = rng.uniform(-bound, bound);
        }
        // Biases start at zero.
    }
}

const LayerSpec& Network::layer_spec(std::size_t i) const {
    if (i >= layers_.size()) raise(ErrorCode::InvalidLayer, "layer index out of range");
    return layers_[i].spec;
}

const std::vector<std::size_t>& Network::layer_output_shape(std::size_t i) const {
    if (i >= layers_.size()) raise(ErrorCode::InvalidLayer, "layer index out of range");
    return layers_[i].out_shape;
}

void Network::set_weights(std::vector<double> weights) {
    if (weights.size() != weights_.size()) {
        raise(ErrorCode::ShapeMismatch, "weight vector length does not match parameter count");
    }
    weights_ = std::move(weights);
}

std::vector<std::pair<std::size_t, std::size_t>> Network::bias_spans() const {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (const auto& info : layers_) {
        if (info.param_count == 0) continue;
        std::size_t bias_count = 0;
        if (info.spec.kind == LayerKind::Dense) bias_count = info.spec.units;
        else bias_count = info.spec.channels;
        spans.emplace_back(info.param_offset + info.param_count - bias_count, bias_count);
    }
    return spans;
}

int Network::last_conv_layer() const {
    for (std::size_t i = layers_.size(); i > 0; --i) {
        const auto kind = layers_[i - 1].spec.kind;
        if (kind == LayerKind::Conv2D || kind == LayerKind::Conv3D) {
            return static_cast<int>(i - 1);
        }
    }
    return -1;
}

Tensor Network::forward_layer(std::size_t li, const Tensor& in) const {
    const LayerInfo& info = layers_[li];
    const double* w = weights_.data() + info.param_offset;
    switch (info.spec.kind) {
    case LayerKind::Dense: {
        const std::size_t n = info.in_shape[0];
        const std::size_t m = info.spec.units;
        const double* bias = w + m * n;
        Tensor out({m});
        for (std::size_t j = 0; j < m; ++j) {
            double acc = bias[j];
            const double* row = w + j * n;
            for (std::size_t i = 0; i < n; ++i) acc += row[i] * in[i];
            out[j] = acc;
        }
        return out;
    }
    case LayerKind::Conv2D: {
        const std::size_t hi = info.in_shape[1], ci = info.in_shape[2];
        const std::size_t wo = info.out_shape[0], ho = info.out_shape[1];
        const std::size_t kk = info.spec.kernel, s = info.spec.stride, kc = info.spec.channels;
        const double* bias = w + kc * kk * kk * ci;
        Tensor out(info.out_shape);
        for (std::size_t x = 0; x < wo; ++x) {
            for (std::size_t y = 0; y < ho; ++y) {
                for (std::size_t k = 0; k < kc; ++k) {
                    double acc = bias[k];
                    const double* wk = w + ((k * kk) * kk) * ci;
                    for (std::size_t i = 0; i < kk; ++i) {
                        for (std::size_t j = 0; j < kk; ++j) {
                            const double* in_px = in.data() + ((x * s + i) * hi + (y * s + j)) * ci;
                            const double* w_px = wk + (i * kk + j) * ci;
                            for (std::size_t c = 0; c < ci; ++c) acc += w_px[c] * in_px[c];
                        }
                    }
                    out[(x * ho + y) * kc + k] = acc;
                }
            }
        }
        return out;
    }
    case LayerKind::Conv3D: {
        const std::size_t yi = info.in_shape[1], zi = info.in_shape[2];
        const std::size_t ci = info.in_shape.size() == 4 ? info.in_shape[3] : 1;
        const std::size_t xo = info.out_shape[0], yo = info.out_shape[1], zo = info.out_shape[2];
        const std::size_t kk = info.spec.kernel, s = info.spec.stride, kc = info.spec.channels;
        const double* bias = w + kc * kk * kk * kk * ci;
        Tensor out(info.out_shape);
        for (std::size_t x = 0; x < xo; ++x) {
            for (std::size_t y = 0; y < yo; ++y) {
                for (std::size_t z = 0; z < zo; ++z) {
                    for (std::size_t k = 0; k < kc; ++k) {
                        double acc = bias[k];
                        const double* wk = w + k * kk * kk * kk * ci;
                        for (std::size_t i = 0; i < kk; ++i) {
                            for (std::size_t j = 0; j < kk; ++j) {
                                for (std::size_t l = 0; l < kk; ++l) {
                                    const double* in_px =
                                        in.data() +
                                        (((x * s + i) * yi + (y * s + j)) * zi + (z * s + l)) * ci;
                                    const double* w_px = wk + ((i * kk + j) * kk + l) * ci;
                                    for (std::size_t c = 0; c < ci; ++c) acc += w_px[c] * in_px[c];
                                }
                            }
                        }
                        out[((x * yo + y) * zo + z) * kc + k] = acc;
                    }
                }
            }
        }
        return out;
    }
    case LayerKind::ReLU: {
        Tensor out = in;
        for (auto& v : out.values()) v = std::max(v, 0.0);
        return out;
    }
    case LayerKind::GlobalAvgPool: {
        const std::size_t kc = info.out_shape[0];
        const std::size_t spatial = shape_size(info.in_shape) / kc;
        Tensor out({kc});
        for (std::size_t i = 0; i < spatial; ++i) {
            for (std::size_t k = 0; k < kc; ++k) out[k] += in[i * kc + k];
        }
        for (auto& v : out.values()) v /= static_cast<double>(spatial);
        return out;
    }
    case LayerKind::Flatten:
        return in.reshaped(info.out_shape);
    }
    raise(ErrorCode::Internal, "bad layer kind");
}

Tensor Network::backward_layer(std::size_t li, const Tensor& in, const Tensor& out,
                               const Tensor& dout, std::vector<double>* param_grad) const {
    const LayerInfo& info = layers_[li];
    const double* w = weights_.data() + info.param_offset;
    double* pg = param_grad ? param_grad->data() + info.param_offset : nullptr;
    switch (info.spec.kind) {
    case LayerKind::Dense: {
        const std::size_t n = info.in_shape[0];
        const std::size_t m = info.spec.units;
        Tensor din(info.in_shape);
        for (std::size_t j = 0; j < m; ++j) {
            const double g = dout[j];
            const double* row = w + j * n;
            for (std::size_t i = 0; i < n; ++i) din[i] += g * row[i];
            if (pg) {
                double* prow = pg + j * n;
                for (std::size_t i = 0; i < n; ++i) prow[i] += g * in[i];
                pg[m * n + j] += g;
            }
        }
        return din;
    }
    case LayerKind::Conv2D: {
        const std::size_t hi = info.in_shape[1], ci = info.in_shape[2];
        const std::size_t wo = info.out_shape[0], ho = info.out_shape[1];
        const std::size_t kk = info.spec.kernel, s = info.spec.stride, kc = info.spec.channels;
        Tensor din(info.in_shape);
        for (std::size_t x = 0; x < wo; ++x) {
            for (std::size_t y = 0; y < ho; ++y) {
                for (std::size_t k = 0; k < kc; ++k) {
                    const double g = dout[(x * ho + y) * kc + k];
                    if (g == 0.0) continue;
                    const double* wk = w + k * kk * kk * ci;
                    double* pk = pg ? pg + k * kk * kk * ci : nullptr;
                    for (std::size_t i = 0; i < kk; ++i) {
                        for (std::size_t j = 0; j < kk; ++j) {
                            const std::size_t base = ((x * s + i) * hi + (y * s + j)) * ci;
                            const std::size_t wbase = (i * kk + j) * ci;
                            for (std::size_t c = 0; c < ci; ++c) {
                                din[base + c] += g * wk[wbase + c];
                                if (pk) pk[wbase + c] += g * in[base + c];
                            }
                        }
                    }
                    if (pg) pg[kc * kk * kk * ci + k] += g;
                }
            }
        }
        return din;
    }
    case LayerKind::Conv3D: {
        const std::size_t yi = info.in_shape[1], zi = info.in_shape[2];
        const std::size_t ci = info.in_shape.size() == 4 ? info.in_shape[3] : 1;
        const std::size_t yo = info.out_shape[1], zo = info.out_shape[2];
        const std::size_t xo = info.out_shape[0];
        const std::size_t kk = info.spec.kernel, s = info.spec.stride, kc = info.spec.channels;
        Tensor din(info.in_shape);
        for (std::size_t x = 0; x < xo; ++x) {
            for (std::size_t y = 0; y < yo; ++y) {
                for (std::size_t z = 0; z < zo; ++z) {
                    for (std::size_t k = 0; k < kc; ++k) {
                        const double g = dout[((x * yo + y) * zo + z) * kc + k];
                        if (g == 0.0) continue;
                        const double* wk = w + k * kk * kk * kk * ci;
                        double* pk = pg ? pg + k * kk * kk * kk * ci : nullptr;
                        for (std::size_t i = 0; i < kk; ++i) {
                            for (std::size_t j = 0; j < kk; ++j) {
                                for (std::size_t l = 0; l < kk; ++l) {
                                    const std::size_t base =
                                        (((x * s + i) * yi + (y * s + j)) * zi + (z * s + l)) * ci;
                                    const std::size_t wbase = ((i * kk + j) * kk + l) * ci;
                                    for (std::size_t c = 0; c < ci; ++c) {
                                        din[base + c] += g * wk[wbase + c];
                                        if (pk) pk[wbase + c] += g * in[base + c];
                                    }
                                }
                            }
                        }
                        if (pg) pg[kc * kk * kk * kk * ci + k] += g;
                    }
                }
            }
        }
        return din;
    }
    case LayerKind::ReLU: {
        Tensor din = dout;
        for (std::size_t i = 0; i < din.size(); ++i) {
            if (out[i] <= 0.0) din.values()[i] = 0.0;
        }
        return din.reshaped(info.in_shape);
    }
    case LayerKind::GlobalAvgPool: {
        const std::size_t kc = info.out_shape[0];
        const std::size_t spatial = shape_size(info.in_shape) / kc;
        Tensor din(info.in_shape);
        const double inv = 1.0 / static_cast<double>(spatial);
        for (std::size_t i = 0; i < spatial; ++i) {
            for (std::size_t k = 0; k < kc; ++k) din[i * kc + k] = dout[k] * inv;
        }
        return din;
    }
    case LayerKind::Flatten:
        return dout.reshaped(info.in_shape);
    }
    raise(ErrorCode::Internal, "bad layer kind");
}

std::vector<Tensor> Network::forward_all(const Tensor& x) const {
    if (x.shape() != input_shape_) {
        raise(ErrorCode::ShapeMismatch, "input shape does not match network");
    }
    std::vector<Tensor> acts;
    acts.reserve(layers_.size() + 1);
    acts.push_back(x);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        acts.push_back(forward_layer(i, acts.back()));
    }
    return acts;
}

Tensor Network::backward(const std::vector<Tensor>& acts, const Tensor& dlogits,
                         std::vector<double>* param_grad) const {
    Tensor grad = dlogits;
    for (std::size_t i = layers_.size(); i > 0; --i) {
        grad = backward_layer(i - 1, acts[i - 1], acts[i], grad, param_grad);
    }
    return grad;
}

Tensor Network::predict(const std::vector<Tensor>& batch) const {
    Tensor logits({batch.size(), num_classes_});
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto acts = forward_all(batch[b]);
        const Tensor& out = acts.back();
        for (std::size_t c = 0; c < num_classes_; ++c) logits[b * num_classes_ + c] = out[c];
    }
    return logits;
}

std::vector<Tensor> Network::gradient(const std::vector<Tensor>& batch,
                                      std::size_t target_class) const {
    if (target_class >= num_classes_) {
        raise(ErrorCode::InvalidArgument, "target class out of range");
    }
    std::vector<Tensor> grads;
    grads.reserve(batch.size());
    Tensor seed({num_classes_});
    seed[target_class] = 1.0;
    for (const auto& x : batch) {
        const auto acts = forward_all(x);
        grads.push_back(backward(acts, seed, nullptr));
    }
    return grads;
}

Tensor Network::representation(const std::vector<Tensor>& batch) const {
    // Penultimate activations: the input to the final layer, flattened.
    const std::size_t width = shape_size(layers_.back().in_shape);
    Tensor rep({batch.size(), width});
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto acts = forward_all(batch[b]);
        const Tensor& h = acts[layers_.size() - 1];
        for (std::size_t i = 0; i < width; ++i) rep[b * width + i] = h[i];
    }
    return rep;
}

Tensor Network::activations(const Tensor& x, std::size_t layer_index) const {
    if (layer_index >= layers_.size()) {
        raise(ErrorCode::InvalidLayer, "layer index out of range");
    }
    auto acts = forward_all(x);
    return acts[layer_index + 1];
}

std::pair<Tensor, Tensor> Network::layer_activation_gradient(
    const Tensor& x, std::size_t layer_index, std::size_t target_class) const {
    if (layer_index >= layers_.size()) {
        raise(ErrorCode::InvalidLayer, "layer index out of range");
    }
    if (target_class >= num_classes_) {
        raise(ErrorCode::InvalidArgument, "target class out of range");
    }
    const auto acts = forward_all(x);
    Tensor grad({num_classes_});
    grad[target_class] = 1.0;
    for (std::size_t i = layers_.size(); i > layer_index + 1; --i) {
        grad = backward_layer(i - 1, acts[i - 1], acts[i], grad, nullptr);
    }
    return {acts[layer_index + 1], grad};
}

TrainResult train(Network& net, const std::vector<InputSample>& samples,
                  const TrainOptions& options) {
    if (samples.empty()) raise(ErrorCode::InvalidArgument, "empty training set");

    Rng rng(Rng::mix(options.seed, 0x7472616eu));
    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<double> weights = net.weights();
    std::vector<double> grad(weights.size(), 0.0);
    const std::size_t classes = net.num_classes();
    double last_loss = 0.0;

    const auto bias_spans = net.bias_spans();
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        rng.shuffle(order.begin(), order.end());
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
            const std::size_t end = std::min(start + options.batch_size, order.size());
            std::fill(grad.begin(), grad.end(), 0.0);
            net.set_weights(weights);
            for (std::size_t i = start; i < end; ++i) {
                const InputSample& s = samples[order[i]];
                const auto acts = net.forward_all(s.data);
                const auto probs = softmax(acts.back().values());
                epoch_loss += -std::log(std::max(probs[s.label], 1e-300));
                Tensor dlogits({classes});
                for (std::size_t c = 0; c < classes; ++c) {
                    dlogits[c] = probs[c] - (c == s.label ? 1.0 : 0.0);
                }
                net.backward(acts, dlogits, &grad);
            }
            if (!options.train_biases) {
                for (const auto& [off, count] : bias_spans) {
                    std::fill(grad.begin() + static_cast<std::ptrdiff_t>(off),
                              grad.begin() + static_cast<std::ptrdiff_t>(off + count), 0.0);
                }
            }
            const double scale = options.lr / static_cast<double>(end - start);
            for (std::size_t k = 0; k < weights.size(); ++k) weights[k] -= scale * grad[k];
        }
        last_loss = epoch_loss / static_cast<double>(samples.size());
        if (!std::isfinite(last_loss)) {
            raise(ErrorCode::Divergence, "training loss is not finite");
        }
    }
    net.set_weights(weights);

    std::size_t correct = 0;
    for (const auto& s : samples) {
        if (predict_class(net, s.data) == s.label) ++correct;
    }
    return {last_loss, static_cast<double>(correct) / static_cast<double>(samples.size())};
}

} // namespace salev
