#ifndef SALEV_NET_HPP
#define SALEV_NET_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "salev/data.hpp"
#include "salev/tensor.hpp"

namespace salev {

enum class LayerKind { Dense, Conv2D, Conv3D, ReLU, GlobalAvgPool, Flatten };

struct LayerSpec {
    LayerKind kind = LayerKind::Dense;
    std::size_t units = 0;    // Dense output width
    std::size_t channels = 0; // conv output channels
    std::size_t kernel = 0;   // square/cubic kernel edge
    std::size_t stride = 1;

    static LayerSpec dense(std::size_t units) { return {LayerKind::Dense, units, 0, 0, 1}; }
    static LayerSpec conv2d(std::size_t channels, std::size_t kernel, std::size_t stride) {
        return {LayerKind::Conv2D, 0, channels, kernel, stride};
    }
    static LayerSpec conv3d(std::size_t channels, std::size_t kernel, std::size_t stride) {
        return {LayerKind::Conv3D, 0, channels, kernel, stride};
    }
    static LayerSpec relu() { return {LayerKind::ReLU, 0, 0, 0, 1}; }
    static LayerSpec global_avg_pool() { return {LayerKind::GlobalAvgPool, 0, 0, 0, 1}; }
    static LayerSpec flatten() { return {LayerKind::Flatten, 0, 0, 0, 1}; }
};

// Minimal feed-forward network with reverse-mode autodiff. Forward is pure
// given (weights, input); all stochastic pieces live in initialization and
// training, both seeded. Activations use channel-last layout: conv outputs
// are (W', H', K) and (X', Y', Z', K).
class Network : public ModelOracle, public ActivationOracle {
public:
    Network(Modality modality, std::vector<std::size_t> input_shape,
            std::vector<LayerSpec> layers, std::uint64_t seed);

    // ModelOracle
    std::size_t num_classes() const override { return num_classes_; }
    Tensor predict(const std::vector<Tensor>& batch) const override;
    bool has_gradient() const override { return true; }
    std::vector<Tensor> gradient(const std::vector<Tensor>& batch,
                                 std::size_t target_class) const override;
    bool has_representation() const override { return true; }
    Tensor representation(const std::vector<Tensor>& batch) const override;

    Modality modality() const { return modality_; }
    const std::vector<std::size_t>& input_shape() const { return input_shape_; }
    std::size_t layer_count() const { return layers_.size(); }
    const LayerSpec& layer_spec(std::size_t i) const;
    const std::vector<std::size_t>& layer_output_shape(std::size_t i) const;

    // Post-activation tensor of one layer.
    Tensor activations(const Tensor& x, std::size_t layer_index) const;
    // ActivationOracle: (post-activation of the layer, d logit_target / d it).
    std::pair<Tensor, Tensor> layer_activation_gradient(
        const Tensor& x, std::size_t layer_index, std::size_t target_class) const override;
    int default_conv_layer() const override { return last_conv_layer(); }
    int last_conv_layer() const;

    const std::vector<double>& weights() const { return weights_; }
    void set_weights(std::vector<double> weights);
    std::size_t parameter_count() const { return weights_.size(); }
    // (offset, count) of each layer's bias block in the flat weight vector.
    std::vector<std::pair<std::size_t, std::size_t>> bias_spans() const;

    // Internal hooks used by training.
    std::vector<Tensor> forward_all(const Tensor& x) const;
    // Backpropagates d loss / d logits; accumulates parameter gradients when
    // param_grad != nullptr, returns d loss / d input.
    Tensor backward(const std::vector<Tensor>& acts, const Tensor& dlogits,
                    std::vector<double>* param_grad) const;

private:
    struct LayerInfo {
        LayerSpec spec;
        std::vector<std::size_t> in_shape;
        std::vector<std::size_t> out_shape;
        std::size_t param_offset = 0;
        std::size_t param_count = 0;
    };

    Tensor forward_layer(std::size_t i, const Tensor& in) const;
    Tensor backward_layer(std::size_t i, const Tensor& in, const Tensor& out, const Tensor& dout,
                          std::vector<double>* param_grad) const;

    Modality modality_;
    std::vector<std::size_t> input_shape_;
    std::vector<LayerInfo> layers_;
    std::vector<double> weights_;
    std::size_t num_classes_ = 0;
};

struct TrainOptions {
    std::size_t epochs = 200;
    double lr = 0.05;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    // Biases stay frozen at zero by default: bias-free ReLU nets are
    // positively homogeneous, so straight-line gradient paths from a zero
    // baseline stay smooth and path-integral attributions converge fast.
    bool train_biases = false;
};

struct TrainResult {
    double final_loss = 0.0;
    double train_accuracy = 0.0;
};

// Plain seeded SGD with softmax cross-entropy. Raises Divergence on NaN loss.
TrainResult train(Network& net, const std::vector<InputSample>& samples,
                  const TrainOptions& options);

} // namespace salev

#endif
