#ifndef SALEV_DATA_HPP
#define SALEV_DATA_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "salev/tensor.hpp"

namespace salev {

enum class Modality { Image, Volume, PointCloud };

const char* modality_name(Modality m);
Modality parse_modality(const std::string& name);

// Image shape is (W, H, C) with C in {1, 3}; volume is (X, Y, Z);
// point cloud is (N, 3). Raises ShapeMismatch otherwise.
void validate_modality_shape(Modality modality, const std::vector<std::size_t>& shape);

struct InputSample {
    Modality modality = Modality::Image;
    Tensor data;
    std::size_t label = 0;
    std::string id;
};

// Non-negative attribution tensor. Images/volumes mirror the input shape,
// point clouds carry one value per point, shape (N,).
struct SaliencyMap {
    Tensor values;
    std::string method_id;
};

// Clamps negatives to zero, then min-max normalizes over the whole
// observation. Constant maps collapse to all zeros.
Tensor postprocess_saliency(const Tensor& raw);
SaliencyMap postprocess_saliency(const Tensor& raw, std::string method_id);

void validate_pair(const InputSample& sample, const SaliencyMap& map);

// Pluggable prediction interface used by every metric. Implementations must
// be deterministic for fixed inputs.
class ModelOracle {
public:
    virtual ~ModelOracle() = default;

    virtual std::size_t num_classes() const = 0;

    // Logits, shape (batch, num_classes).
    virtual Tensor predict(const std::vector<Tensor>& batch) const = 0;

    virtual bool has_gradient() const { return false; }
    // d logit_target / d input, one tensor per batch entry.
    virtual std::vector<Tensor> gradient(const std::vector<Tensor>& batch,
                                         std::size_t target_class) const;

    virtual bool has_representation() const { return false; }
    // Penultimate-layer activations, shape (batch, width).
    virtual Tensor representation(const std::vector<Tensor>& batch) const;
};

// Optional capability for models that expose internal convolutional
// activations (required by GradCAM).
class ActivationOracle {
public:
    virtual ~ActivationOracle() = default;
    virtual int default_conv_layer() const = 0;
    // (post-activation tensor of the layer, d logit_target / d activation).
    virtual std::pair<Tensor, Tensor> layer_activation_gradient(
        const Tensor& x, std::size_t layer_index, std::size_t target_class) const = 0;
};

std::vector<double> predict_logits(const ModelOracle& model, const Tensor& x);
std::size_t predict_class(const ModelOracle& model, const Tensor& x);
double predict_logit(const ModelOracle& model, const Tensor& x, std::size_t target_class);
double predict_probability(const ModelOracle& model, const Tensor& x, std::size_t target_class);
std::vector<double> softmax(const std::vector<double>& logits);

enum class Orientation { HigherIsBetter, LowerIsBetter };

enum class Criterion { Faithfulness, Robustness, Complexity };

const char* criterion_name(Criterion c);
Criterion parse_criterion(const std::string& name);

// The 20-metric suite partitioned 11/6/3.
const std::vector<std::string>& criterion_metrics(Criterion c);
const std::vector<std::string>& all_metric_ids();
Criterion metric_criterion(const std::string& metric_id);
Orientation metric_orientation(const std::string& metric_id);
bool is_known_metric(const std::string& metric_id);

struct ScoreAxes {
    std::vector<std::string> datasets;
    std::vector<std::string> architectures;
    std::vector<std::string> methods;
    std::vector<std::string> metrics;
    std::size_t n_observations = 0;
};

// Evaluation scores indexed by (dataset, architecture, method, metric,
// observation). Failed cells are explicitly marked missing, never zero.
class ScoreTensor {
public:
    ScoreTensor() = default;
    explicit ScoreTensor(ScoreAxes axes);

    const ScoreAxes& axes() const { return axes_; }
    std::size_t size() const { return values_.size(); }

    std::size_t flat_index(std::size_t d, std::size_t a, std::size_t f, std::size_t e,
                           std::size_t o) const;

    void set(std::size_t d, std::size_t a, std::size_t f, std::size_t e, std::size_t o,
             double value);
    void set_missing(std::size_t d, std::size_t a, std::size_t f, std::size_t e, std::size_t o);

    double at(std::size_t d, std::size_t a, std::size_t f, std::size_t e, std::size_t o) const;
    bool present(std::size_t d, std::size_t a, std::size_t f, std::size_t e,
                 std::size_t o) const;

    const std::vector<double>& raw_values() const { return values_; }
    const std::vector<std::uint8_t>& raw_mask() const { return mask_; }
    std::vector<double>& raw_values() { return values_; }
    std::vector<std::uint8_t>& raw_mask() { return mask_; }

private:
    ScoreAxes axes_;
    std::vector<double> values_;
    std::vector<std::uint8_t> mask_;
};

// Z-standardizes scores within each (metric, dataset) group across
// architectures, methods and observations. Zero-SD groups map to all zeros.
ScoreTensor standardize_scores(const ScoreTensor& tensor);

} // namespace salev

#endif
