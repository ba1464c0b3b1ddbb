#include "salev/data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "salev/errors.hpp"

namespace salev {

const char* modality_name(Modality m) {
    switch (m) {
    case Modality::Image: return "image";
    case Modality::Volume: return "volume";
    case Modality::PointCloud: return "point_cloud";
    }
    return "unknown";
}

Modality parse_modality(const std::string& name) {
    if (name == "image") return Modality::Image;
    if (name == "volume") return Modality::Volume;
    if (name == "point_cloud" || name == "pointcloud") return Modality::PointCloud;
    raise(ErrorCode::InvalidArgument, "unknown modality '" + name + "'");
}

void validate_modality_shape(Modality modality, const std::vector<std::size_t>& shape) {
    switch (modality) {
    case Modality::Image:
        if (shape.size() != 3 || (shape[2] != 1 && shape[2] != 3)) {
            raise(ErrorCode::ShapeMismatch, "image shape must be (W, H, C) with C in {1, 3}");
        }
        break;
    case Modality::Volume:
        if (shape.size() != 3) {
            raise(ErrorCode::ShapeMismatch, "volume shape must be (X, Y, Z)");
        }
        break;
    case Modality::PointCloud:
        if (shape.size() != 2 || shape[1] != 3) {
            raise(ErrorCode::ShapeMismatch, "point cloud shape must be (N, 3)");
        }
        break;
    }
    if (shape_size(shape) == 0) {
        raise(ErrorCode::ShapeMismatch, "empty tensor");
    }
}

Tensor postprocess_saliency(const Tensor& raw) {
    if (!raw.all_finite()) {
        raise(ErrorCode::NonFiniteInput, "saliency map contains NaN or Inf");
    }
    Tensor out = raw;
    for (auto& v : out.values()) v = std::max(v, 0.0);
    const double lo = out.min();
    const double hi = out.max();
    if (hi - lo <= 0.0) {
        std::fill(out.values().begin(), out.values().end(), 0.0);
        return out;
    }
    const double range = hi - lo;
    for (auto& v : out.values()) v = (v - lo) / range;
    return out;
}

SaliencyMap postprocess_saliency(const Tensor& raw, std::string method_id) {
    return SaliencyMap{postprocess_saliency(raw), std::move(method_id)};
}

void validate_pair(const InputSample& sample, const SaliencyMap& map) {
    validate_modality_shape(sample.modality, sample.data.shape());
    if (sample.modality == Modality::PointCloud) {
        if (map.values.rank() != 1 || map.values.size() != sample.data.shape()[0]) {
            raise(ErrorCode::ShapeMismatch,
                  "point cloud map must have one value per point");
        }
        return;
    }
    if (!map.values.same_shape(sample.data)) {
        raise(ErrorCode::ShapeMismatch, "saliency map shape differs from input shape");
    }
}

std::vector<Tensor> ModelOracle::gradient(const std::vector<Tensor>&, std::size_t) const {
    raise(ErrorCode::NoGradientCapability, "model does not expose input gradients");
}

Tensor ModelOracle::representation(const std::vector<Tensor>&) const {
    raise(ErrorCode::NoRepresentationCapability, "model does not expose representations");
}

std::vector<double> predict_logits(const ModelOracle& model, const Tensor& x) {
    Tensor logits = model.predict({x});
    return logits.values();
}

std::size_t predict_class(const ModelOracle& model, const Tensor& x) {
    const auto logits = predict_logits(model, x);
    return static_cast<std::size_t>(
        std::max_element(logits.begin(), logits.end()) - logits.begin());
}

double predict_logit(const ModelOracle& model, const Tensor& x, std::size_t target_class) {
    return predict_logits(model, x)[target_class];
}

std::vector<double> softmax(const std::vector<double>& logits) {
    std::vector<double> p(logits.size());
    const double m = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        z += p[i];
    }
    for (auto& v : p) v /= z;
    return p;
}

double predict_probability(const ModelOracle& model, const Tensor& x, std::size_t target_class) {
    return softmax(predict_logits(model, x))[target_class];
}

const char* criterion_name(Criterion c) {
    switch (c) {
    case Criterion::Faithfulness: return "faithfulness";
    case Criterion::Robustness: return "robustness";
    case Criterion::Complexity: return "complexity";
    }
    return "unknown";
}

Criterion parse_criterion(const std::string& name) {
    if (name == "faithfulness") return Criterion::Faithfulness;
    if (name == "robustness") return Criterion::Robustness;
    if (name == "complexity") return Criterion::Complexity;
    raise(ErrorCode::InvalidArgument, "unknown criterion '" + name + "'");
}

namespace {

const std::vector<std::string> kFaithfulness = {"FC",  "FE",   "MC",  "PF",  "RP", "INS",
                                                "DEL", "IROF", "ROAD", "SUF", "INF"};
const std::vector<std::string> kRobustness = {"LLE", "MS", "CON", "RIS", "ROS", "RRS"};
const std::vector<std::string> kComplexity = {"SP", "CP", "ECP"};

const std::unordered_map<std::string, Orientation>& orientation_table() {
    static const std::unordered_map<std::string, Orientation> table = {
        {"FC", Orientation::HigherIsBetter},  {"FE", Orientation::HigherIsBetter},
        {"MC", Orientation::HigherIsBetter},  {"PF", Orientation::LowerIsBetter},
        {"RP", Orientation::LowerIsBetter},   {"INS", Orientation::HigherIsBetter},
        {"DEL", Orientation::LowerIsBetter},  {"IROF", Orientation::HigherIsBetter},
        {"ROAD", Orientation::LowerIsBetter}, {"SUF", Orientation::HigherIsBetter},
        {"INF", Orientation::LowerIsBetter},  {"LLE", Orientation::LowerIsBetter},
        {"MS", Orientation::LowerIsBetter},   {"CON", Orientation::HigherIsBetter},
        {"RIS", Orientation::LowerIsBetter},  {"ROS", Orientation::LowerIsBetter},
        {"RRS", Orientation::LowerIsBetter},  {"SP", Orientation::HigherIsBetter},
        {"CP", Orientation::LowerIsBetter},   {"ECP", Orientation::LowerIsBetter},
    };
    return table;
}

} // namespace

const std::vector<std::string>& criterion_metrics(Criterion c) {
    switch (c) {
    case Criterion::Faithfulness: return kFaithfulness;
    case Criterion::Robustness: return kRobustness;
    case Criterion::Complexity: return kComplexity;
    }
    raise(ErrorCode::Internal, "bad criterion");
}

const std::vector<std::string>& all_metric_ids() {
    static const std::vector<std::string> all = [] {
        std::vector<std::string> ids = kFaithfulness;
        ids.insert(ids.end(), kRobustness.begin(), kRobustness.end());
        ids.insert(ids.end(), kComplexity.begin(), kComplexity.end());
        return ids;
    }();
    return all;
}

Criterion metric_criterion(const std::string& metric_id) {
    for (const auto& id : kFaithfulness)
        if (id == metric_id) return Criterion::Faithfulness;
    for (const auto& id : kRobustness)
        if (id == metric_id) return Criterion::Robustness;
    for (const auto& id : kComplexity)
        if (id == metric_id) return Criterion::Complexity;
    raise(ErrorCode::InvalidArgument, "unknown metric '" + metric_id + "'");
}

Orientation metric_orientation(const std::string& metric_id) {
    auto it = orientation_table().find(metric_id);
    if (it == orientation_table().end()) {
        raise(ErrorCode::InvalidArgument, "unknown metric '" + metric_id + "'");
    }
    return it->second;
}

bool is_known_metric(const std::string& metric_id) {
    return orientation_table().count(metric_id) > 0;
}

ScoreTensor::ScoreTensor(ScoreAxes axes) : axes_(std::move(axes)) {
    const std::size_t n = axes_.datasets.size() * axes_.architectures.size() *
                          axes_.methods.size() * axes_.metrics.size() * axes_.n_observations;
    values_.assign(n, std::numeric_limits<double>::quiet_NaN());
    mask_.assign(n, 0);
}

std::size_t ScoreTensor::flat_index(std::size_t d, std::size_t a, std::size_t f, std::size_t e,
                                    std::size_t o) const {
    return (((d * axes_.architectures.size() + a) * axes_.methods.size() + f) *
                axes_.metrics.size() +
            e) *
               axes_.n_observations +
           o;
}

void ScoreTensor::set(std::size_t d, std::size_t a, std::size_t f, std::size_t e, std::size_t o,
                      double value) {
    if (!std::isfinite(value)) {
        raise(ErrorCode::NonFiniteInput, "score must be finite; mark missing instead");
    }
    const std::size_t i = flat_index(d, a, f, e, o);
    values_[i] = value;
    mask_[i] = 1;
}

void ScoreTensor::set_missing(std::size_t d, std::size_t a, std::size_t f, std::size_t e,
                              std::size_t o) {
    const std::size_t i = flat_index(d, a, f, e, o);
    values_[i] = std::numeric_limits<double>::quiet_NaN();
    mask_[i] = 0;
}

double ScoreTensor::at(std::size_t d, std::size_t a, std::size_t f, std::size_t e,
                       std::size_t o) const {
    return values_[flat_index(d, a, f, e, o)];
}

bool ScoreTensor::present(std::size_t d, std::size_t a, std::size_t f, std::size_t e,
                          std::size_t o) const {
    return mask_[flat_index(d, a, f, e, o)] != 0;
}

ScoreTensor standardize_scores(const ScoreTensor& tensor) {
    const auto& ax = tensor.axes();
    ScoreTensor out = tensor;
    for (std::size_t e = 0; e < ax.metrics.size(); ++e) {
        for (std::size_t d = 0; d < ax.datasets.size(); ++d) {
            // Group statistics over (architecture, method, observation).
            double sum = 0.0, sum2 = 0.0;
            std::size_t count = 0;
            for (std::size_t a = 0; a < ax.architectures.size(); ++a) {
                for (std::size_t f = 0; f < ax.methods.size(); ++f) {
                    for (std::size_t o = 0; o < ax.n_observations; ++o) {
                        if (!tensor.present(d, a, f, e, o)) continue;
                        const double v = tensor.at(d, a, f, e, o);
                        sum += v;
                        sum2 += v * v;
                        ++count;
                    }
                }
            }
            if (count == 0) {
                raise(ErrorCode::EmptyGroup,
                      "no scores for metric '" + ax.metrics[e] + "' on dataset '" +
                          ax.datasets[d] + "'");
            }
            const double mean = sum / static_cast<double>(count);
            const double var = std::max(sum2 / static_cast<double>(count) - mean * mean, 0.0);
            const double sd = std::sqrt(var);
            for (std::size_t a = 0; a < ax.architectures.size(); ++a) {
                for (std::size_t f = 0; f < ax.methods.size(); ++f) {
                    for (std::size_t o = 0; o < ax.n_observations; ++o) {
                        if (!tensor.present(d, a, f, e, o)) continue;
                        const double v = tensor.at(d, a, f, e, o);
                        out.set(d, a, f, e, o, sd > 0.0 ? (v - mean) / sd : 0.0);
                    }
                }
            }
        }
    }
    return out;
}

} // namespace salev
