#include <cmath>

#include "salev/errors.hpp"
#include "salev/metrics.hpp"
#include "salev/perturb.hpp"
#include "salev/rng.hpp"
#include "salev/stats.hpp"

namespace salev {

namespace {

double l2_norm(const Tensor& t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) acc += t[i] * t[i];
    return std::sqrt(acc);
}

double l2_diff(const Tensor& a, const Tensor& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

// || (a - b) / (a + eps) ||_2 with an elementwise guard on the denominator.
double relative_change_norm(const Tensor& a, const Tensor& b, double eps) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double denom = a[i] + eps;
        if (std::abs(denom) < eps) denom = eps;
        const double d = (a[i] - b[i]) / denom;
        acc += d * d;
    }
    return std::sqrt(acc);
}

} // namespace

MetricScore local_lipschitz_estimate(const ExplainFn& explain, const InputSample& x,
                                     const MetricConfig& cfg) {
    if (cfg.n_samples < 8) raise(ErrorCode::InvalidArgument, "need n_samples >= 8");
    if (!(cfg.radius > 0.0)) raise(ErrorCode::InvalidArgument, "radius must be positive");

    Rng rng(Rng::mix(cfg.seed, 0x6c6c6500u));
    const Tensor base_map = explain(x.data);
    double worst = 0.0;
    for (std::size_t s = 0; s < cfg.n_samples; ++s) {
        Tensor direction(x.data.shape());
        double norm = 0.0;
        int tries = 0;
        do {
            for (auto& v : direction.values()) v = rng.normal();
            norm = l2_norm(direction);
        } while (norm == 0.0 && ++tries < 16);
        if (norm == 0.0) raise(ErrorCode::DegenerateGroups, "could not sample a direction");

        double scale = cfg.radius * rng.uniform();
        Tensor probe = x.data;
        for (std::size_t i = 0; i < probe.size(); ++i) {
            probe.values()[i] += direction[i] * scale / norm;
        }
        const double dx = l2_diff(probe, x.data);
        if (dx == 0.0) continue; // resampled next draw
        worst = std::max(worst, l2_diff(explain(probe), base_map) / dx);
    }
    return {worst, false};
}

MetricScore max_sensitivity(const ExplainFn& explain, const InputSample& x,
                            const MetricConfig& cfg) {
    if (cfg.n_samples < 8) raise(ErrorCode::InvalidArgument, "need n_samples >= 8");
    Rng rng(Rng::mix(cfg.seed, 0x6d730000u));
    const Tensor base_map = explain(x.data);
    double worst = 0.0;
    for (std::size_t s = 0; s < cfg.n_samples; ++s) {
        Tensor probe = x.data;
        for (auto& v : probe.values()) v += rng.uniform(-cfg.radius, cfg.radius);
        worst = std::max(worst, l2_diff(explain(probe), base_map));
    }
    return {worst, false};
}

MetricScore continuity(const ExplainFn& explain, const ModelOracle& model,
                       const InputSample& x, std::size_t target, const MetricConfig& cfg) {
    const auto frames = x_axis_traversal(x.data, x.modality, static_cast<int>(cfg.n_steps));
    std::vector<double> attribution_mass, logits;
    attribution_mass.reserve(frames.size());
    logits.reserve(frames.size());
    for (const auto& frame : frames) {
        attribution_mass.push_back(explain(frame).sum());
        logits.push_back(predict_logit(model, frame, target));
    }
    try {
        return {pearson(attribution_mass, logits), false};
    } catch (const Error&) {
        return {0.0, true};
    }
}

namespace {

enum class StabilityKind { Input, Output, Representation };

MetricScore relative_stability(const ExplainFn& explain, const ModelOracle* model,
                               const InputSample& x, const MetricConfig& cfg,
                               StabilityKind kind) {
    if (cfg.n_samples < 8) raise(ErrorCode::InvalidArgument, "need n_samples >= 8");
    Rng rng(Rng::mix(cfg.seed, 0x72730000u + static_cast<std::uint64_t>(kind)));

    const Tensor base_map = explain(x.data);
    Tensor base_aux;
    if (kind == StabilityKind::Output) {
        base_aux = model->predict({x.data});
    } else if (kind == StabilityKind::Representation) {
        if (!model->has_representation()) {
            raise(ErrorCode::NoRepresentationCapability,
                  "relative representation stability needs representations");
        }
        base_aux = model->representation({x.data});
    }

    double worst = 0.0;
    for (std::size_t s = 0; s < cfg.n_samples; ++s) {
        Tensor probe = x.data;
        if (kind == StabilityKind::Representation) {
            // Uniform U(0, 0.05) noise; Gaussian noise can blow up deep
            // representation ratios.
            for (auto& v : probe.values()) v += rng.uniform(0.0, 0.05);
        } else {
            for (auto& v : probe.values()) v += rng.normal(0.0, cfg.noise_sd);
        }
        const Tensor probe_map = explain(probe);
        const double numerator = relative_change_norm(base_map, probe_map, cfg.eps_guard);

        double denominator = 0.0;
        switch (kind) {
        case StabilityKind::Input:
            denominator = relative_change_norm(x.data, probe, cfg.eps_guard);
            break;
        case StabilityKind::Output:
            denominator = l2_diff(base_aux, model->predict({probe}));
            break;
        case StabilityKind::Representation:
            denominator = relative_change_norm(base_aux, model->representation({probe}),
                                               cfg.eps_guard);
            break;
        }
        worst = std::max(worst, numerator / std::max(denominator, cfg.eps_min));
    }
    return {worst, false};
}

} // namespace

MetricScore relative_input_stability(const ExplainFn& explain, const InputSample& x,
                                     const MetricConfig& cfg) {
    return relative_stability(explain, nullptr, x, cfg, StabilityKind::Input);
}

MetricScore relative_output_stability(const ExplainFn& explain, const ModelOracle& model,
                                      const InputSample& x, const MetricConfig& cfg) {
    return relative_stability(explain, &model, x, cfg, StabilityKind::Output);
}

MetricScore relative_representation_stability(const ExplainFn& explain,
                                              const ModelOracle& model, const InputSample& x,
                                              const MetricConfig& cfg) {
    return relative_stability(explain, &model, x, cfg, StabilityKind::Representation);
}

} // namespace salev
