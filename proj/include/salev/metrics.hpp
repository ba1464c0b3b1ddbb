#ifndef SALEV_METRICS_HPP
#define SALEV_METRICS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "salev/data.hpp"
#include "salev/tensor.hpp"
#include "salev/xai.hpp"

namespace salev {

struct MetricConfig {
    std::string metric_id;

    // FC
    std::size_t subset_size = 16;
    std::size_t n_runs = 32;
    // FE / MC element sampling
    std::size_t n_feature_samples = 48;
    // curve metrics (PF, RP, INS, DEL, ROAD)
    double step_fraction = 0.1;
    std::size_t n_steps = 10;
    std::size_t kernel_size = 2; // RP
    int n_segments = 16;         // IROF
    double slic_compactness = -1.0; // < 0 -> 10 for images, 1 for volumes
    double baseline_value = 0.0;
    double blur_sigma = 2.0; // INS/DEL image baseline
    double noise_sd = 0.1;   // perturbation noise (INS/DEL 3d baseline, MC, INF, RIS/ROS)
    std::size_t n_samples = 24; // INF, MC, robustness sampling
    double radius = 0.1;        // LLE / MS ball radius
    std::size_t knn = 5;        // SUF neighbor count
    double epsilon = 0.1;       // ECP threshold
    double eps_guard = 1e-6;    // RIS/ROS/RRS elementwise denominator guard
    double eps_min = 1e-6;      // RIS/ROS/RRS outer clamp
    std::uint64_t seed = 0;
};

// Scores carry a degenerate flag instead of silently reporting 0 when a
// correlation collapses (constant model, constant map).
struct MetricScore {
    double value = 0.0;
    bool degenerate = false;
};

// Model response versus fraction-removed grid.
struct CurveResult {
    std::vector<double> xs;
    std::vector<double> ys;
};

// Trapezoidal area normalized by the x range.
double auc(const CurveResult& curve);
// 1 - AUC; callers normalize responses to [0, 1] first.
double aoc(const CurveResult& curve);

// --- faithfulness ---------------------------------------------------------

MetricScore faithfulness_correlation(const ModelOracle& model, const InputSample& x,
                                     const SaliencyMap& map, std::size_t target,
                                     const MetricConfig& cfg);
MetricScore faithfulness_estimate(const ModelOracle& model, const InputSample& x,
                                  const SaliencyMap& map, std::size_t target,
                                  const MetricConfig& cfg);
MetricScore monotonicity_correlation(const ModelOracle& model, const InputSample& x,
                                     const SaliencyMap& map, std::size_t target,
                                     const MetricConfig& cfg);

CurveResult pixel_flipping_curve(const ModelOracle& model, const InputSample& x,
                                 const SaliencyMap& map, std::size_t target,
                                 const MetricConfig& cfg);
MetricScore pixel_flipping(const ModelOracle& model, const InputSample& x,
                           const SaliencyMap& map, std::size_t target, const MetricConfig& cfg);

CurveResult region_perturbation_curve(const ModelOracle& model, const InputSample& x,
                                      const SaliencyMap& map, std::size_t target,
                                      const MetricConfig& cfg);
MetricScore region_perturbation(const ModelOracle& model, const InputSample& x,
                                const SaliencyMap& map, std::size_t target,
                                const MetricConfig& cfg);

CurveResult insertion_curve(const ModelOracle& model, const InputSample& x,
                            const SaliencyMap& map, std::size_t target,
                            const MetricConfig& cfg);
MetricScore insertion(const ModelOracle& model, const InputSample& x, const SaliencyMap& map,
                      std::size_t target, const MetricConfig& cfg);
CurveResult deletion_curve(const ModelOracle& model, const InputSample& x,
                           const SaliencyMap& map, std::size_t target, const MetricConfig& cfg);
MetricScore deletion(const ModelOracle& model, const InputSample& x, const SaliencyMap& map,
                     std::size_t target, const MetricConfig& cfg);

CurveResult irof_curve(const ModelOracle& model, const InputSample& x, const SaliencyMap& map,
                       std::size_t target, const MetricConfig& cfg);
MetricScore irof(const ModelOracle& model, const InputSample& x, const SaliencyMap& map,
                 std::size_t target, const MetricConfig& cfg);

// Batch-level: accuracy curve under increasing noisy-linear-imputation
// removal, reduced to one AUC for the whole batch.
double road(const ModelOracle& model, std::span<const InputSample> batch,
            std::span<const SaliencyMap> maps, const MetricConfig& cfg);

// Batch-level: per-observation fraction of the m nearest maps sharing the
// observation's predicted label.
std::vector<MetricScore> sufficiency(std::span<const SaliencyMap> maps,
                                     std::span<const std::size_t> predicted_labels,
                                     Modality modality, const MetricConfig& cfg);

MetricScore infidelity(const ModelOracle& model, const InputSample& x, const SaliencyMap& map,
                       std::size_t target, const MetricConfig& cfg);

// --- robustness ------------------------------------------------------------

MetricScore local_lipschitz_estimate(const ExplainFn& explain, const InputSample& x,
                                     const MetricConfig& cfg);
MetricScore max_sensitivity(const ExplainFn& explain, const InputSample& x,
                            const MetricConfig& cfg);
MetricScore continuity(const ExplainFn& explain, const ModelOracle& model,
                       const InputSample& x, std::size_t target, const MetricConfig& cfg);
MetricScore relative_input_stability(const ExplainFn& explain, const InputSample& x,
                                     const MetricConfig& cfg);
MetricScore relative_output_stability(const ExplainFn& explain, const ModelOracle& model,
                                      const InputSample& x, const MetricConfig& cfg);
MetricScore relative_representation_stability(const ExplainFn& explain,
                                              const ModelOracle& model, const InputSample& x,
                                              const MetricConfig& cfg);

// --- complexity -------------------------------------------------------------

// Gini index of the absolute map values.
MetricScore sparseness(const SaliencyMap& map);
// Entropy of the map normalized to a distribution.
MetricScore complexity(const SaliencyMap& map);
// Count of values above the threshold; exact integer as a double.
MetricScore effective_complexity(const SaliencyMap& map, double epsilon);

} // namespace salev

#endif
