#include <algorithm>
#include <cmath>
#include <numeric>

#include "salev/elements.hpp"
#include "salev/errors.hpp"
#include "salev/metrics.hpp"
#include "salev/perturb.hpp"
#include "salev/rng.hpp"
#include "salev/stats.hpp"

namespace salev {

namespace {

MetricScore guarded_pearson(std::span<const double> a, std::span<const double> b) {
    try {
        return {pearson(a, b), false};
    } catch (const Error&) {
        return {0.0, true};
    }
}

double target_probability(const ModelOracle& model, const Tensor& x, std::size_t target) {
    return predict_probability(model, x, target);
}

// Distinct element indices, seeded; takes everything when count is small.
std::vector<std::size_t> sample_elements(std::size_t count, std::size_t want, Rng& rng) {
    std::vector<std::size_t> all(count);
    std::iota(all.begin(), all.end(), 0);
    if (want >= count) return all;
    rng.shuffle(all.begin(), all.end());
    all.resize(want);
    std::sort(all.begin(), all.end());
    return all;
}

// Shared stepping for removal curves: cumulative element targets on the
// step_fraction grid. Ties in attribution order are broken by ascending
// element index inside descending_order().
CurveResult removal_curve(const ModelOracle& model, const InputSample& x, std::size_t target,
                          const std::vector<std::vector<std::size_t>>& ordered_regions,
                          const Tensor& start, const Tensor& fill_source,
                          std::size_t total_elements, const MetricConfig& cfg) {
    const ElementLayout layout(x.modality, x.data.shape());
    CurveResult curve;
    curve.xs.push_back(0.0);
    curve.ys.push_back(target_probability(model, start, target));

    Tensor current = start;
    std::size_t region_cursor = 0;
    std::size_t removed = 0;
    for (std::size_t t = 1; t <= cfg.n_steps; ++t) {
        const double want_fraction =
            std::min(1.0, cfg.step_fraction * static_cast<double>(t));
        const auto want = static_cast<std::size_t>(
            std::llround(want_fraction * static_cast<double>(total_elements)));
        while (removed < want && region_cursor < ordered_regions.size()) {
            for (std::size_t e : ordered_regions[region_cursor]) {
                layout.overwrite(current, e, fill_source);
                ++removed;
            }
            ++region_cursor;
        }
        const double fraction = static_cast<double>(removed) /
                                static_cast<double>(total_elements);
        if (fraction <= curve.xs.back()) continue; // nothing new this step
        curve.xs.push_back(fraction);
        curve.ys.push_back(target_probability(model, current, target));
    }
    if (curve.xs.size() < 2) {
        raise(ErrorCode::DegenerateCurve, "removal schedule produced no steps");
    }
    return curve;
}

std::vector<std::vector<std::size_t>> singleton_regions(const ElementLayout& layout,
                                                        const SaliencyMap& map) {
    const auto order = layout.descending_order(map.values);
    std::vector<std::vector<std::size_t>> regions;
    regions.reserve(order.size());
    for (std::size_t e : order) regions.push_back({e});
    return regions;
}

// Non-overlapping kernel tiles (ragged at the edges), ordered by descending
// attribution sum with ties on ascending tile index.
std::vector<std::vector<std::size_t>> tile_regions(const InputSample& x,
                                                   const ElementLayout& layout,
                                                   const SaliencyMap& map, std::size_t kernel) {
    std::vector<std::vector<std::size_t>> tiles;
    if (x.modality == Modality::PointCloud) {
        for (std::size_t p = 0; p < layout.count(); ++p) tiles.push_back({p});
    } else if (x.modality == Modality::Image) {
        const std::size_t w = x.data.shape()[0], h = x.data.shape()[1];
        if (kernel > w || kernel > h) {
            raise(ErrorCode::KernelTooLarge, "region kernel exceeds input");
        }
        for (std::size_t wx = 0; wx < w; wx += kernel) {
            for (std::size_t hy = 0; hy < h; hy += kernel) {
                std::vector<std::size_t> tile;
                for (std::size_t i = wx; i < std::min(w, wx + kernel); ++i) {
                    for (std::size_t j = hy; j < std::min(h, hy + kernel); ++j) {
                        tile.push_back(i * h + j);
                    }
                }
                tiles.push_back(std::move(tile));
            }
        }
    } else {
        const auto& s = x.data.shape();
        if (kernel > s[0] || kernel > s[1] || kernel > s[2]) {
            raise(ErrorCode::KernelTooLarge, "region kernel exceeds input");
        }
        for (std::size_t ax = 0; ax < s[0]; ax += kernel) {
            for (std::size_t ay = 0; ay < s[1]; ay += kernel) {
                for (std::size_t az = 0; az < s[2]; az += kernel) {
                    std::vector<std::size_t> tile;
                    for (std::size_t i = ax; i < std::min(s[0], ax + kernel); ++i) {
                        for (std::size_t j = ay; j < std::min(s[1], ay + kernel); ++j) {
                            for (std::size_t l = az; l < std::min(s[2], az + kernel); ++l) {
                                tile.push_back((i * s[1] + j) * s[2] + l);
                            }
                        }
                    }
                    tiles.push_back(std::move(tile));
                }
            }
        }
    }

    std::vector<double> sums(tiles.size(), 0.0);
    for (std::size_t t = 0; t < tiles.size(); ++t) {
        for (std::size_t e : tiles[t]) sums[t] += layout.attribution(map.values, e);
    }
    std::vector<std::size_t> order(tiles.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sums[a] > sums[b]; });
    std::vector<std::vector<std::size_t>> sorted;
    sorted.reserve(tiles.size());
    for (std::size_t t : order) sorted.push_back(std::move(tiles[t]));
    return sorted;
}

Tensor insertion_deletion_baseline(const InputSample& x, const MetricConfig& cfg) {
    if (x.modality == Modality::Image) {
        return gaussian_blur(x.data, cfg.blur_sigma);
    }
    Rng rng(Rng::mix(cfg.seed, 0x696e6462u));
    return gaussian_noise_like(x.data, cfg.noise_sd, rng);
}

} // namespace

double auc(const CurveResult& curve) {
    if (curve.xs.size() != curve.ys.size() || curve.xs.size() < 2) {
        raise(ErrorCode::DegenerateCurve, "curve needs at least two points");
    }
    const double range = curve.xs.back() - curve.xs.front();
    if (range <= 0.0) raise(ErrorCode::DegenerateCurve, "curve has no x extent");
    double area = 0.0;
    for (std::size_t i = 1; i < curve.xs.size(); ++i) {
        if (curve.xs[i] <= curve.xs[i - 1]) {
            raise(ErrorCode::DegenerateCurve, "curve xs must be strictly increasing");
        }
        area += 0.5 * (curve.ys[i] + curve.ys[i - 1]) * (curve.xs[i] - curve.xs[i - 1]);
    }
    return area / range;
}

double aoc(const CurveResult& curve) { return 1.0 - auc(curve); }

MetricScore faithfulness_correlation(const ModelOracle& model, const InputSample& x,
                                     const SaliencyMap& map, std::size_t target,
                                     const MetricConfig& cfg) {
    const ElementLayout layout(x.modality, x.data.shape());
    if (cfg.subset_size >= layout.count()) {
        raise(ErrorCode::InvalidArgument, "subset size must be below element count");
    }
    if (cfg.n_runs < 3) raise(ErrorCode::InvalidArgument, "need at least 3 runs");

    Rng rng(Rng::mix(cfg.seed, 0x66630000u));
    const double base = predict_logit(model, x.data, target);
    std::vector<double> attr_sums, drops;
    std::vector<std::size_t> pool(layout.count());
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t run = 0; run < cfg.n_runs; ++run) {
        rng.shuffle(pool.begin(), pool.end());
        Tensor perturbed = x.data;
        double attr_sum = 0.0;
        for (std::size_t i = 0; i < cfg.subset_size; ++i) {
            layout.set_value(perturbed, pool[i], cfg.baseline_value);
            attr_sum += layout.attribution(map.values, pool[i]);
        }
        attr_sums.push_back(attr_sum);
        drops.push_back(base - predict_logit(model, perturbed, target));
    }
    return guarded_pearson(attr_sums, drops);
}

MetricScore faithfulness_estimate(const ModelOracle& model, const InputSample& x,
                                  const SaliencyMap& map, std::size_t target,
                                  const MetricConfig& cfg) {
    const ElementLayout layout(x.modality, x.data.shape());
    Rng rng(Rng::mix(cfg.seed, 0x66650000u));
    const auto elements = sample_elements(layout.count(), cfg.n_feature_samples, rng);
    const double base = predict_logit(model, x.data, target);

    std::vector<double> attr, drops;
    for (std::size_t e : elements) {
        Tensor perturbed = x.data;
        layout.set_value(perturbed, e, cfg.baseline_value);
        attr.push_back(layout.attribution(map.values, e));
        drops.push_back(base - predict_logit(model, perturbed, target));
    }
    return guarded_pearson(attr, drops);
}

MetricScore monotonicity_correlation(const ModelOracle& model, const InputSample& x,
                                     const SaliencyMap& map, std::size_t target,
                                     const MetricConfig& cfg) {
    if (cfg.n_samples < 2) raise(ErrorCode::InvalidArgument, "need n_samples >= 2");
    const ElementLayout layout(x.modality, x.data.shape());
    Rng rng(Rng::mix(cfg.seed, 0x6d630000u));
    const auto elements = sample_elements(layout.count(), cfg.n_feature_samples, rng);
    const double base = predict_logit(model, x.data, target);

    std::vector<double> attr, effect;
    for (std::size_t e : elements) {
        double acc = 0.0;
        for (std::size_t s = 0; s < cfg.n_samples; ++s) {
            Tensor perturbed = x.data;
            for (std::size_t slot = 0; slot < layout.scalars_per_element(); ++slot) {
                perturbed.values()[layout.scalar_offset(e, slot)] +=
                    rng.normal(0.0, cfg.noise_sd);
            }
            const double diff = base - predict_logit(model, perturbed, target);
            acc += diff * diff;
        }
        attr.push_back(std::abs(layout.attribution(map.values, e)));
        effect.push_back(acc / static_cast<double>(cfg.n_samples));
    }
    try {
        return {spearman(attr, effect), false};
    } catch (const Error&) {
        return {0.0, true};
    }
}

CurveResult pixel_flipping_curve(const ModelOracle& model, const InputSample& x,
                                 const SaliencyMap& map, std::size_t target,
                                 const MetricConfig& cfg) {
    const ElementLayout layout(x.modality, x.data.shape());
    const Tensor fill(x.data.shape(), cfg.baseline_value);
    return removal_curve(model, x, target, singleton_regions(layout, map), x.data, fill,
                         layout.count(), cfg);
}

MetricScore pixel_flipping(const ModelOracle& model, const InputSample& x,
                           const SaliencyMap& map, std::size_t target,
                           const MetricConfig& cfg) {
    return {auc(pixel_flipping_curve(model, x, map, target, cfg)), false};
}

CurveResult region_perturbation_curve(const ModelOracle& model, const InputSample& x,
                                      const SaliencyMap& map, std::size_t target,
                                      const MetricConfig& cfg) {
    const ElementLayout layout(x.modality, x.data.shape());
    const Tensor fill(x.data.shape(), cfg.baseline_value);
    return removal_curve(model, x, target, tile_regions(x, layout, map, cfg.kernel_size),
                         x.data, fill, layout.count(), cfg);
}

MetricScore region_perturbation(const ModelOracle& model, const InputSample& x,
                                const SaliencyMap& map, std::size_t target,
                                const MetricConfig& cfg) {
    return {auc(region_perturbation_curve(model, x, map, target, cfg)), false};
}

CurveResult deletion_curve(const ModelOracle& model, const InputSample& x,
                           const SaliencyMap& map, std::size_t target,
                           const MetricConfig& cfg) {
    const ElementLayout layout(x.modality, x.data.shape());
    const Tensor baseline = insertion_deletion_baseline(x, cfg);
    return removal_curve(model, x, target, singleton_regions(layout, map), x.data, baseline,
                         layout.count(), cfg);
}

MetricScore deletion(const ModelOracle& model, const InputSample& x, const SaliencyMap& map,
                     std::size_t target, const MetricConfig& cfg) {
    return {auc(deletion_curve(model, x, map, target, cfg)), false};
}

CurveResult insertion_curve(const ModelOracle& model, const InputSample& x,
                            const SaliencyMap& map, std::size_t target,
                            const MetricConfig& cfg) {
    const ElementLayout layout(x.modality, x.data.shape());
    const Tensor baseline = insertion_deletion_baseline(x, cfg);
    // Inserting original content into the baseline.
    return removal_curve(model, x, target, singleton_regions(layout, map), baseline, x.data,
                         layout.count(), cfg);
}

MetricScore insertion(const ModelOracle& model, const InputSample& x, const SaliencyMap& map,
                      std::size_t target, const MetricConfig& cfg) {
    return {auc(insertion_curve(model, x, map, target, cfg)), false};
}

CurveResult irof_curve(const ModelOracle& model, const InputSample& x, const SaliencyMap& map,
                       std::size_t target, const MetricConfig& cfg) {
    const ElementLayout layout(x.modality, x.data.shape());
    Segmentation seg;
    if (x.modality == Modality::PointCloud) {
        seg = kmeans_points(x.data, cfg.n_segments, 25, cfg.seed);
    } else {
        const double compactness =
            cfg.slic_compactness >= 0.0 ? cfg.slic_compactness
                                        : (x.modality == Modality::Image ? 10.0 : 1.0);
        seg = slic(x.data, x.modality, cfg.n_segments, compactness);
    }

    const auto n_seg = static_cast<std::size_t>(seg.n_segments);
    std::vector<std::vector<std::size_t>> members(n_seg);
    std::vector<double> mean_attr(n_seg, 0.0);
    for (std::size_t e = 0; e < layout.count(); ++e) {
        const auto s = static_cast<std::size_t>(seg.assignment[e]);
        members[s].push_back(e);
        mean_attr[s] += layout.attribution(map.values, e);
    }
    for (std::size_t s = 0; s < n_seg; ++s) {
        if (!members[s].empty()) mean_attr[s] /= static_cast<double>(members[s].size());
    }
    // Descending mean attribution, ties by ascending segment id.
    std::vector<std::size_t> order(n_seg);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return mean_attr[a] > mean_attr[b];
    });

    // Segment removal replaces values with the segment mean (per channel;
    // clouds collapse to the segment centroid).
    const double p0 = target_probability(model, x.data, target);
    CurveResult curve;
    curve.xs.push_back(0.0);
    curve.ys.push_back(1.0);
    Tensor current = x.data;
    for (std::size_t rank = 0; rank < n_seg; ++rank) {
        const auto& cell = members[order[rank]];
        const std::size_t slots = layout.scalars_per_element();
        std::vector<double> mean_value(slots, 0.0);
        for (std::size_t e : cell) {
            for (std::size_t slot = 0; slot < slots; ++slot) {
                mean_value[slot] += current[layout.scalar_offset(e, slot)];
            }
        }
        for (auto& v : mean_value) v /= static_cast<double>(cell.size());
        for (std::size_t e : cell) {
            for (std::size_t slot = 0; slot < slots; ++slot) {
                current.values()[layout.scalar_offset(e, slot)] = mean_value[slot];
            }
        }
        curve.xs.push_back(static_cast<double>(rank + 1) / static_cast<double>(n_seg));
        curve.ys.push_back(target_probability(model, current, target) / p0);
    }
    return curve;
}

MetricScore irof(const ModelOracle& model, const InputSample& x, const SaliencyMap& map,
                 std::size_t target, const MetricConfig& cfg) {
    return {aoc(irof_curve(model, x, map, target, cfg)), false};
}

double road(const ModelOracle& model, std::span<const InputSample> batch,
            std::span<const SaliencyMap> maps, const MetricConfig& cfg) {
    if (batch.size() < 2) raise(ErrorCode::BatchTooSmall, "road needs a batch of >= 2");
    if (batch.size() != maps.size()) {
        raise(ErrorCode::ShapeMismatch, "one saliency map per observation required");
    }

    auto accuracy_at = [&](double fraction) {
        std::size_t correct = 0;
        for (std::size_t b = 0; b < batch.size(); ++b) {
            const InputSample& s = batch[b];
            if (fraction == 0.0) {
                if (predict_class(model, s.data) == s.label) ++correct;
                continue;
            }
            const ElementLayout layout(s.modality, s.data.shape());
            const auto order = layout.descending_order(maps[b].values);
            auto k = static_cast<std::size_t>(
                std::llround(fraction * static_cast<double>(layout.count())));
            k = std::min(std::max<std::size_t>(k, 1), layout.count() - 1);
            std::vector<std::uint8_t> removed(layout.count(), 0);
            for (std::size_t i = 0; i < k; ++i) removed[order[i]] = 1;
            const Tensor imputed = noisy_linear_imputation(
                s.data, s.modality, removed, cfg.noise_sd, Rng::mix(cfg.seed, b));
            if (predict_class(model, imputed) == s.label) ++correct;
        }
        return static_cast<double>(correct) / static_cast<double>(batch.size());
    };

    CurveResult curve;
    curve.xs.push_back(0.0);
    curve.ys.push_back(accuracy_at(0.0));
    for (std::size_t t = 1; t <= cfg.n_steps; ++t) {
        const double fraction = cfg.step_fraction * static_cast<double>(t);
        if (fraction >= 1.0) break;
        curve.xs.push_back(fraction);
        curve.ys.push_back(accuracy_at(fraction));
    }
    return auc(curve);
}

std::vector<MetricScore> sufficiency(std::span<const SaliencyMap> maps,
                                     std::span<const std::size_t> predicted_labels,
                                     Modality modality, const MetricConfig& cfg) {
    const std::size_t n = maps.size();
    if (n < 10) raise(ErrorCode::BatchTooSmall, "sufficiency needs a batch of >= 10");
    if (predicted_labels.size() != n) {
        raise(ErrorCode::ShapeMismatch, "one predicted label per map required");
    }
    const std::size_t dim = maps[0].values.size();
    for (const auto& m : maps) {
        if (m.values.size() != dim) {
            raise(ErrorCode::ShapeMismatch, "maps must share one shape");
        }
    }

    // Squared Euclidean distance for volumes, standardized Euclidean for
    // images and point clouds.
    std::vector<double> inv_var(dim, 1.0);
    if (modality != Modality::Volume) {
        for (std::size_t i = 0; i < dim; ++i) {
            double mean = 0.0, sq = 0.0;
            for (const auto& m : maps) mean += m.values[i];
            mean /= static_cast<double>(n);
            for (const auto& m : maps) {
                const double d = m.values[i] - mean;
                sq += d * d;
            }
            const double var = sq / static_cast<double>(n);
            inv_var[i] = var > 1e-12 ? 1.0 / var : 0.0;
        }
    }

    const std::size_t m_neighbors = std::min<std::size_t>(cfg.knn, n - 1);
    std::vector<MetricScore> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, std::size_t>> dist;
        dist.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double d = 0.0;
            for (std::size_t kdim = 0; kdim < dim; ++kdim) {
                const double diff = maps[i].values[kdim] - maps[j].values[kdim];
                d += diff * diff * inv_var[kdim];
            }
            dist.emplace_back(d, j);
        }
        std::sort(dist.begin(), dist.end());
        std::size_t agree = 0;
        for (std::size_t k = 0; k < m_neighbors; ++k) {
            if (predicted_labels[dist[k].second] == predicted_labels[i]) ++agree;
        }
        scores[i] = {static_cast<double>(agree) / static_cast<double>(m_neighbors), false};
    }
    return scores;
}

MetricScore infidelity(const ModelOracle& model, const InputSample& x, const SaliencyMap& map,
                       std::size_t target, const MetricConfig& cfg) {
    if (cfg.n_samples < 16) raise(ErrorCode::InvalidArgument, "need n_samples >= 16");
    const ElementLayout layout(x.modality, x.data.shape());
    Rng rng(Rng::mix(cfg.seed, 0x696e6600u));
    const double base = predict_logit(model, x.data, target);

    double acc = 0.0;
    for (std::size_t s = 0; s < cfg.n_samples; ++s) {
        Tensor noise = gaussian_noise_like(x.data, cfg.noise_sd, rng);
        Tensor perturbed = x.data;
        for (std::size_t i = 0; i < perturbed.size(); ++i) perturbed.values()[i] -= noise[i];
        double dot = 0.0;
        for (std::size_t e = 0; e < layout.count(); ++e) {
            const double a = layout.attribution(map.values, e);
            // Clouds apply the per-point attribution to each coordinate;
            // grids pair scalar attributions with scalar noise.
            if (x.modality == Modality::PointCloud) {
                for (std::size_t slot = 0; slot < 3; ++slot) {
                    dot += a * noise[layout.scalar_offset(e, slot)];
                }
            } else if (x.modality == Modality::Image) {
                for (std::size_t slot = 0; slot < layout.scalars_per_element(); ++slot) {
                    const std::size_t off = layout.scalar_offset(e, slot);
                    dot += map.values[off] * noise[off];
                }
            } else {
                dot += a * noise[e];
            }
        }
        const double diff = dot - (base - predict_logit(model, perturbed, target));
        acc += diff * diff;
    }
    return {acc / static_cast<double>(cfg.n_samples), false};
}

} // namespace salev
