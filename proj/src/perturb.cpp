#include "salev/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "salev/elements.hpp"
#include "salev/errors.hpp"

namespace salev {

namespace {

std::size_t reflect_index(long long i, std::size_t n) {
    const long long size = static_cast<long long>(n);
    while (i < 0 || i >= size) {
        if (i < 0) i = -i - 1;
        if (i >= size) i = 2 * size - 1 - i;
    }
    return static_cast<std::size_t>(i);
}

} // namespace

Tensor gaussian_blur(const Tensor& image, double sigma) {
    if (image.rank() != 3) {
        raise(ErrorCode::WrongModality, "gaussian_blur expects an image (W, H, C)");
    }
    if (!(sigma > 0.0)) raise(ErrorCode::InvalidArgument, "sigma must be positive");

    const long long radius = static_cast<long long>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double norm = 0.0;
    for (long long i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
        norm += kernel[i + radius];
    }
    for (auto& k : kernel) k /= norm;

    const std::size_t w = image.shape()[0], h = image.shape()[1], c = image.shape()[2];
    Tensor pass1(image.shape()), out(image.shape());
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            for (std::size_t x = 0; x < w; ++x) {
                double acc = 0.0;
                for (long long i = -radius; i <= radius; ++i) {
                    const std::size_t xi = reflect_index(static_cast<long long>(x) + i, w);
                    acc += kernel[i + radius] * image[(xi * h + y) * c + ch];
                }
                pass1[(x * h + y) * c + ch] = acc;
            }
        }
    }
    for (std::size_t x = 0; x < w; ++x) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            for (std::size_t y = 0; y < h; ++y) {
                double acc = 0.0;
                for (long long i = -radius; i <= radius; ++i) {
                    const std::size_t yi = reflect_index(static_cast<long long>(y) + i, h);
                    acc += kernel[i + radius] * pass1[(x * h + yi) * c + ch];
                }
                out[(x * h + y) * c + ch] = acc;
            }
        }
    }
    return out;
}

namespace {

struct GridInfo {
    std::vector<std::size_t> dims;     // spatial dims
    std::size_t channels = 1;
    std::size_t spatial_count = 1;
};

GridInfo grid_info(const Tensor& data, Modality modality) {
    GridInfo g;
    if (modality == Modality::Image) {
        g.dims = {data.shape()[0], data.shape()[1]};
        g.channels = data.shape()[2];
    } else if (modality == Modality::Volume) {
        g.dims = {data.shape()[0], data.shape()[1], data.shape()[2]};
    } else {
        raise(ErrorCode::WrongModality, "grid segmentation needs an image or volume");
    }
    for (std::size_t d : g.dims) g.spatial_count *= d;
    return g;
}

// Color vector of one spatial element.
void element_color(const Tensor& data, const GridInfo& g, std::size_t p, double* out) {
    for (std::size_t c = 0; c < g.channels; ++c) out[c] = data[p * g.channels + c];
}

std::vector<std::size_t> grid_coords(const GridInfo& g, std::size_t p) {
    std::vector<std::size_t> coord(g.dims.size());
    for (std::size_t d = g.dims.size(); d > 0; --d) {
        coord[d - 1] = p % g.dims[d - 1];
        p /= g.dims[d - 1];
    }
    return coord;
}

// Merges connected fragments so every label forms one component.
void enforce_connectivity(std::vector<int>& labels, const GridInfo& g) {
    const std::size_t n = g.spatial_count;
    std::vector<int> component(n, -1);
    std::vector<std::size_t> comp_size;
    std::vector<int> comp_label;
    std::vector<std::size_t> stack;

    auto neighbors = [&](std::size_t p, auto&& fn) {
        auto coord = grid_coords(g, p);
        for (std::size_t d = 0; d < g.dims.size(); ++d) {
            for (int dir = -1; dir <= 1; dir += 2) {
                const long long v = static_cast<long long>(coord[d]) + dir;
                if (v < 0 || v >= static_cast<long long>(g.dims[d])) continue;
                std::size_t q = 0;
                for (std::size_t e = 0; e < g.dims.size(); ++e) {
                    q = q * g.dims[e] +
                        (e == d ? static_cast<std::size_t>(v) : coord[e]);
                }
                fn(q);
            }
        }
    };

    for (std::size_t p = 0; p < n; ++p) {
        if (component[p] >= 0) continue;
        const int comp = static_cast<int>(comp_size.size());
        comp_size.push_back(0);
        comp_label.push_back(labels[p]);
        stack.assign(1, p);
        component[p] = comp;
        while (!stack.empty()) {
            const std::size_t cur = stack.back();
            stack.pop_back();
            ++comp_size[comp];
            neighbors(cur, [&](std::size_t q) {
                if (component[q] < 0 && labels[q] == labels[p]) {
                    component[q] = comp;
                    stack.push_back(q);
                }
            });
        }
    }

    // Largest component per label keeps it; the rest merge into the largest
    // adjacent segment.
    std::vector<int> keeper_of_label(static_cast<std::size_t>(
                                         *std::max_element(labels.begin(), labels.end())) + 1,
                                     -1);
    for (std::size_t comp = 0; comp < comp_size.size(); ++comp) {
        const int label = comp_label[comp];
        if (keeper_of_label[label] < 0 ||
            comp_size[comp] > comp_size[static_cast<std::size_t>(keeper_of_label[label])]) {
            keeper_of_label[label] = static_cast<int>(comp);
        }
    }
    // Count component sizes again as merge targets.
    for (std::size_t p = 0; p < n; ++p) {
        const int comp = component[p];
        if (keeper_of_label[comp_label[comp]] == comp) continue;
        // Orphan fragment element: find the largest neighboring keeper.
        long long best_size = -1;
        int best_label = comp_label[comp];
        neighbors(p, [&](std::size_t q) {
            const int qcomp = component[q];
            if (qcomp == comp) return;
            if (keeper_of_label[comp_label[qcomp]] != qcomp) return;
            if (static_cast<long long>(comp_size[qcomp]) > best_size) {
                best_size = static_cast<long long>(comp_size[qcomp]);
                best_label = comp_label[qcomp];
            }
        });
        if (best_size >= 0) labels[p] = best_label;
    }
}

void compact_labels(std::vector<int>& labels, int& n_segments) {
    std::vector<int> remap(static_cast<std::size_t>(
                               *std::max_element(labels.begin(), labels.end())) + 1,
                           -1);
    int next = 0;
    for (auto& l : labels) {
        if (remap[l] < 0) remap[l] = next++;
        l = remap[l];
    }
    n_segments = next;
}

} // namespace

Segmentation slic(const Tensor& data, Modality modality, int n_segments, double compactness,
                  int iters) {
    const GridInfo g = grid_info(data, modality);
    if (n_segments < 2) raise(ErrorCode::InvalidArgument, "need at least 2 segments");
    if (static_cast<std::size_t>(n_segments) > g.spatial_count) {
        raise(ErrorCode::TooManySegments, "more segments than elements");
    }

    const std::size_t dims = g.dims.size();
    // Grid dimensions roughly proportional to the spatial extents.
    std::vector<std::size_t> grid(dims, 1);
    const double scale =
        std::pow(static_cast<double>(n_segments) / static_cast<double>(g.spatial_count),
                 1.0 / static_cast<double>(dims));
    for (std::size_t d = 0; d < dims; ++d) {
        grid[d] = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(static_cast<double>(g.dims[d]) * scale +
                                                   1e-9)));
        grid[d] = std::min(grid[d], g.dims[d]);
    }
    auto grid_count = [&] {
        std::size_t c = 1;
        for (std::size_t v : grid) c *= v;
        return c;
    };
    while (grid_count() < static_cast<std::size_t>(n_segments)) {
        // Grow the axis with the coarsest spacing.
        std::size_t best = 0;
        double best_ratio = 0.0;
        for (std::size_t d = 0; d < dims; ++d) {
            const double ratio = static_cast<double>(g.dims[d]) / static_cast<double>(grid[d]);
            if (ratio > best_ratio && grid[d] < g.dims[d]) {
                best_ratio = ratio;
                best = d;
            }
        }
        if (grid[best] >= g.dims[best]) break;
        ++grid[best];
    }

    const std::size_t k = grid_count();
    const double spacing =
        std::pow(static_cast<double>(g.spatial_count) / static_cast<double>(k),
                 1.0 / static_cast<double>(dims));
    const double spatial_weight = compactness / spacing;

    // Center = color vector + spatial position.
    std::vector<std::vector<double>> centers(k,
                                             std::vector<double>(g.channels + dims, 0.0));
    {
        std::vector<std::size_t> gi(dims, 0);
        for (std::size_t ci = 0; ci < k; ++ci) {
            std::size_t p = 0;
            for (std::size_t d = 0; d < dims; ++d) {
                // Pixel-center coordinates keep the initial Voronoi cells
                // symmetric.
                const double pos = (static_cast<double>(gi[d]) + 0.5) *
                                       static_cast<double>(g.dims[d]) /
                                       static_cast<double>(grid[d]) -
                                   0.5;
                centers[ci][g.channels + d] = pos;
                const std::size_t ip = std::min(
                    g.dims[d] - 1,
                    static_cast<std::size_t>(std::max(0.0, std::round(pos))));
                p = p * g.dims[d] + ip;
            }
            element_color(data, g, p, centers[ci].data());
            for (std::size_t d = dims; d > 0; --d) {
                if (++gi[d - 1] < grid[d - 1]) break;
                gi[d - 1] = 0;
            }
        }
    }

    std::vector<int> labels(g.spatial_count, 0);
    std::vector<double> color(g.channels);
    for (int iter = 0; iter < iters; ++iter) {
        bool changed = false;
        for (std::size_t p = 0; p < g.spatial_count; ++p) {
            element_color(data, g, p, color.data());
            const auto coord = grid_coords(g, p);
            double best = std::numeric_limits<double>::max();
            int best_c = 0;
            for (std::size_t ci = 0; ci < k; ++ci) {
                double dist = 0.0;
                for (std::size_t c = 0; c < g.channels; ++c) {
                    const double dc = color[c] - centers[ci][c];
                    dist += dc * dc;
                }
                double ds = 0.0;
                for (std::size_t d = 0; d < dims; ++d) {
                    const double dd =
                        static_cast<double>(coord[d]) - centers[ci][g.channels + d];
                    ds += dd * dd;
                }
                dist += spatial_weight * spatial_weight * ds;
                if (dist < best) {
                    best = dist;
                    best_c = static_cast<int>(ci);
                }
            }
            if (labels[p] != best_c) {
                labels[p] = best_c;
                changed = true;
            }
        }
        if (!changed) break;

        std::vector<std::vector<double>> sums(k, std::vector<double>(g.channels + dims, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t p = 0; p < g.spatial_count; ++p) {
            const auto ci = static_cast<std::size_t>(labels[p]);
            element_color(data, g, p, color.data());
            for (std::size_t c = 0; c < g.channels; ++c) sums[ci][c] += color[c];
            const auto coord = grid_coords(g, p);
            for (std::size_t d = 0; d < dims; ++d) {
                sums[ci][g.channels + d] += static_cast<double>(coord[d]);
            }
            ++counts[ci];
        }
        for (std::size_t ci = 0; ci < k; ++ci) {
            if (counts[ci] == 0) continue;
            for (auto& v : sums[ci]) v /= static_cast<double>(counts[ci]);
            centers[ci] = sums[ci];
        }
    }

    Segmentation seg;
    seg.assignment = std::move(labels);
    enforce_connectivity(seg.assignment, g);
    compact_labels(seg.assignment, seg.n_segments);
    return seg;
}

Segmentation kmeans_points(const Tensor& cloud, int k, int iters, std::uint64_t seed) {
    if (cloud.rank() != 2 || cloud.shape()[1] != 3) {
        raise(ErrorCode::WrongModality, "kmeans_points expects an (N, 3) cloud");
    }
    const std::size_t n = cloud.shape()[0];
    if (k < 1 || n < static_cast<std::size_t>(k)) {
        raise(ErrorCode::TooFewPoints, "need at least k points");
    }

    auto dist2 = [&](std::size_t p, const double* c) {
        double d = 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
            const double diff = cloud[p * 3 + j] - c[j];
            d += diff * diff;
        }
        return d;
    };

    // Farthest-point initialization.
    Rng rng(Rng::mix(seed, 0x6b6d6eu));
    std::vector<double> centers(static_cast<std::size_t>(k) * 3);
    std::vector<double> min_dist(n, std::numeric_limits<double>::max());
    std::size_t first = rng.uniform_index(n);
    for (std::size_t j = 0; j < 3; ++j) centers[j] = cloud[first * 3 + j];
    for (int ci = 1; ci < k; ++ci) {
        std::size_t far = 0;
        double far_dist = -1.0;
        for (std::size_t p = 0; p < n; ++p) {
            min_dist[p] = std::min(min_dist[p], dist2(p, &centers[(ci - 1) * 3]));
            if (min_dist[p] > far_dist) {
                far_dist = min_dist[p];
                far = p;
            }
        }
        for (std::size_t j = 0; j < 3; ++j) {
            centers[static_cast<std::size_t>(ci) * 3 + j] = cloud[far * 3 + j];
        }
    }

    std::vector<int> labels(n, 0);
    for (int iter = 0; iter < iters; ++iter) {
        bool changed = false;
        for (std::size_t p = 0; p < n; ++p) {
            double best = std::numeric_limits<double>::max();
            int best_c = 0;
            for (int ci = 0; ci < k; ++ci) {
                const double d = dist2(p, &centers[static_cast<std::size_t>(ci) * 3]);
                if (d < best) {
                    best = d;
                    best_c = ci;
                }
            }
            if (labels[p] != best_c) {
                labels[p] = best_c;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;

        std::vector<double> sums(static_cast<std::size_t>(k) * 3, 0.0);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t p = 0; p < n; ++p) {
            const auto ci = static_cast<std::size_t>(labels[p]);
            for (std::size_t j = 0; j < 3; ++j) sums[ci * 3 + j] += cloud[p * 3 + j];
            ++counts[ci];
        }
        for (int ci = 0; ci < k; ++ci) {
            if (counts[ci] == 0) {
                // Re-seat an empty cluster on the point farthest from its center.
                std::size_t far = 0;
                double far_dist = -1.0;
                for (std::size_t p = 0; p < n; ++p) {
                    const double d =
                        dist2(p, &centers[static_cast<std::size_t>(labels[p]) * 3]);
                    if (d > far_dist) {
                        far_dist = d;
                        far = p;
                    }
                }
                for (std::size_t j = 0; j < 3; ++j) {
                    centers[static_cast<std::size_t>(ci) * 3 + j] = cloud[far * 3 + j];
                }
                continue;
            }
            for (std::size_t j = 0; j < 3; ++j) {
                centers[static_cast<std::size_t>(ci) * 3 + j] =
                    sums[static_cast<std::size_t>(ci) * 3 + j] /
                    static_cast<double>(counts[ci]);
            }
        }
    }

    Segmentation seg;
    seg.assignment = std::move(labels);
    seg.n_segments = k;
    compact_labels(seg.assignment, seg.n_segments);
    return seg;
}

namespace {

// Gauss-Seidel sweeps for the harmonic system over one scalar channel.
void impute_grid_channel(std::vector<double>& values, const std::vector<std::size_t>& dims,
                         std::size_t channels, std::size_t channel,
                         const std::vector<std::uint8_t>& removed) {
    std::size_t spatial = 1;
    for (std::size_t d : dims) spatial *= d;

    std::vector<std::size_t> removed_list;
    for (std::size_t p = 0; p < spatial; ++p) {
        if (removed[p]) removed_list.push_back(p);
    }
    if (removed_list.empty()) return;

    // Initialize unknowns with the mean of kept values.
    double kept_sum = 0.0;
    std::size_t kept_count = 0;
    for (std::size_t p = 0; p < spatial; ++p) {
        if (!removed[p]) {
            kept_sum += values[p * channels + channel];
            ++kept_count;
        }
    }
    const double init = kept_count > 0 ? kept_sum / static_cast<double>(kept_count) : 0.0;
    for (std::size_t p : removed_list) values[p * channels + channel] = init;

    auto neighbor_mean = [&](std::size_t p) {
        std::vector<std::size_t> coord(dims.size());
        std::size_t tmp = p;
        for (std::size_t d = dims.size(); d > 0; --d) {
            coord[d - 1] = tmp % dims[d - 1];
            tmp /= dims[d - 1];
        }
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t d = 0; d < dims.size(); ++d) {
            for (int dir = -1; dir <= 1; dir += 2) {
                const long long v = static_cast<long long>(coord[d]) + dir;
                if (v < 0 || v >= static_cast<long long>(dims[d])) continue;
                std::size_t q = 0;
                for (std::size_t e = 0; e < dims.size(); ++e) {
                    q = q * dims[e] + (e == d ? static_cast<std::size_t>(v) : coord[e]);
                }
                sum += values[q * channels + channel];
                ++count;
            }
        }
        return count > 0 ? sum / static_cast<double>(count) : init;
    };

    const double tol = 1e-4;
    const int max_sweeps = 20000;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double residual = 0.0;
        for (std::size_t p : removed_list) {
            const double target = neighbor_mean(p);
            residual = std::max(residual,
                                std::abs(values[p * channels + channel] - target));
            values[p * channels + channel] = target;
        }
        if (residual <= tol) break;
    }
}

} // namespace

Tensor noisy_linear_imputation(const Tensor& x, Modality modality,
                               const std::vector<std::uint8_t>& removed, double noise_sd,
                               std::uint64_t seed) {
    const ElementLayout layout(modality, x.shape());
    if (removed.size() != layout.count()) {
        raise(ErrorCode::ShapeMismatch, "mask length must equal element count");
    }
    const std::size_t n_removed =
        static_cast<std::size_t>(std::count(removed.begin(), removed.end(), std::uint8_t{1}));
    if (n_removed == 0) raise(ErrorCode::InvalidArgument, "mask selects no elements");
    if (n_removed == layout.count()) {
        raise(ErrorCode::NoKeptNeighbors, "mask removes every element");
    }

    Tensor out = x;
    if (modality == Modality::PointCloud) {
        const std::size_t n = layout.count();
        std::vector<std::size_t> kept;
        for (std::size_t p = 0; p < n; ++p) {
            if (!removed[p]) kept.push_back(p);
        }
        for (std::size_t p = 0; p < n; ++p) {
            if (!removed[p]) continue;
            std::vector<std::pair<double, std::size_t>> dist;
            dist.reserve(kept.size());
            for (std::size_t q : kept) {
                double d = 0.0;
                for (std::size_t j = 0; j < 3; ++j) {
                    const double diff = x[p * 3 + j] - x[q * 3 + j];
                    d += diff * diff;
                }
                dist.emplace_back(d, q);
            }
            std::sort(dist.begin(), dist.end());
            const std::size_t take = std::min<std::size_t>(4, dist.size());
            for (std::size_t j = 0; j < 3; ++j) {
                double sum = 0.0;
                for (std::size_t i = 0; i < take; ++i) sum += x[dist[i].second * 3 + j];
                out.values()[p * 3 + j] = sum / static_cast<double>(take);
            }
        }
    } else {
        const std::vector<std::size_t> dims =
            modality == Modality::Image
                ? std::vector<std::size_t>{x.shape()[0], x.shape()[1]}
                : std::vector<std::size_t>{x.shape()[0], x.shape()[1], x.shape()[2]};
        const std::size_t channels = modality == Modality::Image ? x.shape()[2] : 1;
        for (std::size_t c = 0; c < channels; ++c) {
            impute_grid_channel(out.values(), dims, channels, c, removed);
        }
    }

    if (noise_sd > 0.0) {
        Rng rng(Rng::mix(seed, 0x726f6164u));
        for (std::size_t e = 0; e < layout.count(); ++e) {
            if (!removed[e]) continue;
            for (std::size_t s = 0; s < layout.scalars_per_element(); ++s) {
                out.values()[layout.scalar_offset(e, s)] += rng.normal(0.0, noise_sd);
            }
        }
    }
    return out;
}

std::vector<Tensor> x_axis_traversal(const Tensor& x, Modality modality, int n_steps) {
    if (n_steps < 2) raise(ErrorCode::InvalidArgument, "n_steps must be >= 2");
    validate_modality_shape(modality, x.shape());

    std::vector<Tensor> frames;
    frames.reserve(static_cast<std::size_t>(n_steps) + 1);

    if (modality == Modality::PointCloud) {
        const std::size_t n = x.shape()[0];
        double min_x = x[0], max_x = x[0];
        for (std::size_t p = 0; p < n; ++p) {
            min_x = std::min(min_x, x[p * 3]);
            max_x = std::max(max_x, x[p * 3]);
        }
        const double extent = max_x - min_x;
        for (int t = 0; t <= n_steps; ++t) {
            const double shift = extent * static_cast<double>(t) / static_cast<double>(n_steps);
            Tensor frame = x;
            for (std::size_t p = 0; p < n; ++p) {
                const double nx = x[p * 3] + shift;
                if (nx > max_x + 1e-12) {
                    frame.values()[p * 3 + 0] = 0.0;
                    frame.values()[p * 3 + 1] = 0.0;
                    frame.values()[p * 3 + 2] = 0.0;
                } else {
                    frame.values()[p * 3] = nx;
                }
            }
            frames.push_back(std::move(frame));
        }
        return frames;
    }

    const std::size_t w = x.shape()[0];
    std::size_t row = 1;
    for (std::size_t d = 1; d < x.rank(); ++d) row *= x.shape()[d];
    for (int t = 0; t <= n_steps; ++t) {
        const std::size_t shift = static_cast<std::size_t>(std::llround(
            static_cast<double>(w) * static_cast<double>(t) / static_cast<double>(n_steps)));
        Tensor frame(x.shape());
        for (std::size_t i = 0; i < w; ++i) {
            if (i < shift) continue; // zero padding
            const double* src = x.data() + (i - shift) * row;
            double* dst = frame.data() + i * row;
            std::copy(src, src + row, dst);
        }
        frames.push_back(std::move(frame));
    }
    return frames;
}

Tensor gaussian_noise_like(const Tensor& x, double sd, Rng& rng) {
    Tensor out(x.shape());
    for (auto& v : out.values()) v = rng.normal(0.0, sd);
    return out;
}

Tensor uniform_noise_like(const Tensor& x, double lo, double hi, Rng& rng) {
    Tensor out(x.shape());
    for (auto& v : out.values()) v = rng.uniform(lo, hi);
    return out;
}

} // namespace salev
