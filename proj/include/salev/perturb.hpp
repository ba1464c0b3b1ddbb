#ifndef SALEV_PERTURB_HPP
#define SALEV_PERTURB_HPP

#include <cstdint>
#include <vector>

#include "salev/data.hpp"
#include "salev/rng.hpp"
#include "salev/tensor.hpp"

namespace salev {

// Segment labels per element (pixel/voxel/point), contiguous from 0.
struct Segmentation {
    std::vector<int> assignment;
    int n_segments = 0;
};

// Separable Gaussian convolution per channel, kernel radius ceil(3*sigma),
// reflect padding. Image modality only.
Tensor gaussian_blur(const Tensor& image, double sigma);

// Grid-initialized k-means in (intensity-scaled color, spatial) space.
// Orphan fragments are merged into the largest neighboring segment, so each
// segment is spatially connected. Works on (W,H,C) images and (X,Y,Z)
// volumes; the actual segment count may differ slightly from the request.
Segmentation slic(const Tensor& data, Modality modality, int n_segments, double compactness,
                  int iters = 10);

// Lloyd iterations with farthest-point initialization over point coordinates.
Segmentation kmeans_points(const Tensor& cloud, int k = 16, int iters = 25,
                           std::uint64_t seed = 0);

// Replaces removed elements with the harmonic (neighbor-mean) least-squares
// solution plus N(0, noise_sd^2). Grids use 4-/6-neighborhoods solved by
// Gauss-Seidel to residual <= 1e-4; point clouds use the mean of the 4
// nearest kept points.
Tensor noisy_linear_imputation(const Tensor& x, Modality modality,
                               const std::vector<std::uint8_t>& removed, double noise_sd,
                               std::uint64_t seed);

// n_steps + 1 frames shifted along the x axis: grids shift with zero
// padding, clouds translate with out-of-bound points mapped to the origin.
std::vector<Tensor> x_axis_traversal(const Tensor& x, Modality modality, int n_steps);

Tensor gaussian_noise_like(const Tensor& x, double sd, Rng& rng);
Tensor uniform_noise_like(const Tensor& x, double lo, double hi, Rng& rng);

} // namespace salev

#endif
