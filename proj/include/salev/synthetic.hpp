#ifndef SALEV_SYNTHETIC_HPP
#define SALEV_SYNTHETIC_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "salev/data.hpp"
#include "salev/net.hpp"

namespace salev {

struct SyntheticDataset {
    Modality modality = Modality::Image;
    std::string recipe;
    std::size_t num_classes = 0;
    std::vector<InputSample> samples;
};

// Named recipes, all class-balanced and deterministic under seed:
//   bright_quadrant   16x16x3 images, 4 classes (one bright quadrant)
//   bright_octant     12x12x12 volumes, 8 classes (one bright octant)
//   corner_primitives 256x3 point clouds, 4 classes (a geometric primitive
//                     placed in a class-specific corner over a shared body)
SyntheticDataset make_synthetic_dataset(const std::string& recipe, std::size_t n_samples,
                                        std::uint64_t seed);

// The per-modality desk-scale architecture paired with each recipe.
Network make_default_network(Modality modality, const std::vector<std::size_t>& input_shape,
                             std::size_t num_classes, std::uint64_t seed,
                             const std::string& architecture = "default");

TrainOptions default_train_options(const std::string& recipe, std::uint64_t seed);

} // namespace salev

#endif
