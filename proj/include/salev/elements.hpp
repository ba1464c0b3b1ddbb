#ifndef SALEV_ELEMENTS_HPP
#define SALEV_ELEMENTS_HPP

#include <cstddef>
#include <vector>

#include "salev/data.hpp"
#include "salev/tensor.hpp"

namespace salev {

// The unit of removal shared by perturbations and metrics: an image pixel
// (all channels), a voxel, or a point (all three coordinates). Saliency maps
// attribute per element; images sum their channel values.
class ElementLayout {
public:
    ElementLayout(Modality modality, const std::vector<std::size_t>& shape);

    Modality modality() const { return modality_; }
    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t count() const { return count_; }
    std::size_t scalars_per_element() const { return scalars_; }

    // Flat scalar offset of slot s (< scalars_per_element) of element e.
    std::size_t scalar_offset(std::size_t e, std::size_t s) const;

    // Attribution of element e under a saliency map (input-shaped for
    // images/volumes, (N,) for clouds).
    double attribution(const Tensor& map_values, std::size_t e) const;

    // Copies the source tensor's values into x at element e.
    void overwrite(Tensor& x, std::size_t e, const Tensor& source) const;
    void set_value(Tensor& x, std::size_t e, double value) const;

    // Elements sorted by descending attribution, ties broken by ascending
    // element index.
    std::vector<std::size_t> descending_order(const Tensor& map_values) const;

private:
    Modality modality_;
    std::vector<std::size_t> shape_;
    std::size_t count_ = 0;
    std::size_t scalars_ = 1;
    std::size_t channel_stride_ = 1; // image: C, else 1
};

} // namespace salev

#endif
