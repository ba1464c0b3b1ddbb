#include "salev/elements.hpp"

#include <algorithm>
#include <numeric>

#include "salev/errors.hpp"

namespace salev {

ElementLayout::ElementLayout(Modality modality, const std::vector<std::size_t>& shape)
    : modality_(modality), shape_(shape) {
    validate_modality_shape(modality, shape);
    switch (modality) {
    case Modality::Image:
        count_ = shape[0] * shape[1];
        scalars_ = shape[2];
        channel_stride_ = shape[2];
        break;
    case Modality::Volume:
        count_ = shape[0] * shape[1] * shape[2];
        scalars_ = 1;
        break;
    case Modality::PointCloud:
        count_ = shape[0];
        scalars_ = 3;
        break;
    }
}

std::size_t ElementLayout::scalar_offset(std::size_t e, std::size_t s) const {
    switch (modality_) {
    case Modality::Image: return e * channel_stride_ + s;
    case Modality::Volume: return e;
    case Modality::PointCloud: return e * 3 + s;
    }
    raise(ErrorCode::Internal, "bad modality");
}

double ElementLayout::attribution(const Tensor& map_values, std::size_t e) const {
    if (modality_ == Modality::PointCloud) return map_values[e];
    if (modality_ == Modality::Volume) return map_values[e];
    double sum = 0.0;
    for (std::size_t c = 0; c < scalars_; ++c) sum += map_values[e * channel_stride_ + c];
    return sum;
}

void ElementLayout::overwrite(Tensor& x, std::size_t e, const Tensor& source) const {
    for (std::size_t s = 0; s < scalars_; ++s) {
        const std::size_t i = scalar_offset(e, s);
        x.values()[i] = source[i];
    }
}

void ElementLayout::set_value(Tensor& x, std::size_t e, double value) const {
    for (std::size_t s = 0; s < scalars_; ++s) {
        x.values()[scalar_offset(e, s)] = value;
    }
}

std::vector<std::size_t> ElementLayout::descending_order(const Tensor& map_values) const {
    std::vector<double> attr(count_);
    for (std::size_t e = 0; e < count_; ++e) attr[e] = attribution(map_values, e);
    std::vector<std::size_t> order(count_);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return attr[i] > attr[j]; });
    return order;
}

} // namespace salev
