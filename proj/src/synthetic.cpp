#include "salev/synthetic.hpp"

#include <cmath>

#include "salev/errors.hpp"
#include "salev/rng.hpp"

namespace salev {

namespace {

InputSample make_bright_quadrant(std::size_t label, Rng& rng, std::size_t index) {
    const std::size_t w = 16, h = 16, c = 3;
    Tensor data({w, h, c});
    for (auto& v : data.values()) v = rng.uniform(0.0, 0.3);
    const std::size_t x0 = (label % 2) * (w / 2);
    const std::size_t y0 = (label / 2) * (h / 2);
    for (std::size_t x = x0; x < x0 + w / 2; ++x) {
        for (std::size_t y = y0; y < y0 + h / 2; ++y) {
            for (std::size_t ch = 0; ch < c; ++ch) {
                data[(x * h + y) * c + ch] += rng.uniform(0.5, 0.7);
            }
        }
    }
    return {Modality::Image, std::move(data), label, "img-" + std::to_string(index)};
}

InputSample make_bright_octant(std::size_t label, Rng& rng, std::size_t index) {
    const std::size_t d = 12;
    Tensor data({d, d, d});
    for (auto& v : data.values()) v = rng.uniform(0.0, 0.3);
    const std::size_t x0 = (label & 1) * (d / 2);
    const std::size_t y0 = ((label >> 1) & 1) * (d / 2);
    const std::size_t z0 = ((label >> 2) & 1) * (d / 2);
    for (std::size_t x = x0; x < x0 + d / 2; ++x) {
        for (std::size_t y = y0; y < y0 + d / 2; ++y) {
            for (std::size_t z = z0; z < z0 + d / 2; ++z) {
                data[(x * d + y) * d + z] += rng.uniform(0.5, 0.7);
            }
        }
    }
    return {Modality::Volume, std::move(data), label, "vol-" + std::to_string(index)};
}

// Shared body of 192 loose points plus 64 points forming a class-specific
// primitive in a class-specific corner. The discriminative signal sits in a
// known point range, which gives faithful saliency a known hot region.
InputSample make_corner_primitive(std::size_t label, Rng& rng, std::size_t index) {
    const std::size_t n = 256, body = 192;
    Tensor data({n, 3});
    for (std::size_t i = 0; i < body; ++i) {
        for (std::size_t d = 0; d < 3; ++d) data[i * 3 + d] = rng.uniform(-0.4, 0.4);
    }
    const double cx = (label % 2 == 0) ? -0.75 : 0.75;
    const double cy = (label / 2 == 0) ? -0.75 : 0.75;
    const double cz = 0.6;
    for (std::size_t i = body; i < n; ++i) {
        double px = 0.0, py = 0.0, pz = 0.0;
        switch (label) {
        case 0: { // sphere surface
            const double theta = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
            const double u = rng.uniform(-1.0, 1.0);
            const double r = 0.18;
            const double s = std::sqrt(1.0 - u * u);
            px = r * s * std::cos(theta);
            py = r * s * std::sin(theta);
            pz = r * u;
            break;
        }
        case 1: { // cube surface
            const double r = 0.16;
            const std::size_t face = static_cast<std::size_t>(rng.uniform_index(6));
            double a = rng.uniform(-r, r), b = rng.uniform(-r, r);
            const double sgn = (face % 2 == 0) ? -r : r;
            if (face < 2) { px = sgn; py = a; pz = b; }
            else if (face < 4) { px = a; py = sgn; pz = b; }
            else { px = a; py = b; pz = sgn; }
            break;
        }
        case 2: { // ring in the xy plane
            const double theta = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
            const double r = 0.2;
            px = r * std::cos(theta);
            py = r * std::sin(theta);
            pz = rng.uniform(-0.02, 0.02);
            break;
        }
        default: { // vertical segment
            px = rng.uniform(-0.03, 0.03);
            py = rng.uniform(-0.03, 0.03);
            pz = rng.uniform(-0.3, 0.3);
            break;
        }
        }
        data[i * 3 + 0] = cx + px;
        data[i * 3 + 1] = cy + py;
        data[i * 3 + 2] = cz + pz;
    }
    return {Modality::PointCloud, std::move(data), label, "pc-" + std::to_string(index)};
}

} // namespace

SyntheticDataset make_synthetic_dataset(const std::string& recipe, std::size_t n_samples,
                                        std::uint64_t seed) {
    SyntheticDataset ds;
    ds.recipe = recipe;
    Rng rng(Rng::mix(seed, 0x64617461u));
    if (recipe == "bright_quadrant") {
        ds.modality = Modality::Image;
        ds.num_classes = 4;
    } else if (recipe == "bright_octant") {
        ds.modality = Modality::Volume;
        ds.num_classes = 8;
    } else if (recipe == "corner_primitives") {
        ds.modality = Modality::PointCloud;
        ds.num_classes = 4;
    } else {
        raise(ErrorCode::InvalidSpec, "unknown recipe '" + recipe + "'");
    }
    ds.samples.reserve(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const std::size_t label = i % ds.num_classes;
        switch (ds.modality) {
        case Modality::Image: ds.samples.push_back(make_bright_quadrant(label, rng, i)); break;
        case Modality::Volume: ds.samples.push_back(make_bright_octant(label, rng, i)); break;
        case Modality::PointCloud:
            ds.samples.push_back(make_corner_primitive(label, rng, i));
            break;
        }
    }
    return ds;
}

Network make_default_network(Modality modality, const std::vector<std::size_t>& input_shape,
                             std::size_t num_classes, std::uint64_t seed,
                             const std::string& architecture) {
    // Architecture variants share topology and differ by width; they exist so
    // multi-architecture aggregation paths have real cells to chew on.
    const bool wide = architecture == "wide";
    switch (modality) {
    case Modality::Image: {
        const std::size_t c1 = wide ? 12 : 8, c2 = wide ? 12 : 8;
        std::vector<LayerSpec> layers = {
            LayerSpec::conv2d(c1, 4, 2), LayerSpec::relu(),
            LayerSpec::conv2d(c2, 3, 2), LayerSpec::relu(),
            LayerSpec::flatten(),        LayerSpec::dense(num_classes),
        };
        return Network(modality, input_shape, layers, seed);
    }
    case Modality::Volume: {
        const std::size_t c1 = wide ? 8 : 6;
        std::vector<LayerSpec> layers = {
            LayerSpec::conv3d(c1, 4, 2), LayerSpec::relu(),
            LayerSpec::flatten(),        LayerSpec::dense(num_classes),
        };
        return Network(modality, input_shape, layers, seed);
    }
    case Modality::PointCloud: {
        const std::size_t h1 = wide ? 96 : 64, h2 = wide ? 48 : 32;
        std::vector<LayerSpec> layers = {
            LayerSpec::flatten(),   LayerSpec::dense(h1), LayerSpec::relu(),
            LayerSpec::dense(h2),   LayerSpec::relu(),    LayerSpec::dense(num_classes),
        };
        return Network(modality, input_shape, layers, seed);
    }
    }
    raise(ErrorCode::Internal, "bad modality");
}

TrainOptions default_train_options(const std::string& recipe, std::uint64_t seed) {
    TrainOptions opt;
    opt.seed = seed;
    if (recipe == "bright_quadrant") {
        opt.epochs = 60;
        opt.lr = 0.2;
        opt.batch_size = 32;
    } else if (recipe == "bright_octant") {
        opt.epochs = 60;
        opt.lr = 0.2;
        opt.batch_size = 32;
    } else {
        opt.epochs = 80;
        opt.lr = 0.1;
        opt.batch_size = 32;
    }
    return opt;
}

} // namespace salev
