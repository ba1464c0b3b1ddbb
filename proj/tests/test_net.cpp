#include <cmath>
#include <vector>

#include "doctest.h"
#include "salev/errors.hpp"
#include "salev/net.hpp"
#include "salev/rng.hpp"
#include "salev/synthetic.hpp"

using namespace salev;

namespace {

// Central finite differences on the target logit.
Tensor fd_gradient(const Network& net, const Tensor& x, std::size_t target, double step) {
    Tensor grad(x.shape());
    Tensor probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = probe[i];
        probe.values()[i] = orig + step;
        const double hi = predict_logit(net, probe, target);
        probe.values()[i] = orig - step;
        const double lo = predict_logit(net, probe, target);
        probe.values()[i] = orig;
        grad[i] = (hi - lo) / (2.0 * step);
    }
    return grad;
}

double max_rel_error(const Tensor& a, const Tensor& b) {
    double scale = 1e-6;
    for (std::size_t i = 0; i < a.size(); ++i) scale = std::max(scale, std::abs(b[i]));
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
    }
    return worst;
}

} // namespace

TEST_CASE("identity dense network reproduces its input") {
    Network net(Modality::PointCloud, {3}, {LayerSpec::dense(3)}, 1);
    std::vector<double> w(net.parameter_count(), 0.0);
    // Row-major weight matrix, then biases.
    w[0] = 1.0;
    w[4] = 1.0;
    w[8] = 1.0;
    net.set_weights(w);

    Tensor x = Tensor::from_values({3}, {1.0, 2.0, 3.0});
    Tensor logits = net.predict({x});
    CHECK(logits[0] == 1.0);
    CHECK(logits[1] == 2.0);
    CHECK(logits[2] == 3.0);

    // Layer 0 of the identity Dense returns the input itself.
    Tensor act = net.activations(x, 0);
    CHECK(act[0] == 1.0);
    CHECK(act[2] == 3.0);
}

TEST_CASE("relu forward") {
    Network net(Modality::PointCloud, {2}, {LayerSpec::relu(), LayerSpec::dense(2)}, 1);
    Tensor x = Tensor::from_values({2}, {-1.0, 2.0});
    Tensor act = net.activations(x, 0);
    CHECK(act[0] == 0.0);
    CHECK(act[1] == 2.0);
}

TEST_CASE("linear network gradient equals its weights") {
    Network net(Modality::PointCloud, {4}, {LayerSpec::dense(2)}, 3);
    Tensor x = Tensor::from_values({4}, {0.3, -0.4, 0.5, 0.9});
    const auto grads = net.gradient({x}, 0);
    const auto& w = net.weights();
    for (std::size_t i = 0; i < 4; ++i) CHECK(grads[0][i] == doctest::Approx(w[i]));
}

TEST_CASE("autodiff matches central finite differences across layer kinds") {
    struct Case {
        Modality modality;
        std::vector<std::size_t> shape;
        std::vector<LayerSpec> layers;
    };
    const std::vector<Case> cases = {
        {Modality::PointCloud, {6},
         {LayerSpec::dense(5), LayerSpec::relu(), LayerSpec::dense(3)}},
        {Modality::Image, {6, 6, 3},
         {LayerSpec::conv2d(4, 3, 1), LayerSpec::relu(), LayerSpec::flatten(),
          LayerSpec::dense(3)}},
        {Modality::Image, {6, 6, 1},
         {LayerSpec::conv2d(3, 2, 2), LayerSpec::relu(), LayerSpec::global_avg_pool(),
          LayerSpec::dense(2)}},
        {Modality::Volume, {5, 5, 5},
         {LayerSpec::conv3d(3, 2, 1), LayerSpec::relu(), LayerSpec::flatten(),
          LayerSpec::dense(3)}},
    };

    Rng rng(7);
    for (const auto& c : cases) {
        for (int trial = 0; trial < 20; ++trial) {
            Network net(c.modality, c.shape, c.layers, rng.next_u64());
            Tensor x(c.shape);
            for (auto& v : x.values()) v = rng.uniform(-1.0, 1.0);
            const std::size_t target = rng.uniform_index(net.num_classes());
            const Tensor ad = net.gradient({x}, target)[0];
            const Tensor fd = fd_gradient(net, x, target, 1e-5);
            CHECK(max_rel_error(ad, fd) <= 1e-4);
        }
    }
}

TEST_CASE("dead relu region has zero gradient") {
    Network net(Modality::PointCloud, {2},
                {LayerSpec::dense(2), LayerSpec::relu(), LayerSpec::dense(2)}, 5);
    // First dense maps to strongly negative preactivations for this input.
    std::vector<double> w(net.parameter_count(), 0.0);
    w[0] = 1.0; // unit 0 <- x0
    w[3] = 1.0; // unit 1 <- x1
    // biases at indices 4,5 stay 0; second dense identity-ish
    w[6] = 1.0;
    w[9] = 1.0;
    net.set_weights(w);
    Tensor x = Tensor::from_values({2}, {-3.0, -5.0});
    const auto g = net.gradient({x}, 0)[0];
    CHECK(g[0] == 0.0);
    CHECK(g[1] == 0.0);
}

TEST_CASE("conv output shapes obey floor((D - k) / s) + 1") {
    Rng rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t d = 6 + rng.uniform_index(6);
        const std::size_t k = 2 + rng.uniform_index(3);
        const std::size_t s = 1 + rng.uniform_index(2);
        Network net(Modality::Image, {d, d, 3},
                    {LayerSpec::conv2d(4, k, s), LayerSpec::flatten(), LayerSpec::dense(2)}, 1);
        const auto& out = net.layer_output_shape(0);
        const std::size_t expect = (d - k) / s + 1;
        CHECK(out[0] == expect);
        CHECK(out[1] == expect);
        CHECK(out[2] == 4);
    }
}

TEST_CASE("forward and training are deterministic under fixed seed") {
    auto ds = make_synthetic_dataset("corner_primitives", 32, 123);
    auto run = [&]() {
        Network net = make_default_network(ds.modality, ds.samples[0].data.shape(),
                                           ds.num_classes, 77);
        TrainOptions opt;
        opt.epochs = 3;
        opt.lr = 0.05;
        opt.seed = 99;
        train(net, ds.samples, opt);
        return net.weights();
    };
    const auto w1 = run();
    const auto w2 = run();
    REQUIRE(w1.size() == w2.size());
    for (std::size_t i = 0; i < w1.size(); ++i) CHECK(w1[i] == w2[i]);
}

TEST_CASE("lr = 0 leaves weights unchanged") {
    auto ds = make_synthetic_dataset("corner_primitives", 16, 3);
    Network net = make_default_network(ds.modality, ds.samples[0].data.shape(), ds.num_classes,
                                       21);
    const auto before = net.weights();
    TrainOptions opt;
    opt.epochs = 2;
    opt.lr = 0.0;
    train(net, ds.samples, opt);
    CHECK(net.weights() == before);
}

TEST_CASE("bright quadrant recipe trains to high accuracy") {
    auto ds = make_synthetic_dataset("bright_quadrant", 128, 2024);
    Network net = make_default_network(ds.modality, ds.samples[0].data.shape(), ds.num_classes,
                                       2024);
    auto opt = default_train_options("bright_quadrant", 2024);
    const auto result = train(net, ds.samples, opt);
    CHECK(result.train_accuracy >= 0.95);
}

TEST_CASE("invalid layer index raises") {
    Network net(Modality::PointCloud, {2}, {LayerSpec::dense(2)}, 1);
    Tensor x({2});
    CHECK_THROWS_AS(net.activations(x, 5), Error);
}

TEST_CASE("penultimate representation has the declared hidden width") {
    Network net(Modality::PointCloud, {6},
                {LayerSpec::dense(5), LayerSpec::relu(), LayerSpec::dense(3)}, 3);
    Tensor x({6});
    for (std::size_t i = 0; i < 6; ++i) x[i] = 0.1 * static_cast<double>(i);
    Tensor rep = net.representation({x});
    CHECK(rep.shape() == std::vector<std::size_t>{1, 5});
}
