#include <cmath>
#include <limits>

#include "doctest.h"
#include "salev/data.hpp"
#include "salev/errors.hpp"
#include "salev/rng.hpp"

using namespace salev;

TEST_CASE("postprocess clamps negatives then min-max normalizes") {
    Tensor raw = Tensor::from_values({4}, {-1.0, 0.0, 2.0, 4.0});
    Tensor out = postprocess_saliency(raw);
    CHECK(out[0] == 0.0);
    CHECK(out[1] == 0.0);
    CHECK(out[2] == doctest::Approx(0.5));
    CHECK(out[3] == 1.0);
}

TEST_CASE("postprocess maps constant inputs to all zeros") {
    Tensor zeros = Tensor::from_values({3}, {0.0, 0.0, 0.0});
    CHECK(postprocess_saliency(zeros).sum() == 0.0);

    // Constant after clamping is still constant.
    Tensor flat = Tensor::from_values({3}, {0.3, 0.3, 0.3});
    Tensor out = postprocess_saliency(flat);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == 0.0);
}

TEST_CASE("postprocess rejects non-finite input") {
    Tensor bad = Tensor::from_values({2}, {1.0, std::numeric_limits<double>::quiet_NaN()});
    CHECK_THROWS_WITH_AS(postprocess_saliency(bad), doctest::Contains("NonFiniteInput"), Error);
}

TEST_CASE("postprocess is idempotent") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor raw({37});
        for (auto& v : raw.values()) v = rng.uniform(-2.0, 2.0);
        Tensor once = postprocess_saliency(raw);
        Tensor twice = postprocess_saliency(once);
        for (std::size_t i = 0; i < once.size(); ++i) {
            CHECK(once[i] == doctest::Approx(twice[i]).epsilon(1e-15));
        }
    }
}

TEST_CASE("validate_pair accepts congruent shapes and rejects mismatches") {
    InputSample img{Modality::Image, Tensor({8, 8, 3}), 0, "a"};
    CHECK_NOTHROW(validate_pair(img, SaliencyMap{Tensor({8, 8, 3}), "VG"}));

    InputSample cloud{Modality::PointCloud, Tensor({1024, 3}), 0, "b"};
    CHECK_NOTHROW(validate_pair(cloud, SaliencyMap{Tensor({1024}), "VG"}));

    InputSample vol{Modality::Volume, Tensor({28, 28, 28}), 0, "c"};
    CHECK_THROWS_AS(validate_pair(vol, SaliencyMap{Tensor({28, 28, 27}), "VG"}), Error);
}

TEST_CASE("modality shape rules") {
    CHECK_THROWS_AS(validate_modality_shape(Modality::Image, {8, 8, 2}), Error);
    CHECK_NOTHROW(validate_modality_shape(Modality::Image, {8, 8, 1}));
    CHECK_THROWS_AS(validate_modality_shape(Modality::PointCloud, {10, 2}), Error);
}

TEST_CASE("criterion sets partition the 20 metrics 11/6/3") {
    CHECK(criterion_metrics(Criterion::Faithfulness).size() == 11);
    CHECK(criterion_metrics(Criterion::Robustness).size() == 6);
    CHECK(criterion_metrics(Criterion::Complexity).size() == 3);
    CHECK(all_metric_ids().size() == 20);
    for (const auto& id : all_metric_ids()) {
        CHECK(is_known_metric(id));
        CHECK_NOTHROW(metric_orientation(id));
    }
}

namespace {

ScoreTensor small_tensor() {
    ScoreAxes axes;
    axes.datasets = {"d0"};
    axes.architectures = {"a0"};
    axes.methods = {"m0"};
    axes.metrics = {"FC", "PF"};
    axes.n_observations = 3;
    return ScoreTensor(axes);
}

} // namespace

TEST_CASE("standardize_scores z-scores per (metric, dataset) group") {
    ScoreTensor t = small_tensor();
    t.set(0, 0, 0, 0, 0, 1.0);
    t.set(0, 0, 0, 0, 1, 2.0);
    t.set(0, 0, 0, 0, 2, 3.0);
    t.set(0, 0, 0, 1, 0, 5.0);
    t.set(0, 0, 0, 1, 1, 5.0);
    t.set(0, 0, 0, 1, 2, 5.0);

    ScoreTensor z = standardize_scores(t);
    CHECK(z.at(0, 0, 0, 0, 0) == doctest::Approx(-1.224744871391589));
    CHECK(z.at(0, 0, 0, 0, 1) == doctest::Approx(0.0));
    CHECK(z.at(0, 0, 0, 0, 2) == doctest::Approx(1.224744871391589));
    // Degenerate zero-SD group maps to zeros.
    for (std::size_t o = 0; o < 3; ++o) CHECK(z.at(0, 0, 0, 1, o) == 0.0);
}

TEST_CASE("standardize_scores: groups standardized independently, brute-force oracle") {
    ScoreAxes axes;
    axes.datasets = {"d0", "d1"};
    axes.architectures = {"a0"};
    axes.methods = {"m0", "m1"};
    axes.metrics = {"FC", "PF"};
    axes.n_observations = 4;
    ScoreTensor t(axes);
    Rng rng(3);
    for (std::size_t d = 0; d < 2; ++d)
        for (std::size_t f = 0; f < 2; ++f)
            for (std::size_t e = 0; e < 2; ++e)
                for (std::size_t o = 0; o < 4; ++o)
                    t.set(d, 0, f, e, o, rng.uniform(-3.0, 9.0));

    ScoreTensor z = standardize_scores(t);

    for (std::size_t d = 0; d < 2; ++d) {
        for (std::size_t e = 0; e < 2; ++e) {
            // Brute-force per-group mean/SD on the raw values.
            std::vector<double> group;
            for (std::size_t f = 0; f < 2; ++f)
                for (std::size_t o = 0; o < 4; ++o) group.push_back(t.at(d, 0, f, e, o));
            double m = 0.0;
            for (double v : group) m += v;
            m /= static_cast<double>(group.size());
            double var = 0.0;
            for (double v : group) var += (v - m) * (v - m);
            var /= static_cast<double>(group.size());
            const double sd = std::sqrt(var);

            double zm = 0.0, zs = 0.0;
            std::vector<double> zvals;
            for (std::size_t f = 0; f < 2; ++f)
                for (std::size_t o = 0; o < 4; ++o) {
                    const double expect = (t.at(d, 0, f, e, o) - m) / sd;
                    CHECK(z.at(d, 0, f, e, o) == doctest::Approx(expect).epsilon(1e-12));
                    zvals.push_back(z.at(d, 0, f, e, o));
                }
            for (double v : zvals) zm += v;
            zm /= static_cast<double>(zvals.size());
            for (double v : zvals) zs += (v - zm) * (v - zm);
            zs = std::sqrt(zs / static_cast<double>(zvals.size()));
            CHECK(std::abs(zm) < 1e-12);
            CHECK(std::abs(zs - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("score tensor records missing cells explicitly") {
    ScoreTensor t = small_tensor();
    t.set(0, 0, 0, 0, 0, 1.0);
    t.set_missing(0, 0, 0, 0, 1);
    CHECK(t.present(0, 0, 0, 0, 0));
    CHECK_FALSE(t.present(0, 0, 0, 0, 1));
    CHECK(std::isnan(t.at(0, 0, 0, 0, 1)));
    CHECK_THROWS_AS(t.set(0, 0, 0, 0, 2, std::numeric_limits<double>::infinity()), Error);
}
