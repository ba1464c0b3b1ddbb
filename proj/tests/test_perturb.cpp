#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "salev/elements.hpp"
#include "salev/errors.hpp"
#include "salev/perturb.hpp"
#include "salev/rng.hpp"

using namespace salev;

TEST_CASE("gaussian blur leaves constant images unchanged") {
    Tensor img({9, 9, 3}, 0.4);
    Tensor out = gaussian_blur(img, 1.5);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == doctest::Approx(0.4));
}

TEST_CASE("gaussian blur of an impulse reproduces the kernel") {
    const double sigma = 1.0;
    Tensor img({15, 15, 1});
    img[(7 * 15 + 7) * 1] = 1.0;
    Tensor out = gaussian_blur(img, sigma);

    // Direct kernel evaluation.
    const long long radius = static_cast<long long>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double norm = 0.0;
    for (long long i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        norm += kernel[i + radius];
    }
    for (auto& k : kernel) k /= norm;

    for (long long dx = -radius; dx <= radius; ++dx) {
        for (long long dy = -radius; dy <= radius; ++dy) {
            const double expect = kernel[dx + radius] * kernel[dy + radius];
            const double got = out[((7 + dx) * 15 + (7 + dy)) * 1];
            CHECK(std::abs(got - expect) < 1e-9);
        }
    }
}

TEST_CASE("stronger blur pulls pixels monotonically toward the mean") {
    Rng rng(3);
    Tensor img({12, 12, 1});
    for (auto& v : img.values()) v = rng.uniform(0.0, 1.0);
    const double mean = img.sum() / static_cast<double>(img.size());

    auto deviation = [&](const Tensor& t) {
        double d = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) d += std::abs(t[i] - mean);
        return d;
    };
    const Tensor mild = gaussian_blur(img, 1.0);
    const Tensor strong = gaussian_blur(img, 4.0);
    CHECK(deviation(strong) < deviation(mild));
    CHECK(deviation(mild) < deviation(img));
}

TEST_CASE("slic on a uniform 8x8 image with 4 segments gives 4 quadrants") {
    Tensor img({8, 8, 3}, 0.5);
    Segmentation seg = slic(img, Modality::Image, 4, 10.0);
    CHECK(seg.n_segments == 4);
    // Membership is constant within each quadrant.
    for (std::size_t x = 0; x < 8; ++x) {
        for (std::size_t y = 0; y < 8; ++y) {
            const int expect = seg.assignment[((x / 4) * 4) * 8 + (y / 4) * 4];
            CHECK(seg.assignment[x * 8 + y] == expect);
        }
    }
    // Each segment has 16 elements.
    std::vector<int> counts(4, 0);
    for (int l : seg.assignment) counts[l]++;
    for (int c : counts) CHECK(c == 16);
}

TEST_CASE("slic separates a two-tone image on the tone edge") {
    Tensor img({8, 8, 1});
    for (std::size_t x = 0; x < 8; ++x) {
        for (std::size_t y = 0; y < 8; ++y) {
            img[x * 8 + y] = x < 4 ? 0.0 : 1.0;
        }
    }
    Segmentation seg = slic(img, Modality::Image, 2, 0.5);
    CHECK(seg.n_segments == 2);
    for (std::size_t x = 0; x < 8; ++x) {
        for (std::size_t y = 0; y < 8; ++y) {
            CHECK(seg.assignment[x * 8 + y] == seg.assignment[x * 8]);
        }
    }
    CHECK(seg.assignment[0] != seg.assignment[7 * 8]);
}

TEST_CASE("slic assigns every element exactly one label, 3d included") {
    Rng rng(9);
    Tensor vol({7, 7, 7});
    for (auto& v : vol.values()) v = rng.uniform(0.0, 1.0);
    Segmentation seg = slic(vol, Modality::Volume, 8, 1.0);
    CHECK(seg.assignment.size() == vol.size());
    std::set<int> seen(seg.assignment.begin(), seg.assignment.end());
    CHECK(static_cast<int>(seen.size()) == seg.n_segments);
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == seg.n_segments - 1);
}

TEST_CASE("slic reports TooManySegments") {
    Tensor img({4, 4, 1}, 0.0);
    CHECK_THROWS_AS(slic(img, Modality::Image, 50, 10.0), Error);
}

namespace {

Tensor blob_cloud(std::size_t blobs, std::size_t per_blob, double radius, Rng& rng) {
    Tensor cloud({blobs * per_blob, 3});
    for (std::size_t b = 0; b < blobs; ++b) {
        // Blob centers on a coarse 3d lattice, far apart relative to radius.
        const double cx = static_cast<double>(b % 4) * 10.0;
        const double cy = static_cast<double>((b / 4) % 4) * 10.0;
        const double cz = static_cast<double>(b / 16) * 10.0;
        for (std::size_t i = 0; i < per_blob; ++i) {
            const std::size_t p = b * per_blob + i;
            cloud[p * 3 + 0] = cx + rng.uniform(-radius, radius);
            cloud[p * 3 + 1] = cy + rng.uniform(-radius, radius);
            cloud[p * 3 + 2] = cz + rng.uniform(-radius, radius);
        }
    }
    return cloud;
}

} // namespace

TEST_CASE("kmeans recovers well-separated blobs exactly") {
    Rng rng(17);
    const std::size_t per_blob = 12;
    Tensor cloud = blob_cloud(16, per_blob, 0.3, rng);
    Segmentation seg = kmeans_points(cloud, 16, 25, 5);
    CHECK(seg.n_segments == 16);
    for (std::size_t b = 0; b < 16; ++b) {
        const int label = seg.assignment[b * per_blob];
        for (std::size_t i = 1; i < per_blob; ++i) {
            CHECK(seg.assignment[b * per_blob + i] == label);
        }
    }
}

TEST_CASE("kmeans with k = N puts each point in its own segment") {
    Rng rng(21);
    Tensor cloud = blob_cloud(8, 1, 0.1, rng);
    Segmentation seg = kmeans_points(cloud, 8, 10, 1);
    std::set<int> labels(seg.assignment.begin(), seg.assignment.end());
    CHECK(labels.size() == 8);
}

TEST_CASE("kmeans objective is non-increasing over iterations") {
    Rng rng(33);
    Tensor cloud({120, 3});
    for (auto& v : cloud.values()) v = rng.uniform(-1.0, 1.0);

    auto sse = [&](const Segmentation& seg, int k) {
        std::vector<double> centers(static_cast<std::size_t>(k) * 3, 0.0);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t p = 0; p < 120; ++p) {
            const auto c = static_cast<std::size_t>(seg.assignment[p]);
            for (int j = 0; j < 3; ++j) centers[c * 3 + j] += cloud[p * 3 + j];
            counts[c]++;
        }
        for (int c = 0; c < k; ++c) {
            for (int j = 0; j < 3; ++j) {
                if (counts[c] > 0) centers[c * 3 + j] /= static_cast<double>(counts[c]);
            }
        }
        double total = 0.0;
        for (std::size_t p = 0; p < 120; ++p) {
            const auto c = static_cast<std::size_t>(seg.assignment[p]);
            for (int j = 0; j < 3; ++j) {
                const double d = cloud[p * 3 + j] - centers[c * 3 + j];
                total += d * d;
            }
        }
        return total;
    };

    double prev = 1e300;
    for (int iters = 1; iters <= 12; iters += 2) {
        const double cur = sse(kmeans_points(cloud, 6, iters, 7), 6);
        CHECK(cur <= prev + 1e-9);
        prev = cur;
    }
}

TEST_CASE("kmeans rejects too few points") {
    Tensor cloud({4, 3});
    CHECK_THROWS_AS(kmeans_points(cloud, 16), Error);
}

TEST_CASE("imputation fills a surrounded pixel with the neighbor value") {
    Tensor img({5, 5, 1}, 0.7);
    std::vector<std::uint8_t> removed(25, 0);
    removed[2 * 5 + 2] = 1;
    Tensor before = img;
    before.values()[(2 * 5 + 2)] = 99.0; // garbage that should be replaced
    Tensor out = noisy_linear_imputation(before, Modality::Image, removed, 0.0, 0);
    CHECK(out[2 * 5 + 2] == doctest::Approx(0.7).epsilon(1e-6));
}

TEST_CASE("imputation restores a linear ramp") {
    // Harmonic functions interpolate linear fields.
    const std::size_t w = 9, h = 9;
    Tensor img({w, h, 1});
    for (std::size_t x = 0; x < w; ++x) {
        for (std::size_t y = 0; y < h; ++y) {
            img[x * h + y] = 0.1 * static_cast<double>(x) + 0.05 * static_cast<double>(y);
        }
    }
    std::vector<std::uint8_t> removed(w * h, 0);
    for (std::size_t y = 1; y < h - 1; ++y) removed[4 * h + y] = 1; // interior line
    Tensor truth = img;
    Tensor wrecked = img;
    for (std::size_t y = 1; y < h - 1; ++y) wrecked.values()[4 * h + y] = -5.0;
    Tensor out = noisy_linear_imputation(wrecked, Modality::Image, removed, 0.0, 0);
    for (std::size_t y = 1; y < h - 1; ++y) {
        CHECK(std::abs(out[4 * h + y] - truth[4 * h + y]) < 1e-3);
    }
}

TEST_CASE("imputation on volumes uses the 6-neighborhood") {
    Tensor vol({4, 4, 4}, 1.5);
    std::vector<std::uint8_t> removed(64, 0);
    removed[(1 * 4 + 1) * 4 + 1] = 1;
    Tensor out = noisy_linear_imputation(vol, Modality::Volume, removed, 0.0, 0);
    CHECK(out[(1 * 4 + 1) * 4 + 1] == doctest::Approx(1.5).epsilon(1e-6));
}

TEST_CASE("imputation in clouds averages the 4 nearest kept points") {
    Tensor cloud({6, 3});
    for (std::size_t p = 0; p < 5; ++p) {
        cloud[p * 3 + 0] = static_cast<double>(p);
        cloud[p * 3 + 1] = 1.0;
        cloud[p * 3 + 2] = 2.0;
    }
    cloud[5 * 3 + 0] = 0.5;
    cloud[5 * 3 + 1] = 1.0;
    cloud[5 * 3 + 2] = 2.0;
    std::vector<std::uint8_t> removed(6, 0);
    removed[5] = 1;
    Tensor out = noisy_linear_imputation(cloud, Modality::PointCloud, removed, 0.0, 0);
    // Nearest kept points to (0.5, 1, 2) are x = 0, 1, 2 and the tie between
    // them resolved by distance: 0 and 1 (0.5), then 2 (1.5), then 3 (2.5).
    CHECK(out[5 * 3 + 0] == doctest::Approx((0.0 + 1.0 + 2.0 + 3.0) / 4.0));
    CHECK(out[5 * 3 + 1] == doctest::Approx(1.0));
    CHECK(out[5 * 3 + 2] == doctest::Approx(2.0));
}

TEST_CASE("imputation is deterministic under a fixed seed") {
    Rng rng(8);
    Tensor img({6, 6, 3});
    for (auto& v : img.values()) v = rng.uniform(0.0, 1.0);
    std::vector<std::uint8_t> removed(36, 0);
    for (std::size_t i = 0; i < 10; ++i) removed[i * 3] = 1;
    Tensor a = noisy_linear_imputation(img, Modality::Image, removed, 0.2, 99);
    Tensor b = noisy_linear_imputation(img, Modality::Image, removed, 0.2, 99);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("imputation rejects empty and full masks") {
    Tensor img({3, 3, 1}, 0.0);
    CHECK_THROWS_AS(
        noisy_linear_imputation(img, Modality::Image, std::vector<std::uint8_t>(9, 0), 0.0, 0),
        Error);
    CHECK_THROWS_AS(
        noisy_linear_imputation(img, Modality::Image, std::vector<std::uint8_t>(9, 1), 0.0, 0),
        Error);
}

TEST_CASE("traversal frame 0 is the identity and the last frame is blank") {
    Rng rng(4);
    Tensor img({6, 5, 3});
    for (auto& v : img.values()) v = rng.uniform(0.1, 1.0);
    const auto frames = x_axis_traversal(img, Modality::Image, 3);
    REQUIRE(frames.size() == 4);
    for (std::size_t i = 0; i < img.size(); ++i) CHECK(frames[0][i] == img[i]);
    CHECK(frames[3].sum() == 0.0);
    // Intermediate frames are shifted copies with zero padding.
    const std::size_t row = 5 * 3;
    for (std::size_t i = 0; i < row; ++i) {
        CHECK(frames[1][2 * row + i] == img[i]);
        CHECK(frames[1][i] == 0.0);
    }
}

TEST_CASE("traversal maps out-of-bound cloud points to the origin") {
    Tensor cloud({3, 3});
    cloud[0] = -1.0;
    cloud[3] = 0.0;
    cloud[6] = 1.0; // x coordinates; y,z zero
    cloud[7] = 0.5;
    const auto frames = x_axis_traversal(cloud, Modality::PointCloud, 2);
    REQUIRE(frames.size() == 3);
    // Full shift (extent 2): the point at the bound moves out -> origin.
    const Tensor& last = frames[2];
    CHECK(last[6] == 0.0);
    CHECK(last[7] == 0.0);
    CHECK(last[8] == 0.0);
    // The leftmost point lands exactly on the right bound and stays.
    CHECK(last[0] == doctest::Approx(1.0));
}

TEST_CASE("all perturbations preserve shape and finiteness") {
    Rng rng(12);
    Tensor img({8, 8, 3});
    for (auto& v : img.values()) v = rng.uniform(0.0, 1.0);
    CHECK(gaussian_blur(img, 2.0).all_finite());

    std::vector<std::uint8_t> removed(64, 0);
    removed[10] = removed[11] = 1;
    Tensor imp = noisy_linear_imputation(img, Modality::Image, removed, 0.1, 3);
    CHECK(imp.all_finite());
    CHECK(imp.shape() == img.shape());

    for (const auto& f : x_axis_traversal(img, Modality::Image, 4)) {
        CHECK(f.all_finite());
        CHECK(f.shape() == img.shape());
    }
}
