#include <algorithm>
#include <cmath>

#include "salev/errors.hpp"
#include "salev/metrics.hpp"

namespace salev {

MetricScore sparseness(const SaliencyMap& map) {
    std::vector<double> a = map.values.values();
    for (auto& v : a) v = std::abs(v);
    const double total = std::accumulate(a.begin(), a.end(), 0.0);
    if (total <= 0.0) return {0.0, true};
    std::sort(a.begin(), a.end());
    const double n = static_cast<double>(a.size());
    double weighted = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        weighted += static_cast<double>(i + 1) * a[i];
    }
    return {2.0 * weighted / (n * total) - (n + 1.0) / n, false};
}

MetricScore complexity(const SaliencyMap& map) {
    double total = 0.0;
    for (std::size_t i = 0; i < map.values.size(); ++i) total += std::abs(map.values[i]);
    if (total <= 0.0) return {0.0, true};
    double entropy = 0.0;
    for (std::size_t i = 0; i < map.values.size(); ++i) {
        const double p = std::abs(map.values[i]) / total;
        if (p > 0.0) entropy -= p * std::log(p);
    }
    return {entropy, false};
}

MetricScore effective_complexity(const SaliencyMap& map, double epsilon) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < map.values.size(); ++i) {
        if (std::abs(map.values[i]) > epsilon) ++count;
    }
    return {static_cast<double>(count), false};
}

} // namespace salev
