#include "salev/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>

#include "salev/errors.hpp"

namespace salev {

double mean(std::span<const double> v) {
    if (v.empty()) raise(ErrorCode::EmptyGroup, "mean of empty set");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double population_sd(std::span<const double> v) {
    if (v.empty()) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

double median(std::vector<double> v) {
    if (v.empty()) raise(ErrorCode::EmptyGroup, "median of empty set");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double quantile_linear(std::vector<double> v, double q) {
    if (v.empty()) raise(ErrorCode::EmptyGroup, "quantile of empty set");
    if (q < 0.0 || q > 1.0) raise(ErrorCode::InvalidArgument, "quantile must be in [0,1]");
    std::sort(v.begin(), v.end());
    const double h = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        raise(ErrorCode::InvalidArgument, "pearson needs two equal series of length >= 2");
    }
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) {
        raise(ErrorCode::DegenerateGroups, "pearson with zero-variance series");
    }
    return sab / std::sqrt(saa * sbb);
}

std::vector<double> fractional_ranks_ascending(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0; // mean of positions i..j
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<const double> a, std::span<const double> b) {
    const auto ra = fractional_ranks_ascending(a);
    const auto rb = fractional_ranks_ascending(b);
    return pearson(ra, rb);
}

double random_rank_variance(std::size_t n_methods) {
    if (n_methods < 2) raise(ErrorCode::InvalidArgument, "need at least 2 methods");
    const double n = static_cast<double>(n_methods);
    return (n * n - 1.0) / 12.0;
}

double kendall_tau(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        raise(ErrorCode::InvalidArgument, "kendall_tau needs equal lengths >= 2");
    }
    const std::size_t n = a.size();
    long long concordant = 0, discordant = 0, ties_a = 0, ties_b = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double da = a[i] - a[j];
            const double db = b[i] - b[j];
            if (da == 0.0 && db == 0.0) {
                ++ties_a;
                ++ties_b;
            } else if (da == 0.0) {
                ++ties_a;
            } else if (db == 0.0) {
                ++ties_b;
            } else if ((da > 0.0) == (db > 0.0)) {
                ++concordant;
            } else {
                ++discordant;
            }
        }
    }
    const double n0 = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    const double denom_a = n0 - static_cast<double>(ties_a);
    const double denom_b = n0 - static_cast<double>(ties_b);
    if (denom_a <= 0.0 || denom_b <= 0.0) {
        raise(ErrorCode::AllTied, "kendall_tau undefined for a constant ranking");
    }
    return static_cast<double>(concordant - discordant) / std::sqrt(denom_a * denom_b);
}

namespace {

double mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    // U statistic of group a via pooled fractional ranks (handles ties).
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto ranks = fractional_ranks_ascending(pooled);
    double rank_sum_a = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) rank_sum_a += ranks[i];
    const double n1 = static_cast<double>(a.size());
    return rank_sum_a - n1 * (n1 + 1.0) / 2.0;
}

} // namespace

double wmw_exact_p(std::span<const double> a, std::span<const double> b) {
    const std::size_t n1 = a.size();
    const std::size_t n = n1 + b.size();
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto pooled_ranks = fractional_ranks_ascending(pooled);

    double u_obs = 0.0;
    for (std::size_t i = 0; i < n1; ++i) u_obs += pooled_ranks[i];
    u_obs -= static_cast<double>(n1) * (static_cast<double>(n1) + 1.0) / 2.0;

    // Enumerate every split of the pooled ranks into a group of size n1.
    std::vector<std::size_t> idx(n1);
    std::iota(idx.begin(), idx.end(), 0);
    long long total = 0, le = 0, ge = 0;
    const double eps = 1e-9;
    while (true) {
        double u = 0.0;
        for (std::size_t i : idx) u += pooled_ranks[i];
        u -= static_cast<double>(n1) * (static_cast<double>(n1) + 1.0) / 2.0;
        ++total;
        if (u <= u_obs + eps) ++le;
        if (u >= u_obs - eps) ++ge;
        // Next combination in lexicographic order.
        std::size_t k = n1;
        while (k > 0 && idx[k - 1] == n - n1 + k - 1) --k;
        if (k == 0) break;
        ++idx[k - 1];
        for (std::size_t j = k; j < n1; ++j) idx[j] = idx[j - 1] + 1;
    }
    const double p_le = static_cast<double>(le) / static_cast<double>(total);
    const double p_ge = static_cast<double>(ge) / static_cast<double>(total);
    return std::min(1.0, 2.0 * std::min(p_le, p_ge));
}

double wmw_normal_p(std::span<const double> a, std::span<const double> b) {
    const double n1 = static_cast<double>(a.size());
    const double n2 = static_cast<double>(b.size());
    const double n = n1 + n2;
    const double u = mann_whitney_u(a, b);
    const double mu = n1 * n2 / 2.0;

    // Tie correction over the pooled sample.
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::sort(pooled.begin(), pooled.end());
    double tie_term = 0.0;
    std::size_t i = 0;
    while (i < pooled.size()) {
        std::size_t j = i;
        while (j + 1 < pooled.size() && pooled[j + 1] == pooled[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }
    const double var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (var <= 0.0) return 1.0; // every pooled value identical
    const double z = (std::abs(u - mu) - 0.5) / std::sqrt(var);
    if (z <= 0.0) return 1.0;
    boost::math::normal dist;
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, z)));
}

double wilcoxon_mann_whitney(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) {
        raise(ErrorCode::DegenerateGroups, "both groups need >= 2 values");
    }
    if (a.size() <= 8 && b.size() <= 8) {
        return wmw_exact_p(a, b);
    }
    return wmw_normal_p(a, b);
}

LeveneResult levene_one_sided(std::span<const double> observed_ranks, std::size_t n_methods,
                              double alpha, LeveneCenter center) {
    if (observed_ranks.size() < 2) {
        raise(ErrorCode::DegenerateGroups, "need at least 2 observed ranks");
    }
    if (n_methods < 2) raise(ErrorCode::InvalidArgument, "need at least 2 methods");

    std::vector<double> reference(n_methods);
    std::iota(reference.begin(), reference.end(), 1.0);

    auto deviations = [&](std::span<const double> group) {
        const double c = center == LeveneCenter::Mean
                             ? mean(group)
                             : median(std::vector<double>(group.begin(), group.end()));
        std::vector<double> z(group.size());
        for (std::size_t i = 0; i < group.size(); ++i) z[i] = std::abs(group[i] - c);
        return z;
    };

    const auto z_obs = deviations(observed_ranks);
    const auto z_ref = deviations(reference);

    const double m_obs = mean(z_obs);
    const double m_ref = mean(z_ref);
    const double n_obs = static_cast<double>(z_obs.size());
    const double n_ref = static_cast<double>(z_ref.size());
    const double n_total = n_obs + n_ref;
    const double grand = (m_obs * n_obs + m_ref * n_ref) / n_total;

    double between = n_obs * (m_obs - grand) * (m_obs - grand) +
                     n_ref * (m_ref - grand) * (m_ref - grand);
    double within = 0.0;
    for (double z : z_obs) within += (z - m_obs) * (z - m_obs);
    for (double z : z_ref) within += (z - m_ref) * (z - m_ref);

    double p_two;
    if (within <= 0.0) {
        p_two = between > 0.0 ? 0.0 : 1.0;
    } else {
        const double w = (n_total - 2.0) * between / within;
        boost::math::fisher_f dist(1.0, n_total - 2.0);
        p_two = boost::math::cdf(boost::math::complement(dist, w));
    }

    LeveneResult result;
    if (m_obs < m_ref) {
        result.p_value = p_two / 2.0;
        result.accepted = result.p_value < alpha;
    } else if (m_obs == m_ref) {
        // Identical dispersion carries no evidence of a smaller variance.
        result.p_value = 1.0;
        result.accepted = false;
    } else {
        result.p_value = 1.0 - p_two / 2.0;
        result.accepted = false;
    }
    return result;
}

} // namespace salev
