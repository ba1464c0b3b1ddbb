#ifndef SALEV_STATS_HPP
#define SALEV_STATS_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace salev {

double mean(std::span<const double> v);
double sample_sd(std::span<const double> v);      // n-1 denominator
double population_sd(std::span<const double> v);
double median(std::vector<double> v);             // by value, sorts a copy

// Empirical quantile with linear interpolation between order statistics.
double quantile_linear(std::vector<double> v, double q);

double pearson(std::span<const double> a, std::span<const double> b);
double spearman(std::span<const double> a, std::span<const double> b);

// Fractional (average-of-tied-positions) ranks, 1-based, smallest value
// gets rank 1.
std::vector<double> fractional_ranks_ascending(std::span<const double> values);

// Variance of the uniform distribution on {1..n}: (n^2 - 1) / 12.
double random_rank_variance(std::size_t n_methods);

// Kendall's tau-b (tie corrected). Raises AllTied when either input is
// constant.
double kendall_tau(std::span<const double> a, std::span<const double> b);

// Two-sided Wilcoxon-Mann-Whitney p-value. Exact enumeration of all
// C(n1+n2, n1) splits when both group sizes are <= 8, tie-corrected normal
// approximation with continuity correction otherwise. The two paths are
// exposed on their own so they can be cross-validated.
double wilcoxon_mann_whitney(std::span<const double> a, std::span<const double> b);
double wmw_exact_p(std::span<const double> a, std::span<const double> b);
double wmw_normal_p(std::span<const double> a, std::span<const double> b);

enum class LeveneCenter { Mean, Median };

struct LeveneResult {
    double p_value = 1.0; // one-sided
    bool accepted = false;
};

// One-sided Levene test of the observed ranks against the exact uniform
// rank support {1..n_methods}: accepted when the observed group disperses
// significantly less than a random ranking would. Mean centering is the
// default; it calibrates to the nominal alpha at the benchmark's group
// sizes, while the median-centered Brown-Forsythe variant stays available.
LeveneResult levene_one_sided(std::span<const double> observed_ranks, std::size_t n_methods,
                              double alpha = 0.1, LeveneCenter center = LeveneCenter::Mean);

} // namespace salev

#endif
