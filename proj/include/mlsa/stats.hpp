#ifndef MLSA_STATS_HPP
#define MLSA_STATS_HPP

#include <string>
#include <utility>
#include <vector>

namespace mlsa {

/// P(range of k iid standard normals <= r).
double normal_range_cdf(double r, int k);

/// CDF of the studentized range statistic: the range of k iid standard
/// normal means divided by an independent sqrt(chi^2_df / df), evaluated
/// by adaptive quadrature.
double studentized_range_cdf(double q, int k, int df);

/// Upper-alpha quantile: q with CDF(q; k, df) = 1 - alpha, inverted by
/// bisection on [0, 100] to absolute tolerance 1e-4.
double studentized_range_quantile(double alpha, int k, int df);

/// One Tukey HSD row. Pairs are ordered lexicographically by group name
/// (case-insensitive) and meandiff = mean(group2) - mean(group1), so the
/// confidence interval is meandiff +- q * sqrt(MSE/n).
struct PairComparison {
  std::string group1;
  std::string group2;
  double meandiff = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  bool reject = false;
  double alpha = 0.0;
  double q_crit = 0.0;
};

/// All-pairs comparison of equally sized groups at family-wise error rate
/// alpha. MSE pools within-group squared deviations over N - k degrees of
/// freedom. Unequal group sizes are rejected.
std::vector<PairComparison> tukey_hsd(
    const std::vector<std::pair<std::string, std::vector<double>>>& groups,
    double alpha);

enum class EffectMagnitude { Negligible, Small, Medium, Large, VeryLarge, Huge };

const char* magnitude_name(EffectMagnitude m);

struct EffectSize {
  double d = 0.0;
  EffectMagnitude magnitude = EffectMagnitude::Negligible;
};

/// Cohen's d = (mean(g2) - mean(g1)) / pooled sample SD, with the extended
/// magnitude ladder on |d|: <0.2 negligible, <0.5 small, <0.8 medium,
/// <1.2 large, <2.0 very large, otherwise huge.
EffectSize cohens_d(const std::vector<double>& g1, const std::vector<double>& g2);

} // namespace mlsa

#endif
