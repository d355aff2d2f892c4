#include "mlsa/stats.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>

#include "mlsa/errors.hpp"

namespace mlsa {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
constexpr double kInvSqrt2 = 0.7071067811865475244008444;

double norm_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }
double norm_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

/// Adaptive Simpson with the usual Richardson error estimate.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double tol,
                        int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m);
  double rm = 0.5 * (m + b);
  double flm = f(lm);
  double frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  double fa = f(a);
  double fb = f(b);
  double m = 0.5 * (a + b);
  double fm = f(m);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

/// log density of s = sqrt(chi^2_df / df).
double log_scaled_chi_pdf(double s, int df) {
  double v = static_cast<double>(df);
  return 0.5 * v * std::log(v) - std::lgamma(0.5 * v) - (0.5 * v - 1.0) * std::log(2.0) +
         (v - 1.0) * std::log(s) - 0.5 * v * s * s;
}

} // namespace

double normal_range_cdf(double r, int k) {
  if (k < 2) throw ValidationError("studentized range: k must be >= 2");
  if (r <= 0.0) return 0.0;
  auto integrand = [r, k](double z) {
    double band = norm_cdf(z) - norm_cdf(z - r);
    if (band <= 0.0) return 0.0;
    return norm_pdf(z) * std::pow(band, k - 1);
  };
  // Mass outside [-9, 9 ] is below 1e-18 regardless of r.
  return static_cast<double>(k) * integrate(integrand, -9.0, 9.0, 1e-12);
}

double studentized_range_cdf(double q, int k, int df) {
  if (k < 2) throw ValidationError("studentized range: k must be >= 2");
  if (df < 1) throw ValidationError("studentized range: df must be >= 1");
  if (q <= 0.0) return 0.0;

  auto integrand = [q, k, df](double s) {
    if (s <= 0.0) return 0.0;
    double logf = log_scaled_chi_pdf(s, df);
    if (logf < -745.0) return 0.0;
    return std::exp(logf) * normal_range_cdf(q * s, k);
  };
  // The scale factor concentrates near 1 with spread ~ 1/sqrt(2 df).
  double hi = 1.0 + 12.0 / std::sqrt(static_cast<double>(df));
  return integrate(integrand, 0.0, hi, 1e-9);
}

double studentized_range_quantile(double alpha, int k, int df) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ValidationError("studentized range: alpha must be in (0,1)");
  if (k < 2) throw ValidationError("studentized range: k must be >= 2");
  if (df < 1) throw ValidationError("studentized range: df must be >= 1");

  const double target = 1.0 - alpha;
  double lo = 0.0;
  double hi = 100.0;
  if (studentized_range_cdf(hi, k, df) < target)
    throw Error("studentized range: quantile outside [0, 100]");
  while (hi - lo > 1e-4) {
    double mid = 0.5 * (lo + hi);
    if (studentized_range_cdf(mid, k, df) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

bool name_less(const std::string& a, const std::string& b) {
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    int ca = std::tolower(static_cast<unsigned char>(a[i]));
    int cb = std::tolower(static_cast<unsigned char>(b[i]));
    if (ca != cb) return ca < cb;
  }
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b; // total order for names differing only in case
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
  double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

} // namespace

std::vector<PairComparison> tukey_hsd(
    const std::vector<std::pair<std::string, std::vector<double>>>& groups,
    double alpha) {
  if (groups.size() < 2) throw ValidationError("tukey_hsd: need at least 2 groups");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ValidationError("tukey_hsd: alpha must be in (0,1)");

  const std::size_t k = groups.size();
  const std::size_t n = groups[0].second.size();
  if (n < 2) throw ValidationError("tukey_hsd: group sizes must be >= 2");
  for (const auto& [name, values] : groups)
    if (values.size() != n)
      throw ValidationError("tukey_hsd: unequal group sizes ('" + name + "' has " +
                            std::to_string(values.size()) + ", expected " +
                            std::to_string(n) + ")");

  std::vector<std::size_t> order(k);
  for (std::size_t i = 0; i < k; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return name_less(groups[a].first, groups[b].first);
  });
  for (std::size_t i = 1; i < k; ++i)
    if (groups[order[i - 1]].first == groups[order[i]].first)
      throw ValidationError("tukey_hsd: duplicate group name '" +
                            groups[order[i]].first + "'");

  const std::size_t N = k * n;
  double ssw = 0.0;
  std::vector<double> means(k);
  for (std::size_t gi = 0; gi < k; ++gi) {
    means[gi] = mean_of(groups[gi].second);
    for (double x : groups[gi].second) ssw += (x - means[gi]) * (x - means[gi]);
  }
  double mse = ssw / static_cast<double>(N - k);
  double q = studentized_range_quantile(alpha, static_cast<int>(k),
                                        static_cast<int>(N - k));
  double half_width = q * std::sqrt(mse / static_cast<double>(n));

  std::vector<PairComparison> out;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      const std::size_t a = order[i], b = order[j];
      PairComparison pc;
      pc.group1 = groups[a].first;
      pc.group2 = groups[b].first;
      pc.meandiff = means[b] - means[a];
      pc.ci_lower = pc.meandiff - half_width;
      pc.ci_upper = pc.meandiff + half_width;
      pc.reject = std::abs(pc.meandiff) > half_width;
      pc.alpha = alpha;
      pc.q_crit = q;
      out.push_back(std::move(pc));
    }
  return out;
}

const char* magnitude_name(EffectMagnitude m) {
  switch (m) {
    case EffectMagnitude::Negligible: return "negligible";
    case EffectMagnitude::Small: return "small";
    case EffectMagnitude::Medium: return "medium";
    case EffectMagnitude::Large: return "large";
    case EffectMagnitude::VeryLarge: return "very_large";
    case EffectMagnitude::Huge: return "huge";
  }
  return "?";
}

EffectSize cohens_d(const std::vector<double>& g1, const std::vector<double>& g2) {
  if (g1.size() < 2 || g2.size() < 2)
    throw ValidationError("cohens_d: each group needs at least 2 values");
  double n1 = static_cast<double>(g1.size());
  double n2 = static_cast<double>(g2.size());
  double pooled = ((n1 - 1.0) * sample_variance(g1) + (n2 - 1.0) * sample_variance(g2)) /
                  (n1 + n2 - 2.0);
  if (pooled <= 0.0) throw ValidationError("cohens_d: zero pooled variance");

  EffectSize es;
  es.d = (mean_of(g2) - mean_of(g1)) / std::sqrt(pooled);
  double a = std::abs(es.d);
  if (a < 0.2)
    es.magnitude = EffectMagnitude::Negligible;
  else if (a < 0.5)
    es.magnitude = EffectMagnitude::Small;
  else if (a < 0.8)
    es.magnitude = EffectMagnitude::Medium;
  else if (a < 1.2)
    es.magnitude = EffectMagnitude::Large;
  else if (a < 2.0)
    es.magnitude = EffectMagnitude::VeryLarge;
  else
    es.magnitude = EffectMagnitude::Huge;
  return es;
}

} // namespace mlsa
