#include "itopics/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace itopics::stats {
namespace {

constexpr double kEps = 1e-15;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 10000;

double gamma_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxIter; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
double gamma_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double beta_continued_fraction(double x, double a, double b) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return h;
}

double clamp_p(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::chi_square: return "chi_square";
    case Method::mann_whitney: return "mann_whitney";
    case Method::spearman: return "spearman";
  }
  return "unknown";
}

double regularized_gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::invalid_argument("regularized_gamma_p: a > 0, x >= 0 required");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return clamp_p(gamma_series(a, x));
  return clamp_p(1.0 - gamma_continued_fraction(a, x));
}

double regularized_gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::invalid_argument("regularized_gamma_q: a > 0, x >= 0 required");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return clamp_p(1.0 - gamma_series(a, x));
  return clamp_p(gamma_continued_fraction(a, x));
}

double regularized_beta(double x, double a, double b) {
  if (x < 0.0 || x > 1.0 || a <= 0.0 || b <= 0.0) {
    throw std::invalid_argument("regularized_beta: 0 <= x <= 1, a > 0, b > 0 required");
  }
  if (x == 0.0 || x == 1.0) return x;
  const double front =
      std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return clamp_p(front * beta_continued_fraction(x, a, b) / a);
  return clamp_p(1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b);
}

double chi_square_sf(double x, double df) {
  if (df <= 0.0) throw std::invalid_argument("chi_square_sf: df must be positive");
  if (x <= 0.0) return 1.0;
  return regularized_gamma_q(df / 2.0, x / 2.0);
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double student_t_two_sided(double t, double df) {
  if (df <= 0.0) throw std::invalid_argument("student_t_two_sided: df must be positive");
  if (std::isinf(t)) return 0.0;
  return regularized_beta(df / (df + t * t), df / 2.0, 0.5);
}

TestResult chi_square_gof(std::span<const double> observed, std::span<const double> expected_probs) {
  if (observed.size() != expected_probs.size() || observed.empty()) {
    throw std::invalid_argument("chi_square_gof: observed and expected must have the same nonzero length");
  }
  const double prob_sum = std::accumulate(expected_probs.begin(), expected_probs.end(), 0.0);
  if (std::fabs(prob_sum - 1.0) > 1e-9) throw std::invalid_argument("chi_square_gof: expected fractions must sum to 1");
  const double total = std::accumulate(observed.begin(), observed.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("chi_square_gof: total observed count must be positive");

  TestResult r;
  r.method = Method::chi_square;
  r.n = {static_cast<std::size_t>(std::llround(total))};
  r.df = static_cast<double>(observed.size() - 1);
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (observed[i] < 0.0) throw std::invalid_argument("chi_square_gof: negative count");
    const double expected = total * expected_probs[i];
    if (!(expected > 0.0)) throw std::invalid_argument("chi_square_gof: expected count of zero");
    if (expected < 1.0) r.low_power = true;
    const double diff = observed[i] - expected;
    r.statistic += diff * diff / expected;
  }
  if (r.df == 0.0) {
    r.degenerate = true;
    r.p_value = 1.0;
  } else {
    r.p_value = chi_square_sf(r.statistic, r.df);
  }
  return r;
}

double cohens_w(double chi_square, double n) {
  if (chi_square < 0.0 || !(n > 0.0)) throw std::invalid_argument("cohens_w: chi_square >= 0 and n > 0 required");
  return std::sqrt(chi_square / n);
}

std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b, MannWhitneyMode mode) {
  if (a.empty() || b.empty()) throw std::invalid_argument("mann_whitney_u: both samples must be non-empty");
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  const std::size_t n = na + nb;

  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::vector<double> ranks = midranks(pooled);

  const double rank_sum_a = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(na), 0.0);
  const double u = rank_sum_a - static_cast<double>(na) * (na + 1) / 2.0;
  const double mu = static_cast<double>(na) * nb / 2.0;

  // Tie correction: sum of t^3 - t over tie groups.
  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  const double nd = static_cast<double>(n);
  const double variance =
      static_cast<double>(na) * nb / 12.0 * ((nd + 1.0) - (n > 1 ? tie_term / (nd * (nd - 1.0)) : 0.0));

  TestResult r;
  r.method = Method::mann_whitney;
  r.statistic = u;
  r.n = {na, nb};
  if (!(variance > 1e-12)) {
    r.degenerate = true;
    r.z = 0.0;
    r.p_value = 1.0;
    return r;
  }
  const double sigma = std::sqrt(variance);
  r.z = (u - mu) / sigma;

  const bool use_exact = mode == MannWhitneyMode::exact || (mode == MannWhitneyMode::automatic && n <= 12);
  if (!use_exact) {
    // continuity correction of 0.5 on |U - mu|; z itself stays uncorrected
    const double corrected = std::max(std::fabs(u - mu) - 0.5, 0.0) / sigma;
    r.p_value = clamp_p(2.0 * normal_sf(corrected));
    return r;
  }
  if (n > 28) throw std::invalid_argument("mann_whitney_u: exact enumeration limited to 28 observations");

  // Permutation distribution of U over every way of choosing na of the pooled
  // midranks for sample a.
  const double observed_dev = std::fabs(u - mu);
  const double offset = static_cast<double>(na) * (na + 1) / 2.0;
  std::uint64_t extreme = 0;
  std::uint64_t total = 0;
  std::vector<std::size_t> pick(na);
  std::iota(pick.begin(), pick.end(), 0);
  while (true) {
    double rs = 0.0;
    for (std::size_t idx : pick) rs += ranks[idx];
    if (std::fabs(rs - offset - mu) >= observed_dev - 1e-9) ++extreme;
    ++total;
    // next combination
    std::size_t i = na;
    while (i > 0 && pick[i - 1] == n - na + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < na; ++j) pick[j] = pick[j - 1] + 1;
  }
  r.exact = true;
  r.p_value = clamp_p(static_cast<double>(extreme) / static_cast<double>(total));
  return r;
}

TestResult spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3) {
    throw std::invalid_argument("spearman_rho: samples must have equal length >= 3");
  }
  const std::vector<double> rx = midranks(x);
  const std::vector<double> ry = midranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  TestResult r;
  r.method = Method::spearman;
  r.n = {x.size()};
  r.df = n - 2.0;
  if (sxx <= 0.0 || syy <= 0.0) {
    r.degenerate = true;
    r.statistic = 0.0;
    r.p_value = 1.0;
    return r;
  }
  const double rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  r.statistic = rho;
  if (std::fabs(rho) >= 1.0 - 1e-15) {
    r.p_value = 0.0;
  } else {
    const double t = rho * std::sqrt((n - 2.0) / (1.0 - rho * rho));
    r.z = t;
    r.p_value = student_t_two_sided(t, n - 2.0);
  }
  return r;
}

double shannon_entropy_normalized(std::span<const double> p) {
  if (p.size() < 2) throw std::invalid_argument("shannon_entropy_normalized: at least two categories required");
  double sum = 0.0;
  double h = 0.0;
  for (double pi : p) {
    if (pi < 0.0) throw std::invalid_argument("shannon_entropy_normalized: negative probability");
    sum += pi;
    if (pi > 0.0) h -= pi * std::log(pi);
  }
  if (std::fabs(sum - 1.0) > 1e-9) throw std::invalid_argument("shannon_entropy_normalized: probabilities must sum to 1");
  return std::clamp(h / std::log(static_cast<double>(p.size())), 0.0, 1.0);
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return (values[mid - 1] + values[mid]) / 2.0;
}

double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean of an empty sample");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace itopics::stats
