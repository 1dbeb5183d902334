#pragma once

// Slow, direct reference implementations used to check the library. They
// share no code with it: statistics are computed from their textbook
// definitions and the Laplacian pseudo-inverse comes from Eigen.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Upper tail of chi-square with integer df, closed forms for even and odd df.
inline double chi_square_sf(double x, int df) {
  if (x <= 0.0) return 1.0;
  if (df % 2 == 0) {
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < df / 2; ++k) {
      term *= (x / 2.0) / k;
      sum += term;
    }
    return std::exp(-x / 2.0) * sum;
  }
  double sum = 0.0, term = 0.0;
  for (int j = 1; j <= (df - 1) / 2; ++j) {
    term = j == 1 ? std::sqrt(x) : term * x / (2.0 * j - 1.0);
    sum += term;
  }
  return std::erfc(std::sqrt(x / 2.0)) + std::sqrt(2.0 / M_PI) * std::exp(-x / 2.0) * sum;
}

inline double chi_square_stat(const std::vector<double>& obs, const std::vector<double>& probs) {
  const double n = std::accumulate(obs.begin(), obs.end(), 0.0);
  double s = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double e = n * probs[i];
    s += (obs[i] - e) * (obs[i] - e) / e;
  }
  return s;
}

// U for `a` by pairwise comparison, ties counting one half.
inline double mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0.0;
  for (double x : a) {
    for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
  }
  return u;
}

// Two-sided permutation p: share of all relabelings whose U is at least as
// far from the mean as the observed one.
inline double mann_whitney_exact_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> all(a);
  all.insert(all.end(), b.begin(), b.end());
  const std::size_t n = all.size(), m = a.size();
  const double mu = static_cast<double>(a.size() * b.size()) / 2.0;
  const double observed = std::fabs(mann_whitney_u(a, b) - mu);
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(m), true);
  std::size_t hits = 0, total = 0;
  do {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < n; ++i) (pick[i] ? x : y).push_back(all[i]);
    if (std::fabs(mann_whitney_u(x, y) - mu) >= observed - 1e-9) ++hits;
    ++total;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return static_cast<double>(hits) / static_cast<double>(total);
}

// Rank of each value: 1 + (number smaller) + (number equal - 1) / 2.
inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      if (w < v[i]) ++less;
      if (w == v[i]) ++equal;
    }
    r[i] = 1.0 + less + (equal - 1.0) / 2.0;
  }
  return r;
}

// Normal approximation via the variance of the rank sum of `a` drawn
// without replacement from the pooled midranks, continuity corrected.
inline double mann_whitney_normal_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> all(a);
  all.insert(all.end(), b.begin(), b.end());
  const auto r = ranks(all);
  const double n = static_cast<double>(all.size()), m = static_cast<double>(a.size());
  const double rbar = (n + 1.0) / 2.0;
  double ss = 0.0;
  for (double x : r) ss += (x - rbar) * (x - rbar);
  const double var = m * (n - m) / (n * (n - 1.0)) * ss;
  const double u = mann_whitney_u(a, b);
  const double z = std::max(std::fabs(u - m * (n - m) / 2.0) - 0.5, 0.0) / std::sqrt(var);
  return std::erfc(z / std::sqrt(2.0));
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(ranks(x), ranks(y));
}

// Two-sided Student-t tail by Simpson integration of the density.
inline double student_t_two_sided(double t, double df) {
  const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * M_PI);
  auto f = [&](double x) { return c * std::pow(1.0 + x * x / df, -(df + 1) / 2); };
  const double a = 0.0, b = std::fabs(t);
  const int steps = 200000;
  const double h = (b - a) / steps;
  double s = f(a) + f(b);
  for (int i = 1; i < steps; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return 1.0 - 2.0 * s * h / 3.0;
}

inline double entropy_normalized(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0) h -= x * std::log(x);
  }
  return h / std::log(static_cast<double>(p.size()));
}

// Information centrality of a connected graph from the Moore-Penrose
// pseudo-inverse of its Laplacian.
inline std::vector<double> information_centrality(const std::vector<std::vector<double>>& w) {
  const auto n = static_cast<Eigen::Index>(w.size());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      lap(i, j) = -w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      lap(i, i) += w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  const Eigen::MatrixXd pinv = lap.completeOrthogonalDecomposition().pseudoInverse();
  std::vector<double> c(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) sum += pinv(i, i) + pinv(j, j) - 2.0 * pinv(i, j);
    c[static_cast<std::size_t>(i)] = static_cast<double>(n - 1) / sum;
  }
  return c;
}

inline Eigen::MatrixXd laplacian_pinv(const std::vector<std::vector<double>>& w) {
  const auto n = static_cast<Eigen::Index>(w.size());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      lap(i, j) = -w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      lap(i, i) += w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return lap.completeOrthogonalDecomposition().pseudoInverse();
}


// Random connected weighted graph: a random spanning tree plus extra edges,
// weights uniform in [0.1, 2].
inline std::vector<std::vector<double>> random_connected_graph(std::mt19937_64& rng, std::size_t n,
                                                               double extra_edge_prob = 0.3) {
  std::uniform_real_distribution<double> weight(0.1, 2.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t parent = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
    w[i][parent] = w[parent][i] = weight(rng);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (w[i][j] == 0.0 && coin(rng) < extra_edge_prob) w[i][j] = w[j][i] = weight(rng);
    }
  }
  return w;
}

}  // namespace oracle
