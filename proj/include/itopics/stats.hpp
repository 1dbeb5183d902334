#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace itopics::stats {

enum class Method { chi_square, mann_whitney, spearman };

std::string_view to_string(Method m) noexcept;

struct TestResult {
  Method method = Method::chi_square;
  double statistic = 0.0;
  std::optional<double> z;
  double p_value = 1.0;
  std::vector<std::size_t> n;
  double df = 0.0;
  // Set when the test is undefined or uninformative (zero variance, a single
  // populated category, ...). p_value is then 1 unless stated otherwise.
  bool degenerate = false;
  // Set when an expected cell count is below 1.
  bool low_power = false;
  bool exact = false;
};

// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);
// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed directly.
double regularized_gamma_q(double a, double x);
// Regularized incomplete beta I_x(a, b).
double regularized_beta(double x, double a, double b);

double chi_square_sf(double x, double df);
double normal_sf(double z);
// Two-sided p-value of Student's t with df degrees of freedom.
double student_t_two_sided(double t, double df);

// Goodness of fit of counts against expected fractions, df = cells - 1.
// Throws std::invalid_argument when fractions do not sum to 1 (+-1e-9), the
// total count is 0, or any expected count is 0.
TestResult chi_square_gof(std::span<const double> observed, std::span<const double> expected_probs);

// w = sqrt(chi_square / n).
double cohens_w(double chi_square, double n);

enum class MannWhitneyMode { automatic, exact, normal };

// U for sample a (midranks for ties) and a two-sided p-value. The normal
// approximation uses the tie-corrected variance and a 0.5 continuity
// correction in the p-value (z is reported uncorrected); exact enumeration of the
// permutation distribution is used in automatic mode when |a| + |b| <= 12.
TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                          MannWhitneyMode mode = MannWhitneyMode::automatic);

// Pearson correlation of midranks; two-sided p via t with n - 2 df.
TestResult spearman_rho(std::span<const double> x, std::span<const double> y);

// -sum p ln p / ln |p|, 0 ln 0 := 0.
double shannon_entropy_normalized(std::span<const double> p);

// Midranks (1-based), ties share the mean of their positions.
std::vector<double> midranks(std::span<const double> values);

double median(std::vector<double> values);
double mean(std::span<const double> values);

}  // namespace itopics::stats
