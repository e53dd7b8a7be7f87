#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace svqe {

inline double mean(const std::vector<double>& x) {
  if (x.empty()) throw std::invalid_argument("mean: empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// Unbiased sample variance (n - 1 denominator).
inline double sample_variance(const std::vector<double>& x) {
  if (x.size() < 2) throw std::invalid_argument("sample_variance: needs n >= 2");
  const double m = mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return acc / static_cast<double>(x.size() - 1);
}

inline double sample_stddev(const std::vector<double>& x) {
  return std::sqrt(sample_variance(x));
}

inline double standard_error(const std::vector<double>& x) {
  return sample_stddev(x) / std::sqrt(static_cast<double>(x.size()));
}

// 1-based ranks with ties replaced by the average of the ranks they span.
inline std::vector<double> average_ranks(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace detail {

// Regularized incomplete beta I_x(a, b) by the Lentz continued fraction.
inline double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-15, kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

inline double incomplete_beta(double a, double b, double x) {
  if (a <= 0 || b <= 0) throw std::invalid_argument("incomplete_beta: a, b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::betacf(a, b, x) / a;
  return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

// P(T <= t) for Student's t with df degrees of freedom.
inline double student_t_cdf(double t, double df) {
  if (df <= 0) throw std::invalid_argument("student_t_cdf: df must be positive");
  const double x = df / (df + t * t);
  const double half_tail = 0.5 * incomplete_beta(0.5 * df, 0.5, x);
  return t <= 0.0 ? half_tail : 1.0 - half_tail;
}

struct SpearmanResult {
  double rho = 0.0;
  double p_negative = 1.0;  // one-sided p-value for rho < 0
  std::size_t n = 0;
};

// Spearman rank correlation via Pearson correlation of average ranks; the
// one-sided p-value uses the t = rho sqrt((n-2)/(1-rho^2)) approximation.
inline SpearmanResult spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: size mismatch");
  if (x.size() < 3) throw std::invalid_argument("spearman: needs n >= 3");
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double mx = mean(rx), my = mean(ry);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  SpearmanResult out;
  out.n = x.size();
  if (sxx == 0.0 || syy == 0.0) {
    // a constant sequence carries no rank information
    out.rho = 0.0;
    out.p_negative = 1.0;
    return out;
  }
  out.rho = sxy / std::sqrt(sxx * syy);
  const double df = static_cast<double>(out.n) - 2.0;
  if (out.rho <= -1.0 + 1e-15) {
    out.p_negative = 0.0;
  } else if (out.rho >= 1.0 - 1e-15) {
    out.p_negative = 1.0;
  } else {
    const double t = out.rho * std::sqrt(df / (1.0 - out.rho * out.rho));
    out.p_negative = student_t_cdf(t, df);
  }
  return out;
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value series.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsResult out;
  out.statistic = d;
  const double ne = na * nb / (na + nb);
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  // Alternating series; treat non-convergence (tiny lambda) as p = 1.
  const double a2 = -2.0 * lambda * lambda;
  double fac = 2.0, sum = 0.0, term_prev = 0.0;
  out.p_value = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = fac * std::exp(a2 * k * k);
    sum += term;
    if (std::abs(term) <= 0.001 * term_prev || std::abs(term) <= 1e-10 * std::abs(sum)) {
      out.p_value = std::clamp(sum, 0.0, 1.0);
      break;
    }
    fac = -fac;
    term_prev = std::abs(term);
  }
  return out;
}

}  // namespace svqe
