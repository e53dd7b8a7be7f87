#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "svqe/ansatz.hpp"
#include "svqe/estimator.hpp"
#include "svqe/rng.hpp"
#include "svqe/stats.hpp"

namespace svqe {

// ---------------------------------------------------------------------------
// Parameter-shift differentiation of the cost moments.

enum class MomentKind { h, h2 };

// d<O>/d theta_k = (1/2) [ <O>(theta_k + pi/2) - <O>(theta_k - pi/2) ];
// exact for Ry/Rz rotations whose generators square to the identity.
inline double psr_moment_derivative(Evaluator& eval, const std::vector<double>& theta, int k,
                                    MomentKind kind, std::uint64_t seed = 0) {
  if (k < 0 || static_cast<std::size_t>(k) >= theta.size())
    throw std::invalid_argument("psr_moment_derivative: parameter index out of range");
  constexpr double shift = std::numbers::pi / 2.0;
  std::vector<double> plus = theta, minus = theta;
  plus[static_cast<std::size_t>(k)] += shift;
  minus[static_cast<std::size_t>(k)] -= shift;
  auto mp = eval.evaluate(plus, derive_seed(seed, "psr", 0));
  auto mm = eval.evaluate(minus, derive_seed(seed, "psr", 1));
  const double vp = kind == MomentKind::h ? mp.h : mp.h2;
  const double vm = kind == MomentKind::h ? mm.h : mm.h2;
  return 0.5 * (vp - vm);
}

struct GradientResult {
  std::vector<double> grad;
  Moments unshifted;
  std::uint64_t shots = 0;

  double grad_norm() const {
    double acc = 0.0;
    for (double g : grad) acc += g * g;
    return std::sqrt(acc);
  }
};

// Full cost gradient via parameter shifts:
//   dC/dk = (a+b) d<H^2>/dk - (2 a E_tar + 2 b <H>) d<H>/dk.
// The <H> prefactor comes from a separate unshifted evaluation so that, in
// shot mode, its noise is independent of the shifted-moment noise and the
// product stays unbiased.
inline GradientResult cost_gradient(Evaluator& eval, const std::vector<double>& theta,
                                    std::uint64_t iter_seed) {
  const std::size_t P = theta.size();
  constexpr double shift = std::numbers::pi / 2.0;

  std::vector<std::vector<double>> shifted;
  std::vector<std::uint64_t> seeds;
  shifted.reserve(2 * P);
  seeds.reserve(2 * P);
  for (std::size_t k = 0; k < P; ++k) {
    for (int side = 0; side < 2; ++side) {
      std::vector<double> t = theta;
      t[k] += side == 0 ? shift : -shift;
      shifted.push_back(std::move(t));
      seeds.push_back(derive_seed(iter_seed, "shift", 2 * k + static_cast<std::uint64_t>(side)));
    }
  }

  GradientResult out;
  out.unshifted = eval.evaluate(theta, derive_seed(iter_seed, "unshifted", 0));
  auto moments = eval.evaluate_many(shifted, seeds);
  out.shots = out.unshifted.shots;
  const auto& spec = eval.cost_spec();
  out.grad.resize(P);
  for (std::size_t k = 0; k < P; ++k) {
    const auto& mp = moments[2 * k];
    const auto& mm = moments[2 * k + 1];
    const double dh = 0.5 * (mp.h - mm.h);
    const double dh2 = 0.5 * (mp.h2 - mm.h2);
    out.grad[k] = (spec.a + spec.b) * dh2 -
                  (2.0 * spec.a * spec.e_tar + 2.0 * spec.b * out.unshifted.h) * dh;
    out.shots += mp.shots + mm.shots;
  }
  return out;
}

// ---------------------------------------------------------------------------
// ADAM with bias-corrected moments; the step count increments before the
// corrections so the first step uses t = 1.

struct AdamState {
  double alpha = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t t = 0;
  std::vector<double> m, v;
};

inline void adam_step(AdamState& st, std::vector<double>& theta,
                      const std::vector<double>& grad) {
  if (grad.size() != theta.size())
    throw std::invalid_argument("adam_step: gradient/parameter size mismatch");
  for (std::size_t k = 0; k < grad.size(); ++k)
    if (!std::isfinite(grad[k]))
      throw std::runtime_error("adam_step: non-finite gradient component at index " +
                               std::to_string(k));
  if (st.m.empty()) {
    st.m.assign(theta.size(), 0.0);
    st.v.assign(theta.size(), 0.0);
  }
  if (st.m.size() != theta.size())
    throw std::invalid_argument("adam_step: state sized for a different parameter count");

  ++st.t;
  const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.t));
  for (std::size_t k = 0; k < theta.size(); ++k) {
    st.m[k] = st.beta1 * st.m[k] + (1.0 - st.beta1) * grad[k];
    st.v[k] = st.beta2 * st.v[k] + (1.0 - st.beta2) * grad[k] * grad[k];
    const double mhat = st.m[k] / bc1;
    const double vhat = st.v[k] / bc2;
    theta[k] -= st.alpha * mhat / (std::sqrt(vhat) + st.eps);
  }
}

// ---------------------------------------------------------------------------
// SPSA with the standard decaying schedules
//   c_t = c0 (t+1)^(-gamma),  a_t = a0 / (A + t + 1)^alpha,  t = 0, 1, ...

using SeededCost = std::function<double(const std::vector<double>&, std::uint64_t)>;

struct SpsaState {
  double a0 = 0.0;
  double c0 = 0.0;
  double big_a = 0.0;
  double alpha_exp = 0.602;
  double gamma = 0.101;
  std::uint64_t t = 0;

  double c_at(std::uint64_t t_idx) const {
    return c0 * std::pow(static_cast<double>(t_idx) + 1.0, -gamma);
  }
  double a_at(std::uint64_t t_idx) const {
    return a0 / std::pow(big_a + static_cast<double>(t_idx) + 1.0, alpha_exp);
  }
};

struct SpsaStepInfo {
  double a_t = 0.0;
  double c_t = 0.0;
  double c_plus = 0.0;
  double c_minus = 0.0;
  double c_app = 0.0;  // (c_plus + c_minus) / 2, the free cost proxy
};

// One simultaneous-perturbation step; theta and state mutate only after both
// cost evaluations succeed, and angles wrap back into (-pi, pi].
inline SpsaStepInfo spsa_step(SpsaState& st, std::vector<double>& theta, const SeededCost& cost,
                              std::uint64_t iter_seed) {
  if (st.c0 <= 0.0 || st.a0 <= 0.0)
    throw std::invalid_argument("spsa_step: state not calibrated (a0, c0 must be positive)");
  SpsaStepInfo info;
  info.c_t = st.c_at(st.t);
  info.a_t = st.a_at(st.t);

  Rng delta_rng(derive_seed(iter_seed, "delta", 0));
  std::vector<double> delta(theta.size());
  for (double& d : delta) d = static_cast<double>(delta_rng.sign());

  std::vector<double> plus = theta, minus = theta;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    plus[k] += info.c_t * delta[k];
    minus[k] -= info.c_t * delta[k];
  }
  info.c_plus = cost(plus, derive_seed(iter_seed, "eval", 0));
  info.c_minus = cost(minus, derive_seed(iter_seed, "eval", 1));
  info.c_app = 0.5 * (info.c_plus + info.c_minus);
  if (!std::isfinite(info.c_plus) || !std::isfinite(info.c_minus))
    throw std::runtime_error("spsa_step: non-finite cost evaluation");

  const double diff = (info.c_plus - info.c_minus) / (2.0 * info.c_t);
  for (std::size_t k = 0; k < theta.size(); ++k)
    theta[k] = wrap_angle(theta[k] - info.a_t * diff * delta[k]);  // 1/delta = delta for +-1
  ++st.t;
  return info;
}

// Spall-style calibration: gamma = 0.101, alpha = 0.602, A = 10% of the
// planned iterations; c0 from the cost-noise scale (floored); a0 sized so the
// expected first step moves each angle by about 0.1 rad, from 5 probe pairs.
inline SpsaState spsa_calibrate(const SeededCost& cost, const std::vector<double>& theta0,
                                std::uint64_t iterations, std::uint64_t seed) {
  if (iterations == 0) throw std::invalid_argument("spsa_calibrate: needs iterations >= 1");
  SpsaState st;
  st.big_a = 0.1 * static_cast<double>(iterations);

  constexpr int kStdProbes = 10;
  std::vector<double> samples;
  samples.reserve(kStdProbes);
  for (int i = 0; i < kStdProbes; ++i)
    samples.push_back(cost(theta0, derive_seed(seed, "cal-std", static_cast<std::uint64_t>(i))));
  st.c0 = std::max(sample_stddev(samples), 1e-3);

  constexpr int kGradProbes = 5;
  double mag_acc = 0.0;
  std::size_t mag_count = 0;
  for (int p = 0; p < kGradProbes; ++p) {
    Rng delta_rng(derive_seed(seed, "cal-delta", static_cast<std::uint64_t>(p)));
    std::vector<double> plus = theta0, minus = theta0;
    std::vector<double> delta(theta0.size());
    for (std::size_t k = 0; k < theta0.size(); ++k) {
      delta[k] = static_cast<double>(delta_rng.sign());
      plus[k] += st.c0 * delta[k];
      minus[k] -= st.c0 * delta[k];
    }
    const double cp = cost(plus, derive_seed(seed, "cal-grad", static_cast<std::uint64_t>(2 * p)));
    const double cm =
        cost(minus, derive_seed(seed, "cal-grad", static_cast<std::uint64_t>(2 * p + 1)));
    const double diff = (cp - cm) / (2.0 * st.c0);
    for (std::size_t k = 0; k < theta0.size(); ++k) {
      mag_acc += std::abs(diff * delta[k]);
      ++mag_count;
    }
  }
  const double g_mag = mag_acc / static_cast<double>(mag_count);

  constexpr double kTargetStep = 0.1;  // radians for the first update
  if (g_mag > 1e-12) {
    st.a0 = kTargetStep * std::pow(st.big_a + 1.0, st.alpha_exp) / g_mag;
  } else {
    // no usable gradient signal at theta0: fall back to a blind 0.05 rad step
    st.a0 = 0.05 * std::pow(st.big_a + 1.0, st.alpha_exp);
    std::cerr << "spsa_calibrate: gradient probes were flat; "
                 "falling back to a blind 0.05 rad first step\n";
  }
  return st;
}

}  // namespace svqe
