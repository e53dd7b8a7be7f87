#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "svqe/circuit.hpp"
#include "svqe/density.hpp"
#include "svqe/diagnostics.hpp"
#include "svqe/pauli.hpp"
#include "svqe/rng.hpp"

namespace svqe {

// Cost weights: C = a <(H - E_tar)^2> + b (<H^2> - <H>^2), expanded as
// (a+b)<H^2> - 2 a E_tar <H> - b <H>^2 + a E_tar^2 with a + b = 1.
struct CostSpec {
  double a = 0.5;
  double b = 0.5;
  double e_tar = 0.0;

  void validate() const {
    if (a < 0 || b < 0) throw std::invalid_argument("CostSpec: weights must be nonnegative");
    if (std::abs(a + b - 1.0) > 1e-12)
      throw std::invalid_argument("CostSpec: a + b must equal 1");
  }
};

// Assemble the cost from first/second moments and an estimate of <H>^2
// (hsq = h1*h1 exactly in the exact path, the U-statistic in shot paths).
inline double cost_from_moments(double h1, double h2, double hsq, const CostSpec& spec) {
  return (spec.a + spec.b) * h2 - 2.0 * spec.a * spec.e_tar * h1 - spec.b * hsq +
         spec.a * spec.e_tar * spec.e_tar;
}

inline double exact_cost(const StateVector& state, const PauliSum& h, const PauliSum& h2,
                         const CostSpec& spec) {
  spec.validate();
  const double m1 = exact_expectation(state, h);
  const double m2 = exact_expectation(state, h2);
  return cost_from_moments(m1, m2, m1 * m1, spec);
}

// Measurement plan: QWC bases, sampling probabilities and per-string coverage.
struct GroupingPlan {
  struct StringEntry {
    PauliString p;
    double alpha = 0.0;  // coefficient in H
    double beta = 0.0;   // coefficient in H^2
    double xi = 0.0;     // coverage = sum_B p_B delta_B
  };
  std::vector<StringEntry> strings;
  std::vector<MeasurementBasis> bases;
  std::vector<double> w_h, w_h2, p_b;
  std::vector<std::vector<int>> covered;  // per basis: indices into strings

  bool empty() const { return bases.empty(); }
};

// Greedy largest-coefficient-first QWC coloring over the union of the strings
// of H and H^2; identity-only qubits of a group's basis default to Z.  A
// string covered by several bases earns coverage credit from each of them.
inline GroupingPlan build_grouping(const PauliSum& h, const PauliSum& h2) {
  if (h.n_qubits() != h2.n_qubits())
    throw std::invalid_argument("build_grouping: qubit-count mismatch");
  const int n = h.n_qubits();

  std::map<PauliString, std::pair<double, double>> merged;
  for (const auto& [p, c] : h.terms()) merged[p].first = c;
  for (const auto& [p, c] : h2.terms()) merged[p].second = c;

  GroupingPlan plan;
  for (const auto& [p, ab] : merged)
    plan.strings.push_back({p, ab.first, ab.second, 0.0});
  if (plan.strings.empty()) return plan;

  std::vector<int> order(plan.strings.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[static_cast<std::size_t>(i)] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    const auto &a = plan.strings[static_cast<std::size_t>(i)], &b = plan.strings[static_cast<std::size_t>(j)];
    const double wa = std::abs(a.alpha) + std::abs(a.beta);
    const double wb = std::abs(b.alpha) + std::abs(b.beta);
    if (wa != wb) return wa > wb;
    return b.p < a.p ? false : a.p < b.p;
  });

  struct Group {
    std::uint64_t gx = 0, gy = 0, gz = 0;
  };
  std::vector<Group> groups;
  for (int idx : order) {
    const auto& p = plan.strings[static_cast<std::size_t>(idx)].p;
    const std::uint64_t px = p.x_mask & ~p.z_mask, py = p.x_mask & p.z_mask,
                        pz = p.z_mask & ~p.x_mask;
    bool placed = false;
    for (auto& g : groups) {
      if ((px & (g.gy | g.gz)) || (py & (g.gx | g.gz)) || (pz & (g.gx | g.gy))) continue;
      g.gx |= px;
      g.gy |= py;
      g.gz |= pz;
      placed = true;
      break;
    }
    if (!placed) groups.push_back({px, py, pz});
  }

  for (const auto& g : groups) {
    MeasurementBasis basis;
    basis.axes.assign(static_cast<std::size_t>(n), 'Z');
    for (int q = 0; q < n; ++q) {
      if ((g.gx >> q) & 1) basis.axes[static_cast<std::size_t>(q)] = 'X';
      else if ((g.gy >> q) & 1) basis.axes[static_cast<std::size_t>(q)] = 'Y';
    }
    plan.bases.push_back(std::move(basis));
  }

  // coverage, weights and probabilities against the full basis set
  plan.covered.resize(plan.bases.size());
  plan.w_h.assign(plan.bases.size(), 0.0);
  plan.w_h2.assign(plan.bases.size(), 0.0);
  double total = 0.0;
  for (std::size_t b = 0; b < plan.bases.size(); ++b) {
    for (std::size_t i = 0; i < plan.strings.size(); ++i) {
      if (!plan.bases[b].covers(plan.strings[i].p)) continue;
      plan.covered[b].push_back(static_cast<int>(i));
      plan.w_h[b] += std::abs(plan.strings[i].alpha);
      plan.w_h2[b] += std::abs(plan.strings[i].beta);
    }
    total += plan.w_h[b] + plan.w_h2[b];
  }
  plan.p_b.assign(plan.bases.size(), 0.0);
  for (std::size_t b = 0; b < plan.bases.size(); ++b)
    plan.p_b[b] = (plan.w_h[b] + plan.w_h2[b]) / total;
  for (std::size_t b = 0; b < plan.bases.size(); ++b)
    for (int i : plan.covered[b]) plan.strings[static_cast<std::size_t>(i)].xi += plan.p_b[b];
  for (const auto& s : plan.strings)
    if (s.xi <= 0.0)
      throw std::runtime_error("build_grouping: string with zero coverage: " + s.p.label());
  return plan;
}

// All shot statistics for one evaluation: basis draws K ~ Mult(S, p_B), then
// per-basis outcome histograms M ~ Mult(K_B, p_q); exactly equivalent to S
// independently drawn shots, at histogram cost.
struct ShotBatch {
  std::uint64_t total_shots = 0;
  std::vector<std::uint64_t> basis_counts;
  std::vector<std::vector<std::pair<std::uint64_t, std::uint64_t>>> histograms;
};

using DistributionSource = std::function<std::vector<double>(const MeasurementBasis&)>;

inline ShotBatch sample_shots(const DistributionSource& source, const GroupingPlan& plan,
                              std::uint64_t shots, std::uint64_t seed) {
  ShotBatch batch;
  batch.total_shots = shots;
  batch.basis_counts.assign(plan.bases.size(), 0);
  batch.histograms.resize(plan.bases.size());
  if (plan.empty() || shots == 0) return batch;

  Rng rng(seed);
  batch.basis_counts = multinomial(rng.engine(), shots, plan.p_b);
  for (std::size_t b = 0; b < plan.bases.size(); ++b) {
    if (batch.basis_counts[b] == 0) continue;
    std::vector<double> dist = source(plan.bases[b]);
    for (double& x : dist) x = std::max(0.0, x);
    auto counts = multinomial(rng.engine(), batch.basis_counts[b], dist);
    for (std::uint64_t q = 0; q < counts.size(); ++q)
      if (counts[q] > 0) batch.histograms[b].emplace_back(q, counts[q]);
  }
  return batch;
}

// First/second-moment estimators plus the running Y sums the U-statistic needs.
struct MomentEstimate {
  double h_hat = 0.0;
  double h2_hat = 0.0;
  double y_sum = 0.0;     // sum_s Y^(s)
  double y_sq_sum = 0.0;  // sum_s (Y^(s))^2
  std::uint64_t shots = 0;
};

inline MomentEstimate estimate_moments(const ShotBatch& batch, const GroupingPlan& plan,
                                       const PauliSum& h, const PauliSum& h2) {
  const double alpha_id = h.identity_coefficient();
  const double beta_id = h2.identity_coefficient();
  MomentEstimate est;
  est.shots = batch.total_shots;
  if (plan.empty()) {
    // identity-only operator: estimates are exact regardless of outcomes
    est.h_hat = alpha_id;
    est.h2_hat = beta_id;
    est.y_sum = alpha_id * static_cast<double>(batch.total_shots);
    est.y_sq_sum = alpha_id * alpha_id * static_cast<double>(batch.total_shots);
    return est;
  }
  if (batch.total_shots == 0)
    throw std::invalid_argument("estimate_moments: empty batch");

  double h2_acc = 0.0;
  for (std::size_t b = 0; b < plan.bases.size(); ++b) {
    for (const auto& [q, mult] : batch.histograms[b]) {
      double y = alpha_id, t2 = 0.0;
      for (int i : plan.covered[b]) {
        const auto& s = plan.strings[static_cast<std::size_t>(i)];
        const double m = std::popcount(q & s.p.support()) & 1 ? -1.0 : 1.0;
        y += s.alpha * m / s.xi;
        t2 += s.beta * m / s.xi;
      }
      const double w = static_cast<double>(mult);
      est.y_sum += w * y;
      est.y_sq_sum += w * y * y;
      h2_acc += w * t2;
    }
  }
  const double S = static_cast<double>(batch.total_shots);
  est.h_hat = est.y_sum / S;
  est.h2_hat = beta_id + h2_acc / S;
  return est;
}

// U-statistic for <H>^2: ((sum Y)^2 - sum Y^2) / (S (S-1)); unbiased because
// it keeps only the s != s' cross terms of independent per-shot contributions.
inline double u_statistic(double y_sum, double y_sq_sum, std::uint64_t shots) {
  if (shots < 2)
    throw std::invalid_argument("u_statistic: needs at least two shots");
  const double S = static_cast<double>(shots);
  return (y_sum * y_sum - y_sq_sum) / (S * (S - 1.0));
}

inline double u_statistic(const std::vector<double>& y, std::uint64_t shots) {
  double s = 0, s2 = 0;
  for (double v : y) {
    s += v;
    s2 += v * v;
  }
  return u_statistic(s, s2, shots);
}

struct CostEstimate {
  double h_hat = 0.0;
  double h2_hat = 0.0;
  double hsq_hat = 0.0;
  double c_hat = 0.0;
  std::uint64_t shots = 0;
};

inline CostEstimate estimate_cost(const ShotBatch& batch, const GroupingPlan& plan,
                                  const PauliSum& h, const PauliSum& h2,
                                  const CostSpec& spec) {
  spec.validate();
  auto m = estimate_moments(batch, plan, h, h2);
  CostEstimate est;
  est.h_hat = m.h_hat;
  est.h2_hat = m.h2_hat;
  est.hsq_hat = plan.empty() ? m.h_hat * m.h_hat
                             : u_statistic(m.y_sum, m.y_sq_sum, m.shots);
  est.c_hat = cost_from_moments(est.h_hat, est.h2_hat, est.hsq_hat, spec);
  est.shots = m.shots;
  return est;
}

// ---------------------------------------------------------------------------
// Cost/moment evaluator abstraction consumed by the optimizers: exact
// statevector, finite-shot pure, or finite-shot noisy evaluation of the same
// bound model.

struct Moments {
  double h = 0.0;
  double h2 = 0.0;
  double hsq = 0.0;
  double c = 0.0;
  std::uint64_t shots = 0;
};

inline Moments exact_moments_statevector(const StateVector& state, const Eigen::MatrixXcd& h_dense,
                                         const CostSpec& spec) {
  Eigen::Map<const Eigen::VectorXcd> psi(state.amps.data(),
                                         static_cast<long>(state.amps.size()));
  Eigen::VectorXcd phi = h_dense.selfadjointView<Eigen::Lower>() * psi;
  Moments m;
  m.h = psi.dot(phi).real();
  m.h2 = phi.squaredNorm();
  m.hsq = m.h * m.h;
  m.c = cost_from_moments(m.h, m.h2, m.hsq, spec);
  return m;
}

inline Moments exact_moments_density(const DensityMatrix& rho, const Eigen::MatrixXcd& h_dense,
                                     const Eigen::MatrixXcd& h2_dense, const CostSpec& spec) {
  Moments m;
  m.h = (rho.rho * h_dense).trace().real();
  m.h2 = (rho.rho * h2_dense).trace().real();
  m.hsq = m.h * m.h;
  m.c = cost_from_moments(m.h, m.h2, m.hsq, spec);
  return m;
}

class Evaluator {
 public:
  virtual ~Evaluator() = default;

  // Estimate (or exactly compute) the cost moments at theta.  The seed selects
  // the shot-noise stream; exact evaluation ignores it.
  virtual Moments evaluate(const std::vector<double>& theta, std::uint64_t seed) = 0;

  virtual std::vector<Moments> evaluate_many(const std::vector<std::vector<double>>& thetas,
                                             const std::vector<std::uint64_t>& seeds) {
    std::vector<Moments> out(thetas.size());
    for (std::size_t i = 0; i < thetas.size(); ++i) out[i] = evaluate(thetas[i], seeds[i]);
    return out;
  }

  // Noise- and shot-free replay of the same circuit for trace diagnostics.
  virtual Moments exact_replay(const std::vector<double>& theta) = 0;
  virtual double replay_fidelity(const std::vector<double>& theta, const StateVector& target) = 0;

  virtual const CostSpec& cost_spec() const = 0;
  virtual std::uint64_t shots_per_evaluation() const { return 0; }
};

// Exact statevector evaluation through the dense Hamiltonian; moments batch
// into one matrix product, which is what makes PSR sweeps cheap.
class ExactEvaluator final : public Evaluator {
 public:
  ExactEvaluator(AnsatzSpec ansatz, const PauliSum& h, CostSpec spec)
      : ansatz_(std::move(ansatz)), spec_(spec), h_dense_(h.to_dense()) {
    spec_.validate();
  }

  Moments evaluate(const std::vector<double>& theta, std::uint64_t) override {
    return exact_moments_statevector(apply_circuit(ansatz_, theta), h_dense_, spec_);
  }

  std::vector<Moments> evaluate_many(const std::vector<std::vector<double>>& thetas,
                                     const std::vector<std::uint64_t>&) override {
    const long dim = h_dense_.rows();
    Eigen::MatrixXcd psis(dim, static_cast<long>(thetas.size()));
    for (std::size_t i = 0; i < thetas.size(); ++i) {
      auto state = apply_circuit(ansatz_, thetas[i]);
      psis.col(static_cast<long>(i)) =
          Eigen::Map<const Eigen::VectorXcd>(state.amps.data(), dim);
    }
    Eigen::MatrixXcd phis = h_dense_.selfadjointView<Eigen::Lower>() * psis;
    std::vector<Moments> out(thetas.size());
    for (std::size_t i = 0; i < thetas.size(); ++i) {
      const long c = static_cast<long>(i);
      Moments m;
      m.h = psis.col(c).dot(phis.col(c)).real();
      m.h2 = phis.col(c).squaredNorm();
      m.hsq = m.h * m.h;
      m.c = cost_from_moments(m.h, m.h2, m.hsq, spec_);
      out[i] = m;
    }
    return out;
  }

  Moments exact_replay(const std::vector<double>& theta) override {
    return evaluate(theta, 0);
  }

  double replay_fidelity(const std::vector<double>& theta, const StateVector& target) override {
    return fidelity(apply_circuit(ansatz_, theta), target);
  }

  const CostSpec& cost_spec() const override { return spec_; }

 private:
  AnsatzSpec ansatz_;
  CostSpec spec_;
  Eigen::MatrixXcd h_dense_;
};

// Finite-shot evaluation of noiseless circuit states.
class ShotEvaluator final : public Evaluator {
 public:
  ShotEvaluator(AnsatzSpec ansatz, PauliSum h, CostSpec spec, std::uint64_t shots)
      : ansatz_(std::move(ansatz)),
        h_(std::move(h)),
        h2_(square_sum(h_)),
        spec_(spec),
        shots_(shots),
        plan_(build_grouping(h_, h2_)),
        h_dense_(h_.to_dense()) {
    spec_.validate();
    if (shots_ < 2) throw std::invalid_argument("ShotEvaluator: needs shots >= 2");
  }

  Moments evaluate(const std::vector<double>& theta, std::uint64_t seed) override {
    auto state = apply_circuit(ansatz_, theta);
    auto batch = sample_shots(
        [&](const MeasurementBasis& b) { return rotated_distribution(state, b); }, plan_,
        shots_, seed);
    auto est = estimate_cost(batch, plan_, h_, h2_, spec_);
    return {est.h_hat, est.h2_hat, est.hsq_hat, est.c_hat, est.shots};
  }

  Moments exact_replay(const std::vector<double>& theta) override {
    return exact_moments_statevector(apply_circuit(ansatz_, theta), h_dense_, spec_);
  }

  double replay_fidelity(const std::vector<double>& theta, const StateVector& target) override {
    return fidelity(apply_circuit(ansatz_, theta), target);
  }

  const CostSpec& cost_spec() const override { return spec_; }
  std::uint64_t shots_per_evaluation() const override { return shots_; }
  const GroupingPlan& plan() const { return plan_; }

 private:
  AnsatzSpec ansatz_;
  PauliSum h_;
  PauliSum h2_;
  CostSpec spec_;
  std::uint64_t shots_;
  GroupingPlan plan_;
  Eigen::MatrixXcd h_dense_;
};

// Finite-shot evaluation of density-matrix circuit states under the
// parametric noise model, including readout flips.
class NoisyShotEvaluator final : public Evaluator {
 public:
  NoisyShotEvaluator(AnsatzSpec ansatz, PauliSum h, CostSpec spec, std::uint64_t shots,
                     NoiseModel noise)
      : ansatz_(std::move(ansatz)),
        h_(std::move(h)),
        h2_(square_sum(h_)),
        spec_(spec),
        shots_(shots),
        noise_(noise),
        plan_(build_grouping(h_, h2_)),
        h_dense_(h_.to_dense()),
        h2_dense_(h_dense_ * h_dense_) {
    spec_.validate();
    noise_.validate();
    if (shots_ < 2) throw std::invalid_argument("NoisyShotEvaluator: needs shots >= 2");
  }

  Moments evaluate(const std::vector<double>& theta, std::uint64_t seed) override {
    auto rho = apply_circuit_noisy(ansatz_, theta, noise_);
    auto batch = sample_shots(
        [&](const MeasurementBasis& b) {
          return noisy_rotated_distribution(rho, b, noise_.readout_flip);
        },
        plan_, shots_, seed);
    auto est = estimate_cost(batch, plan_, h_, h2_, spec_);
    return {est.h_hat, est.h2_hat, est.hsq_hat, est.c_hat, est.shots};
  }

  // Replay reports the noisy density matrix's exact moments: the quantity the
  // estimator is unbiased for under noise.
  Moments exact_replay(const std::vector<double>& theta) override {
    auto rho = apply_circuit_noisy(ansatz_, theta, noise_);
    return exact_moments_density(rho, h_dense_, h2_dense_, spec_);
  }

  double replay_fidelity(const std::vector<double>& theta, const StateVector& target) override {
    return fidelity_rho(apply_circuit_noisy(ansatz_, theta, noise_), target);
  }

  const CostSpec& cost_spec() const override { return spec_; }
  std::uint64_t shots_per_evaluation() const override { return shots_; }
  const NoiseModel& noise() const { return noise_; }

 private:
  AnsatzSpec ansatz_;
  PauliSum h_;
  PauliSum h2_;
  CostSpec spec_;
  std::uint64_t shots_;
  NoiseModel noise_;
  GroupingPlan plan_;
  Eigen::MatrixXcd h_dense_;
  Eigen::MatrixXcd h2_dense_;
};

}  // namespace svqe
