#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "svqe/ansatz.hpp"
#include "svqe/circuit.hpp"
#include "svqe/pauli.hpp"

namespace svqe {

inline constexpr int density_qubit_limit = 6;

// Simplified parametric hardware noise: one single-qubit depolarizing channel
// (p1) after each Ry/Rz rotation pair, one two-qubit depolarizing channel (p2)
// after each CZ, and independent readout bit flips at measurement.
struct NoiseModel {
  double p1 = 0.0;
  double p2 = 0.0;
  double readout_flip = 0.0;

  void validate() const {
    if (p1 < 0 || p1 > 1) throw std::invalid_argument("NoiseModel: p1 outside [0,1]");
    if (p2 < 0 || p2 > 1) throw std::invalid_argument("NoiseModel: p2 outside [0,1]");
    if (readout_flip < 0 || readout_flip > 0.5)
      throw std::invalid_argument("NoiseModel: readout_flip outside [0,1/2]");
  }
  bool is_zero() const { return p1 == 0.0 && p2 == 0.0 && readout_flip == 0.0; }
};

struct DensityMatrix {
  int n_qubits = 0;
  Eigen::MatrixXcd rho;

  static DensityMatrix zero_state(int n) {
    DensityMatrix d;
    d.n_qubits = n;
    const long dim = 1l << n;
    d.rho = Eigen::MatrixXcd::Zero(dim, dim);
    d.rho(0, 0) = 1.0;
    return d;
  }

  double purity() const { return rho.squaredNorm(); }
};

namespace channels {

inline void apply_1q_rho(Eigen::MatrixXcd& rho, int q, const Eigen::Matrix2cd& g) {
  const long step = 1l << q, dim = rho.rows();
  for (long col = 0; col < dim; ++col) {  // rho <- G rho
    for (long base = 0; base < dim; base += 2 * step) {
      for (long i = base; i < base + step; ++i) {
        const complexd a0 = rho(i, col), a1 = rho(i + step, col);
        rho(i, col) = g(0, 0) * a0 + g(0, 1) * a1;
        rho(i + step, col) = g(1, 0) * a0 + g(1, 1) * a1;
      }
    }
  }
  for (long row = 0; row < dim; ++row) {  // rho <- rho G^dag
    for (long base = 0; base < dim; base += 2 * step) {
      for (long i = base; i < base + step; ++i) {
        const complexd a0 = rho(row, i), a1 = rho(row, i + step);
        rho(row, i) = a0 * std::conj(g(0, 0)) + a1 * std::conj(g(0, 1));
        rho(row, i + step) = a0 * std::conj(g(1, 0)) + a1 * std::conj(g(1, 1));
      }
    }
  }
}

inline void apply_cz_rho(Eigen::MatrixXcd& rho, int q1, int q2) {
  const long both = (1l << q1) | (1l << q2), dim = rho.rows();
  for (long c = 0; c < dim; ++c)
    for (long r = 0; r < dim; ++r) {
      bool sr = (r & both) == both, sc = (c & both) == both;
      if (sr != sc) rho(r, c) = -rho(r, c);
    }
}

// rho <- (1-p) rho + p (I/2 tensor Tr_q rho); full depolarization at p=1.
inline void depolarize(Eigen::MatrixXcd& rho, std::uint64_t qubit_mask, double p) {
  if (p == 0.0) return;
  const long dim = rho.rows();
  const double mix = p / static_cast<double>(1ull << std::popcount(qubit_mask));
  Eigen::MatrixXcd out = (1.0 - p) * rho;
  for (long r = 0; r < dim; ++r) {
    for (long c = 0; c < dim; ++c) {
      // Tr over the masked qubits contributes only where they agree.
      if ((static_cast<std::uint64_t>(r) & qubit_mask) !=
          (static_cast<std::uint64_t>(c) & qubit_mask))
        continue;
      complexd t{0, 0};
      // sum rho over all settings of the masked qubits (diagonal in them)
      std::uint64_t sub = 0;
      do {
        long rr = static_cast<long>((static_cast<std::uint64_t>(r) & ~qubit_mask) | sub);
        long cc = static_cast<long>((static_cast<std::uint64_t>(c) & ~qubit_mask) | sub);
        t += rho(rr, cc);
        sub = (sub - qubit_mask) & qubit_mask;  // next subset of the mask
      } while (sub != 0);
      out(r, c) += mix * t;
    }
  }
  rho.swap(out);
}

}  // namespace channels

inline DensityMatrix apply_circuit_noisy(const AnsatzSpec& ansatz,
                                         const std::vector<double>& theta,
                                         const NoiseModel& noise) {
  noise.validate();
  if (ansatz.n_qubits > density_qubit_limit)
    throw std::domain_error("apply_circuit_noisy: " + std::to_string(ansatz.n_qubits) +
                            " qubits exceeds density limit " +
                            std::to_string(density_qubit_limit));
  if (static_cast<int>(theta.size()) != ansatz.parameter_count())
    throw std::invalid_argument("apply_circuit_noisy: parameter-count mismatch");

  DensityMatrix d = DensityMatrix::zero_state(ansatz.n_qubits);
  Eigen::Matrix2cd g;
  for (int layer = 0; layer <= ansatz.depth; ++layer) {
    for (int q = 0; q < ansatz.n_qubits; ++q) {
      const double a = theta[static_cast<std::size_t>(ansatz.ry_index(layer, q))];
      const double b = theta[static_cast<std::size_t>(ansatz.rz_index(layer, q))];
      g << std::cos(a / 2), -std::sin(a / 2), std::sin(a / 2), std::cos(a / 2);
      channels::apply_1q_rho(d.rho, q, g);
      g << std::polar(1.0, -b / 2), 0, 0, std::polar(1.0, b / 2);
      channels::apply_1q_rho(d.rho, q, g);
      channels::depolarize(d.rho, 1ull << q, noise.p1);
    }
    if (layer < ansatz.depth) {
      for (auto [a, b] : ansatz.entangler) {
        channels::apply_cz_rho(d.rho, a, b);
        channels::depolarize(d.rho, (1ull << a) | (1ull << b), noise.p2);
      }
    }
  }
  return d;
}

// Rotate into the measurement basis, take the diagonal, then convolve each
// qubit's outcome with an independent symmetric bit flip.
inline std::vector<double> noisy_rotated_distribution(const DensityMatrix& d,
                                                      const MeasurementBasis& basis,
                                                      double readout_flip) {
  if (basis.n_qubits() != d.n_qubits)
    throw std::invalid_argument("noisy_rotated_distribution: basis length mismatch");
  if (readout_flip < 0 || readout_flip > 0.5)
    throw std::invalid_argument("noisy_rotated_distribution: readout_flip outside [0,1/2]");
  Eigen::MatrixXcd rho = d.rho;
  Eigen::Matrix2cd g;
  const double r = 1.0 / std::sqrt(2.0);
  for (int q = 0; q < d.n_qubits; ++q) {
    char axis = basis.axes[static_cast<std::size_t>(q)];
    if (axis == 'X') {
      g << r, r, r, -r;
      channels::apply_1q_rho(rho, q, g);
    } else if (axis == 'Y') {
      g << complexd(r, 0), complexd(0, -r), complexd(0, -r), complexd(r, 0);
      channels::apply_1q_rho(rho, q, g);
    }
  }
  std::vector<double> p(static_cast<std::size_t>(rho.rows()));
  for (long c = 0; c < rho.rows(); ++c) p[static_cast<std::size_t>(c)] = std::max(0.0, rho(c, c).real());
  for (int q = 0; q < d.n_qubits; ++q) {
    if (readout_flip == 0.0) break;
    const std::uint64_t bit = 1ull << q;
    for (std::uint64_t c = 0; c < p.size(); ++c) {
      if (c & bit) continue;
      const double a = p[c], b = p[c | bit];
      p[c] = (1 - readout_flip) * a + readout_flip * b;
      p[c | bit] = readout_flip * a + (1 - readout_flip) * b;
    }
  }
  return p;
}

// Tr[rho P] for a single string, then summed over a PauliSum.
inline double expectation_rho(const DensityMatrix& d, const PauliSum& h) {
  if (d.n_qubits != h.n_qubits())
    throw std::invalid_argument("expectation_rho: qubit-count mismatch");
  const long dim = d.rho.rows();
  complexd acc = static_cast<double>(h.identity_coefficient()) * d.rho.trace();
  for (const auto& [p, coeff] : h.terms()) {
    const complexd c0 = phase_value(std::popcount(p.x_mask & p.z_mask));
    complexd tr{0, 0};
    for (long c = 0; c < dim; ++c) {
      double sign = std::popcount(static_cast<std::uint64_t>(c) & p.z_mask) & 1 ? -1.0 : 1.0;
      tr += d.rho(c, static_cast<long>(static_cast<std::uint64_t>(c) ^ p.x_mask)) * c0 * sign;
    }
    acc += coeff * tr;
  }
  return acc.real();
}

inline double fidelity_rho(const DensityMatrix& d, const StateVector& pure) {
  if (d.n_qubits != pure.n_qubits)
    throw std::invalid_argument("fidelity_rho: qubit-count mismatch");
  const long dim = d.rho.rows();
  complexd acc{0, 0};
  for (long r = 0; r < dim; ++r)
    for (long c = 0; c < dim; ++c)
      acc += std::conj(pure.amps[static_cast<std::size_t>(r)]) * d.rho(r, c) *
             pure.amps[static_cast<std::size_t>(c)];
  return std::max(0.0, acc.real());
}

}  // namespace svqe
