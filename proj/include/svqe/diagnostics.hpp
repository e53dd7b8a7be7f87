#pragma once

#include <cmath>
#include <complex>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "svqe/circuit.hpp"
#include "svqe/pauli.hpp"

namespace svqe {

// Squared overlap |<a|b>|^2: symmetric and global-phase invariant.
inline double fidelity(const StateVector& a, const StateVector& b) {
  if (a.n_qubits != b.n_qubits)
    throw std::invalid_argument("fidelity: qubit-count mismatch");
  complexd ov{0, 0};
  for (std::size_t i = 0; i < a.amps.size(); ++i) ov += std::conj(a.amps[i]) * b.amps[i];
  return std::norm(ov);
}

// Von Neumann entropy (natural log) across the cut A = qubits 0..cut-1.
inline double entanglement_entropy(const StateVector& state, int cut) {
  const int n = state.n_qubits;
  if (cut < 1 || cut > n - 1) throw std::invalid_argument("entanglement_entropy: invalid cut");
  const long da = 1l << cut, db = 1l << (n - cut);
  Eigen::MatrixXcd m(da, db);
  for (long b = 0; b < db; ++b)
    for (long a = 0; a < da; ++a)
      m(a, b) = state.amps[static_cast<std::size_t>(a) | (static_cast<std::size_t>(b) << cut)];
  // Schmidt spectrum from the smaller Gram matrix.
  Eigen::MatrixXcd gram = da <= db ? Eigen::MatrixXcd(m * m.adjoint())
                                   : Eigen::MatrixXcd(m.adjoint() * m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
  double entropy = 0.0;
  for (long i = 0; i < es.eigenvalues().size(); ++i) {
    double lam = es.eigenvalues()(i);
    if (lam > 1e-12) entropy -= lam * std::log(lam);
  }
  return entropy;
}

inline int half_cut(int n_qubits) { return n_qubits / 2; }

// Reduced density matrix on an ordered subset of sites (local qubit j of the
// result corresponds to sites[j]); the remaining qubits are traced out.
inline Eigen::MatrixXcd reduced_density(const StateVector& state,
                                        const std::vector<int>& sites) {
  const int n = state.n_qubits, k = static_cast<int>(sites.size());
  std::uint64_t site_mask = 0;
  for (int s : sites) {
    if (s < 0 || s >= n) throw std::invalid_argument("reduced_density: site out of range");
    site_mask |= 1ull << s;
  }
  if (std::popcount(site_mask) != k)
    throw std::invalid_argument("reduced_density: duplicate sites");
  const long dloc = 1l << k;
  auto scatter = [&](std::uint64_t local) {
    std::uint64_t g = 0;
    for (int j = 0; j < k; ++j)
      if ((local >> j) & 1) g |= 1ull << sites[static_cast<std::size_t>(j)];
    return g;
  };
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dloc, dloc);
  const std::uint64_t rest_mask = ((n == 64 ? ~0ull : (1ull << n) - 1)) & ~site_mask;
  for (long u = 0; u < dloc; ++u) {
    const std::uint64_t gu = scatter(static_cast<std::uint64_t>(u));
    for (long v = 0; v <= u; ++v) {
      const std::uint64_t gv = scatter(static_cast<std::uint64_t>(v));
      complexd acc{0, 0};
      std::uint64_t rest = 0;
      do {  // enumerate the traced-out configurations as subsets of rest_mask
        acc += state.amps[gu | rest] * std::conj(state.amps[gv | rest]);
        rest = (rest - rest_mask) & rest_mask;
      } while (rest != 0);
      rho(u, v) = acc;
      rho(v, u) = std::conj(acc);
    }
  }
  return rho;
}

struct SpectrumResult {
  Eigen::VectorXd eigenvalues;      // ascending
  Eigen::MatrixXcd eigenvectors;    // column k pairs with eigenvalue k
  std::vector<double> entropies;    // half-cut entanglement entropy per eigenstate
  int n_qubits = 0;

  StateVector eigenstate(long k) const {
    StateVector s;
    s.n_qubits = n_qubits;
    s.amps.assign(eigenvectors.col(k).data(), eigenvectors.col(k).data() + eigenvectors.rows());
    return s;
  }
};

inline SpectrumResult eigendecompose(const PauliSum& h) {
  SpectrumResult r;
  r.n_qubits = h.n_qubits();
  Eigen::MatrixXcd dense = h.to_dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigendecompose: eigensolver failed to converge");
  r.eigenvalues = es.eigenvalues();
  r.eigenvectors = es.eigenvectors();
  r.entropies.assign(static_cast<std::size_t>(r.eigenvalues.size()), 0.0);
  if (r.n_qubits >= 2) {
    const int cut = half_cut(r.n_qubits);
    for (long k = 0; k < r.eigenvalues.size(); ++k)
      r.entropies[static_cast<std::size_t>(k)] = entanglement_entropy(r.eigenstate(k), cut);
  }
  return r;
}

// Mean adjacent-gap ratio min(g_n, g_{n+1}) / max(g_n, g_{n+1}) over the middle
// 80% of the spectrum; GOE ~ 0.53, Poisson ~ 0.39.
inline double gap_ratio(const Eigen::VectorXd& eigenvalues, int* skipped_out = nullptr) {
  const long m = eigenvalues.size();
  if (m < 3) throw std::invalid_argument("gap_ratio: need at least 3 eigenvalues");
  const long lo = m / 10, hi = m - m / 10;
  double acc = 0.0;
  int used = 0, skipped = 0;
  for (long n = lo; n + 2 < hi; ++n) {
    const double g1 = eigenvalues(n + 1) - eigenvalues(n);
    const double g2 = eigenvalues(n + 2) - eigenvalues(n + 1);
    if (g1 < 1e-12 || g2 < 1e-12) {
      ++skipped;
      continue;
    }
    acc += std::min(g1, g2) / std::max(g1, g2);
    ++used;
  }
  if (skipped > 0)
    std::cerr << "gap_ratio: skipped " << skipped << " degenerate gap pairs\n";
  if (skipped_out) *skipped_out = skipped;
  if (used == 0) throw std::runtime_error("gap_ratio: no usable gap pairs");
  return acc / used;
}

inline std::string spectrum_csv(const SpectrumResult& r) {
  std::string out = "index,energy,half_cut_entropy\n";
  for (long k = 0; k < r.eigenvalues.size(); ++k)
    out += fmt::format("{},{},{}\n", k, r.eigenvalues(k),
                       r.entropies[static_cast<std::size_t>(k)]);
  return out;
}

}  // namespace svqe
