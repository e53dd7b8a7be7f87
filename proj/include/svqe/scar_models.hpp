#pragma once

#include <cmath>
#include <complex>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>
#include <nlohmann/json.hpp>

#include "svqe/circuit.hpp"
#include "svqe/diagnostics.hpp"
#include "svqe/pauli.hpp"
#include "svqe/rng.hpp"

namespace svqe {

inline constexpr double scar_residual_tol = 1e-8;

struct SMModelSpec {
  int n_qubits = 9;
  double J = 1.0;
  double delta = 0.7;
  double b = 1.0;
  std::uint64_t seed = 0;
};

struct PHModelSpec {
  int n_qubits = 8;
  int D = 4;            // block interaction range
  int chi = 1;          // MPS bond dimension
  std::uint64_t seed = 0;
  double pert_strength = 0.1;
  bool uniform_signs = false;  // test-only: all +1 makes the MPS the ground state
};

struct ScarModel {
  PauliSum hamiltonian{1};
  std::optional<StateVector> scar_state;
  double scar_energy = 0.0;
};

namespace detail {

inline Eigen::Matrix2cd mat_x() { return (Eigen::Matrix2cd() << 0, 1, 1, 0).finished(); }
inline Eigen::Matrix2cd mat_y() {
  return (Eigen::Matrix2cd() << complexd(0, 0), complexd(0, -1), complexd(0, 1),
          complexd(0, 0)).finished();
}
inline Eigen::Matrix2cd mat_z() { return (Eigen::Matrix2cd() << 1, 0, 0, -1).finished(); }

// 4x4 kron with local qubit 0 (= bond site i) as the least-significant bit.
inline Eigen::Matrix4cd kron2(const Eigen::Matrix2cd& on_q1, const Eigen::Matrix2cd& on_q0) {
  Eigen::Matrix4cd m;
  for (int r1 = 0; r1 < 2; ++r1)
    for (int r0 = 0; r0 < 2; ++r0)
      for (int c1 = 0; c1 < 2; ++c1)
        for (int c0 = 0; c0 < 2; ++c0)
          m(2 * r1 + r0, 2 * c1 + c0) = on_q1(r1, c1) * on_q0(r0, c0);
  return m;
}

// XXZ bond term J(XX+YY) + delta ZZ + b(X 1 + 1 X).
inline Eigen::Matrix4cd xxz_bond(double J, double delta, double b) {
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  return J * (kron2(mat_x(), mat_x()) + kron2(mat_y(), mat_y())) +
         delta * kron2(mat_z(), mat_z()) + b * (kron2(id, mat_x()) + kron2(mat_x(), id));
}

inline Eigen::Vector2cd haar_qubit_state(Rng& rng) {
  Eigen::Vector2cd v(complexd(rng.normal(), rng.normal()),
                     complexd(rng.normal(), rng.normal()));
  return v / v.norm();
}

// Random real-symmetric matrix scaled to the requested operator norm.
inline Eigen::MatrixXcd random_symmetric(int dim, double opnorm, Rng& rng) {
  Eigen::MatrixXd r(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j <= i; ++j) {
      double v = rng.normal();
      r(i, j) = v;
      r(j, i) = v;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r, Eigen::EigenvaluesOnly);
  double scale = es.eigenvalues().cwiseAbs().maxCoeff();
  if (scale < 1e-300) return Eigen::MatrixXcd::Zero(dim, dim);
  return (opnorm / scale) * r.cast<complexd>();
}

}  // namespace detail

// Shiraishi-Mori embedding: H = sum_<i,i+1> P h P on an open chain, with
// P = 1 - |phi_i phi_{i+1}><phi_i phi_{i+1}| built from Haar-random site
// states; the product state tensor_i |phi_i> is annihilated bond by bond.
inline ScarModel build_sm_model(const SMModelSpec& spec) {
  if (spec.n_qubits < 2) throw std::invalid_argument("build_sm_model: need n_qubits >= 2");
  Rng root(spec.seed);
  std::vector<Eigen::Vector2cd> site(static_cast<std::size_t>(spec.n_qubits));
  for (int i = 0; i < spec.n_qubits; ++i) {
    Rng r = root.spawn("sm-site", static_cast<std::uint64_t>(i));
    site[static_cast<std::size_t>(i)] = detail::haar_qubit_state(r);
  }

  const Eigen::Matrix4cd h_bond = detail::xxz_bond(spec.J, spec.delta, spec.b);
  ScarModel model;
  model.hamiltonian = PauliSum(spec.n_qubits);
  for (int i = 0; i + 1 < spec.n_qubits; ++i) {
    const auto& phi_i = site[static_cast<std::size_t>(i)];
    const auto& phi_j = site[static_cast<std::size_t>(i + 1)];
    Eigen::Matrix4cd proj = Eigen::Matrix4cd::Identity() -
                            detail::kron2(phi_j * phi_j.adjoint(), phi_i * phi_i.adjoint());
    Eigen::Matrix4cd term = proj * h_bond * proj;
    model.hamiltonian.add(decompose_local(term, {i, i + 1}, spec.n_qubits));
  }

  StateVector scar;
  scar.n_qubits = spec.n_qubits;
  scar.amps.assign(1ull << spec.n_qubits, complexd{1, 0});
  for (std::uint64_t c = 0; c < scar.amps.size(); ++c)
    for (int i = 0; i < spec.n_qubits; ++i)
      scar.amps[c] *= site[static_cast<std::size_t>(i)]((c >> i) & 1);
  model.scar_state = std::move(scar);
  model.scar_energy = 0.0;

  auto applied = model.hamiltonian.apply(model.scar_state->amps);
  double residual = 0;
  for (const auto& a : applied) residual += std::norm(a);
  if (std::sqrt(residual) >= scar_residual_tol)
    throw std::runtime_error("build_sm_model: scar residual above tolerance");
  return model;
}

// Disordered XXZ control: the same bond terms without projectors plus random
// site Z fields; no low-entanglement eigenstate is asserted.
inline ScarModel build_control_model(const SMModelSpec& spec) {
  if (spec.n_qubits < 2) throw std::invalid_argument("sm control: need n_qubits >= 2");
  Rng root(spec.seed);
  ScarModel model;
  model.hamiltonian = PauliSum(spec.n_qubits);
  const Eigen::Matrix4cd h_bond = detail::xxz_bond(spec.J, spec.delta, spec.b);
  for (int i = 0; i + 1 < spec.n_qubits; ++i)
    model.hamiltonian.add(decompose_local(h_bond, {i, i + 1}, spec.n_qubits));
  for (int i = 0; i < spec.n_qubits; ++i) {
    Rng r = root.spawn("sm-field", static_cast<std::uint64_t>(i));
    PauliString z{spec.n_qubits, 0, 1ull << i};
    model.hamiltonian.add_term(z, r.uniform(-1.0, 1.0));
  }
  return model;
}

struct MpsState {
  StateVector state;
  Eigen::MatrixXcd a0, a1;
  int redraws = 0;
};

// Translationally invariant ring MPS |psi> ~ sum_s Tr[A^{s_1}...A^{s_N}] |s>,
// with a site-independent complex-Gaussian tensor pair drawn from the seed.
inline MpsState build_mps_state(int n_qubits, int chi, std::uint64_t seed) {
  if (n_qubits < 2) throw std::invalid_argument("build_mps_state: need n_qubits >= 2");
  if (chi < 1) throw std::invalid_argument("build_mps_state: need chi >= 1");
  MpsState out;
  for (std::uint64_t attempt = 0;; ++attempt) {
    if (attempt > 16) throw std::runtime_error("build_mps_state: repeated degenerate draws");
    Rng root(seed + attempt);
    Rng r0 = root.spawn("mps-a0"), r1 = root.spawn("mps-a1");
    out.a0.resize(chi, chi);
    out.a1.resize(chi, chi);
    for (int i = 0; i < chi; ++i)
      for (int j = 0; j < chi; ++j) {
        out.a0(i, j) = complexd(r0.normal(), r0.normal());
        out.a1(i, j) = complexd(r1.normal(), r1.normal());
      }
    out.state.n_qubits = n_qubits;
    out.state.amps.assign(1ull << n_qubits, complexd{0, 0});
    for (std::uint64_t c = 0; c < out.state.amps.size(); ++c) {
      Eigen::MatrixXcd prod = (c & 1) ? out.a1 : out.a0;
      for (int q = 1; q < n_qubits; ++q) prod *= ((c >> q) & 1) ? out.a1 : out.a0;
      out.state.amps[c] = prod.trace();
    }
    double norm = out.state.norm();
    if (norm >= 1e-12) {
      for (auto& a : out.state.amps) a /= norm;
      out.redraws = static_cast<int>(attempt);
      return out;
    }
    std::cerr << "build_mps_state: degenerate draw (norm " << norm
              << "), retrying with seed " << (seed + attempt + 1) << "\n";
  }
}

// Orthonormal basis of the complement A_C of the MPS reduced state's range on
// a D-site ring block; columns are complement vectors in the block space.
inline Eigen::MatrixXcd block_complement_basis(const StateVector& mps_state,
                                               int block_start, int D) {
  const int n = mps_state.n_qubits;
  if (D < 1 || D > n) throw std::invalid_argument("block_complement_basis: invalid D");
  std::vector<int> sites(static_cast<std::size_t>(D));
  for (int j = 0; j < D; ++j) sites[static_cast<std::size_t>(j)] = (block_start + j) % n;
  Eigen::MatrixXcd rho = reduced_density(mps_state, sites);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
  const long dim = rho.rows();
  long rank = 0;
  for (long k = 0; k < dim; ++k)
    if (es.eigenvalues()(k) > 1e-10) ++rank;
  const long comp_dim = dim - rank;
  if (comp_dim == 0)
    throw std::runtime_error(
        "block_complement_basis: empty complement space; 2^D > chi^2 is required");
  // ascending eigenvalues: the first comp_dim columns span the null space
  return es.eigenvectors().leftCols(comp_dim);
}

// Parent Hamiltonian H_P = sum_i h_i over all N ring blocks; each h_i carries
// the sign-alternating diagonal plus a random symmetric perturbation, both
// supported on the block's complement space, so H_P annihilates the MPS.
inline ScarModel build_ph_model(const PHModelSpec& spec) {
  if (spec.n_qubits < spec.D)
    throw std::invalid_argument("build_ph_model: need n_qubits >= D");
  if ((1l << spec.D) <= static_cast<long>(spec.chi) * spec.chi)
    throw std::invalid_argument("build_ph_model: 2^D > chi^2 violated");
  if (spec.pert_strength < 0)
    throw std::invalid_argument("build_ph_model: pert_strength must be >= 0");

  for (std::uint64_t attempt = 0; attempt < 8; ++attempt) {
    const std::uint64_t seed = spec.seed + attempt;
    MpsState mps = build_mps_state(spec.n_qubits, spec.chi, seed);
    Rng root(seed);
    ScarModel model;
    model.hamiltonian = PauliSum(spec.n_qubits);
    for (int i = 0; i < spec.n_qubits; ++i) {
      Eigen::MatrixXcd comp = block_complement_basis(mps.state, i, spec.D);
      const long k = comp.cols();
      Eigen::MatrixXcd core = Eigen::MatrixXcd::Zero(k, k);
      for (long m = 0; m < k; ++m) core(m, m) = spec.uniform_signs ? 1.0 : (m % 2 ? -1.0 : 1.0);
      if (spec.pert_strength > 0) {
        Rng pr = root.spawn("ph-pert", static_cast<std::uint64_t>(i));
        core += detail::random_symmetric(static_cast<int>(k), spec.pert_strength, pr);
      }
      Eigen::MatrixXcd block = comp * core * comp.adjoint();
      std::vector<int> sites(static_cast<std::size_t>(spec.D));
      for (int j = 0; j < spec.D; ++j)
        sites[static_cast<std::size_t>(j)] = (i + j) % spec.n_qubits;
      model.hamiltonian.add(decompose_local(block, sites, spec.n_qubits));
    }
    auto applied = model.hamiltonian.apply(mps.state.amps);
    double residual = 0;
    for (const auto& a : applied) residual += std::norm(a);
    if (std::sqrt(residual) < scar_residual_tol) {
      model.scar_state = std::move(mps.state);
      model.scar_energy = 0.0;
      return model;
    }
    std::cerr << "build_ph_model: scar residual " << std::sqrt(residual)
              << " above tolerance, retrying with seed " << (seed + 1) << "\n";
  }
  throw std::runtime_error("build_ph_model: could not reach scar residual tolerance");
}

// Control with the same block structure but random-sign diagonals over a
// Haar-random (not MPS-derived) subspace of matching dimension.
inline ScarModel build_control_model(const PHModelSpec& spec) {
  if (spec.n_qubits < spec.D)
    throw std::invalid_argument("ph control: need n_qubits >= D");
  const long dim = 1l << spec.D;
  const long comp_dim = dim - static_cast<long>(spec.chi) * spec.chi;
  if (comp_dim <= 0) throw std::invalid_argument("ph control: 2^D > chi^2 violated");

  Rng root(spec.seed);
  ScarModel model;
  model.hamiltonian = PauliSum(spec.n_qubits);
  for (int i = 0; i < spec.n_qubits; ++i) {
    Rng br = root.spawn("ph-control-block", static_cast<std::uint64_t>(i));
    Eigen::MatrixXcd g(dim, comp_dim);
    for (long r = 0; r < dim; ++r)
      for (long c = 0; c < comp_dim; ++c) g(r, c) = complexd(br.normal(), br.normal());
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(dim, comp_dim);
    Eigen::MatrixXcd core = Eigen::MatrixXcd::Zero(comp_dim, comp_dim);
    for (long m = 0; m < comp_dim; ++m) core(m, m) = br.sign();
    if (spec.pert_strength > 0)
      core += detail::random_symmetric(static_cast<int>(comp_dim), spec.pert_strength, br);
    Eigen::MatrixXcd block = q * core * q.adjoint();
    std::vector<int> sites(static_cast<std::size_t>(spec.D));
    for (int j = 0; j < spec.D; ++j)
      sites[static_cast<std::size_t>(j)] = (i + j) % spec.n_qubits;
    model.hamiltonian.add(decompose_local(block, sites, spec.n_qubits));
  }
  return model;
}

inline nlohmann::ordered_json model_to_json(const ScarModel& model,
                                            const nlohmann::ordered_json& spec_fields) {
  nlohmann::ordered_json j;
  j["spec"] = spec_fields;
  j["hamiltonian"] = model.hamiltonian.to_json();
  if (model.scar_state) {
    auto amps = nlohmann::ordered_json::array();
    for (const auto& a : model.scar_state->amps)
      amps.push_back({a.real(), a.imag()});
    j["scar_state"] = std::move(amps);
    j["scar_energy"] = model.scar_energy;
  } else {
    j["scar_state"] = nullptr;
    j["scar_energy"] = nullptr;
  }
  return j;
}

}  // namespace svqe
