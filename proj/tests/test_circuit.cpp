#include "svqe/circuit.hpp"

#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "svqe/ansatz.hpp"
#include "svqe/density.hpp"
#include "test_util.hpp"

using namespace svqe;
using oracle::complexd;

namespace {

// Dense unitary of the full ansatz circuit built by explicit kron products.
Eigen::MatrixXcd dense_circuit(const AnsatzSpec& spec, const std::vector<double>& theta) {
  const long dim = 1l << spec.n_qubits;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  for (int layer = 0; layer <= spec.depth; ++layer) {
    for (int q = 0; q < spec.n_qubits; ++q) {
      u = oracle::embed_1q(oracle::ry(theta[static_cast<std::size_t>(spec.ry_index(layer, q))]),
                           q, spec.n_qubits) * u;
      u = oracle::embed_1q(oracle::rz(theta[static_cast<std::size_t>(spec.rz_index(layer, q))]),
                           q, spec.n_qubits) * u;
    }
    if (layer < spec.depth)
      for (auto [a, b] : spec.entangler) u = oracle::cz(a, b, spec.n_qubits) * u;
  }
  return u;
}

}  // namespace

TEST_CASE("apply_circuit basics") {
  auto spec = build_ansatz(3, 2);
  SECTION("all-zero angles give |000>") {
    auto s = apply_circuit(spec, std::vector<double>(18, 0.0));
    CHECK(std::abs(s.amps[0] - complexd{1, 0}) < 1e-12);
  }
  SECTION("depth 0 gives |0...0> at zero angles") {
    auto s = apply_circuit(build_ansatz(4, 0), std::vector<double>(8, 0.0));
    CHECK(std::abs(s.amps[0] - complexd{1, 0}) < 1e-12);
  }
  SECTION("parameter-count mismatch rejected") {
    CHECK_THROWS_AS(apply_circuit(spec, std::vector<double>(17, 0.0)),
                    std::invalid_argument);
  }
}

TEST_CASE("single-qubit gate algebra") {
  std::vector<complexd> amps{1.0, 0.0};
  gates::apply_ry(amps, 0, M_PI);
  CHECK(std::abs(amps[1] - complexd{1, 0}) < 1e-12);  // Ry(pi)|0> = |1>
  std::vector<complexd> b11{0, 0, 0, 1};
  gates::apply_cz(b11, 0, 1);
  CHECK(b11[3] == complexd{-1, 0});  // CZ|11> = -|11>
}

TEST_CASE("circuit matches dense kron oracle") {
  auto spec = build_ansatz(3, 2);
  auto theta = init_params(spec.parameter_count(), M_PI, 314);
  auto s = apply_circuit(spec, theta);
  Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(8);
  zero(0) = 1.0;
  Eigen::VectorXcd expect = dense_circuit(spec, theta) * zero;
  CHECK((oracle::to_eigen(s.amps) - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(s.norm() == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("exact_expectation on circuit states") {
  PauliSum z(2);
  z.add_term(PauliString::from_label("ZI"), 1.0);
  auto s = StateVector::zero(2);
  CHECK(exact_expectation(s, z) == Catch::Approx(1.0));
  std::mt19937_64 gen(5);
  auto psi = oracle::random_state(3, gen);
  StateVector sv{3, oracle::to_std(psi)};
  PauliSum h(3);
  h.add_term(PauliString::from_label("XYZ"), 0.8);
  h.add_term(PauliString::from_label("ZZI"), -0.3);
  h.set_identity_coefficient(0.25);
  double expect = (psi.adjoint() * h.to_dense() * psi)(0).real();
  CHECK(exact_expectation(sv, h) == Catch::Approx(expect).margin(1e-12));
}

TEST_CASE("rotated_distribution conventions") {
  SECTION("|0> in Z and X bases") {
    auto s = StateVector::zero(1);
    s.amps = {1.0, 0.0};
    MeasurementBasis bz{"Z"}, bx{"X"};
    auto pz = rotated_distribution({1, s.amps}, bz);
    CHECK(pz[0] == Catch::Approx(1.0));
    auto px = rotated_distribution({1, s.amps}, bx);
    CHECK(px[0] == Catch::Approx(0.5));
    CHECK(px[1] == Catch::Approx(0.5));
  }
  SECTION("Y eigenstate convention pinned: +1 eigenstate -> outcome 0") {
    const double r = 1 / std::sqrt(2.0);
    StateVector yplus{1, {complexd{r, 0}, complexd{0, r}}};   // (|0> + i|1>)/sqrt(2)
    StateVector yminus{1, {complexd{r, 0}, complexd{0, -r}}};
    auto pp = rotated_distribution(yplus, MeasurementBasis{"Y"});
    auto pm = rotated_distribution(yminus, MeasurementBasis{"Y"});
    CHECK(pp[0] == Catch::Approx(1.0).margin(1e-12));
    CHECK(pm[1] == Catch::Approx(1.0).margin(1e-12));
    // dense oracle for the same convention: Rx(pi/2) |y+> = |0> up to phase
    Eigen::VectorXcd v(2);
    v << complexd{r, 0}, complexd{0, r};
    Eigen::VectorXcd rotated = oracle::rx(M_PI / 2) * v;
    CHECK(std::norm(rotated(0)) == Catch::Approx(1.0).margin(1e-12));
  }
  SECTION("distribution normalizes and agrees with eval_string signs") {
    std::mt19937_64 gen(77);
    StateVector sv{2, oracle::to_std(oracle::random_state(2, gen))};
    for (const std::string axes : {"XZ", "YY", "ZX", "XX", "ZY"}) {
      MeasurementBasis basis{axes};
      auto p = rotated_distribution(sv, basis);
      double total = 0;
      for (double x : p) total += x;
      CHECK(total == Catch::Approx(1.0).margin(1e-10));
      // every 1-local string covered by the basis: sum_q p_q m(q) = <P>
      for (int q = 0; q < 2; ++q) {
        PauliString p1{2, 0, 0};
        char axis = axes[static_cast<std::size_t>(q)];
        if (axis == 'X') p1.x_mask = 1ull << q;
        else if (axis == 'Y') { p1.x_mask = 1ull << q; p1.z_mask = 1ull << q; }
        else p1.z_mask = 1ull << q;
        PauliSum one(2);
        one.add_term(p1, 1.0);
        double from_dist = 0;
        for (std::uint64_t out = 0; out < p.size(); ++out)
          from_dist += p[out] * eval_string(p1, out);
        CHECK(from_dist == Catch::Approx(exact_expectation(sv, one)).margin(1e-10));
      }
    }
  }
}

TEST_CASE("noisy circuit path") {
  auto spec = build_ansatz(3, 2);
  auto theta = init_params(spec.parameter_count(), 1.5, 2024);

  SECTION("zero noise reproduces the pure projector") {
    auto rho = apply_circuit_noisy(spec, theta, NoiseModel{});
    auto psi = oracle::to_eigen(apply_circuit(spec, theta).amps);
    Eigen::MatrixXcd proj = psi * psi.adjoint();
    CHECK((rho.rho - proj).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(rho.purity() == Catch::Approx(1.0).margin(1e-10));
  }
  SECTION("full single-qubit depolarization gives the maximally mixed state") {
    auto rho = apply_circuit_noisy(spec, theta, NoiseModel{1.0, 0.0, 0.0});
    Eigen::MatrixXcd mixed = Eigen::MatrixXcd::Identity(8, 8) / 8.0;
    CHECK((rho.rho - mixed).cwiseAbs().maxCoeff() < 1e-10);
  }
  SECTION("density matrix stays physical and purity decreases with p2") {
    double last = 1.0;
    for (double p2 : {0.01, 0.05, 0.1, 0.3}) {
      auto rho = apply_circuit_noisy(spec, theta, NoiseModel{0.001, p2, 0.0});
      CHECK(std::abs(rho.rho.trace().real() - 1.0) < 1e-10);
      CHECK((rho.rho - rho.rho.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.rho, Eigen::EigenvaluesOnly);
      CHECK(es.eigenvalues().minCoeff() > -1e-8);
      double purity = rho.purity();
      CHECK(purity < last);
      CHECK(purity > 1.0 / 8.0);
      last = purity;
    }
  }
  SECTION("size limit enforced") {
    CHECK_THROWS_AS(apply_circuit_noisy(build_ansatz(7, 1),
                                        std::vector<double>(28, 0.0), NoiseModel{}),
                    std::domain_error);
  }
}

TEST_CASE("noisy readout distributions") {
  SECTION("flip probability on |0><0|") {
    auto d = DensityMatrix::zero_state(1);
    auto p = noisy_rotated_distribution(d, MeasurementBasis{"Z"}, 0.25);
    CHECK(p[0] == Catch::Approx(0.75));
    CHECK(p[1] == Catch::Approx(0.25));
    auto p_half = noisy_rotated_distribution(d, MeasurementBasis{"Z"}, 0.5);
    CHECK(p_half[0] == Catch::Approx(0.5));
    CHECK(p_half[1] == Catch::Approx(0.5));
  }
  SECTION("zero flip = diagonal of rotated rho; consistent with pure path") {
    auto spec = build_ansatz(2, 1);
    auto theta = init_params(spec.parameter_count(), 2.0, 5);
    auto rho = apply_circuit_noisy(spec, theta, NoiseModel{});
    auto pure = apply_circuit(spec, theta);
    for (const std::string axes : {"ZZ", "XY", "YX"}) {
      auto noisy = noisy_rotated_distribution(rho, MeasurementBasis{axes}, 0.0);
      auto exact = rotated_distribution(pure, MeasurementBasis{axes});
      for (std::size_t i = 0; i < exact.size(); ++i)
        CHECK(noisy[i] == Catch::Approx(exact[i]).margin(1e-10));
    }
  }
}

TEST_CASE("density-matrix expectations and fidelity") {
  auto spec = build_ansatz(3, 1);
  auto theta = init_params(spec.parameter_count(), 1.0, 8);
  auto rho = apply_circuit_noisy(spec, theta, NoiseModel{0.02, 0.05, 0.0});
  PauliSum h(3);
  h.add_term(PauliString::from_label("XZI"), 0.7);
  h.add_term(PauliString::from_label("IYY"), -1.2);
  h.set_identity_coefficient(0.1);
  double expect = (rho.rho * h.to_dense()).trace().real();
  CHECK(expectation_rho(rho, h) == Catch::Approx(expect).margin(1e-10));

  auto pure = apply_circuit(spec, theta);
  auto psi = oracle::to_eigen(pure.amps);
  double f = (psi.adjoint() * rho.rho * psi)(0).real();
  CHECK(fidelity_rho(rho, pure) == Catch::Approx(f).margin(1e-12));
}
