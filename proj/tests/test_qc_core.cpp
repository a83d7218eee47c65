// Copyright 2026 The pevqe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <bit>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "qc_oracles.hpp"
#include "pevqe/active_space.hpp"
#include "pevqe/ci.hpp"
#include "pevqe/error.hpp"
#include "pevqe/fermion.hpp"
#include "pevqe/qubit_hamiltonian.hpp"
#include "pevqe/statevector.hpp"

using namespace pevqe;
using namespace pevqe::qc;
using Eigen::MatrixXcd;
using namespace pevqe::oracles;

namespace {

PauliString random_string(int n, std::mt19937_64 &rng) {
    std::uniform_int_distribution<std::uint64_t> mask(0, (std::uint64_t{1} << n) - 1);
    PauliString p;
    p.n = n;
    p.x = mask(rng);
    p.z = mask(rng);
    return p;
}

// Block of the Hamiltonian between determinants of fixed electron counts,
// computed by applying the qubit operator to basis states.
Eigen::MatrixXd sector_matrix(const QubitHamiltonian &h, const DeterminantSpace &space) {
    const auto dim = static_cast<Eigen::Index>(space.size());
    Eigen::MatrixXd m(dim, dim);
    for (Eigen::Index c = 0; c < dim; ++c) {
        const StateVector out =
            h.apply(StateVector(h.qubits(), space.determinants()[static_cast<std::size_t>(c)]));
        for (Eigen::Index r = 0; r < dim; ++r) {
            const Complex v = out[space.determinants()[static_cast<std::size_t>(r)]];
            EXPECT_LE(std::abs(v.imag()), 1e-12);
            m(r, c) = v.real();
        }
    }
    return m;
}

} // namespace

TEST(Pauli, MultiplicationTable) {
    const auto X = PauliString::parse("X"), Y = PauliString::parse("Y"),
               Z = PauliString::parse("Z");
    EXPECT_EQ((X * Y).letters(), "Z");
    EXPECT_EQ((X * Y).coeff, Complex(0, 1));
    EXPECT_EQ((Y * X).coeff, Complex(0, -1));
    EXPECT_EQ((Y * Z).letters(), "X");
    EXPECT_EQ((Y * Z).coeff, Complex(0, 1));
    EXPECT_EQ((Z * X).letters(), "Y");
    EXPECT_EQ((Z * X).coeff, Complex(0, 1));
    EXPECT_EQ((Y * Y).letters(), "I");
    EXPECT_EQ((Y * Y).coeff, Complex(1, 0));
    EXPECT_FALSE(commutes(X, Y));
    EXPECT_TRUE(commutes(PauliString::parse("XX"), PauliString::parse("YY")));
}

TEST(Pauli, ProductMatchesDenseMatrices) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 50; ++t) {
        const auto a = random_string(4, rng), b = random_string(4, rng);
        EXPECT_LE((dense(a * b) - dense(a) * dense(b)).cwiseAbs().maxCoeff(), 1e-14);
        const bool c = (dense(a) * dense(b) - dense(b) * dense(a)).cwiseAbs().maxCoeff() < 1e-12;
        EXPECT_EQ(commutes(a, b), c);
    }
}

TEST(Pauli, ParseLettersWeight) {
    const auto p = PauliString::parse("XIZY");
    EXPECT_EQ(p.letters(), "XIZY");
    EXPECT_EQ(p.weight(), 3);
    EXPECT_EQ(p.y_count(), 1);
    EXPECT_THROW(PauliString::parse("XQ"), ValidationError);
}

TEST(JordanWigner, NumberOperator) {
    const auto s = jordan_wigner(FermionTerm{1.0, {{0, true}, {0, false}}}, 1);
    EXPECT_EQ(s.size(), 2u);
    EXPECT_NEAR(std::abs(s.coefficient(PauliString::parse("I")) - 0.5), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(s.coefficient(PauliString::parse("Z")) + 0.5), 0.0, 1e-15);
}

TEST(JordanWigner, AdjacentHopping) {
    std::vector<FermionTerm> hop{{1.0, {{1, true}, {0, false}}},
                                 {1.0, {{0, true}, {1, false}}}};
    const auto s = jordan_wigner(hop, 2);
    EXPECT_EQ(s.size(), 2u);
    EXPECT_NEAR(std::abs(s.coefficient(PauliString::parse("XX")) - 0.5), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(s.coefficient(PauliString::parse("YY")) - 0.5), 0.0, 1e-15);
}

TEST(JordanWigner, MatchesDenseLadderMatrices) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> mode(0, 3), len(1, 4), flag(0, 1);
    std::normal_distribution<double> g;
    const int n = 4;
    for (int t = 0; t < 20; ++t) {
        std::vector<FermionTerm> op;
        MatrixXcd expected = MatrixXcd::Zero(16, 16);
        for (int k = 0; k < 3; ++k) {
            FermionTerm term{Complex(g(rng), g(rng)), {}};
            MatrixXcd m = MatrixXcd::Identity(16, 16) * term.coeff;
            const int l = len(rng);
            for (int j = 0; j < l; ++j) {
                const LadderOp lo{mode(rng), flag(rng) == 1};
                term.ops.push_back(lo);
                const MatrixXcd a = annihilator(lo.mode, n);
                m = m * (lo.dagger ? MatrixXcd(a.adjoint()) : a);
            }
            expected += m;
            op.push_back(term);
        }
        EXPECT_LE((dense(jordan_wigner(op, n)) - expected).cwiseAbs().maxCoeff(), 1e-12);
        // adjoint maps to conjugate
        std::vector<FermionTerm> adj;
        for (const auto &term : op) {
            adj.push_back(term.adjoint());
        }
        EXPECT_LE((dense(jordan_wigner(adj, n)) - expected.adjoint()).cwiseAbs().maxCoeff(),
                  1e-12);
    }
    EXPECT_THROW(jordan_wigner(FermionTerm{1.0, {{4, true}}}, 4), ValidationError);
}

TEST(StateVector, PauliExponentialExamples) {
    const double theta = 0.37;
    const auto psi = apply_pauli_exponential(StateVector(1), PauliString::parse("Z"), theta);
    EXPECT_NEAR(std::abs(psi[0] - std::exp(Complex(0, theta))), 0.0, 1e-15);
    std::mt19937_64 rng(1);
    const auto phi = random_state(3, rng);
    const auto same = apply_pauli_exponential(phi, PauliString::parse("XYZ"), 0.0);
    for (std::size_t i = 0; i < phi.dimension(); ++i) {
        EXPECT_EQ(same[i], phi[i]);
    }
    EXPECT_THROW(apply_pauli_exponential(phi, PauliString::parse("XY"), 0.1),
                 ValidationError);
}

TEST(StateVector, PauliExponentialMatchesDenseExpm) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> angle(-3.0, 3.0);
    for (int n = 1; n <= 6; ++n) {
        for (int t = 0; t < 5; ++t) {
            auto p = random_string(n, rng);
            p.coeff = angle(rng) / 3.0;
            const double theta = angle(rng);
            const auto psi = random_state(n, rng);
            Eigen::SelfAdjointEigenSolver<MatrixXcd> es(dense(p));
            const Eigen::VectorXcd phases =
                (Complex(0, theta) * es.eigenvalues().cast<Complex>()).array().exp();
            const MatrixXcd u =
                es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
            const Eigen::VectorXcd v =
                Eigen::Map<const Eigen::VectorXcd>(psi.amplitudes().data(),
                                                   static_cast<Eigen::Index>(psi.dimension()));
            const Eigen::VectorXcd expected = u * v;
            const auto got = apply_pauli_exponential(psi, p, theta);
            double diff = 0.0;
            for (std::size_t i = 0; i < got.dimension(); ++i) {
                diff = std::max(diff, std::abs(got[i] - expected(static_cast<Eigen::Index>(i))));
            }
            EXPECT_LE(diff, 1e-10);
            EXPECT_NEAR(got.norm(), 1.0, 1e-12);
        }
    }
}

TEST(QubitHamiltonian, ApplyMatchesDenseMatrix) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    PauliSum s(4);
    for (int k = 0; k < 30; ++k) {
        auto p = random_string(4, rng);
        p.coeff = g(rng);
        s.add(p);
        p.coeff = std::conj(p.coeff);
    }
    s.add({4, 0, 0, 0.75});
    const auto h = QubitHamiltonian::from_sum(s);
    EXPECT_DOUBLE_EQ(h.constant(), 0.75);
    const MatrixXcd m = dense(s);
    const auto psi = random_state(4, rng);
    const auto out = h.apply(psi);
    const Eigen::VectorXcd v = m * Eigen::Map<const Eigen::VectorXcd>(psi.amplitudes().data(), 16);
    for (int i = 0; i < 16; ++i) {
        EXPECT_LE(std::abs(out[static_cast<std::size_t>(i)] - v(i)), 1e-12);
    }
    PauliSum bad(1);
    bad.add(PauliString::parse("X", Complex(0, 1)));
    EXPECT_THROW(QubitHamiltonian::from_sum(bad), ValidationError);
}

TEST(Expectation, Examples) {
    PauliSum z(1);
    z.add(PauliString::parse("Z"));
    EXPECT_DOUBLE_EQ(expectation(StateVector(1), QubitHamiltonian::from_sum(z),
                                 ShotModel::exact()),
                     1.0);
    PauliSum c(2);
    c.add({2, 0, 0, -0.25});
    const auto hc = QubitHamiltonian::from_sum(c);
    EXPECT_DOUBLE_EQ(expectation(StateVector(2, 3), hc, ShotModel::exact()), -0.25);
    EXPECT_DOUBLE_EQ(expectation(StateVector(2, 3), hc, ShotModel::sampled(10, 1)), -0.25);
    EXPECT_THROW(ShotModel::sampled(0, 1), ValidationError);
}

TEST(Expectation, SampledXOnZeroHasBinomialStatistics) {
    PauliSum x(1);
    x.add(PauliString::parse("X"));
    const auto h = QubitHamiltonian::from_sum(x);
    const int seeds = 400;
    std::vector<double> v;
    for (int s = 0; s < seeds; ++s) {
        v.push_back(expectation(StateVector(1), h, ShotModel::sampled(100000, s)));
    }
    double mean = 0.0, var = 0.0;
    for (double e : v) {
        mean += e / seeds;
    }
    for (double e : v) {
        var += (e - mean) * (e - mean) / (seeds - 1);
    }
    const double se = 1.0 / std::sqrt(1e5);
    EXPECT_NEAR(std::sqrt(var), se, 0.1 * se);
    EXPECT_LE(std::abs(mean), 4.0 * se / std::sqrt(seeds));
    // fixed seed reproduces
    EXPECT_EQ(expectation(StateVector(1), h, ShotModel::sampled(100000, 7)),
              expectation(StateVector(1), h, ShotModel::sampled(100000, 7)));
}

TEST(Expectation, SampledIsUnbiased) {
    std::mt19937_64 rng(8);
    const auto problem = read_fcidump_file(fixtures::fixture_path("h2_sto3g", "integrals.fcidump"));
    const auto h = build_qubit_hamiltonian(problem);
    const auto psi = random_state(4, rng);
    const double exact = h.expectation(psi);
    const int seeds = 100;
    std::vector<double> v;
    for (int s = 0; s < seeds; ++s) {
        v.push_back(expectation(psi, h, ShotModel::sampled(100000, 1000 + s)));
    }
    double mean = 0.0, var = 0.0;
    for (double e : v) {
        mean += e / seeds;
    }
    for (double e : v) {
        var += (e - mean) * (e - mean) / (seeds - 1);
    }
    EXPECT_LE(std::abs(mean - exact), 4.0 * std::sqrt(var / seeds));
}

TEST(Fcidump, ReadsH2Fixture) {
    const auto p = read_fcidump_file(fixtures::fixture_path("h2_sto3g", "integrals.fcidump"));
    EXPECT_EQ(p.n_orbitals, 2);
    EXPECT_EQ(p.n_alpha, 1);
    EXPECT_EQ(p.n_beta, 1);
    EXPECT_NEAR(p.core, 1.0 / 1.4, 1e-12);
    EXPECT_NO_THROW(p.validate());
}

TEST(Fcidump, WriteReadRoundTrip) {
    std::mt19937_64 rng(9);
    const auto p = random_problem(3, 2, 1, rng);
    std::stringstream buf;
    write_fcidump(buf, p);
    const auto q = read_fcidump(buf);
    EXPECT_EQ(q.n_alpha, 2);
    EXPECT_EQ(q.n_beta, 1);
    EXPECT_LE((p.h - q.h).cwiseAbs().maxCoeff(), 1e-15);
    for (std::size_t i = 0; i < p.g.data().size(); ++i) {
        EXPECT_NEAR(p.g.data()[i], q.g.data()[i], 1e-15);
    }
    EXPECT_NEAR(p.core, q.core, 1e-15);
}

TEST(Fcidump, HeaderVariantsAndErrors) {
    std::istringstream slash("&FCI NORB=1, NELEC=2,\n/\n 0.5 1 1 1 1\n-1.0 1 1 0 0\n");
    const auto p = read_fcidump(slash);
    EXPECT_DOUBLE_EQ(p.g(0, 0, 0, 0), 0.5);
    EXPECT_DOUBLE_EQ(p.h(0, 0), -1.0);
    std::istringstream nohead("0.5 1 1 1 1\n");
    EXPECT_THROW(read_fcidump(nohead), ParseError);
    std::istringstream range("&FCI NORB=1,NELEC=2 &END\n0.5 2 1 1 1\n");
    EXPECT_THROW(read_fcidump(range), ParseError);
    std::istringstream parity("&FCI NORB=2,NELEC=3,MS2=0 &END\n");
    EXPECT_THROW(read_fcidump(parity), ParseError);
}

TEST(QubitHamiltonianBuild, H2GroundStateIsFci) {
    const auto p = read_fcidump_file(fixtures::fixture_path("h2_sto3g", "integrals.fcidump"));
    const auto h = build_qubit_hamiltonian(p);
    EXPECT_EQ(h.qubits(), 4);
    const double fci = fixtures::fixture_manifest("h2_sto3g")["reference"]["fci_energy"];
    const DeterminantSpace space(2, 1, 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sector_matrix(h, space));
    EXPECT_NEAR(es.eigenvalues()(0), fci, 1e-10);
    EXPECT_NEAR(solve_fci(p).energy, fci, 1e-10);
}

TEST(QubitHamiltonianBuild, DiagonalProblemIsZBasisDiagonal) {
    ActiveSpaceProblem p;
    p.n_orbitals = 3;
    p.n_alpha = p.n_beta = 1;
    p.h = Eigen::Vector3d(-1.0, 0.2, 0.7).asDiagonal();
    p.g = Eri(3);
    const auto h = build_qubit_hamiltonian(p);
    for (const auto &t : h.terms()) {
        EXPECT_EQ(t.x, 0u);
    }
}

TEST(QubitHamiltonianBuild, IdentityEnvironmentShiftsByElectronCount) {
    std::mt19937_64 rng(10);
    auto p = random_problem(3, 2, 1, rng);
    const DeterminantSpace space(3, 2, 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> a(
        sector_matrix(build_qubit_hamiltonian(p), space));
    p.v_env = 0.3 * Eigen::MatrixXd::Identity(3, 3);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> b(
        sector_matrix(build_qubit_hamiltonian(p), space));
    const Eigen::VectorXd shift = b.eigenvalues() - a.eigenvalues();
    EXPECT_LE((shift.array() - 0.9).abs().maxCoeff(), 1e-10);
}

TEST(QubitHamiltonianBuild, RejectsAsymmetricIntegrals) {
    std::mt19937_64 rng(11);
    auto p = random_problem(2, 1, 1, rng);
    p.g(0, 1, 0, 0) += 1e-3;
    EXPECT_THROW(build_qubit_hamiltonian(p), ValidationError);
    p = random_problem(2, 1, 1, rng);
    p.h(0, 1) += 1e-3;
    EXPECT_THROW(build_qubit_hamiltonian(p), ValidationError);
}

TEST(Ci, DeterminantCiMatchesQubitSector) {
    std::mt19937_64 rng(12);
    for (auto [n, na, nb] : {std::array{3, 2, 1}, std::array{4, 2, 2}, std::array{3, 1, 1}}) {
        const auto p = random_problem(n, na, nb, rng);
        const DeterminantSpace space(n, na, nb);
        const Eigen::MatrixXd qubit = sector_matrix(build_qubit_hamiltonian(p), space);
        EXPECT_LE((qubit - ci_hamiltonian(p, space)).cwiseAbs().maxCoeff(), 1e-12);
    }
    const auto lih = read_fcidump_file(fixtures::fixture_path("lih_sto3g", "integrals.fcidump"));
    const DeterminantSpace space(6, 2, 2);
    EXPECT_LE((sector_matrix(build_qubit_hamiltonian(lih), space) - ci_hamiltonian(lih, space))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-11);
}

TEST(Ci, RdmsReproduceEnergyAndTrace) {
    std::mt19937_64 rng(13);
    const auto p = random_problem(4, 2, 2, rng);
    const DeterminantSpace space(4, 2, 2);
    const auto r = solve_ci(p, space);
    const auto rdm = ci_rdms(space, r.vector);
    EXPECT_NEAR(rdm.one.trace(), 4.0, 1e-12);
    EXPECT_LE((rdm.one - rdm.one.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(energy_from_rdms(p, rdm), r.energy, 1e-10);
    // sum_r d_pqrr = (N - 1) D_pq
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            double s = 0.0;
            for (int c = 0; c < 4; ++c) {
                s += rdm.two(a, b, c, c);
            }
            EXPECT_NEAR(s, 3.0 * rdm.one(a, b), 1e-12);
        }
    }
}

TEST(Ci, HartreeFockDeterminantRdm) {
    const DeterminantSpace space(3, 2, 2);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.size()));
    c(space.find(0b001111)) = 1.0;
    const auto rdm = ci_rdms(space, c);
    EXPECT_LE((rdm.one - Eigen::Vector3d(2, 2, 0).asDiagonal().toDenseMatrix())
                  .cwiseAbs()
                  .maxCoeff(),
              1e-15);
}

TEST(Ci, FrozenMaskRestrictsSpace) {
    const DeterminantSpace frozen(4, 2, 2, 0b11);
    EXPECT_EQ(frozen.size(), 9u);
    for (auto d : frozen.determinants()) {
        EXPECT_EQ(d & 0b11, 0b11u);
    }
    EXPECT_THROW(DeterminantSpace(2, 3, 0), ValidationError);
}
