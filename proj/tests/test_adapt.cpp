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
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "qc_oracles.hpp"
#include "pevqe/adapt.hpp"
#include "pevqe/ci.hpp"
#include "pevqe/error.hpp"
#include "pevqe/fermion.hpp"

using namespace pevqe;
using namespace pevqe::qc;
using namespace pevqe::oracles;

namespace {

ActiveSpaceProblem h2() {
    return read_fcidump_file(fixtures::fixture_path("h2_sto3g", "integrals.fcidump"));
}

MatrixXcd generator(const PoolOperator &op, int n) {
    const auto dim = Eigen::Index{1} << n;
    MatrixXcd g = MatrixXcd::Zero(dim, dim);
    for (const auto &b : op.blocks) {
        for (const auto &p : b) {
            g += Complex(0, 1) * dense(p);
        }
    }
    return g;
}

MatrixXcd number_operator(int n, int parity_filter) {
    const auto dim = Eigen::Index{1} << n;
    MatrixXcd m = MatrixXcd::Zero(dim, dim);
    for (Eigen::Index b = 0; b < dim; ++b) {
        for (int q = 0; q < n; ++q) {
            if (((b >> q) & 1) && (parity_filter < 0 || q % 2 == parity_filter)) {
                m(b, b) += 1.0;
            }
        }
    }
    return m;
}

QubitHamiltonian number_hamiltonian(int n_modes) {
    std::vector<FermionTerm> terms;
    for (int j = 0; j < n_modes; ++j) {
        terms.push_back(FermionTerm{1.0, {{j, true}, {j, false}}});
    }
    return QubitHamiltonian::from_sum(jordan_wigner(terms, n_modes));
}

// Random ansatz built from pool operators with random angles.
AdaptAnsatz random_ansatz(const std::vector<PoolOperator> &pool, int length,
                          std::mt19937_64 &rng) {
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::uniform_real_distribution<double> angle(-0.6, 0.6);
    AdaptAnsatz a;
    for (int k = 0; k < length; ++k) {
        a.operators.push_back(pool[pick(rng)]);
        a.theta.push_back(angle(rng));
    }
    return a;
}

// Standard error of a per-term sampled energy estimate.
double sampled_standard_error(const StateVector &psi, const QubitHamiltonian &h,
                              std::uint64_t shots) {
    double var = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
        const double e = pauli_expectation(psi, h.terms()[k]);
        var += h.coeffs()[k] * h.coeffs()[k] * (1.0 - e * e) / static_cast<double>(shots);
    }
    return std::sqrt(var);
}

} // namespace

TEST(Pool, H2HasOneSingleAndOneDouble) {
    const auto pool = build_pool(2, 1, 1);
    ASSERT_EQ(pool.size(), 2u);
    EXPECT_EQ(pool[0].rank, 1);
    EXPECT_EQ(pool[1].rank, 2);
    EXPECT_EQ(pool[0].id, 0u);
    EXPECT_EQ(pool[1].id, 1u);
    // Both spin components of the opposite-spin double coincide.
    ASSERT_EQ(pool[1].blocks.size(), 1u);
    EXPECT_EQ(pool[1].string_count(), 8u);
    for (const auto &p : pool[1].blocks[0]) {
        EXPECT_EQ(p.weight(), 4);
    }
    EXPECT_EQ(pool[1].cnot_cost(), 48);
    EXPECT_EQ(pool[0].blocks.size(), 2u);
    EXPECT_EQ(pool[0].cnot_cost(), 16);
}

TEST(Pool, GeneratorsAreAntiHermitianAndConserveNAndSz) {
    const int n_orb = 3;
    const int nq = 2 * n_orb;
    const MatrixXcd n_op = number_operator(nq, -1);
    const MatrixXcd n_alpha = number_operator(nq, 0);
    for (auto kind : {PoolKind::SinglesDoubles, PoolKind::GeneralizedSinglesDoubles}) {
        const auto pool = build_pool(n_orb, 1, 1, kind);
        ASSERT_FALSE(pool.empty());
        for (const auto &op : pool) {
            const MatrixXcd g = generator(op, nq);
            EXPECT_LE((g + g.adjoint()).norm(), 1e-12) << op.label;
            EXPECT_GT(g.norm(), 1e-6) << op.label;
            EXPECT_LE((g * n_op - n_op * g).norm(), 1e-12) << op.label;
            EXPECT_LE((g * n_alpha - n_alpha * g).norm(), 1e-12) << op.label;
            for (const auto &b : op.blocks) {
                for (std::size_t i = 0; i < b.size(); ++i) {
                    for (std::size_t j = i + 1; j < b.size(); ++j) {
                        EXPECT_TRUE(commutes(b[i], b[j])) << op.label;
                    }
                }
            }
        }
    }
}

TEST(Pool, OperatorsAreDistinctUpToSignAndDeterministic) {
    const int n_orb = 3;
    const auto pool = build_pool(n_orb, 2, 2, PoolKind::GeneralizedSinglesDoubles);
    const auto again = build_pool(n_orb, 2, 2, PoolKind::GeneralizedSinglesDoubles);
    ASSERT_EQ(pool.size(), again.size());
    std::vector<MatrixXcd> mats;
    for (std::size_t k = 0; k < pool.size(); ++k) {
        EXPECT_EQ(pool[k].id, k);
        EXPECT_EQ(pool[k].label, again[k].label);
        mats.push_back(generator(pool[k], 2 * n_orb));
    }
    for (std::size_t a = 0; a < mats.size(); ++a) {
        for (std::size_t b = a + 1; b < mats.size(); ++b) {
            EXPECT_GT((mats[a] - mats[b]).norm(), 1e-8);
            EXPECT_GT((mats[a] + mats[b]).norm(), 1e-8);
        }
    }
}

// Every spin-conserving occupied -> virtual excitation on spin orbitals
// appears (up to sign) as one block of some pool operator.
TEST(Pool, CoversEverySpinOrbitalExcitation) {
    const int n_orb = 4;
    const int nq = 2 * n_orb;
    const int nocc = 2;
    const auto pool = build_pool(n_orb, nocc, nocc);
    std::vector<MatrixXcd> blocks;
    for (const auto &op : pool) {
        for (const auto &b : op.blocks) {
            PoolOperator single;
            single.blocks = {b};
            blocks.push_back(generator(single, nq));
        }
    }
    auto covered = [&](const FermionTerm &t) {
        FermionTerm m = t.adjoint();
        m.coeff = -1.0;
        const MatrixXcd g = dense(jordan_wigner(std::vector<FermionTerm>{t, m}, nq));
        for (const auto &b : blocks) {
            if ((b - g).norm() < 1e-10 || (b + g).norm() < 1e-10) {
                return true;
            }
        }
        return false;
    };
    std::vector<int> occ, vir;
    for (int q = 0; q < nq; ++q) {
        (q / 2 < nocc ? occ : vir).push_back(q);
    }
    int checked = 0;
    for (int i : occ) {
        for (int a : vir) {
            if (i % 2 == a % 2) {
                EXPECT_TRUE(covered(FermionTerm{1.0, {{a, true}, {i, false}}}));
                ++checked;
            }
        }
    }
    for (std::size_t i = 0; i < occ.size(); ++i) {
        for (std::size_t j = i + 1; j < occ.size(); ++j) {
            for (std::size_t a = 0; a < vir.size(); ++a) {
                for (std::size_t b = a + 1; b < vir.size(); ++b) {
                    const int si = occ[i] % 2 + occ[j] % 2;
                    const int sa = vir[a] % 2 + vir[b] % 2;
                    if (si != sa || (si == 1 && occ[i] % 2 != vir[a] % 2 &&
                                     occ[i] % 2 != vir[b] % 2)) {
                        continue;
                    }
                    EXPECT_TRUE(covered(FermionTerm{
                        1.0, {{vir[b], true}, {vir[a], true}, {occ[j], false}, {occ[i], false}}}));
                    ++checked;
                }
            }
        }
    }
    EXPECT_GT(checked, 20);
}

TEST(Pool, Errors) {
    EXPECT_THROW(build_pool(0, 0, 0), ValidationError);
    EXPECT_THROW(build_pool(2, 3, 1), ValidationError);
    EXPECT_THROW(parse_pool_kind("triples"), ValidationError);
    EXPECT_EQ(parse_pool_kind(to_string(PoolKind::GeneralizedSinglesDoubles)),
              PoolKind::GeneralizedSinglesDoubles);
}

TEST(CnotCount, Examples) {
    EXPECT_EQ(cnot_count(AdaptAnsatz{}), 0);
    EXPECT_EQ(cnot_cost(PauliString::parse("XZZY")), 6);
    EXPECT_EQ(cnot_cost(PauliString::parse("IIII")), 0);
    EXPECT_EQ(cnot_cost(PauliString::parse("IZII")), 0);
    AdaptAnsatz a;
    a.operators.push_back(build_pool(2, 1, 1)[1]);
    a.theta.push_back(0.0);
    EXPECT_EQ(cnot_count(a), 48);
}

TEST(CnotCount, EqualsSumOverStringsAndIsAdditive) {
    std::mt19937_64 rng(5);
    const auto pool = build_pool(4, 2, 2);
    const AdaptAnsatz a = random_ansatz(pool, 12, rng);
    int by_strings = 0;
    for (const auto &op : a.operators) {
        for (const auto &b : op.blocks) {
            for (const auto &p : b) {
                by_strings += 2 * (p.weight() - 1);
            }
        }
    }
    EXPECT_EQ(a.cnot_count(), by_strings);
    AdaptAnsatz prefix;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const int before = prefix.cnot_count();
        prefix.operators.push_back(a.operators[k]);
        prefix.theta.push_back(a.theta[k]);
        EXPECT_EQ(prefix.cnot_count(), before + a.operators[k].cnot_cost());
    }
}

TEST(Ansatz, PreservesNorm) {
    std::mt19937_64 rng(9);
    const auto pool = build_pool(4, 2, 2, PoolKind::GeneralizedSinglesDoubles);
    for (int trial = 0; trial < 5; ++trial) {
        const auto a = random_ansatz(pool, 10, rng);
        const StateVector psi = prepare_state(a, 8, 0b1111);
        EXPECT_NEAR(psi.norm(), 1.0, 1e-10);
    }
}

TEST(Ansatz, SingleOperatorIsMatrixExponentialOfGenerator) {
    // Each block is an exact exponential; for one-block operators the whole
    // factor is exp(theta A).
    const auto pool = build_pool(2, 1, 1);
    const MatrixXcd g = generator(pool[1], 4);
    const double theta = 0.37;
    Eigen::ComplexEigenSolver<MatrixXcd> es(theta * g);
    const MatrixXcd u = es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() *
                        es.eigenvectors().inverse();
    StateVector psi(4, 0b0011);
    apply_pool_operator(psi, pool[1], theta);
    for (Eigen::Index b = 0; b < 16; ++b) {
        EXPECT_NEAR(std::abs(psi[static_cast<std::size_t>(b)] - u(b, 3)), 0.0, 1e-10);
    }
}

TEST(PoolGradient, MatchesCentralDifference) {
    std::mt19937_64 rng(21);
    const auto problem = random_problem(3, 1, 1, rng);
    const auto h = build_qubit_hamiltonian(problem);
    const auto pool = build_pool(3, 1, 1, PoolKind::GeneralizedSinglesDoubles);
    const auto a = random_ansatz(pool, 4, rng);
    const StateVector psi = prepare_state(a, 6, problem.reference_determinant());
    const double d = 1e-4;
    for (const auto &op : pool) {
        StateVector plus = psi, minus = psi;
        apply_pool_operator(plus, op, d);
        apply_pool_operator(minus, op, -d);
        const double fd = (h.expectation(plus) - h.expectation(minus)) / (2 * d);
        EXPECT_NEAR(pool_gradient(psi, h, op), fd, 1e-6) << op.label;
    }
}

TEST(PoolGradient, VanishesForOperatorCommutingWithH) {
    std::mt19937_64 rng(3);
    const auto h = number_hamiltonian(6);
    const auto pool = build_pool(3, 1, 1, PoolKind::GeneralizedSinglesDoubles);
    const StateVector psi = prepare_state(random_ansatz(pool, 5, rng), 6, 0b0011);
    for (const auto &op : pool) {
        EXPECT_NEAR(pool_gradient(psi, h, op), 0.0, 1e-12);
    }
}

TEST(AnsatzEnergy, AdjointGradientMatchesCentralDifference) {
    std::mt19937_64 rng(33);
    const auto problem = random_problem(4, 2, 2, rng);
    const auto h = build_qubit_hamiltonian(problem);
    const auto pool = build_pool(4, 2, 2);
    const auto a = random_ansatz(pool, 7, rng);
    Eigen::VectorXd g;
    const double e = ansatz_energy(a, a.theta, h, problem.reference_determinant(), &g);
    EXPECT_NEAR(e, h.expectation(prepare_state(a, 8, problem.reference_determinant())), 1e-12);
    const double d = 1e-5;
    for (std::size_t k = 0; k < a.size(); ++k) {
        auto tp = a.theta, tm = a.theta;
        tp[k] += d;
        tm[k] -= d;
        const double fd = (ansatz_energy(a, tp, h, problem.reference_determinant()) -
                           ansatz_energy(a, tm, h, problem.reference_determinant())) /
                          (2 * d);
        EXPECT_NEAR(g(static_cast<Eigen::Index>(k)), fd, 1e-7);
    }
}

TEST(AnsatzEnergy, RejectsMismatchedParameters) {
    AdaptAnsatz a;
    a.operators.push_back(build_pool(2, 1, 1)[0]);
    EXPECT_THROW(prepare_state(a, 4, 3), ValidationError);
}

TEST(Adapt, H2FirstIterationSelectsDoubleByExhaustiveScreening) {
    const auto p = h2();
    const auto h = build_qubit_hamiltonian(p);
    const auto pool = build_pool(2, 1, 1);
    // Oracle: finite-difference energy slope of every pool operator at the
    // reference state.
    const StateVector ref(4, p.reference_determinant());
    std::size_t best = 0;
    double best_slope = -1.0;
    for (std::size_t k = 0; k < pool.size(); ++k) {
        StateVector plus = ref, minus = ref;
        apply_pool_operator(plus, pool[k], 1e-4);
        apply_pool_operator(minus, pool[k], -1e-4);
        const double slope = std::abs(h.expectation(plus) - h.expectation(minus)) / 2e-4;
        if (slope > best_slope + 1e-12) {
            best_slope = slope;
            best = k;
        }
    }
    AdaptAnsatz a;
    Estimator est(ShotModel::exact());
    const AdaptStep step = adapt_iteration(h, pool, p.reference_determinant(), a, est, {});
    ASSERT_TRUE(step.added);
    EXPECT_EQ(step.chosen, best);
    EXPECT_EQ(a.operators.at(0).rank, 2);
    EXPECT_NEAR(step.max_gradient, best_slope, 1e-6);
    EXPECT_EQ(a.cnot_count(), 48);
}

TEST(Adapt, H2ConvergesToFci) {
    const auto p = h2();
    const auto h = build_qubit_hamiltonian(p);
    const double fci = fixtures::fixture_manifest("h2_sto3g")["reference"]["fci_energy"];
    Estimator est(ShotModel::exact());
    const auto res = run_adapt(h, build_pool(2, 1, 1), p.reference_determinant(), est, {});
    EXPECT_TRUE(res.converged);
    EXPECT_NEAR(res.energy, fci, 1e-6);
    EXPECT_NEAR(solve_fci(p).energy, fci, 1e-9);
    EXPECT_EQ(res.ansatz.size(), 1u);
    ASSERT_EQ(res.trace.size(), 1u);
    EXPECT_EQ(res.trace[0].cnot_count, 48);
    EXPECT_LE(res.gradient_norm, 8e-5);
}

TEST(Adapt, AllGradientsZeroAddsNothing) {
    const auto h = number_hamiltonian(4);
    Estimator est(ShotModel::exact());
    AdaptAnsatz a;
    const auto pool = build_pool(2, 1, 1);
    const AdaptStep step = adapt_iteration(h, pool, 0b0011, a, est, {});
    EXPECT_FALSE(step.added);
    EXPECT_TRUE(a.empty());
    const auto res = run_adapt(h, pool, 0b0011, est, {});
    EXPECT_TRUE(res.converged);
    EXPECT_TRUE(res.trace.empty());
    EXPECT_NEAR(res.energy, 2.0, 1e-12);
    EXPECT_THROW(adapt_iteration(h, {}, 0b0011, a, est, {}), ValidationError);
}

TEST(Adapt, EnergiesAreVariationalAndNonIncreasing) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 3; ++trial) {
        const auto p = random_problem(4, 2, 2, rng);
        const auto h = build_qubit_hamiltonian(p);
        const double fci = solve_fci(p).energy;
        Estimator est(ShotModel::exact());
        AdaptOptions opts;
        opts.max_iterations = 15;
        const auto res = run_adapt(h, build_pool(4, 2, 2), p.reference_determinant(), est, opts);
        double previous = h.expectation(StateVector(8, p.reference_determinant()));
        int cnots = 0;
        for (const auto &r : res.trace) {
            EXPECT_GE(r.energy, fci - 1e-9);
            EXPECT_LE(r.energy, previous + 1e-9);
            previous = r.energy;
            cnots += res.ansatz.operators[static_cast<std::size_t>(r.iteration - 1)].cnot_cost();
            EXPECT_EQ(r.cnot_count, cnots);
        }
    }
}

TEST(Adapt, WarmStartReoptimizesAndContinues) {
    const auto p = h2();
    const auto h = build_qubit_hamiltonian(p);
    const auto pool = build_pool(2, 1, 1);
    AdaptAnsatz start;
    start.operators.push_back(pool[1]);
    start.theta.push_back(0.3);
    Estimator est(ShotModel::exact());
    const auto res = run_adapt(h, pool, p.reference_determinant(), est, {}, start);
    EXPECT_NEAR(res.energy, solve_fci(p).energy, 1e-6);
    EXPECT_TRUE(res.converged);
}

TEST(Optimize, H2SingleParameterReachesFci) {
    const auto p = h2();
    const auto h = build_qubit_hamiltonian(p);
    AdaptAnsatz a;
    a.operators.push_back(build_pool(2, 1, 1)[1]);
    a.theta.push_back(0.0);
    Estimator est(ShotModel::exact());
    const auto r = optimize_parameters(a, h, p.reference_determinant(), est);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.energy, solve_fci(p).energy, 1e-6);

    // Restarting at the optimum takes no iterations.
    a.theta = r.theta;
    const auto again = optimize_parameters(a, h, p.reference_determinant(), est);
    EXPECT_EQ(again.iterations, 0);
    EXPECT_DOUBLE_EQ(again.energy, r.energy);
    EXPECT_THROW(optimize_parameters(AdaptAnsatz{}, h, 0, est), ValidationError);
}

TEST(Optimize, SampledH2WithinThreeStandardErrors) {
    const auto p = h2();
    const auto h = build_qubit_hamiltonian(p);
    AdaptAnsatz a;
    a.operators.push_back(build_pool(2, 1, 1)[1]);
    a.theta.push_back(0.0);
    Estimator exact(ShotModel::exact());
    const auto opt = optimize_parameters(a, h, p.reference_determinant(), exact);
    AdaptAnsatz at_opt = a;
    at_opt.theta = opt.theta;
    const double se = sampled_standard_error(
        prepare_state(at_opt, 4, p.reference_determinant()), h, 100000);
    ASSERT_GT(se, 0.0);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        Estimator est(ShotModel::sampled(100000, seed));
        const auto r = optimize_parameters(a, h, p.reference_determinant(), est);
        EXPECT_LE(std::abs(r.energy - opt.energy), 3 * se) << "seed " << seed;
    }
}

TEST(Optimize, SampledRunsAreReproducible) {
    const auto p = h2();
    const auto h = build_qubit_hamiltonian(p);
    Estimator e1(ShotModel::sampled(1000, 42)), e2(ShotModel::sampled(1000, 42));
    AdaptOptions opts;
    const auto pool = build_pool(2, 1, 1);
    const auto r1 = run_adapt(h, pool, p.reference_determinant(), e1, opts);
    const auto r2 = run_adapt(h, pool, p.reference_determinant(), e2, opts);
    EXPECT_EQ(r1.energy, r2.energy);
    EXPECT_EQ(r1.ansatz.theta, r2.ansatz.theta);
}

TEST(Rdms, HartreeFockDeterminant) {
    const StateVector hf(12, 0b111111);
    const Rdms r = measure_rdms(hf, 6);
    Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(6, 6);
    expect.diagonal().head(3).setConstant(2.0);
    EXPECT_LE((r.one - expect).norm(), 1e-12);
}

TEST(Rdms, TraceIsSixForSixElectronsInSixOrbitals) {
    std::mt19937_64 rng(8);
    const auto pool = build_pool(6, 3, 3);
    const RdmEstimator rdm(6);
    Estimator est(ShotModel::exact());
    for (int trial = 0; trial < 2; ++trial) {
        const StateVector psi = prepare_state(random_ansatz(pool, 6, rng), 12, 0b111111);
        const Rdms r = rdm.measure(psi, est);
        EXPECT_NEAR(r.one.trace(), 6.0, 1e-10);
        EXPECT_LE((r.one - r.one.transpose()).norm(), 1e-12);
    }
}

TEST(Rdms, ReconstructEnergyAndMatchDeterminantCi) {
    std::mt19937_64 rng(13);
    const auto p = random_problem(4, 2, 2, rng);
    const auto h = build_qubit_hamiltonian(p);
    const auto pool = build_pool(4, 2, 2);
    const StateVector psi = prepare_state(random_ansatz(pool, 8, rng), 8, p.reference_determinant());
    const Rdms r = measure_rdms(psi, 4);
    EXPECT_NEAR(energy_from_rdms(p, r), h.expectation(psi), 1e-10);

    // Independent oracle: determinant-space RDMs of the same (real) state.
    const DeterminantSpace space(4, 2, 2);
    Eigen::VectorXd c(static_cast<Eigen::Index>(space.size()));
    for (std::size_t k = 0; k < space.size(); ++k) {
        const Complex amp = psi[space.determinants()[k]];
        EXPECT_LE(std::abs(amp.imag()), 1e-12);
        c(static_cast<Eigen::Index>(k)) = amp.real();
    }
    const Rdms ref = ci_rdms(space, c);
    EXPECT_LE((r.one - ref.one).norm(), 1e-10);
    double diff = 0.0;
    for (std::size_t k = 0; k < ref.two.data().size(); ++k) {
        diff = std::max(diff, std::abs(ref.two.data()[k] - r.two.data()[k]));
    }
    EXPECT_LE(diff, 1e-10);
}

TEST(Rdms, SampledEstimatesScatterAroundExact) {
    std::mt19937_64 rng(4);
    const auto pool = build_pool(2, 1, 1);
    const StateVector psi = prepare_state(random_ansatz(pool, 2, rng), 4, 0b0011);
    const Rdms exact = measure_rdms(psi, 2);
    const Rdms sampled = measure_rdms(psi, 2, ShotModel::sampled(100000, 7));
    EXPECT_LE((exact.one - sampled.one).cwiseAbs().maxCoeff(), 0.05);
    EXPECT_GT((exact.one - sampled.one).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_THROW(measure_rdms(psi, 3), ValidationError);
}
