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
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pevqe/adapt.hpp"
#include "pevqe/molecule.hpp"
#include "pevqe/optimize.hpp"

namespace pevqe::scf {

/// Inactive (doubly occupied), active and virtual orbitals, in that order.
struct OrbitalPartition {
    int n_inactive = 0;
    int n_active = 0;
    int n_virtual = 0;
    int active_electrons = 0;
    /// 2 S_z of the active electrons.
    int ms2 = 0;

    int n_orbitals() const { return n_inactive + n_active + n_virtual; }
    int n_alpha() const { return (active_electrons + ms2) / 2; }
    int n_beta() const { return (active_electrons - ms2) / 2; }
    /// Throws ValidationError unless the partition fits the orbital and
    /// electron counts.
    void validate(int n_orbitals, int n_electrons) const;
    /// 0 inactive, 1 active, 2 virtual.
    int space(int p) const;
    bool redundant(int p, int q) const { return space(p) == space(q); }
    /// Non-redundant pairs (p, q) with p > q in row-major order.
    std::vector<std::pair<int, int>> rotation_pairs() const;

    static OrbitalPartition from_counts(int n_orbitals, int n_electrons, int n_inactive,
                                        int n_active, int ms2 = 0);
};

/// exp(kappa) for an anti-symmetric kappa; throws ValidationError otherwise.
Eigen::MatrixXd rotation_matrix(const Eigen::MatrixXd &kappa);
/// Anti-symmetric matrix with kappa(p, q) = x_k = -kappa(q, p) for pair k.
Eigen::MatrixXd kappa_matrix(const Eigen::VectorXd &x,
                             const std::vector<std::pair<int, int>> &pairs, int n);

struct RotatedIntegrals {
    Eigen::MatrixXd h;
    qc::Eri g;
    std::vector<pe::SiteIntegrals> sites;
};

/// Two- and four-index transforms by U = exp(kappa): X' = U^T X U.
RotatedIntegrals rotate_integrals(const Eigen::MatrixXd &h, const qc::Eri &g,
                                  const std::vector<pe::SiteIntegrals> &sites,
                                  const Eigen::MatrixXd &kappa);

/// Active Hamiltonian dressed by the doubly occupied inactive orbitals.
/// h and g are full-space integrals in the working orbitals, v_env an
/// optional (empty means none) environment one-body matrix, constant any
/// energy added to the core (nuclear repulsion, environment constants).
qc::ActiveSpaceProblem build_active_problem(const Eigen::MatrixXd &h, const qc::Eri &g,
                                            const Eigen::MatrixXd &v_env, double constant,
                                            const OrbitalPartition &part);

/// Full-space RDMs of a closed-shell inactive core times an active state.
qc::Rdms full_rdms(const qc::Rdms &active, const OrbitalPartition &part);

/// F_pq = sum_r h_pr D_qr + sum_rst (pr|st) d_qrst.
Eigen::MatrixXd generalized_fock(const Eigen::MatrixXd &h, const qc::Eri &g, const qc::Rdms &full);

/// dE/dkappa over part.rotation_pairs() at kappa = 0 for fixed RDMs:
/// 2 (F_pq - F_qp).
Eigen::VectorXd orbital_gradient(const Eigen::MatrixXd &h, const qc::Eri &g,
                                 const qc::Rdms &full, const OrbitalPartition &part);

/// sum h D + 1/2 sum g d over the full space (no constant).
double electronic_energy(const Eigen::MatrixXd &h, const qc::Eri &g, const qc::Rdms &full);

/// Environment pieces that do not depend on the electronic state.
struct EnvironmentCoupling {
    pe::ResponseMatrix response;
    /// Field at each site from the permanent multipoles (exclusions honored)
    /// plus the nuclei of the quantum region.
    std::vector<Vec3> static_fields;
    /// sum_K Z_K phi_perm(R_K).
    double nuclear_permanent = 0.0;
    /// Permanent-multipole operator in the input orbitals.
    Eigen::MatrixXd v_es;
};

EnvironmentCoupling couple_environment(const MolecularSystem &sys);

/// Electronic field Tr(D t1_s) at each site for a density in the input
/// orbitals.
std::vector<Vec3> electronic_fields(const MolecularSystem &sys, const Eigen::MatrixXd &density);

/// 1/2 mu.B mu over the polarizable sites.
double polarization_energy(const pe::ResponseMatrix &b, const pe::InducedDipoles &mu);

/// Solver of the active-space problem at fixed orbitals and dipoles.
struct ActiveSolution {
    double energy = 0.0;
    qc::Rdms rdms;
    /// Largest parameter-gradient component at the returned state (zero for
    /// exact CI).
    double gradient_norm = 0.0;
    /// Norm of the operator-pool gradients (zero for exact CI).
    double pool_gradient_norm = 0.0;
    /// False when the micro solver stopped on its iteration limit.
    bool converged = true;
    int iterations = 0;
    int cnot_count = 0;
    std::size_t parameters = 0;
};

class ActiveSolver {
  public:
    virtual ~ActiveSolver() = default;
    virtual ActiveSolution solve(const qc::ActiveSpaceProblem &problem) = 0;
    virtual std::string name() const = 0;
};

/// Dense determinant CI of the active space.
class CiSolver : public ActiveSolver {
  public:
    ActiveSolution solve(const qc::ActiveSpaceProblem &problem) override;
    std::string name() const override { return "classical"; }
};

struct AdaptSolverOptions {
    qc::AdaptOptions adapt;
    qc::PoolKind pool = qc::PoolKind::SinglesDoubles;
    qc::ShotModel shots = qc::ShotModel::exact();
    /// Reuse the previous ansatz and parameters on the next call.
    bool warm_start = true;
};

/// ADAPT-VQE on the Jordan-Wigner qubit Hamiltonian, RDMs from Pauli
/// measurements. One estimator stream serves every call.
class AdaptSolver : public ActiveSolver {
  public:
    explicit AdaptSolver(AdaptSolverOptions opts = {});
    ActiveSolution solve(const qc::ActiveSpaceProblem &problem) override;
    std::string name() const override { return "simulator"; }

    const qc::AdaptAnsatz &ansatz() const { return ansatz_; }
    const std::vector<qc::AdaptRecord> &trace() const { return trace_; }

  private:
    AdaptSolverOptions opts_;
    qc::Estimator est_;
    qc::AdaptAnsatz ansatz_;
    std::vector<qc::AdaptRecord> trace_;
    std::vector<qc::PoolOperator> pool_;
    std::unique_ptr<qc::RdmEstimator> rdm_;
    int pool_orbitals_ = -1;
};

struct MacroRecord {
    int iteration = 0;
    /// Free energy after the micro solve and the dipole update.
    double energy = 0.0;
    /// Free energy after the orbital step (equal to energy when skipped).
    double energy_after_orbitals = 0.0;
    double orbital_gradient = 0.0;
    double wavefunction_gradient = 0.0;
    double pool_gradient = 0.0;
    int micro_iterations = 0;
    int cnot_count = 0;
};

struct ScfOptions {
    double energy_tolerance = 1e-6;
    double gradient_tolerance = 8e-5;
    int max_macro_iterations = 60;
    bool optimize_orbitals = true;
    /// Amplitude of a seeded random rotation applied to the starting orbitals.
    /// Canonical orbitals of symmetric molecules are often a saddle point of
    /// the two-step iteration; a small kick lets the loop leave it. Zero keeps
    /// the input orbitals.
    double start_perturbation = 1e-2;
    std::uint64_t perturbation_seed = 7;
    /// Inner optimizer of the orbital step at fixed RDMs and dipoles.
    LbfgsOptions orbital{200, 12, 1e-7, 0.0, 40, 1e-4, 0.9, 0.5};
    pe::SolverOptions induced;
    /// Called after every macro-iteration.
    std::function<void(const MacroRecord &)> on_iteration;
};


struct ScfState {
    /// Working orbitals as columns over the input orbitals.
    Eigen::MatrixXd orbitals;
    qc::Rdms active_rdms;
    /// Full 1-RDM in the input orbital basis.
    Eigen::MatrixXd density;
    pe::InducedDipoles induced;
    /// Free energy E_FE (hartree).
    double energy = 0.0;
    /// -1/2 <v_ind>, included in energy.
    double induction_correction = 0.0;
    double orbital_gradient_norm = 0.0;
    double wavefunction_gradient_norm = 0.0;
    int macro_iterations = 0;
    int micro_iterations = 0;
    int cnot_count = 0;
    bool converged = false;
    std::string message;
    std::vector<MacroRecord> history;
};

/// E_FE for fixed orbitals, full RDMs (working basis) and dipoles.
double free_energy(const MolecularSystem &sys, const EnvironmentCoupling &env,
                   const Eigen::MatrixXd &orbitals, const qc::Rdms &full,
                   const pe::InducedDipoles &mu);

/// Alternates the micro solve, the induced-dipole update and an orbital
/// step until the free-energy change and the orbital and wavefunction
/// gradients are within tolerance. Each stage minimizes the same free
/// energy, so the sequence is non-increasing for exact solvers.
ScfState scf_macro_loop(const MolecularSystem &sys, const OrbitalPartition &part,
                        ActiveSolver &solver, const ScfOptions &opts = {});

/// The same loop with the dense-CI micro solver.
ScfState classical_casscf_oracle(const MolecularSystem &sys, const OrbitalPartition &part,
                                 const ScfOptions &opts = {});

} // namespace pevqe::scf
