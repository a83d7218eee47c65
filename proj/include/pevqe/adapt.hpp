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
#include <string>
#include <vector>

#include "pevqe/active_space.hpp"
#include "pevqe/optimize.hpp"
#include "pevqe/qubit_hamiltonian.hpp"

namespace pevqe::qc {

enum class PoolKind {
    /// Occupied -> virtual singles and doubles.
    SinglesDoubles,
    /// Singles and doubles between any orbitals.
    GeneralizedSinglesDoubles,
};

PoolKind parse_pool_kind(const std::string &name);
std::string to_string(PoolKind kind);

/// Spin-complemented anti-hermitian generator A = sum_k i c_k P_k, one block
/// per spin component. The ansatz factor is the ordered product of
/// exp(i theta c_k P_k); strings within a block commute, so each block is its
/// exact exponential.
struct PoolOperator {
    std::size_t id = 0;
    int rank = 1;
    std::string label;
    /// Hermitian strings carrying the real weights c_k.
    std::vector<std::vector<PauliString>> blocks;

    std::size_t string_count() const;
    /// Sum over strings of the staircase cost 2 (weight - 1).
    int cnot_cost() const;
};

/// 2 (weight - 1) for weight >= 1, zero for the identity.
int cnot_cost(const PauliString &p);

/// Deterministic pool: singles before doubles, duplicates (equal up to
/// sign) removed, ids in order of first appearance.
std::vector<PoolOperator> build_pool(int n_orbitals, int n_alpha, int n_beta,
                                     PoolKind kind = PoolKind::SinglesDoubles);

/// psi <- exp(theta A) psi.
void apply_pool_operator(StateVector &psi, const PoolOperator &op, double theta);

/// <psi|[H, A]|psi> = 2 Re <H psi|A psi>, the derivative of the energy with
/// respect to theta for exp(theta A) appended at theta = 0.
double pool_gradient(const StateVector &psi, const StateVector &h_psi,
                     const PoolOperator &op);
double pool_gradient(const StateVector &psi, const QubitHamiltonian &h,
                     const PoolOperator &op);

struct AdaptAnsatz {
    std::vector<PoolOperator> operators;
    std::vector<double> theta;

    std::size_t size() const { return operators.size(); }
    bool empty() const { return operators.empty(); }
    int cnot_count() const;
    /// Number of operators of the given rank.
    int count_rank(int rank) const;
};

int cnot_count(const AdaptAnsatz &ansatz);

/// U(theta)|reference>, operators applied in insertion order.
StateVector prepare_state(const AdaptAnsatz &ansatz, int n_qubits,
                          std::uint64_t reference,
                          const std::vector<double> *theta = nullptr);

/// Exact energy and (adjoint-method) gradient with respect to theta.
double ansatz_energy(const AdaptAnsatz &ansatz, const std::vector<double> &theta,
                     const QubitHamiltonian &h, std::uint64_t reference,
                     Eigen::VectorXd *gradient = nullptr);

struct VqeOptions {
    LbfgsOptions optimizer;
    /// Central-difference step for gradients in sampled mode.
    double fd_step = 0.1;
};

struct OptimizeResult {
    std::vector<double> theta;
    double energy = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    std::string message;
};

/// Joint quasi-Newton minimization over every theta. Exact mode uses
/// adjoint gradients; sampled mode uses central differences of sampled
/// energies drawn from est and reports a fresh sample at the optimum.
OptimizeResult optimize_parameters(const AdaptAnsatz &ansatz, const QubitHamiltonian &h,
                                   std::uint64_t reference, Estimator &est,
                                   const VqeOptions &opts = {});

struct AdaptOptions {
    double gradient_tolerance = 8e-5;
    double energy_tolerance = 1e-6;
    int max_iterations = 200;
    VqeOptions vqe;
};

struct AdaptRecord {
    int iteration = 0;
    std::size_t operator_id = 0;
    std::string label;
    double gradient_norm = 0.0;
    double max_gradient = 0.0;
    double energy = 0.0;
    int cnot_count = 0;
    std::size_t parameters = 0;
};

struct AdaptStep {
    bool added = false;
    double gradient_norm = 0.0;
    double max_gradient = 0.0;
    std::size_t chosen = 0;
    OptimizeResult optimization;
};

/// One ADAPT iteration: screens the pool with exact gradients, appends the
/// operator of largest |gradient| (lowest id on ties) unless the gradient
/// norm is within tolerance, then re-optimizes every theta.
AdaptStep adapt_iteration(const QubitHamiltonian &h, const std::vector<PoolOperator> &pool,
                          std::uint64_t reference, AdaptAnsatz &ansatz, Estimator &est,
                          const AdaptOptions &opts);

struct AdaptResult {
    AdaptAnsatz ansatz;
    double energy = 0.0;
    double gradient_norm = 0.0;
    bool converged = false;
    std::string stop_reason;
    std::vector<AdaptRecord> trace;
};

/// Iterates until the pool-gradient norm or the energy change falls within
/// tolerance, or the iteration limit is hit. A non-empty start ansatz is
/// re-optimized first and then grown.
AdaptResult run_adapt(const QubitHamiltonian &h, const std::vector<PoolOperator> &pool,
                      std::uint64_t reference, Estimator &est, const AdaptOptions &opts,
                      AdaptAnsatz start = {});

/// Spin-summed active RDMs estimated from Jordan-Wigner strings; every
/// distinct string is measured once per call.
class RdmEstimator {
  public:
    explicit RdmEstimator(int n_orbitals);

    int n_orbitals() const { return n_; }
    std::size_t string_count() const { return strings_.size(); }
    Rdms measure(const StateVector &psi, Estimator &est) const;

  private:
    struct Entry {
        std::size_t element;
        std::size_t string;
        double coeff;
    };
    int n_;
    std::vector<PauliString> strings_;
    std::vector<Entry> one_, two_;
};

Rdms measure_rdms(const StateVector &psi, int n_orbitals,
                  const ShotModel &model = ShotModel::exact());

} // namespace pevqe::qc
