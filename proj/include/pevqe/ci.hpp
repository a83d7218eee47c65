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
#include <vector>

#include <Eigen/Dense>

#include "pevqe/active_space.hpp"

namespace pevqe::qc {

/// Determinants of fixed alpha/beta occupation counts on interleaved spin
/// orbitals, optionally with some orbitals forced doubly occupied.
class DeterminantSpace {
  public:
    DeterminantSpace(int n_orbitals, int n_alpha, int n_beta,
                     std::uint64_t frozen_mask = 0);

    int n_orbitals() const { return n_orbitals_; }
    std::size_t size() const { return dets_.size(); }
    const std::vector<std::uint64_t> &determinants() const { return dets_; }
    /// Position of a determinant, or -1 if outside the space.
    long find(std::uint64_t det) const;

  private:
    int n_orbitals_;
    std::vector<std::uint64_t> dets_;
};

/// Applies a ladder operator to a determinant; returns false when the result
/// vanishes, otherwise updates det and multiplies sign by the parity of the
/// occupied modes below.
bool apply_ladder(std::uint64_t &det, int mode, bool dagger, int &sign);

/// Dense Hamiltonian matrix over a determinant space, built from
/// second-quantized operators acting on determinants directly.
Eigen::MatrixXd ci_hamiltonian(const ActiveSpaceProblem &problem,
                               const DeterminantSpace &space);

struct CiResult {
    double energy = 0.0;
    Eigen::VectorXd vector;
};

/// Lowest eigenpair by dense diagonalization.
CiResult solve_ci(const ActiveSpaceProblem &problem, const DeterminantSpace &space);
CiResult solve_fci(const ActiveSpaceProblem &problem);

/// Spin-summed 1- and 2-RDMs of a CI vector.
Rdms ci_rdms(const DeterminantSpace &space, const Eigen::VectorXd &c);

} // namespace pevqe::qc
