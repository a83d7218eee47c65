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
#include <Eigen/SparseCore>

#include "pevqe/adapt.hpp"

namespace pevqe::qc {

/// Simulation of number-conserving ansatz circuits inside the determinants
/// that share the reference's alpha and beta counts. Each generator block
/// maps a determinant to at most one other with a sign, so its exponential
/// is a set of plane rotations and amplitudes stay real. Results equal the
/// Pauli-string simulation of prepare_state and ansatz_energy.
class SectorEngine {
  public:
    /// G|from> = sign |to> and G|to> = -sign |from>.
    struct Rotation {
        std::uint32_t from = 0;
        std::uint32_t to = 0;
        double sign = 1.0;
    };
    /// One rotation list per block, applied in block order.
    using Compiled = std::vector<std::vector<Rotation>>;

    /// Throws ValidationError when h couples the sector to other states or
    /// has complex matrix elements inside it.
    SectorEngine(const QubitHamiltonian &h, std::uint64_t reference);

    int qubits() const { return n_qubits_; }
    std::size_t dimension() const { return basis_.size(); }
    const std::vector<std::uint64_t> &basis() const { return basis_; }
    /// H restricted to the sector, constant included.
    const Eigen::SparseMatrix<double, Eigen::RowMajor> &hamiltonian() const { return h_; }

    /// Throws ValidationError unless op conserves the sector.
    Compiled compile(const PoolOperator &op) const;
    std::vector<Compiled> compile(const std::vector<PoolOperator> &ops) const;

    Eigen::VectorXd reference_state() const;
    /// psi <- exp(theta G) psi.
    static void apply(Eigen::VectorXd &psi, const Compiled &op, double theta);
    Eigen::VectorXd prepare(const std::vector<Compiled> &ops,
                            const std::vector<double> &theta) const;
    /// Energy and adjoint gradient with respect to theta.
    double energy(const std::vector<Compiled> &ops, const std::vector<double> &theta,
                  Eigen::VectorXd *gradient = nullptr) const;
    /// 2 <H psi|G psi>.
    static double gradient(const Eigen::VectorXd &psi, const Eigen::VectorXd &h_psi,
                           const Compiled &op);
    StateVector embed(const Eigen::VectorXd &psi) const;

  private:
    int n_qubits_ = 0;
    std::uint64_t reference_ = 0;
    std::vector<std::uint64_t> basis_;
    std::vector<std::int32_t> index_;
    Eigen::SparseMatrix<double, Eigen::RowMajor> h_;
};

} // namespace pevqe::qc
