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

#include "pevqe/pauli.hpp"

namespace pevqe::qc {

/// Dense register state; basis index bit q is qubit q.
class StateVector {
  public:
    /// Computational basis state |basis>.
    explicit StateVector(int n_qubits, std::uint64_t basis = 0);

    int qubits() const { return n_; }
    std::size_t dimension() const { return amp_.size(); }
    Complex &operator[](std::size_t i) { return amp_[i]; }
    Complex operator[](std::size_t i) const { return amp_[i]; }
    std::vector<Complex> &amplitudes() { return amp_; }
    const std::vector<Complex> &amplitudes() const { return amp_; }

    double norm() const;
    /// <this|other>
    Complex inner(const StateVector &other) const;
    StateVector &operator+=(const StateVector &other);
    StateVector &operator*=(Complex c);

  private:
    int n_;
    std::vector<Complex> amp_;
};

/// P|psi> including the string coefficient.
StateVector apply_pauli(const StateVector &psi, const PauliString &p);
StateVector apply_pauli_sum(const StateVector &psi, const PauliSum &op);

/// exp(i theta P)|psi> for a hermitian string (real coefficient).
StateVector apply_pauli_exponential(const StateVector &psi, const PauliString &p,
                                    double theta);
void apply_pauli_exponential_inplace(StateVector &psi, const PauliString &p,
                                     double theta);

/// <psi|P|psi> for a hermitian string, ignoring its coefficient.
double pauli_expectation(const StateVector &psi, const PauliString &p);

/// <bra|P|ket>, ignoring the coefficient of P.
Complex pauli_matrix_element(const StateVector &bra, const PauliString &p,
                             const StateVector &ket);

} // namespace pevqe::qc
