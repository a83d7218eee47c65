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
#include "pevqe/statevector.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "pevqe/error.hpp"

namespace pevqe::qc {

namespace {

constexpr int kMaxStateQubits = 26;

void check(const StateVector &psi, const PauliString &p) {
    if (psi.qubits() != p.n) {
        throw ValidationError("Pauli string acts on " + std::to_string(p.n) +
                              " qubits, state has " + std::to_string(psi.qubits()));
    }
}

// Phase picked up by basis state b under the letters of p (coefficient aside).
Complex y_phase(const PauliString &p) {
    static const Complex table[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return table[p.y_count() % 4];
}

double z_sign(std::uint64_t b, std::uint64_t z) {
    return std::popcount(b & z) % 2 ? -1.0 : 1.0;
}

} // namespace

StateVector::StateVector(int n_qubits, std::uint64_t basis) : n_(n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxStateQubits) {
        throw ValidationError("state vector needs 1.." +
                              std::to_string(kMaxStateQubits) + " qubits");
    }
    amp_.assign(std::size_t{1} << n_qubits, Complex{});
    if (basis >= amp_.size()) {
        throw ValidationError("basis index outside the register");
    }
    amp_[basis] = 1.0;
}

double StateVector::norm() const {
    double s = 0.0;
    for (const auto &a : amp_) {
        s += std::norm(a);
    }
    return std::sqrt(s);
}

Complex StateVector::inner(const StateVector &other) const {
    if (other.n_ != n_) {
        throw ValidationError("inner product of states with different qubit counts");
    }
    Complex s{};
    for (std::size_t i = 0; i < amp_.size(); ++i) {
        s += std::conj(amp_[i]) * other.amp_[i];
    }
    return s;
}

StateVector &StateVector::operator+=(const StateVector &other) {
    if (other.n_ != n_) {
        throw ValidationError("sum of states with different qubit counts");
    }
    for (std::size_t i = 0; i < amp_.size(); ++i) {
        amp_[i] += other.amp_[i];
    }
    return *this;
}

StateVector &StateVector::operator*=(Complex c) {
    for (auto &a : amp_) {
        a *= c;
    }
    return *this;
}

StateVector apply_pauli(const StateVector &psi, const PauliString &p) {
    check(psi, p);
    StateVector out(psi.qubits());
    out[0] = 0.0;
    const Complex c = p.coeff * y_phase(p);
    for (std::uint64_t b = 0; b < psi.dimension(); ++b) {
        out[b ^ p.x] = c * z_sign(b, p.z) * psi[b];
    }
    return out;
}

StateVector apply_pauli_sum(const StateVector &psi, const PauliSum &op) {
    StateVector out(psi.qubits());
    out[0] = 0.0;
    for (const auto &p : op.strings()) {
        out += apply_pauli(psi, p);
    }
    return out;
}

void apply_pauli_exponential_inplace(StateVector &psi, const PauliString &p,
                                     double theta) {
    check(psi, p);
    if (std::abs(p.coeff.imag()) > 1e-14) {
        throw ValidationError("exponentiated Pauli string must be hermitian");
    }
    const double phi = theta * p.coeff.real();
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    if (p.x == 0) {
        const Complex plus(c, s), minus(c, -s);
        for (std::uint64_t b = 0; b < psi.dimension(); ++b) {
            psi[b] *= z_sign(b, p.z) > 0 ? plus : minus;
        }
        return;
    }
    // P|b> = w z_sign(b) |b^x>, so the pair (b, b^x) mixes in a 2x2 block.
    const Complex w = Complex(0.0, s) * y_phase(p);
    const std::uint64_t top = std::uint64_t{1} << (63 - std::countl_zero(p.x));
    for (std::uint64_t b = 0; b < psi.dimension(); ++b) {
        if (b & top) {
            continue;
        }
        const std::uint64_t b2 = b ^ p.x;
        const Complex a1 = psi[b];
        const Complex a2 = psi[b2];
        psi[b] = c * a1 + w * z_sign(b2, p.z) * a2;
        psi[b2] = c * a2 + w * z_sign(b, p.z) * a1;
    }
}

StateVector apply_pauli_exponential(const StateVector &psi, const PauliString &p,
                                    double theta) {
    StateVector out = psi;
    apply_pauli_exponential_inplace(out, p, theta);
    return out;
}

Complex pauli_matrix_element(const StateVector &bra, const PauliString &p,
                             const StateVector &ket) {
    check(bra, p);
    check(ket, p);
    const Complex w = y_phase(p);
    const auto &a = bra.amplitudes();
    const auto &b = ket.amplitudes();
    Complex plus{}, minus{};
    for (std::uint64_t i = 0; i < b.size(); ++i) {
        const Complex t = std::conj(a[i ^ p.x]) * b[i];
        if (std::popcount(i & p.z) % 2) {
            minus += t;
        } else {
            plus += t;
        }
    }
    return w * (plus - minus);
}

double pauli_expectation(const StateVector &psi, const PauliString &p) {
    return pauli_matrix_element(psi, p, psi).real();
}

} // namespace pevqe::qc
