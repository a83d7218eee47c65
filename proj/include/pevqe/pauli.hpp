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

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace pevqe::qc {

using Complex = std::complex<double>;

/// Largest register addressable by the 64-bit masks.
inline constexpr int kMaxQubits = 62;

/// coeff times a tensor product of single-qubit Paulis. Qubit q carries
/// I (x=0,z=0), X (1,0), Z (0,1) or Y (1,1) from bit q of the masks.
struct PauliString {
    int n = 0;
    std::uint64_t x = 0;
    std::uint64_t z = 0;
    Complex coeff = 1.0;

    /// Letters listed from qubit 0 upwards, e.g. "XIZY".
    static PauliString parse(const std::string &letters, Complex coeff = 1.0);

    char letter(int q) const;
    std::string letters() const;
    int weight() const;
    int y_count() const;
    bool is_identity() const { return x == 0 && z == 0; }
};

PauliString operator*(const PauliString &a, const PauliString &b);
bool commutes(const PauliString &a, const PauliString &b);

/// Linear combination of Pauli strings, merged by letters and kept in a
/// deterministic (x, z) order.
class PauliSum {
  public:
    explicit PauliSum(int n = 0) : n_(n) {}

    int qubits() const { return n_; }
    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }

    void add(const PauliString &p);
    PauliSum &operator+=(const PauliSum &other);
    PauliSum &operator*=(Complex c);
    friend PauliSum operator*(const PauliSum &a, const PauliSum &b);
    friend PauliSum operator+(PauliSum a, const PauliSum &b) { return a += b; }

    PauliSum adjoint() const;
    /// Drops terms with |coeff| <= tol.
    void simplify(double tol = 1e-12);
    std::vector<PauliString> strings() const;
    /// Coefficient of the given letters (coeff of p ignored); zero if absent.
    Complex coefficient(const PauliString &p) const;

  private:
    int n_;
    std::map<std::pair<std::uint64_t, std::uint64_t>, Complex> terms_;
};

} // namespace pevqe::qc
