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
#include <random>
#include <vector>

#include "pevqe/pauli.hpp"
#include "pevqe/statevector.hpp"

namespace pevqe::qc {

/// constant + sum_k c_k P_k with real c_k. Terms are kept in PauliSum order
/// (unit coefficients stored in coeffs()).
class QubitHamiltonian {
  public:
    QubitHamiltonian() = default;
    /// Identity terms move into the constant; imaginary parts above tol throw
    /// ValidationError; terms with |c| <= drop are discarded.
    static QubitHamiltonian from_sum(const PauliSum &sum, double tol = 1e-8,
                                     double drop = 1e-14);

    int qubits() const { return n_; }
    double constant() const { return constant_; }
    const std::vector<PauliString> &terms() const { return terms_; }
    const std::vector<double> &coeffs() const { return coeffs_; }
    std::size_t size() const { return terms_.size(); }

    /// H|psi>, constant included.
    StateVector apply(const StateVector &psi) const;
    double expectation(const StateVector &psi) const;

  private:
    void compile();

    int n_ = 0;
    double constant_ = 0.0;
    std::vector<PauliString> terms_;
    std::vector<double> coeffs_;
    // Sparse rows of H minus the constant: row r couples to col_[k] for
    // k in [row_ptr_[r], row_ptr_[r+1]).
    std::vector<std::size_t> row_ptr_;
    std::vector<std::uint32_t> col_;
    std::vector<Complex> val_;
};

struct ShotModel {
    enum class Mode { Exact, Sampled };
    Mode mode = Mode::Exact;
    std::uint64_t shots = 100000;
    std::uint64_t seed = 0;

    static ShotModel exact() { return {}; }
    static ShotModel sampled(std::uint64_t shots, std::uint64_t seed);
};

/// Expectation values under a shot model. In sampled mode every distinct
/// Pauli term is measured independently with the full shot budget and the
/// outcome counts are binomial; the stream is fixed by the seed.
class Estimator {
  public:
    explicit Estimator(ShotModel model);

    const ShotModel &model() const { return model_; }
    double expectation(const StateVector &psi, const QubitHamiltonian &h);
    /// Estimate of <P> for a hermitian string, coefficient ignored.
    double measure(const StateVector &psi, const PauliString &p);
    double measure(double exact_value);

  private:
    ShotModel model_;
    std::mt19937_64 rng_;
};

double expectation(const StateVector &psi, const QubitHamiltonian &h,
                   const ShotModel &model);

} // namespace pevqe::qc
