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
#include "pevqe/qubit_hamiltonian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>

#include "pevqe/error.hpp"

namespace pevqe::qc {

QubitHamiltonian QubitHamiltonian::from_sum(const PauliSum &sum, double tol,
                                            double drop) {
    QubitHamiltonian h;
    h.n_ = sum.qubits();
    for (auto p : sum.strings()) {
        if (std::abs(p.coeff.imag()) > tol) {
            throw ValidationError("Hamiltonian term " + p.letters() +
                                  " has an imaginary coefficient");
        }
        const double c = p.coeff.real();
        if (p.is_identity()) {
            h.constant_ += c;
            continue;
        }
        if (std::abs(c) <= drop) {
            continue;
        }
        p.coeff = 1.0;
        h.terms_.push_back(p);
        h.coeffs_.push_back(c);
    }
    h.compile();
    return h;
}

void QubitHamiltonian::compile() {
    const std::size_t dim = std::size_t{1} << n_;
    // Group terms by X mask: they share the target row of every column.
    std::map<std::uint64_t, std::vector<std::size_t>> groups;
    for (std::size_t k = 0; k < terms_.size(); ++k) {
        groups[terms_[k].x].push_back(k);
    }
    std::vector<std::vector<std::pair<std::uint32_t, Complex>>> rows(dim);
    static const Complex ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    double scale = 0.0;
    for (double c : coeffs_) {
        scale += std::abs(c);
    }
    const double cut = 1e-15 * std::max(scale, 1.0);
    for (const auto &[x, members] : groups) {
        for (std::uint64_t b = 0; b < dim; ++b) {
            Complex v{};
            for (auto k : members) {
                const auto &p = terms_[k];
                const double sign = std::popcount(b & p.z) % 2 ? -1.0 : 1.0;
                v += coeffs_[k] * sign * ipow[p.y_count() % 4];
            }
            if (std::abs(v) > cut) {
                rows[b ^ x].emplace_back(static_cast<std::uint32_t>(b), v);
            }
        }
    }
    row_ptr_.assign(dim + 1, 0);
    col_.clear();
    val_.clear();
    for (std::size_t r = 0; r < dim; ++r) {
        auto &row = rows[r];
        std::sort(row.begin(), row.end(),
                  [](const auto &a, const auto &b) { return a.first < b.first; });
        for (const auto &[c, v] : row) {
            col_.push_back(c);
            val_.push_back(v);
        }
        row_ptr_[r + 1] = col_.size();
    }
}

StateVector QubitHamiltonian::apply(const StateVector &psi) const {
    if (psi.qubits() != n_) {
        throw ValidationError("Hamiltonian and state have different qubit counts");
    }
    StateVector out(n_);
    auto &o = out.amplitudes();
    const auto &a = psi.amplitudes();
    for (std::size_t r = 0; r + 1 < row_ptr_.size(); ++r) {
        Complex s = constant_ * a[r];
        for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            s += val_[k] * a[col_[k]];
        }
        o[r] = s;
    }
    return out;
}

double QubitHamiltonian::expectation(const StateVector &psi) const {
    return psi.inner(apply(psi)).real();
}

ShotModel ShotModel::sampled(std::uint64_t shots, std::uint64_t seed) {
    if (shots < 1) {
        throw ValidationError("sampled mode needs at least one shot");
    }
    return {Mode::Sampled, shots, seed};
}

Estimator::Estimator(ShotModel model) : model_(model), rng_(model.seed) {
    if (model_.mode == ShotModel::Mode::Sampled && model_.shots < 1) {
        throw ValidationError("sampled mode needs at least one shot");
    }
}

double Estimator::measure(double exact_value) {
    if (model_.mode == ShotModel::Mode::Exact) {
        return exact_value;
    }
    const double p = std::clamp(0.5 * (1.0 + exact_value), 0.0, 1.0);
    std::binomial_distribution<std::uint64_t> dist(model_.shots, p);
    const auto plus = dist(rng_);
    return (2.0 * static_cast<double>(plus) - static_cast<double>(model_.shots)) /
           static_cast<double>(model_.shots);
}

double Estimator::measure(const StateVector &psi, const PauliString &p) {
    return measure(pauli_expectation(psi, p));
}

double Estimator::expectation(const StateVector &psi, const QubitHamiltonian &h) {
    if (model_.mode == ShotModel::Mode::Exact) {
        return h.expectation(psi);
    }
    double e = h.constant();
    for (std::size_t k = 0; k < h.size(); ++k) {
        e += h.coeffs()[k] * measure(psi, h.terms()[k]);
    }
    return e;
}

double expectation(const StateVector &psi, const QubitHamiltonian &h,
                   const ShotModel &model) {
    Estimator est(model);
    return est.expectation(psi, h);
}

} // namespace pevqe::qc
