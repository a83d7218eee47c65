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
#include "pevqe/sector.hpp"

#include <bit>
#include <cmath>
#include <map>

#include "pevqe/ci.hpp"
#include "pevqe/error.hpp"

namespace pevqe::qc {

namespace {

const Complex kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

// P|b> = phase |b ^ x>, coefficient excluded.
Complex string_phase(const PauliString &p, std::uint64_t b) {
    const Complex w = kIPow[p.y_count() % 4];
    return std::popcount(b & p.z) % 2 ? -w : w;
}

} // namespace

SectorEngine::SectorEngine(const QubitHamiltonian &h, std::uint64_t reference)
    : n_qubits_(h.qubits()), reference_(reference) {
    if (n_qubits_ % 2 != 0 || n_qubits_ < 2) {
        throw ValidationError("sector simulation needs an even number of qubits");
    }
    if (n_qubits_ < 64 && (reference >> n_qubits_) != 0) {
        throw ValidationError("reference determinant has bits beyond the register");
    }
    const std::uint64_t alpha = 0x5555555555555555ull;
    const int na = std::popcount(reference & alpha);
    const int nb = std::popcount(reference & ~alpha);
    basis_ = DeterminantSpace(n_qubits_ / 2, na, nb).determinants();
    index_.assign(std::size_t{1} << n_qubits_, -1);
    for (std::size_t i = 0; i < basis_.size(); ++i) {
        index_[basis_[i]] = static_cast<std::int32_t>(i);
    }

    // Group the terms by flip mask once; each column then needs one pass
    // per group.
    std::map<std::uint64_t, std::vector<std::size_t>> groups;
    for (std::size_t k = 0; k < h.size(); ++k) {
        groups[h.terms()[k].x].push_back(k);
    }
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t j = 0; j < basis_.size(); ++j) {
        const std::uint64_t b = basis_[j];
        trip.emplace_back(j, j, h.constant());
        for (const auto &[x, members] : groups) {
            Complex v{};
            for (auto k : members) {
                v += h.coeffs()[k] * string_phase(h.terms()[k], b);
            }
            if (std::abs(v) <= 1e-14) {
                continue;
            }
            const std::int32_t i = index_[b ^ x];
            if (i < 0) {
                throw ValidationError("Hamiltonian does not conserve the particle sector");
            }
            if (std::abs(v.imag()) > 1e-12) {
                throw ValidationError("Hamiltonian is complex inside the particle sector");
            }
            trip.emplace_back(i, j, v.real());
        }
    }
    h_.resize(static_cast<Eigen::Index>(basis_.size()), static_cast<Eigen::Index>(basis_.size()));
    h_.setFromTriplets(trip.begin(), trip.end());
}

SectorEngine::Compiled SectorEngine::compile(const PoolOperator &op) const {
    Compiled out;
    for (const auto &block : op.blocks) {
        // G = sum_k i c_k P_k applied to every basis state.
        std::vector<Rotation> rot;
        std::vector<char> seen(basis_.size(), 0);
        for (std::size_t j = 0; j < basis_.size(); ++j) {
            std::map<std::uint64_t, Complex> image;
            for (const auto &p : block) {
                if (p.n != n_qubits_) {
                    throw ValidationError("pool operator and Hamiltonian differ in qubit count");
                }
                image[basis_[j] ^ p.x] +=
                    Complex(0.0, p.coeff.real()) * string_phase(p, basis_[j]);
            }
            for (const auto &[det, v] : image) {
                if (std::abs(v) <= 1e-12) {
                    continue;
                }
                const std::int32_t i = index_[det];
                if (i < 0 || std::abs(v.imag()) > 1e-12 ||
                    std::abs(std::abs(v.real()) - 1.0) > 1e-12) {
                    throw ValidationError("pool operator " + op.label +
                                          " is not a sector-preserving excitation");
                }
                if (seen[j] && seen[static_cast<std::size_t>(i)]) {
                    continue; // reverse direction of a recorded pair
                }
                if (seen[j] || seen[static_cast<std::size_t>(i)]) {
                    throw ValidationError("pool operator " + op.label +
                                          " couples more than two determinants");
                }
                seen[j] = seen[static_cast<std::size_t>(i)] = 1;
                rot.push_back({static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(i),
                               v.real() > 0.0 ? 1.0 : -1.0});
            }
        }
        out.push_back(std::move(rot));
    }
    return out;
}

std::vector<SectorEngine::Compiled> SectorEngine::compile(const std::vector<PoolOperator> &ops) const {
    std::vector<Compiled> out;
    out.reserve(ops.size());
    for (const auto &op : ops) {
        out.push_back(compile(op));
    }
    return out;
}

Eigen::VectorXd SectorEngine::reference_state() const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis_.size()));
    v(index_[reference_]) = 1.0;
    return v;
}

void SectorEngine::apply(Eigen::VectorXd &psi, const Compiled &op, double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    for (const auto &block : op) {
        for (const auto &r : block) {
            const double a = psi(r.from);
            const double b = psi(r.to);
            psi(r.from) = c * a - r.sign * s * b;
            psi(r.to) = c * b + r.sign * s * a;
        }
    }
}

Eigen::VectorXd SectorEngine::prepare(const std::vector<Compiled> &ops,
                                      const std::vector<double> &theta) const {
    if (ops.size() != theta.size()) {
        throw ValidationError("ansatz has " + std::to_string(ops.size()) + " operators but " +
                              std::to_string(theta.size()) + " parameters");
    }
    Eigen::VectorXd psi = reference_state();
    for (std::size_t k = 0; k < ops.size(); ++k) {
        apply(psi, ops[k], theta[k]);
    }
    return psi;
}

double SectorEngine::energy(const std::vector<Compiled> &ops, const std::vector<double> &theta,
                            Eigen::VectorXd *gradient) const {
    Eigen::VectorXd psi = prepare(ops, theta);
    Eigen::VectorXd lambda = h_ * psi;
    const double e = psi.dot(lambda);
    if (!gradient) {
        return e;
    }
    gradient->setZero(static_cast<Eigen::Index>(theta.size()));
    // Adjoint sweep over blocks in reverse order.
    for (std::size_t k = ops.size(); k-- > 0;) {
        const double c = std::cos(theta[k]);
        const double s = std::sin(theta[k]);
        double g = 0.0;
        for (std::size_t b = ops[k].size(); b-- > 0;) {
            for (const auto &r : ops[k][b]) {
                const double pf = psi(r.from), pt = psi(r.to);
                const double lf = lambda(r.from), lt = lambda(r.to);
                // <lambda|G|psi> with G|from> = sign|to>, G|to> = -sign|from>
                g += r.sign * (lt * pf - lf * pt);
                psi(r.from) = c * pf + r.sign * s * pt;
                psi(r.to) = c * pt - r.sign * s * pf;
                lambda(r.from) = c * lf + r.sign * s * lt;
                lambda(r.to) = c * lt - r.sign * s * lf;
            }
        }
        (*gradient)(static_cast<Eigen::Index>(k)) = 2.0 * g;
    }
    return e;
}

double SectorEngine::gradient(const Eigen::VectorXd &psi, const Eigen::VectorXd &h_psi,
                              const Compiled &op) {
    double g = 0.0;
    for (const auto &block : op) {
        for (const auto &r : block) {
            g += r.sign * (h_psi(r.to) * psi(r.from) - h_psi(r.from) * psi(r.to));
        }
    }
    return 2.0 * g;
}

StateVector SectorEngine::embed(const Eigen::VectorXd &psi) const {
    if (psi.size() != static_cast<Eigen::Index>(basis_.size())) {
        throw ValidationError("sector vector has the wrong dimension");
    }
    StateVector out(n_qubits_);
    out[0] = 0.0;
    for (std::size_t i = 0; i < basis_.size(); ++i) {
        out[basis_[i]] = psi(static_cast<Eigen::Index>(i));
    }
    return out;
}

} // namespace pevqe::qc
