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
#include "pevqe/ci.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "pevqe/error.hpp"

namespace pevqe::qc {

namespace {

constexpr int kMaxCiOrbitals = 16;
constexpr std::size_t kMaxCiDimension = 20000;

} // namespace

DeterminantSpace::DeterminantSpace(int n_orbitals, int n_alpha, int n_beta,
                                   std::uint64_t frozen_mask)
    : n_orbitals_(n_orbitals) {
    if (n_orbitals < 1 || n_orbitals > kMaxCiOrbitals) {
        throw ValidationError("determinant space supports 1.." +
                              std::to_string(kMaxCiOrbitals) + " orbitals");
    }
    if (n_alpha < 0 || n_beta < 0 || n_alpha > n_orbitals || n_beta > n_orbitals) {
        throw ValidationError("electron count does not fit the orbital space");
    }
    const std::uint64_t dim = std::uint64_t{1} << (2 * n_orbitals);
    for (std::uint64_t d = 0; d < dim; ++d) {
        int na = 0, nb = 0;
        for (int p = 0; p < n_orbitals; ++p) {
            na += (d >> (2 * p)) & 1U;
            nb += (d >> (2 * p + 1)) & 1U;
        }
        if (na == n_alpha && nb == n_beta && (d & frozen_mask) == frozen_mask) {
            dets_.push_back(d);
        }
    }
    if (dets_.empty()) {
        throw ValidationError("determinant space is empty");
    }
}

long DeterminantSpace::find(std::uint64_t det) const {
    const auto it = std::lower_bound(dets_.begin(), dets_.end(), det);
    if (it == dets_.end() || *it != det) {
        return -1;
    }
    return static_cast<long>(it - dets_.begin());
}

bool apply_ladder(std::uint64_t &det, int mode, bool dagger, int &sign) {
    const std::uint64_t bit = std::uint64_t{1} << mode;
    if (static_cast<bool>(det & bit) == dagger) {
        return false;
    }
    if (std::popcount(det & (bit - 1)) % 2) {
        sign = -sign;
    }
    det ^= bit;
    return true;
}

Eigen::MatrixXd ci_hamiltonian(const ActiveSpaceProblem &problem,
                               const DeterminantSpace &space) {
    problem.validate();
    if (space.n_orbitals() != problem.n_orbitals) {
        throw ValidationError("determinant space and problem differ in orbitals");
    }
    if (space.size() > kMaxCiDimension) {
        throw ValidationError("determinant space too large for dense CI");
    }
    const int n = problem.n_orbitals;
    const auto dim = static_cast<Eigen::Index>(space.size());
    const Eigen::MatrixXd h = problem.one_body();
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(dim, dim) * problem.core;
    for (Eigen::Index col = 0; col < dim; ++col) {
        const std::uint64_t d0 = space.determinants()[static_cast<std::size_t>(col)];
        auto add = [&](std::uint64_t d, int sign, double v) {
            const long row = space.find(d);
            if (row >= 0) {
                m(row, col) += sign * v;
            }
        };
        for (int p = 0; p < n; ++p) {
            for (int q = 0; q < n; ++q) {
                if (h(p, q) == 0.0) {
                    continue;
                }
                for (int s = 0; s < 2; ++s) {
                    std::uint64_t d = d0;
                    int sign = 1;
                    if (apply_ladder(d, 2 * q + s, false, sign) &&
                        apply_ladder(d, 2 * p + s, true, sign)) {
                        add(d, sign, h(p, q));
                    }
                }
            }
        }
        for (int p = 0; p < n; ++p) {
            for (int q = 0; q < n; ++q) {
                for (int r = 0; r < n; ++r) {
                    for (int s = 0; s < n; ++s) {
                        const double v = problem.g(p, q, r, s);
                        if (v == 0.0) {
                            continue;
                        }
                        for (int a = 0; a < 2; ++a) {
                            for (int b = 0; b < 2; ++b) {
                                std::uint64_t d = d0;
                                int sign = 1;
                                if (apply_ladder(d, 2 * q + a, false, sign) &&
                                    apply_ladder(d, 2 * s + b, false, sign) &&
                                    apply_ladder(d, 2 * r + b, true, sign) &&
                                    apply_ladder(d, 2 * p + a, true, sign)) {
                                    add(d, sign, 0.5 * v);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    return m;
}

CiResult solve_ci(const ActiveSpaceProblem &problem, const DeterminantSpace &space) {
    const Eigen::MatrixXd m = ci_hamiltonian(problem, space);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
    if (es.info() != Eigen::Success) {
        throw ConvergenceError("CI diagonalization failed");
    }
    CiResult r;
    r.energy = es.eigenvalues()(0);
    r.vector = es.eigenvectors().col(0);
    // Fix the overall sign so results are reproducible.
    Eigen::Index big = 0;
    r.vector.cwiseAbs().maxCoeff(&big);
    if (r.vector(big) < 0) {
        r.vector = -r.vector;
    }
    return r;
}

CiResult solve_fci(const ActiveSpaceProblem &problem) {
    return solve_ci(problem, DeterminantSpace(problem.n_orbitals, problem.n_alpha,
                                              problem.n_beta));
}

Rdms ci_rdms(const DeterminantSpace &space, const Eigen::VectorXd &c) {
    const int n = space.n_orbitals();
    if (c.size() != static_cast<Eigen::Index>(space.size())) {
        throw ValidationError("CI vector does not match the determinant space");
    }
    Rdms out{Eigen::MatrixXd::Zero(n, n), Eri(n)};
    for (std::size_t k = 0; k < space.size(); ++k) {
        const double ck = c(static_cast<Eigen::Index>(k));
        if (ck == 0.0) {
            continue;
        }
        const std::uint64_t d0 = space.determinants()[k];
        auto coeff = [&](std::uint64_t d) {
            const long row = space.find(d);
            return row < 0 ? 0.0 : c(row);
        };
        for (int p = 0; p < n; ++p) {
            for (int q = 0; q < n; ++q) {
                for (int s = 0; s < 2; ++s) {
                    std::uint64_t d = d0;
                    int sign = 1;
                    if (apply_ladder(d, 2 * q + s, false, sign) &&
                        apply_ladder(d, 2 * p + s, true, sign)) {
                        out.one(p, q) += sign * coeff(d) * ck;
                    }
                }
                for (int r = 0; r < n; ++r) {
                    for (int t = 0; t < n; ++t) {
                        for (int a = 0; a < 2; ++a) {
                            for (int b = 0; b < 2; ++b) {
                                std::uint64_t d = d0;
                                int sign = 1;
                                if (apply_ladder(d, 2 * q + a, false, sign) &&
                                    apply_ladder(d, 2 * t + b, false, sign) &&
                                    apply_ladder(d, 2 * r + b, true, sign) &&
                                    apply_ladder(d, 2 * p + a, true, sign)) {
                                    out.two(p, q, r, t) += sign * coeff(d) * ck;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

} // namespace pevqe::qc
