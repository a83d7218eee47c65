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

#include <filesystem>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "pevqe/qubit_hamiltonian.hpp"

namespace pevqe::qc {

/// Real two-electron integrals (pq|rs) in chemists' notation, dense n^4.
class Eri {
  public:
    Eri() = default;
    explicit Eri(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * n * n, 0.0) {}

    int size() const { return n_; }
    double &operator()(int p, int q, int r, int s) { return data_[index(p, q, r, s)]; }
    double operator()(int p, int q, int r, int s) const {
        return data_[index(p, q, r, s)];
    }
    std::vector<double> &data() { return data_; }
    const std::vector<double> &data() const { return data_; }

    /// Sets all eight permutations of (pq|rs).
    void set_symmetric(int p, int q, int r, int s, double v);
    /// Largest deviation from the eight-fold real-orbital symmetry.
    double symmetry_error() const;
    /// Orthogonal four-index transform (pq|rs) -> sum U_ap U_bq U_cr U_ds (ab|cd).
    Eri transformed(const Eigen::MatrixXd &u) const;
    double max_abs() const;

  private:
    std::size_t index(int p, int q, int r, int s) const {
        return ((static_cast<std::size_t>(p) * n_ + q) * n_ + r) * n_ + s;
    }

    int n_ = 0;
    std::vector<double> data_;
};

/// Spin-free active-space Hamiltonian
/// core + sum h_pq E_pq + 1/2 sum (pq|rs) e_pqrs, plus an optional folded
/// environment matrix that adds to h.
struct ActiveSpaceProblem {
    int n_orbitals = 0;
    int n_alpha = 0;
    int n_beta = 0;
    Eigen::MatrixXd h;
    Eri g;
    double core = 0.0;
    Eigen::MatrixXd v_env;

    int n_electrons() const { return n_alpha + n_beta; }
    int n_qubits() const { return 2 * n_orbitals; }
    /// h plus v_env when present.
    Eigen::MatrixXd one_body() const;
    /// Throws ValidationError on shape, electron-count or symmetry violations.
    void validate(double tol = 1e-8) const;
    /// Qubit index of spin orbital (orbital p, spin 0=alpha / 1=beta).
    static int spin_orbital(int p, int spin) { return 2 * p + spin; }
    /// Basis index of the lowest-orbital determinant (n_alpha/n_beta filled).
    std::uint64_t reference_determinant() const;
};

/// Spin-summed reduced density matrices: D_pq = <E_pq>,
/// d_pqrs = sum_{st} <a+_ps a+_rt a_st a_qs>.
struct Rdms {
    Eigen::MatrixXd one;
    Eri two;
};

/// core + sum h D + 1/2 sum g d, using problem.one_body().
double energy_from_rdms(const ActiveSpaceProblem &problem, const Rdms &rdms);

/// Jordan-Wigner qubit Hamiltonian of the problem on 2 n_orbitals qubits,
/// spin orbitals interleaved (2p alpha, 2p+1 beta).
QubitHamiltonian build_qubit_hamiltonian(const ActiveSpaceProblem &problem);

/// FCIDUMP: "&FCI NORB=..,NELEC=..,MS2=.., &END" header, then
/// "value p q r s" lines in 1-based chemists' order; zeros mark one-electron
/// (r=s=0) and constant (all zero) entries.
ActiveSpaceProblem read_fcidump(std::istream &in);
ActiveSpaceProblem read_fcidump_file(const std::filesystem::path &path);
void write_fcidump(std::ostream &out, const ActiveSpaceProblem &problem,
                   double threshold = 1e-14);

} // namespace pevqe::qc
