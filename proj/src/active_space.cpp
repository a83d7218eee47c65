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
#include "pevqe/active_space.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "pevqe/error.hpp"
#include "pevqe/fermion.hpp"

namespace pevqe::qc {

void Eri::set_symmetric(int p, int q, int r, int s, double v) {
    for (auto [a, b, c, d] : {std::array{p, q, r, s}, std::array{q, p, r, s},
                              std::array{p, q, s, r}, std::array{q, p, s, r},
                              std::array{r, s, p, q}, std::array{s, r, p, q},
                              std::array{r, s, q, p}, std::array{s, r, q, p}}) {
        (*this)(a, b, c, d) = v;
    }
}

double Eri::symmetry_error() const {
    double err = 0.0;
    for (int p = 0; p < n_; ++p) {
        for (int q = 0; q < n_; ++q) {
            for (int r = 0; r < n_; ++r) {
                for (int s = 0; s < n_; ++s) {
                    const double v = (*this)(p, q, r, s);
                    err = std::max({err, std::abs(v - (*this)(q, p, r, s)),
                                    std::abs(v - (*this)(p, q, s, r)),
                                    std::abs(v - (*this)(r, s, p, q))});
                }
            }
        }
    }
    return err;
}

Eri Eri::transformed(const Eigen::MatrixXd &u) const {
    if (u.rows() != n_ || u.cols() != n_) {
        throw ValidationError("transformation matrix does not match the integrals");
    }
    const auto n = static_cast<Eigen::Index>(n_);
    const auto n2 = n * n;
    // Treat the tensor as an n^2 x n^2 matrix and transform one index pair
    // at a time: (ab|cd) -> sum_pq U_pa U_qb (pq|cd).
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        g(data_.data(), n2, n2);
    Eigen::MatrixXd kron(n2, n2);
    for (Eigen::Index p = 0; p < n; ++p) {
        for (Eigen::Index q = 0; q < n; ++q) {
            for (Eigen::Index a = 0; a < n; ++a) {
                for (Eigen::Index b = 0; b < n; ++b) {
                    kron(p * n + q, a * n + b) = u(p, a) * u(q, b);
                }
            }
        }
    }
    const Eigen::MatrixXd t = kron.transpose() * g * kron;
    Eri out(n_);
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        out.data_.data(), n2, n2) = t;
    return out;
}

double Eri::max_abs() const {
    double m = 0.0;
    for (double v : data_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

Eigen::MatrixXd ActiveSpaceProblem::one_body() const {
    if (v_env.size() == 0) {
        return h;
    }
    return h + v_env;
}

void ActiveSpaceProblem::validate(double tol) const {
    const auto n = static_cast<Eigen::Index>(n_orbitals);
    if (n_orbitals < 1 || h.rows() != n || h.cols() != n || g.size() != n_orbitals) {
        throw ValidationError("active-space integrals do not match the orbital count");
    }
    if (n_alpha < 0 || n_beta < 0 || n_alpha > n_orbitals || n_beta > n_orbitals) {
        throw ValidationError("electron count does not fit the active space");
    }
    if ((h - h.transpose()).cwiseAbs().maxCoeff() > tol) {
        throw ValidationError("one-electron integrals are not symmetric");
    }
    if (v_env.size() != 0) {
        if (v_env.rows() != n || v_env.cols() != n) {
            throw ValidationError("environment operator has the wrong shape");
        }
        if ((v_env - v_env.transpose()).cwiseAbs().maxCoeff() > tol) {
            throw ValidationError("environment operator is not symmetric");
        }
    }
    if (g.symmetry_error() > tol) {
        throw ValidationError("two-electron integrals lack eight-fold symmetry");
    }
}

std::uint64_t ActiveSpaceProblem::reference_determinant() const {
    std::uint64_t bits = 0;
    for (int p = 0; p < n_alpha; ++p) {
        bits |= std::uint64_t{1} << spin_orbital(p, 0);
    }
    for (int p = 0; p < n_beta; ++p) {
        bits |= std::uint64_t{1} << spin_orbital(p, 1);
    }
    return bits;
}

double energy_from_rdms(const ActiveSpaceProblem &problem, const Rdms &rdms) {
    const Eigen::MatrixXd h = problem.one_body();
    double e = problem.core + (h.array() * rdms.one.array()).sum();
    const auto &g = problem.g.data();
    const auto &d = rdms.two.data();
    double two = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        two += g[i] * d[i];
    }
    return e + 0.5 * two;
}

QubitHamiltonian build_qubit_hamiltonian(const ActiveSpaceProblem &problem) {
    problem.validate();
    const int n = problem.n_orbitals;
    const int nq = problem.n_qubits();
    std::vector<PauliSum> create(nq), annihilate(nq);
    for (int j = 0; j < nq; ++j) {
        create[j] = jordan_wigner(FermionTerm{1.0, {{j, true}}}, nq);
        annihilate[j] = jordan_wigner(FermionTerm{1.0, {{j, false}}}, nq);
    }
    PauliSum sum(nq);
    sum.add({nq, 0, 0, problem.core});
    const Eigen::MatrixXd h = problem.one_body();
    for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) {
            if (h(p, q) == 0.0) {
                continue;
            }
            for (int s = 0; s < 2; ++s) {
                PauliSum t = create[2 * p + s] * annihilate[2 * q + s];
                t *= h(p, q);
                sum += t;
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
                            const int ip = 2 * p + a, iq = 2 * q + a;
                            const int ir = 2 * r + b, is = 2 * s + b;
                            if (ip == ir || iq == is) {
                                continue;
                            }
                            PauliSum t = create[ip] * create[ir] * annihilate[is] *
                                         annihilate[iq];
                            t *= 0.5 * v;
                            sum += t;
                        }
                    }
                }
            }
        }
    }
    sum.simplify(1e-14);
    return QubitHamiltonian::from_sum(sum);
}

namespace {

std::string upper(std::string s) {
    for (auto &c : s) {
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return s;
}

} // namespace

ActiveSpaceProblem read_fcidump(std::istream &in) {
    std::string header, line;
    bool closed = false;
    while (!closed && std::getline(in, line)) {
        const auto up = upper(line);
        auto end = up.find("&END");
        if (end == std::string::npos) {
            const auto slash = up.find('/');
            if (slash != std::string::npos &&
                up.find_first_not_of(" \t", slash + 1) == std::string::npos) {
                end = slash;
            }
        }
        if (end != std::string::npos) {
            header += " " + up.substr(0, end);
            closed = true;
        } else {
            header += " " + up;
        }
    }
    if (!closed || header.find("&FCI") == std::string::npos) {
        throw ParseError("FCIDUMP header (&FCI ... &END) not found");
    }
    for (auto &c : header) {
        if (c == ',' || c == '=') {
            c = ' ';
        }
    }
    std::map<std::string, long> keys;
    {
        std::istringstream hs(header);
        std::string tok, current;
        while (hs >> tok) {
            char *endp = nullptr;
            const long v = std::strtol(tok.c_str(), &endp, 10);
            if (*endp == '\0' && !current.empty()) {
                if (!keys.count(current)) {
                    keys[current] = v;
                }
            } else {
                current = tok;
            }
        }
    }
    for (const char *k : {"NORB", "NELEC"}) {
        if (!keys.count(k)) {
            throw ParseError(std::string("FCIDUMP header lacks ") + k);
        }
    }
    const long norb = keys["NORB"];
    const long nelec = keys["NELEC"];
    const long ms2 = keys.count("MS2") ? keys["MS2"] : 0;
    if (norb < 1 || norb > 64 || nelec < 0 || (nelec + ms2) % 2 != 0 ||
        std::abs(ms2) > nelec) {
        throw ParseError("inconsistent NORB/NELEC/MS2 in FCIDUMP header");
    }
    ActiveSpaceProblem p;
    p.n_orbitals = static_cast<int>(norb);
    p.n_alpha = static_cast<int>((nelec + ms2) / 2);
    p.n_beta = static_cast<int>((nelec - ms2) / 2);
    p.h = Eigen::MatrixXd::Zero(norb, norb);
    p.g = Eri(p.n_orbitals);
    int no = 0;
    while (std::getline(in, line)) {
        ++no;
        std::istringstream ls(line);
        std::string vs;
        if (!(ls >> vs)) {
            continue;
        }
        for (auto &c : vs) {
            if (c == 'D' || c == 'd') {
                c = 'e';
            }
        }
        int i = 0, j = 0, k = 0, l = 0;
        double v = 0.0;
        try {
            v = std::stod(vs);
        } catch (const std::exception &) {
            throw ParseError("FCIDUMP integral line " + std::to_string(no) +
                             ": bad value '" + vs + "'");
        }
        if (!(ls >> i >> j >> k >> l)) {
            throw ParseError("FCIDUMP integral line " + std::to_string(no) +
                             ": expected four indices");
        }
        for (int x : {i, j, k, l}) {
            if (x < 0 || x > norb) {
                throw ParseError("FCIDUMP integral line " + std::to_string(no) +
                                 ": index out of range");
            }
        }
        if (i == 0 && j == 0 && k == 0 && l == 0) {
            p.core += v;
        } else if (k == 0 && l == 0) {
            if (i == 0 || j == 0) {
                continue; // orbital energies
            }
            p.h(i - 1, j - 1) = v;
            p.h(j - 1, i - 1) = v;
        } else if (i > 0 && j > 0 && k > 0 && l > 0) {
            p.g.set_symmetric(i - 1, j - 1, k - 1, l - 1, v);
        } else {
            throw ParseError("FCIDUMP integral line " + std::to_string(no) +
                             ": unsupported index pattern");
        }
    }
    return p;
}

ActiveSpaceProblem read_fcidump_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open FCIDUMP " + path.string());
    }
    return read_fcidump(in);
}

void write_fcidump(std::ostream &out, const ActiveSpaceProblem &problem,
                   double threshold) {
    const int n = problem.n_orbitals;
    out << " &FCI NORB=" << n << ",NELEC=" << problem.n_electrons()
        << ",MS2=" << problem.n_alpha - problem.n_beta << ",\n  ORBSYM=";
    for (int i = 0; i < n; ++i) {
        out << "1,";
    }
    out << "\n  ISYM=1,\n &END\n";
    out << std::setprecision(17) << std::scientific;
    for (int p = 0; p < n; ++p) {
        for (int q = 0; q <= p; ++q) {
            for (int r = 0; r < n; ++r) {
                for (int s = 0; s <= r; ++s) {
                    if (p * (p + 1) / 2 + q < r * (r + 1) / 2 + s) {
                        continue;
                    }
                    const double v = problem.g(p, q, r, s);
                    if (std::abs(v) > threshold) {
                        out << std::setw(25) << v << ' ' << p + 1 << ' ' << q + 1
                            << ' ' << r + 1 << ' ' << s + 1 << '\n';
                    }
                }
            }
        }
    }
    const Eigen::MatrixXd h = problem.one_body();
    for (int p = 0; p < n; ++p) {
        for (int q = 0; q <= p; ++q) {
            if (std::abs(h(p, q)) > threshold) {
                out << std::setw(25) << h(p, q) << ' ' << p + 1 << ' ' << q + 1
                    << " 0 0\n";
            }
        }
    }
    out << std::setw(25) << problem.core << " 0 0 0 0\n";
}

} // namespace pevqe::qc
