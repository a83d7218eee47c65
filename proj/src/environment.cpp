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
#include "pevqe/environment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "pevqe/error.hpp"

namespace pevqe::pe {

using multipole::interaction_tensor;

void EnvironmentModel::validate() const {
    std::map<std::array<double, 3>, std::size_t> seen;
    for (std::size_t s = 0; s < sites.size(); ++s) {
        const auto &site = sites[s];
        if (!site.position.allFinite()) {
            throw ValidationError("site " + std::to_string(s + 1) +
                                  " has a non-finite position");
        }
        const std::array<double, 3> key{site.position.x(), site.position.y(),
                                        site.position.z()};
        if (auto [it, fresh] = seen.emplace(key, s); !fresh) {
            throw ValidationError("sites " + std::to_string(it->second + 1) +
                                  " and " + std::to_string(s + 1) +
                                  " share the same coordinates");
        }
        const Mat3 &a = site.polarizability;
        if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
            throw ValidationError("polarizability of site " +
                                  std::to_string(s + 1) + " is not symmetric");
        }
        if (site.polarizable()) {
            Eigen::SelfAdjointEigenSolver<Mat3> es(a);
            if (es.eigenvalues().minCoeff() < -1e-12) {
                throw ValidationError("polarizability of site " +
                                      std::to_string(s + 1) +
                                      " is not positive semidefinite");
            }
        }
        if (site.exclusion_group < 0) {
            throw ValidationError("negative exclusion group id");
        }
    }
}

std::vector<std::size_t> EnvironmentModel::polarizable_sites() const {
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < sites.size(); ++s) {
        if (sites[s].polarizable()) {
            out.push_back(s);
        }
    }
    return out;
}

EnvironmentModel EnvironmentModel::without_polarizabilities() const {
    EnvironmentModel out = *this;
    for (auto &s : out.sites) {
        s.polarizability.setZero();
    }
    return out;
}

namespace {

Mat3 invert_polarizability(const Mat3 &alpha, std::size_t site) {
    Eigen::FullPivLU<Mat3> lu(alpha);
    if (!lu.isInvertible() || lu.rcond() < 1e-12) {
        throw ValidationError("polarizability of site " +
                              std::to_string(site + 1) + " is singular");
    }
    return lu.inverse();
}

bool interacts(const PolarizableSite &a, const PolarizableSite &b) {
    return a.exclusion_group != b.exclusion_group;
}

} // namespace

ResponseMatrix build_response_matrix(const EnvironmentModel &env) {
    ResponseMatrix out;
    out.site_index = env.polarizable_sites();
    const auto n = static_cast<Eigen::Index>(out.site_index.size());
    out.matrix = Eigen::MatrixXd::Zero(3 * n, 3 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto &si = env.sites[out.site_index[i]];
        out.matrix.block<3, 3>(3 * i, 3 * i) =
            invert_polarizability(si.polarizability, out.site_index[i]);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const auto &sj = env.sites[out.site_index[j]];
            if (!interacts(si, sj)) {
                continue;
            }
            const Mat3 t =
                interaction_tensor(2, si.position - sj.position).as_matrix();
            out.matrix.block<3, 3>(3 * i, 3 * j) = -t;
            out.matrix.block<3, 3>(3 * j, 3 * i) = -t;
        }
    }
    return out;
}

Vec3 static_field(const EnvironmentModel &env, const Vec3 &point,
                  std::optional<int> exclude_group) {
    Vec3 field = Vec3::Zero();
    for (const auto &site : env.sites) {
        if (exclude_group && site.exclusion_group == *exclude_group) {
            continue;
        }
        if (site.multipoles.is_zero()) {
            continue;
        }
        const Vec3 r = point - site.position;
        if (r.squaredNorm() == 0.0) {
            throw SingularityError("field probe coincides with site " +
                                   site.label);
        }
        field -= multipole::potential_derivative(site.multipoles, r, 1)
                     .as_vector();
    }
    return field;
}

std::vector<Vec3> static_fields_at_sites(const EnvironmentModel &env) {
    std::vector<Vec3> out(env.size(), Vec3::Zero());
    for (std::size_t s = 0; s < env.size(); ++s) {
        out[s] = static_field(env, env.sites[s].position,
                              env.sites[s].exclusion_group);
    }
    return out;
}

namespace {

Eigen::VectorXd stack(const std::vector<Vec3> &fields,
                      const std::vector<std::size_t> &index) {
    Eigen::VectorXd f(3 * static_cast<Eigen::Index>(index.size()));
    for (std::size_t i = 0; i < index.size(); ++i) {
        f.segment<3>(3 * static_cast<Eigen::Index>(i)) = fields.at(index[i]);
    }
    return f;
}

InducedDipoles unstack(const Eigen::VectorXd &mu,
                       const std::vector<std::size_t> &index,
                       std::size_t n_sites) {
    InducedDipoles out;
    out.dipoles.assign(n_sites, Vec3::Zero());
    for (std::size_t i = 0; i < index.size(); ++i) {
        out.dipoles[index[i]] = mu.segment<3>(3 * static_cast<Eigen::Index>(i));
    }
    return out;
}

std::size_t site_count(const ResponseMatrix &b,
                       const std::vector<Vec3> &fields) {
    for (auto s : b.site_index) {
        if (s >= fields.size()) {
            throw ValidationError("field vector shorter than site list");
        }
    }
    return fields.size();
}

} // namespace

InducedDipoles solve_induced_dipoles(const ResponseMatrix &b,
                                     const std::vector<Vec3> &fields,
                                     const SolverOptions &opts) {
    const std::size_t n_sites = site_count(b, fields);
    const Eigen::VectorXd f = stack(fields, b.site_index);
    if (f.size() == 0) {
        return unstack(f, b.site_index, n_sites);
    }
    const bool direct =
        opts.method == SolverOptions::Method::Direct ||
        (opts.method == SolverOptions::Method::Auto &&
         b.blocks() <= opts.dense_limit);
    if (direct) {
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(b.matrix);
        const double rcond = lu.rcond();
        if (!(rcond > 1e-14)) {
            throw SingularityError("response matrix is singular (rcond " +
                                   std::to_string(rcond) + ")");
        }
        Eigen::VectorXd mu = lu.solve(f);
        auto out = unstack(mu, b.site_index, n_sites);
        out.residual = (b.matrix * mu - f).lpNorm<Eigen::Infinity>();
        out.rcond = rcond;
        return out;
    }
    // Block Jacobi: mu_s <- alpha_s (F_s - sum_{s' != s} B_ss' mu_s').
    const auto n = static_cast<Eigen::Index>(b.blocks());
    std::vector<Mat3> alpha(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        alpha[i] = b.matrix.block<3, 3>(3 * i, 3 * i).inverse();
    }
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(f.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        mu.segment<3>(3 * i) = alpha[i] * f.segment<3>(3 * i);
    }
    Eigen::VectorXd next(mu.size());
    for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
        const Eigen::VectorXd bmu = b.matrix * mu;
        for (Eigen::Index i = 0; i < n; ++i) {
            const Vec3 off = bmu.segment<3>(3 * i) -
                             b.matrix.block<3, 3>(3 * i, 3 * i) *
                                 mu.segment<3>(3 * i);
            next.segment<3>(3 * i) = alpha[i] * (f.segment<3>(3 * i) - off);
        }
        const double change = (next - mu).lpNorm<Eigen::Infinity>();
        mu.swap(next);
        if (change <= opts.tolerance) {
            auto out = unstack(mu, b.site_index, n_sites);
            out.residual = (b.matrix * mu - f).lpNorm<Eigen::Infinity>();
            out.sweeps = sweep;
            return out;
        }
    }
    throw ConvergenceError("induced dipoles did not converge in " +
                           std::to_string(opts.max_sweeps) + " sweeps");
}

InducedDipoles solve_induced_dipoles(const EnvironmentModel &env,
                                     const std::vector<Vec3> &fields,
                                     const SolverOptions &opts) {
    if (fields.size() != env.size()) {
        throw ValidationError("expected one field per environment site");
    }
    const auto index = env.polarizable_sites();
    const bool direct =
        opts.method == SolverOptions::Method::Direct ||
        (opts.method == SolverOptions::Method::Auto &&
         index.size() <= opts.dense_limit);
    if (direct) {
        return solve_induced_dipoles(build_response_matrix(env), fields, opts);
    }

    // Matrix-free fixed point: mu_s <- alpha_s (F_s + sum T_ss' mu_s').
    const std::size_t n = index.size();
    std::vector<Vec3> pos(n);
    std::vector<int> group(n);
    for (std::size_t i = 0; i < n; ++i) {
        pos[i] = env.sites[index[i]].position;
        group[i] = env.sites[index[i]].exclusion_group;
    }
    // T^(2)(d) m = (3 d (d.m) - |d|^2 m) / |d|^5, even in d, so each pair
    // is visited once.
    auto induced_fields = [&](const std::vector<Vec3> &m, std::vector<Vec3> &out) {
        out.assign(n, Vec3::Zero());
        for (std::size_t i = 0; i < n; ++i) {
            Vec3 acc = Vec3::Zero();
            for (std::size_t j = i + 1; j < n; ++j) {
                if (group[i] == group[j]) {
                    continue;
                }
                const Vec3 d = pos[i] - pos[j];
                const double r2 = d.squaredNorm();
                const double inv = 1.0 / r2;
                const double inv5 = inv * inv / std::sqrt(r2);
                acc += (3.0 * d.dot(m[j]) * d - r2 * m[j]) * inv5;
                out[j] += (3.0 * d.dot(m[i]) * d - r2 * m[i]) * inv5;
            }
            out[i] += acc;
        }
    };
    std::vector<Vec3> mu(n), next(n), field(n);
    for (std::size_t i = 0; i < n; ++i) {
        mu[i] = env.sites[index[i]].polarizability * fields[index[i]];
    }
    for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
        induced_fields(mu, field);
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] = env.sites[index[i]].polarizability * (fields[index[i]] + field[i]);
            change = std::max(change, (next[i] - mu[i]).lpNorm<Eigen::Infinity>());
        }
        mu.swap(next);
        if (change <= opts.tolerance) {
            induced_fields(mu, field);
            InducedDipoles out;
            out.dipoles.assign(env.size(), Vec3::Zero());
            double residual = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                out.dipoles[index[i]] = mu[i];
                const Mat3 inv = invert_polarizability(
                    env.sites[index[i]].polarizability, index[i]);
                residual = std::max(
                    residual, (inv * mu[i] - field[i] - fields[index[i]])
                                  .lpNorm<Eigen::Infinity>());
            }
            out.residual = residual;
            out.sweeps = sweep;
            return out;
        }
    }
    throw ConvergenceError("induced dipoles did not converge in " +
                           std::to_string(opts.max_sweeps) + " sweeps");
}

EnvironmentEfgParts environment_efg_parts(const EnvironmentModel &env,
                                          const InducedDipoles &mu,
                                          const Vec3 &point,
                                          const EnvironmentEfgOptions &opts) {
    if (!mu.dipoles.empty() && mu.dipoles.size() != env.size()) {
        throw ValidationError("induced dipole count does not match sites");
    }
    EnvironmentEfgParts out;
    for (std::size_t s = 0; s < env.size(); ++s) {
        const auto &site = env.sites[s];
        const bool has_induced =
            !mu.dipoles.empty() && !mu.dipoles[s].isZero(0.0);
        if (site.multipoles.is_zero() && !has_induced) {
            continue;
        }
        const Vec3 r = point - site.position;
        if (r.squaredNorm() == 0.0) {
            throw SingularityError("EFG probe coincides with site " +
                                   site.label);
        }
        if (!site.multipoles.is_zero()) {
            out.permanent +=
                multipole::potential_derivative(site.multipoles, r, 2)
                    .as_matrix();
        }
        if (has_induced) {
            const auto t3 = interaction_tensor(3, r);
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) {
                    double sum = 0.0;
                    for (int c = 0; c < 3; ++c) {
                        sum += mu.dipoles[s][c] * t3(a, b, c);
                    }
                    out.induced(a, b) += opts.induced_factor * sum;
                }
            }
        }
    }
    return out;
}

Mat3 environment_efg(const EnvironmentModel &env, const InducedDipoles &mu,
                     const Vec3 &point, const EnvironmentEfgOptions &opts) {
    return environment_efg_parts(env, mu, point, opts).total();
}

int packed_index(int a, int b) {
    if (a > b) {
        std::swap(a, b);
    }
    static constexpr int table[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
    return table[a][b];
}

namespace {

void require_symmetric(const Eigen::MatrixXd &m, Eigen::Index n,
                       const std::string &what) {
    if (m.rows() != n || m.cols() != n) {
        throw ValidationError(what + " has the wrong dimension");
    }
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
        throw ValidationError(what + " is not symmetric");
    }
}

} // namespace

FoldedOperator fold_environment_operator(
    const EnvironmentModel &env, const InducedDipoles &mu,
    const std::vector<SiteIntegrals> &integrals) {
    if (integrals.size() != env.size()) {
        throw ValidationError("site integrals provided for " +
                              std::to_string(integrals.size()) + " of " +
                              std::to_string(env.size()) + " sites");
    }
    if (!mu.dipoles.empty() && mu.dipoles.size() != env.size()) {
        throw ValidationError("induced dipole count does not match sites");
    }
    const Eigen::Index n = env.empty() ? 0 : integrals.front().dimension();
    FoldedOperator out{Eigen::MatrixXd::Zero(n, n),
                       Eigen::MatrixXd::Zero(n, n)};
    for (std::size_t s = 0; s < env.size(); ++s) {
        const auto &site = env.sites[s];
        const auto &t = integrals[s];
        const std::string tag = "integrals of site " + std::to_string(s + 1);
        require_symmetric(t.t0, n, tag + " (order 0)");
        for (const auto &m : t.t1) {
            require_symmetric(m, n, tag + " (order 1)");
        }
        const auto &mp = site.multipoles;
        out.v_es += mp.charge * t.t0;
        for (int a = 0; a < 3; ++a) {
            out.v_es -= mp.dipole[a] * t.t1[a];
        }
        if (!mp.quadrupole.isZero(0.0)) {
            if (!t.has_t2) {
                throw ValidationError(tag + " lack order-2 matrices");
            }
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) {
                    const auto &m = t.t2[packed_index(a, b)];
                    require_symmetric(m, n, tag + " (order 2)");
                    out.v_es += 0.5 * mp.quadrupole(a, b) * m;
                }
            }
        }
        if (!mu.dipoles.empty()) {
            for (int a = 0; a < 3; ++a) {
                out.v_ind -= mu.dipoles[s][a] * t.t1[a];
            }
        }
    }
    return out;
}

double induction_energy_correction(const Eigen::MatrixXd &v_ind,
                                   const Eigen::MatrixXd &density) {
    if (v_ind.rows() != density.rows() || v_ind.cols() != density.cols()) {
        throw ValidationError("v_ind and density shapes differ");
    }
    return -0.5 * (density.transpose().cwiseProduct(v_ind)).sum();
}

double static_potential(const EnvironmentModel &env, const Vec3 &point) {
    double phi = 0.0;
    for (const auto &site : env.sites) {
        if (site.multipoles.is_zero()) {
            continue;
        }
        phi += multipole::potential_derivative(site.multipoles,
                                               point - site.position, 0)[0];
    }
    return phi;
}

} // namespace pevqe::pe
