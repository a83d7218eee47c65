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
#include "pevqe/scf.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "pevqe/ci.hpp"
#include "pevqe/error.hpp"
#include "pevqe/sector.hpp"

namespace pevqe::scf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd congruence(const MatrixXd &u, const MatrixXd &m) { return u.transpose() * m * u; }

// -sum_s mu_s . t1_s
MatrixXd induction_operator(const MolecularSystem &sys, const pe::InducedDipoles &mu) {
    const auto n = static_cast<Eigen::Index>(sys.n_orbitals());
    MatrixXd v = MatrixXd::Zero(n, n);
    for (std::size_t s = 0; s < mu.dipoles.size(); ++s) {
        for (int a = 0; a < 3; ++a) {
            v -= mu.dipoles[s](a) * sys.site_integrals[s].t1[static_cast<std::size_t>(a)];
        }
    }
    return v;
}

double static_interaction(const EnvironmentCoupling &env, const pe::InducedDipoles &mu) {
    double e = 0.0;
    for (std::size_t s = 0; s < mu.dipoles.size(); ++s) {
        e += mu.dipoles[s].dot(env.static_fields[s]);
    }
    return e;
}

pe::InducedDipoles update_dipoles(const MolecularSystem &sys, const EnvironmentCoupling &env,
                                  const MatrixXd &density, const pe::SolverOptions &opts) {
    if (sys.environment.empty()) {
        return {};
    }
    std::vector<Vec3> f = electronic_fields(sys, density);
    for (std::size_t s = 0; s < f.size(); ++s) {
        f[s] += env.static_fields[s];
    }
    return pe::solve_induced_dipoles(env.response, f, opts);
}

// Full 1-RDM of the reference determinant in the working orbitals.
MatrixXd reference_density(const OrbitalPartition &part) {
    const int n = part.n_orbitals();
    MatrixXd d = MatrixXd::Zero(n, n);
    for (int i = 0; i < part.n_inactive; ++i) {
        d(i, i) = 2.0;
    }
    for (int t = 0; t < part.n_active; ++t) {
        d(part.n_inactive + t, part.n_inactive + t) =
            (t < part.n_alpha() ? 1.0 : 0.0) + (t < part.n_beta() ? 1.0 : 0.0);
    }
    return d;
}

} // namespace

void OrbitalPartition::validate(int n_orbitals_total, int n_electrons) const {
    if (n_inactive < 0 || n_active < 1 || n_virtual < 0) {
        throw ValidationError("orbital partition needs at least one active orbital");
    }
    if (this->n_orbitals() != n_orbitals_total) {
        throw ValidationError("orbital partition does not cover the orbital space");
    }
    if (active_electrons < 0 || active_electrons > 2 * n_active) {
        throw ValidationError("active electron count does not fit the active orbitals");
    }
    if ((active_electrons + ms2) % 2 != 0 || n_alpha() < 0 || n_beta() < 0 ||
        n_alpha() > n_active || n_beta() > n_active) {
        throw ValidationError("active spin projection is inconsistent");
    }
    if (n_electrons >= 0 && 2 * n_inactive + active_electrons != n_electrons) {
        throw ValidationError("inactive and active electrons do not add up to the total");
    }
}

int OrbitalPartition::space(int p) const {
    if (p < 0 || p >= n_orbitals()) {
        throw ValidationError("orbital index outside the partition");
    }
    return p < n_inactive ? 0 : (p < n_inactive + n_active ? 1 : 2);
}

std::vector<std::pair<int, int>> OrbitalPartition::rotation_pairs() const {
    std::vector<std::pair<int, int>> pairs;
    for (int p = 0; p < n_orbitals(); ++p) {
        for (int q = 0; q < p; ++q) {
            if (!redundant(p, q)) {
                pairs.emplace_back(p, q);
            }
        }
    }
    return pairs;
}

OrbitalPartition OrbitalPartition::from_counts(int n_orbitals, int n_electrons, int n_inactive,
                                               int n_active, int ms2) {
    OrbitalPartition p;
    p.n_inactive = n_inactive;
    p.n_active = n_active;
    p.n_virtual = n_orbitals - n_inactive - n_active;
    p.active_electrons = n_electrons - 2 * n_inactive;
    p.ms2 = ms2;
    p.validate(n_orbitals, n_electrons);
    return p;
}

MatrixXd rotation_matrix(const MatrixXd &kappa) {
    if (kappa.rows() != kappa.cols()) {
        throw ValidationError("rotation generator must be square");
    }
    if ((kappa + kappa.transpose()).cwiseAbs().maxCoeff() >
        1e-12 * std::max(1.0, kappa.cwiseAbs().maxCoeff())) {
        throw ValidationError("rotation generator must be anti-symmetric");
    }
    if (kappa.size() == 0) {
        return kappa;
    }
    return kappa.exp();
}

MatrixXd kappa_matrix(const VectorXd &x, const std::vector<std::pair<int, int>> &pairs, int n) {
    if (x.size() != static_cast<Eigen::Index>(pairs.size())) {
        throw ValidationError("rotation parameters do not match the pair list");
    }
    MatrixXd k = MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto [p, q] = pairs[i];
        k(p, q) = x(static_cast<Eigen::Index>(i));
        k(q, p) = -x(static_cast<Eigen::Index>(i));
    }
    return k;
}

RotatedIntegrals rotate_integrals(const MatrixXd &h, const qc::Eri &g,
                                  const std::vector<pe::SiteIntegrals> &sites,
                                  const MatrixXd &kappa) {
    if (h.rows() != kappa.rows() || g.size() != kappa.rows()) {
        throw ValidationError("integral and rotation dimensions differ");
    }
    const MatrixXd u = rotation_matrix(kappa);
    RotatedIntegrals out{congruence(u, h), g.transformed(u), sites};
    for (auto &s : out.sites) {
        s.t0 = congruence(u, s.t0);
        for (auto &m : s.t1) {
            m = congruence(u, m);
        }
        if (s.has_t2) {
            for (auto &m : s.t2) {
                m = congruence(u, m);
            }
        }
    }
    return out;
}

qc::ActiveSpaceProblem build_active_problem(const MatrixXd &h, const qc::Eri &g,
                                            const MatrixXd &v_env, double constant,
                                            const OrbitalPartition &part) {
    const int n = static_cast<int>(h.rows());
    part.validate(n, -1);
    if (g.size() != n || (v_env.size() != 0 && v_env.rows() != n)) {
        throw ValidationError("integral dimensions differ from the partition");
    }
    const int ni = part.n_inactive;
    const int na = part.n_active;
    qc::ActiveSpaceProblem p;
    p.n_orbitals = na;
    p.n_alpha = part.n_alpha();
    p.n_beta = part.n_beta();
    double core = constant;
    for (int i = 0; i < ni; ++i) {
        core += 2.0 * h(i, i) + (v_env.size() ? 2.0 * v_env(i, i) : 0.0);
        for (int j = 0; j < ni; ++j) {
            core += 2.0 * g(i, i, j, j) - g(i, j, j, i);
        }
    }
    p.core = core;
    p.h.resize(na, na);
    for (int t = 0; t < na; ++t) {
        for (int u = 0; u < na; ++u) {
            double v = h(ni + t, ni + u);
            for (int i = 0; i < ni; ++i) {
                v += 2.0 * g(ni + t, ni + u, i, i) - g(ni + t, i, i, ni + u);
            }
            p.h(t, u) = v;
        }
    }
    if (v_env.size()) {
        p.v_env = v_env.block(ni, ni, na, na);
    }
    p.g = qc::Eri(na);
    for (int t = 0; t < na; ++t) {
        for (int u = 0; u < na; ++u) {
            for (int v = 0; v < na; ++v) {
                for (int w = 0; w < na; ++w) {
                    p.g(t, u, v, w) = g(ni + t, ni + u, ni + v, ni + w);
                }
            }
        }
    }
    return p;
}

qc::Rdms full_rdms(const qc::Rdms &active, const OrbitalPartition &part) {
    const int n = part.n_orbitals();
    const int ni = part.n_inactive;
    const int na = part.n_active;
    if (active.one.rows() != na || active.two.size() != na) {
        throw ValidationError("active RDMs do not match the partition");
    }
    qc::Rdms out{MatrixXd::Zero(n, n), qc::Eri(n)};
    for (int i = 0; i < ni; ++i) {
        out.one(i, i) = 2.0;
    }
    out.one.block(ni, ni, na, na) = active.one;
    const MatrixXd &d = out.one;
    const int occupied = ni + na;
    for (int p = 0; p < occupied; ++p) {
        for (int q = 0; q < occupied; ++q) {
            for (int r = 0; r < occupied; ++r) {
                for (int s = 0; s < occupied; ++s) {
                    const int inactive = (p < ni) + (q < ni) + (r < ni) + (s < ni);
                    if (inactive == 0) {
                        out.two(p, q, r, s) = active.two(p - ni, q - ni, r - ni, s - ni);
                    } else if (inactive >= 2) {
                        out.two(p, q, r, s) = d(p, q) * d(r, s) - 0.5 * d(p, s) * d(r, q);
                    }
                }
            }
        }
    }
    return out;
}

MatrixXd generalized_fock(const MatrixXd &h, const qc::Eri &g, const qc::Rdms &full) {
    const int n = static_cast<int>(h.rows());
    MatrixXd f = h * full.one.transpose();
    for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) {
            double v = 0.0;
            for (int r = 0; r < n; ++r) {
                for (int s = 0; s < n; ++s) {
                    for (int t = 0; t < n; ++t) {
                        v += g(p, r, s, t) * full.two(q, r, s, t);
                    }
                }
            }
            f(p, q) += v;
        }
    }
    return f;
}

VectorXd orbital_gradient(const MatrixXd &h, const qc::Eri &g, const qc::Rdms &full,
                          const OrbitalPartition &part) {
    const MatrixXd f = generalized_fock(h, g, full);
    const auto pairs = part.rotation_pairs();
    VectorXd out(static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto [p, q] = pairs[k];
        out(static_cast<Eigen::Index>(k)) = 2.0 * (f(p, q) - f(q, p));
    }
    return out;
}

double electronic_energy(const MatrixXd &h, const qc::Eri &g, const qc::Rdms &full) {
    double e = (h.array() * full.one.array()).sum();
    const auto &gd = g.data();
    const auto &dd = full.two.data();
    double two = 0.0;
    for (std::size_t k = 0; k < gd.size(); ++k) {
        two += gd[k] * dd[k];
    }
    return e + 0.5 * two;
}

EnvironmentCoupling couple_environment(const MolecularSystem &sys) {
    EnvironmentCoupling out;
    const auto n = static_cast<Eigen::Index>(sys.n_orbitals());
    out.v_es = MatrixXd::Zero(n, n);
    if (sys.environment.empty()) {
        return out;
    }
    out.response = pe::build_response_matrix(sys.environment);
    out.static_fields = pe::static_fields_at_sites(sys.environment);
    for (std::size_t s = 0; s < sys.environment.size(); ++s) {
        for (const auto &nuc : sys.nuclei) {
            const Vec3 r = sys.environment.sites[s].position - nuc.position;
            const double d = r.norm();
            if (d < 1e-10) {
                throw SingularityError("environment site coincides with nucleus " + nuc.label);
            }
            out.static_fields[s] += nuc.charge * r / (d * d * d);
        }
    }
    for (const auto &nuc : sys.nuclei) {
        out.nuclear_permanent += nuc.charge * pe::static_potential(sys.environment, nuc.position);
    }
    pe::InducedDipoles zero;
    zero.dipoles.assign(sys.environment.size(), Vec3::Zero());
    out.v_es = pe::fold_environment_operator(sys.environment, zero, sys.site_integrals).v_es;
    return out;
}

std::vector<Vec3> electronic_fields(const MolecularSystem &sys, const MatrixXd &density) {
    std::vector<Vec3> f(sys.site_integrals.size());
    for (std::size_t s = 0; s < f.size(); ++s) {
        for (int a = 0; a < 3; ++a) {
            f[s](a) = (density.array() *
                       sys.site_integrals[s].t1[static_cast<std::size_t>(a)].array())
                          .sum();
        }
    }
    return f;
}

double polarization_energy(const pe::ResponseMatrix &b, const pe::InducedDipoles &mu) {
    if (b.blocks() == 0) {
        return 0.0;
    }
    VectorXd m(static_cast<Eigen::Index>(3 * b.blocks()));
    for (std::size_t k = 0; k < b.blocks(); ++k) {
        m.segment<3>(static_cast<Eigen::Index>(3 * k)) = mu.dipoles.at(b.site_index[k]);
    }
    return 0.5 * m.dot(b.matrix * m);
}

double free_energy(const MolecularSystem &sys, const EnvironmentCoupling &env,
                   const MatrixXd &orbitals, const qc::Rdms &full, const pe::InducedDipoles &mu) {
    const MatrixXd h = sys.integrals.one_body() + env.v_es +
                       (mu.dipoles.empty() ? MatrixXd::Zero(env.v_es.rows(), env.v_es.cols())
                                           : induction_operator(sys, mu));
    return electronic_energy(congruence(orbitals, h), sys.integrals.g.transformed(orbitals), full) +
           sys.integrals.core + env.nuclear_permanent + polarization_energy(env.response, mu) -
           static_interaction(env, mu);
}

ActiveSolution CiSolver::solve(const qc::ActiveSpaceProblem &problem) {
    const qc::DeterminantSpace space(problem.n_orbitals, problem.n_alpha, problem.n_beta);
    const qc::CiResult r = qc::solve_ci(problem, space);
    ActiveSolution out;
    out.energy = r.energy;
    out.rdms = qc::ci_rdms(space, r.vector);
    return out;
}

AdaptSolver::AdaptSolver(AdaptSolverOptions opts) : opts_(std::move(opts)), est_(opts_.shots) {}

ActiveSolution AdaptSolver::solve(const qc::ActiveSpaceProblem &problem) {
    if (problem.n_orbitals != pool_orbitals_) {
        pool_ = qc::build_pool(problem.n_orbitals, problem.n_alpha, problem.n_beta, opts_.pool);
        rdm_ = std::make_unique<qc::RdmEstimator>(problem.n_orbitals);
        ansatz_ = {};
        pool_orbitals_ = problem.n_orbitals;
    }
    const qc::QubitHamiltonian h = qc::build_qubit_hamiltonian(problem);
    const std::uint64_t ref = problem.reference_determinant();
    qc::AdaptResult res =
        qc::run_adapt(h, pool_, ref, est_, opts_.adapt,
                      opts_.warm_start ? ansatz_ : qc::AdaptAnsatz{});
    ansatz_ = std::move(res.ansatz);
    trace_.insert(trace_.end(), res.trace.begin(), res.trace.end());

    const qc::SectorEngine eng(h, ref);
    const auto ops = eng.compile(ansatz_.operators);
    const auto pool_ops = eng.compile(pool_);
    const Eigen::VectorXd psi = eng.prepare(ops, ansatz_.theta);
    const Eigen::VectorXd h_psi = eng.hamiltonian() * psi;
    double norm2 = 0.0;
    for (const auto &op : pool_ops) {
        const double g = qc::SectorEngine::gradient(psi, h_psi, op);
        norm2 += g * g;
    }
    Eigen::VectorXd theta_grad;
    eng.energy(ops, ansatz_.theta, &theta_grad);
    ActiveSolution out;
    out.energy = res.energy;
    out.rdms = rdm_->measure(eng.embed(psi), est_);
    out.gradient_norm = theta_grad.size() ? theta_grad.cwiseAbs().maxCoeff() : 0.0;
    out.pool_gradient_norm = std::sqrt(norm2);
    out.converged = res.converged;
    out.iterations = static_cast<int>(res.trace.size());
    out.cnot_count = ansatz_.cnot_count();
    out.parameters = ansatz_.size();
    return out;
}

ScfState scf_macro_loop(const MolecularSystem &sys, const OrbitalPartition &part,
                        ActiveSolver &solver, const ScfOptions &opts) {
    sys.validate();
    part.validate(sys.n_orbitals(), sys.n_electrons());
    if (opts.max_macro_iterations < 1) {
        throw ValidationError("at least one macro-iteration is required");
    }
    const int n = sys.n_orbitals();
    const EnvironmentCoupling env = couple_environment(sys);
    const auto pairs = part.rotation_pairs();
    const bool rotate = opts.optimize_orbitals && !pairs.empty();

    ScfState st;
    st.orbitals = MatrixXd::Identity(n, n);
    if (rotate && opts.start_perturbation != 0.0) {
        std::mt19937_64 rng(opts.perturbation_seed);
        VectorXd x(static_cast<Eigen::Index>(pairs.size()));
        for (auto &v : x) {
            v = opts.start_perturbation * (2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0);
        }
        st.orbitals = rotation_matrix(kappa_matrix(x, pairs, n));
    }
    st.induced = update_dipoles(
        sys, env, st.orbitals * reference_density(part) * st.orbitals.transpose(), opts.induced);

    // Working-basis pieces that depend on the orbitals and the dipoles.
    auto one_body = [&](const MatrixXd &c, const pe::InducedDipoles &mu) {
        MatrixXd v = env.v_es;
        if (!mu.dipoles.empty()) {
            v += induction_operator(sys, mu);
        }
        return std::pair{congruence(c, sys.integrals.one_body()), congruence(c, v)};
    };
    auto constant = [&](const pe::InducedDipoles &mu) {
        return sys.integrals.core + env.nuclear_permanent + polarization_energy(env.response, mu) -
               static_interaction(env, mu);
    };

    double previous = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= opts.max_macro_iterations; ++it) {
        const qc::Eri g = sys.integrals.g.transformed(st.orbitals);
        const auto [h, v] = one_body(st.orbitals, st.induced);
        const qc::ActiveSpaceProblem problem =
            build_active_problem(h, g, v, constant(st.induced), part);
        const ActiveSolution sol = solver.solve(problem);
        const qc::Rdms full = full_rdms(sol.rdms, part);
        const MatrixXd density = st.orbitals * full.one * st.orbitals.transpose();
        st.induced = update_dipoles(sys, env, density, opts.induced);

        const auto [h2, v2] = one_body(st.orbitals, st.induced);
        const MatrixXd h_total = h2 + v2;
        const double energy = electronic_energy(h_total, g, full) + constant(st.induced);
        const VectorXd grad = orbital_gradient(h_total, g, full, part);

        st.active_rdms = sol.rdms;
        st.density = density;
        st.energy = energy;
        st.induction_correction = 0.0;
        if (!st.induced.dipoles.empty()) {
            const auto fel = electronic_fields(sys, density);
            for (std::size_t s = 0; s < fel.size(); ++s) {
                st.induction_correction += 0.5 * st.induced.dipoles[s].dot(fel[s]);
            }
        }
        st.orbital_gradient_norm = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;
        st.wavefunction_gradient_norm = sol.gradient_norm;
        st.macro_iterations = it;
        st.micro_iterations += sol.iterations;
        st.cnot_count = sol.cnot_count;

        MacroRecord rec;
        rec.iteration = it;
        rec.energy = energy;
        rec.energy_after_orbitals = energy;
        rec.orbital_gradient = st.orbital_gradient_norm;
        rec.wavefunction_gradient = sol.gradient_norm;
        rec.pool_gradient = sol.pool_gradient_norm;
        rec.micro_iterations = sol.iterations;
        rec.cnot_count = sol.cnot_count;

        const bool orbitals_ok = !rotate || st.orbital_gradient_norm <= opts.gradient_tolerance;
        if (std::abs(energy - previous) <= opts.energy_tolerance && orbitals_ok &&
            sol.converged && sol.gradient_norm <= opts.gradient_tolerance) {
            st.history.push_back(rec);
            if (opts.on_iteration) {
                opts.on_iteration(rec);
            }
            st.converged = true;
            st.message = "converged";
            return st;
        }
        previous = energy;

        if (rotate) {
            // Orbital step at fixed RDMs and dipoles, in moving orbital frames.
            const double c0 = constant(st.induced);
            const MatrixXd h_in = sys.integrals.one_body() + env.v_es +
                                  (st.induced.dipoles.empty()
                                       ? MatrixXd::Zero(n, n)
                                       : induction_operator(sys, st.induced));
            MatrixXd frame = st.orbitals;
            RetractionObjective obj{
                [&](const VectorXd &step, VectorXd *gr) {
                    const MatrixXd c = frame * rotation_matrix(kappa_matrix(step, pairs, n));
                    const MatrixXd hk = congruence(c, h_in);
                    const qc::Eri gk = sys.integrals.g.transformed(c);
                    if (gr) {
                        *gr = orbital_gradient(hk, gk, full, part);
                    }
                    return electronic_energy(hk, gk, full) + c0;
                },
                [&](const VectorXd &step) {
                    frame = frame * rotation_matrix(kappa_matrix(step, pairs, n));
                }};
            const LbfgsResult r =
                minimize_lbfgs(obj, static_cast<Eigen::Index>(pairs.size()), opts.orbital);
            if (r.value <= energy) {
                st.orbitals = frame;
                rec.energy_after_orbitals = r.value;
            }
        }
        st.history.push_back(rec);
        if (opts.on_iteration) {
            opts.on_iteration(rec);
        }
    }
    st.message = "maximum macro-iterations reached";
    return st;
}

ScfState classical_casscf_oracle(const MolecularSystem &sys, const OrbitalPartition &part,
                                 const ScfOptions &opts) {
    if (part.n_active > 8) {
        throw ValidationError("active space too large for the dense CI oracle");
    }
    CiSolver solver;
    return scf_macro_loop(sys, part, solver, opts);
}

} // namespace pevqe::scf
