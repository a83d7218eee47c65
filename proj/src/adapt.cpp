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
#include "pevqe/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

#include "pevqe/error.hpp"
#include "pevqe/sector.hpp"
#include "pevqe/fermion.hpp"

namespace pevqe::qc {

namespace {

constexpr double kCoeffTol = 1e-12;

using Block = std::vector<PauliString>;
using Key = std::vector<std::tuple<std::uint64_t, std::uint64_t, long long>>;

FermionTerm ladder(std::initializer_list<std::pair<int, bool>> ops) {
    FermionTerm t;
    for (const auto &[mode, dagger] : ops) {
        t.ops.push_back({mode, dagger});
    }
    return t;
}

// T - T^dagger as hermitian strings with weights c_k (A = sum i c_k P_k).
Block anti_hermitian_block(const FermionTerm &t, int n_qubits) {
    FermionTerm minus = t.adjoint();
    minus.coeff = -minus.coeff;
    PauliSum s = jordan_wigner(std::vector<FermionTerm>{t, minus}, n_qubits);
    s.simplify(kCoeffTol);
    Block b;
    for (PauliString p : s.strings()) {
        if (std::abs(p.coeff.real()) > 1e-10) {
            throw Error("pool generator is not anti-hermitian");
        }
        p.coeff = p.coeff.imag();
        b.push_back(p);
    }
    return b;
}

Key block_key(const Block &b, bool normalize_sign) {
    Key k;
    double sign = 1.0;
    if (normalize_sign && !b.empty() && b.front().coeff.real() < 0.0) {
        sign = -1.0;
    }
    for (const auto &p : b) {
        k.emplace_back(p.x, p.z, std::llround(sign * p.coeff.real() * 1e9));
    }
    return k;
}

Key operator_key(const std::vector<Block> &blocks) {
    std::map<std::pair<std::uint64_t, std::uint64_t>, double> merged;
    for (const auto &b : blocks) {
        for (const auto &p : b) {
            merged[{p.x, p.z}] += p.coeff.real();
        }
    }
    Block all;
    for (const auto &[xz, c] : merged) {
        if (std::abs(c) > kCoeffTol) {
            PauliString p;
            p.x = xz.first;
            p.z = xz.second;
            p.coeff = c;
            all.push_back(p);
        }
    }
    return block_key(all, true);
}

struct PoolBuilder {
    int n_qubits;
    std::vector<PoolOperator> pool;
    std::vector<Key> keys;

    void add(int rank, const std::string &label, const std::vector<FermionTerm> &components) {
        std::vector<Block> blocks;
        std::vector<Key> seen;
        for (const auto &t : components) {
            Block b = anti_hermitian_block(t, n_qubits);
            if (b.empty()) {
                continue;
            }
            Key k = block_key(b, true);
            if (std::find(seen.begin(), seen.end(), k) != seen.end()) {
                continue;
            }
            seen.push_back(std::move(k));
            blocks.push_back(std::move(b));
        }
        if (blocks.empty()) {
            return;
        }
        Key key = operator_key(blocks);
        if (key.empty() || std::find(keys.begin(), keys.end(), key) != keys.end()) {
            return;
        }
        PoolOperator op;
        op.id = pool.size();
        op.rank = rank;
        op.label = label;
        op.blocks = std::move(blocks);
        pool.push_back(std::move(op));
        keys.push_back(std::move(key));
    }
};

std::string label_of(const char *kind, std::initializer_list<int> from,
                     std::initializer_list<int> to, const char *tag = nullptr) {
    std::ostringstream os;
    os << kind << '(';
    bool first = true;
    for (int p : from) {
        os << (first ? "" : ",") << p;
        first = false;
    }
    os << "->";
    first = true;
    for (int p : to) {
        os << (first ? "" : ",") << p;
        first = false;
    }
    if (tag) {
        os << ';' << tag;
    }
    os << ')';
    return os.str();
}

struct Factor {
    std::size_t op;
    const PauliString *p;
};

std::vector<Factor> factors(const AdaptAnsatz &a) {
    std::vector<Factor> f;
    for (std::size_t k = 0; k < a.operators.size(); ++k) {
        for (const auto &b : a.operators[k].blocks) {
            for (const auto &p : b) {
                f.push_back({k, &p});
            }
        }
    }
    return f;
}

void check_theta(const AdaptAnsatz &a, const std::vector<double> &theta) {
    if (theta.size() != a.operators.size()) {
        throw ValidationError("parameter count does not match the ansatz");
    }
}

} // namespace

PoolKind parse_pool_kind(const std::string &name) {
    if (name == "sd" || name == "singles-doubles") {
        return PoolKind::SinglesDoubles;
    }
    if (name == "gsd" || name == "generalized") {
        return PoolKind::GeneralizedSinglesDoubles;
    }
    throw ValidationError("unknown operator pool '" + name + "'");
}

std::string to_string(PoolKind kind) {
    return kind == PoolKind::SinglesDoubles ? "sd" : "gsd";
}

int cnot_cost(const PauliString &p) {
    const int w = p.weight();
    return w > 0 ? 2 * (w - 1) : 0;
}

std::size_t PoolOperator::string_count() const {
    std::size_t n = 0;
    for (const auto &b : blocks) {
        n += b.size();
    }
    return n;
}

int PoolOperator::cnot_cost() const {
    int n = 0;
    for (const auto &b : blocks) {
        for (const auto &p : b) {
            n += qc::cnot_cost(p);
        }
    }
    return n;
}

std::vector<PoolOperator> build_pool(int n_orbitals, int n_alpha, int n_beta, PoolKind kind) {
    if (n_orbitals < 1 || 2 * n_orbitals > kMaxQubits) {
        throw ValidationError("pool needs between 1 and 31 orbitals");
    }
    if (n_alpha < 0 || n_beta < 0 || n_alpha > n_orbitals || n_beta > n_orbitals) {
        throw ValidationError("electron counts do not fit the orbitals");
    }
    const bool general = kind == PoolKind::GeneralizedSinglesDoubles;
    const int nq = 2 * n_orbitals;
    const int nocc[2] = {n_alpha, n_beta};
    auto occ = [&](int p, int s) { return general || p < nocc[s]; };
    auto vir = [&](int p, int s) { return general || p >= nocc[s]; };
    auto so = [](int p, int s) { return 2 * p + s; };

    PoolBuilder b{nq, {}, {}};
    for (int i = 0; i < n_orbitals; ++i) {
        for (int a = i + 1; a < n_orbitals; ++a) {
            std::vector<FermionTerm> comp;
            for (int s = 0; s < 2; ++s) {
                if (occ(i, s) && vir(a, s)) {
                    comp.push_back(ladder({{so(a, s), true}, {so(i, s), false}}));
                }
            }
            b.add(1, label_of("S", {i}, {a}), comp);
        }
    }
    // Opposite-spin T(a,b,i,j) = a+_{a alpha} a+_{b beta} a_{j beta} a_{i alpha}; its
    // spin complement is T(b,a,j,i).
    auto opposite = [&](int a, int bb, int i, int j) {
        std::vector<FermionTerm> comp;
        if (occ(i, 0) && occ(j, 1) && vir(a, 0) && vir(bb, 1)) {
            comp.push_back(ladder({{so(a, 0), true}, {so(bb, 1), true},
                                   {so(j, 1), false}, {so(i, 0), false}}));
        }
        if (occ(j, 0) && occ(i, 1) && vir(bb, 0) && vir(a, 1)) {
            comp.push_back(ladder({{so(bb, 0), true}, {so(a, 1), true},
                                   {so(i, 1), false}, {so(j, 0), false}}));
        }
        return comp;
    };
    for (int i = 0; i < n_orbitals; ++i) {
        for (int j = i; j < n_orbitals; ++j) {
            for (int a = 0; a < n_orbitals; ++a) {
                for (int bb = a; bb < n_orbitals; ++bb) {
                    b.add(2, label_of("D", {i, j}, {a, bb}, "os"), opposite(a, bb, i, j));
                    if (i != j) {
                        b.add(2, label_of("D", {j, i}, {a, bb}, "os"), opposite(a, bb, j, i));
                    }
                    if (i < j && a < bb) {
                        std::vector<FermionTerm> comp;
                        for (int s = 0; s < 2; ++s) {
                            if (occ(i, s) && occ(j, s) && vir(a, s) && vir(bb, s)) {
                                comp.push_back(ladder({{so(a, s), true}, {so(bb, s), true},
                                                       {so(j, s), false}, {so(i, s), false}}));
                            }
                        }
                        b.add(2, label_of("D", {i, j}, {a, bb}, "ss"), comp);
                    }
                }
            }
        }
    }
    return std::move(b.pool);
}

void apply_pool_operator(StateVector &psi, const PoolOperator &op, double theta) {
    for (const auto &b : op.blocks) {
        for (const auto &p : b) {
            apply_pauli_exponential_inplace(psi, p, theta);
        }
    }
}

double pool_gradient(const StateVector &psi, const StateVector &h_psi, const PoolOperator &op) {
    // 2 Re <H psi| i c P |psi> = -2 c Im <H psi|P|psi>
    double g = 0.0;
    for (const auto &b : op.blocks) {
        for (const auto &p : b) {
            g -= 2.0 * p.coeff.real() * pauli_matrix_element(h_psi, p, psi).imag();
        }
    }
    return g;
}

double pool_gradient(const StateVector &psi, const QubitHamiltonian &h, const PoolOperator &op) {
    return pool_gradient(psi, h.apply(psi), op);
}

int AdaptAnsatz::cnot_count() const {
    int n = 0;
    for (const auto &op : operators) {
        n += op.cnot_cost();
    }
    return n;
}

int AdaptAnsatz::count_rank(int rank) const {
    return static_cast<int>(std::count_if(operators.begin(), operators.end(),
                                          [rank](const PoolOperator &op) { return op.rank == rank; }));
}

int cnot_count(const AdaptAnsatz &ansatz) { return ansatz.cnot_count(); }

StateVector prepare_state(const AdaptAnsatz &ansatz, int n_qubits, std::uint64_t reference,
                          const std::vector<double> *theta) {
    const std::vector<double> &t = theta ? *theta : ansatz.theta;
    check_theta(ansatz, t);
    StateVector psi(n_qubits, reference);
    for (std::size_t k = 0; k < ansatz.operators.size(); ++k) {
        apply_pool_operator(psi, ansatz.operators[k], t[k]);
    }
    return psi;
}

double ansatz_energy(const AdaptAnsatz &ansatz, const std::vector<double> &theta,
                     const QubitHamiltonian &h, std::uint64_t reference,
                     Eigen::VectorXd *gradient) {
    StateVector psi = prepare_state(ansatz, h.qubits(), reference, &theta);
    StateVector lambda = h.apply(psi);
    const double e = psi.inner(lambda).real();
    if (!gradient) {
        return e;
    }
    gradient->setZero(static_cast<Eigen::Index>(theta.size()));
    // Adjoint sweep: undo one string exponential at a time on both states.
    const auto f = factors(ansatz);
    for (auto it = f.rbegin(); it != f.rend(); ++it) {
        const double c = it->p->coeff.real();
        (*gradient)(static_cast<Eigen::Index>(it->op)) -=
            2.0 * c * pauli_matrix_element(lambda, *it->p, psi).imag();
        apply_pauli_exponential_inplace(psi, *it->p, -theta[it->op]);
        apply_pauli_exponential_inplace(lambda, *it->p, -theta[it->op]);
    }
    return e;
}

namespace {

using Compiled = SectorEngine::Compiled;

OptimizeResult optimize_in_sector(const SectorEngine &eng, const std::vector<Compiled> &ops,
                                  const AdaptAnsatz &ansatz, const QubitHamiltonian &h,
                                  Estimator &est, const VqeOptions &opts) {
    if (ansatz.empty()) {
        throw ValidationError("cannot optimize an empty ansatz");
    }
    check_theta(ansatz, ansatz.theta);
    const Eigen::VectorXd x0 =
        Eigen::Map<const Eigen::VectorXd>(ansatz.theta.data(), ansatz.theta.size());
    auto to_vec = [](const Eigen::VectorXd &x) {
        return std::vector<double>(x.data(), x.data() + x.size());
    };

    OptimizeResult out;
    LbfgsResult r;
    if (est.model().mode == ShotModel::Mode::Exact) {
        Objective f = [&](const Eigen::VectorXd &x, Eigen::VectorXd *g) {
            return eng.energy(ops, to_vec(x), g);
        };
        r = minimize_lbfgs(f, x0, opts.optimizer);
        out.energy = r.value;
    } else {
        if (!(opts.fd_step > 0.0)) {
            throw ValidationError("finite-difference step must be positive");
        }
        auto sample = [&](const Eigen::VectorXd &x) {
            return est.expectation(eng.embed(eng.prepare(ops, to_vec(x))), h);
        };
        Objective f = [&](const Eigen::VectorXd &x, Eigen::VectorXd *g) {
            if (g) {
                g->resize(x.size());
                for (Eigen::Index k = 0; k < x.size(); ++k) {
                    Eigen::VectorXd xp = x, xm = x;
                    xp(k) += opts.fd_step;
                    xm(k) -= opts.fd_step;
                    (*g)(k) = (sample(xp) - sample(xm)) / (2.0 * opts.fd_step);
                }
            }
            return sample(x);
        };
        r = minimize_lbfgs(f, x0, opts.optimizer);
        // The accepted values are biased low by selection; report a fresh one.
        out.energy = sample(r.x);
    }
    out.theta = to_vec(r.x);
    out.iterations = r.iterations;
    out.evaluations = r.evaluations;
    out.converged = r.converged;
    out.message = r.message;
    return out;
}

AdaptStep iterate_in_sector(const SectorEngine &eng, const std::vector<Compiled> &pool_ops,
                            const std::vector<PoolOperator> &pool, AdaptAnsatz &ansatz,
                            std::vector<Compiled> &ansatz_ops, const QubitHamiltonian &h,
                            Estimator &est, const AdaptOptions &opts) {
    const Eigen::VectorXd psi = eng.prepare(ansatz_ops, ansatz.theta);
    const Eigen::VectorXd h_psi = eng.hamiltonian() * psi;
    AdaptStep step;
    double norm2 = 0.0;
    for (std::size_t k = 0; k < pool.size(); ++k) {
        const double g = SectorEngine::gradient(psi, h_psi, pool_ops[k]);
        norm2 += g * g;
        if (std::abs(g) > step.max_gradient) {
            step.max_gradient = std::abs(g);
            step.chosen = k;
        }
    }
    step.gradient_norm = std::sqrt(norm2);
    if (step.gradient_norm <= opts.gradient_tolerance) {
        return step;
    }
    ansatz.operators.push_back(pool[step.chosen]);
    ansatz.theta.push_back(0.0);
    ansatz_ops.push_back(pool_ops[step.chosen]);
    step.added = true;
    step.optimization = optimize_in_sector(eng, ansatz_ops, ansatz, h, est, opts.vqe);
    ansatz.theta = step.optimization.theta;
    return step;
}

} // namespace

OptimizeResult optimize_parameters(const AdaptAnsatz &ansatz, const QubitHamiltonian &h,
                                   std::uint64_t reference, Estimator &est,
                                   const VqeOptions &opts) {
    if (ansatz.empty()) {
        throw ValidationError("cannot optimize an empty ansatz");
    }
    const SectorEngine eng(h, reference);
    return optimize_in_sector(eng, eng.compile(ansatz.operators), ansatz, h, est, opts);
}

AdaptStep adapt_iteration(const QubitHamiltonian &h, const std::vector<PoolOperator> &pool,
                          std::uint64_t reference, AdaptAnsatz &ansatz, Estimator &est,
                          const AdaptOptions &opts) {
    if (pool.empty()) {
        throw ValidationError("operator pool is empty");
    }
    check_theta(ansatz, ansatz.theta);
    const SectorEngine eng(h, reference);
    std::vector<Compiled> ansatz_ops = eng.compile(ansatz.operators);
    return iterate_in_sector(eng, eng.compile(pool), pool, ansatz, ansatz_ops, h, est, opts);
}

AdaptResult run_adapt(const QubitHamiltonian &h, const std::vector<PoolOperator> &pool,
                      std::uint64_t reference, Estimator &est, const AdaptOptions &opts,
                      AdaptAnsatz start) {
    if (opts.max_iterations < 0) {
        throw ValidationError("max_iterations must be non-negative");
    }
    if (pool.empty()) {
        throw ValidationError("operator pool is empty");
    }
    const SectorEngine eng(h, reference);
    const std::vector<Compiled> pool_ops = eng.compile(pool);
    AdaptResult res;
    res.ansatz = std::move(start);
    check_theta(res.ansatz, res.ansatz.theta);
    std::vector<Compiled> ansatz_ops = eng.compile(res.ansatz.operators);
    if (!res.ansatz.empty()) {
        res.ansatz.theta =
            optimize_in_sector(eng, ansatz_ops, res.ansatz, h, est, opts.vqe).theta;
    }
    // Stopping decisions use the noiseless energy of the prepared state; the
    // reported energy follows the shot model.
    auto exact_energy = [&] { return eng.energy(ansatz_ops, res.ansatz.theta); };
    double previous = exact_energy();
    res.energy = est.expectation(eng.embed(eng.prepare(ansatz_ops, res.ansatz.theta)), h);
    for (int it = 1;; ++it) {
        if (it > opts.max_iterations) {
            res.stop_reason = "maximum iterations reached";
            return res;
        }
        const std::size_t n_before = res.ansatz.size();
        AdaptStep step =
            iterate_in_sector(eng, pool_ops, pool, res.ansatz, ansatz_ops, h, est, opts);
        res.gradient_norm = step.gradient_norm;
        if (!step.added) {
            res.converged = true;
            res.stop_reason = "gradient norm below tolerance";
            return res;
        }
        res.energy = step.optimization.energy;
        const double current = exact_energy();
        AdaptRecord rec;
        rec.iteration = it;
        rec.operator_id = pool[step.chosen].id;
        rec.label = pool[step.chosen].label;
        rec.gradient_norm = step.gradient_norm;
        rec.max_gradient = step.max_gradient;
        rec.energy = res.energy;
        rec.cnot_count = res.ansatz.cnot_count();
        rec.parameters = n_before + 1;
        res.trace.push_back(rec);
        if (previous - current <= opts.energy_tolerance) {
            res.converged = true;
            res.stop_reason = "energy change below tolerance";
            return res;
        }
        previous = current;
    }
}

RdmEstimator::RdmEstimator(int n_orbitals) : n_(n_orbitals) {
    if (n_orbitals < 1 || 2 * n_orbitals > kMaxQubits) {
        throw ValidationError("RDM estimator needs between 1 and 31 orbitals");
    }
    const int nq = 2 * n_;
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::size_t> index;
    auto record = [&](std::vector<Entry> &out, std::size_t element,
                      const std::vector<FermionTerm> &terms) {
        PauliSum s = jordan_wigner(terms, nq);
        s.simplify(kCoeffTol);
        for (const auto &p : s.strings()) {
            if (std::abs(p.coeff.imag()) > 1e-10) {
                throw Error("RDM operator is not hermitian");
            }
            auto [it, inserted] = index.try_emplace({p.x, p.z}, strings_.size());
            if (inserted) {
                PauliString unit = p;
                unit.coeff = 1.0;
                strings_.push_back(unit);
            }
            out.push_back({element, it->second, p.coeff.real()});
        }
    };
    auto half = [](FermionTerm t) {
        t.coeff = 0.5;
        FermionTerm a = t.adjoint();
        return std::vector<FermionTerm>{t, a};
    };
    const auto n = static_cast<std::size_t>(n_);
    for (int p = 0; p < n_; ++p) {
        for (int q = 0; q < n_; ++q) {
            std::vector<FermionTerm> terms;
            for (int s = 0; s < 2; ++s) {
                for (auto &t : half(ladder({{2 * p + s, true}, {2 * q + s, false}}))) {
                    terms.push_back(t);
                }
            }
            record(one_, p * n + q, terms);
        }
    }
    for (int p = 0; p < n_; ++p) {
        for (int q = 0; q < n_; ++q) {
            for (int r = 0; r < n_; ++r) {
                for (int s = 0; s < n_; ++s) {
                    std::vector<FermionTerm> terms;
                    for (int a = 0; a < 2; ++a) {
                        for (int b = 0; b < 2; ++b) {
                            for (auto &t : half(ladder({{2 * p + a, true}, {2 * r + b, true},
                                                        {2 * s + b, false}, {2 * q + a, false}}))) {
                                terms.push_back(t);
                            }
                        }
                    }
                    record(two_, ((p * n + q) * n + r) * n + s, terms);
                }
            }
        }
    }
}

Rdms RdmEstimator::measure(const StateVector &psi, Estimator &est) const {
    if (psi.qubits() != 2 * n_) {
        throw ValidationError("state qubit count does not match the active space");
    }
    std::vector<double> values(strings_.size());
    for (std::size_t k = 0; k < strings_.size(); ++k) {
        values[k] = est.measure(psi, strings_[k]);
    }
    Rdms out{Eigen::MatrixXd::Zero(n_, n_), Eri(n_)};
    for (const auto &e : one_) {
        out.one.data()[e.element] += e.coeff * values[e.string];
    }
    // Element index is row-major while Eigen is column-major; transpose back.
    out.one.transposeInPlace();
    for (const auto &e : two_) {
        out.two.data()[e.element] += e.coeff * values[e.string];
    }
    return out;
}

Rdms measure_rdms(const StateVector &psi, int n_orbitals, const ShotModel &model) {
    Estimator est(model);
    return RdmEstimator(n_orbitals).measure(psi, est);
}

} // namespace pevqe::qc
