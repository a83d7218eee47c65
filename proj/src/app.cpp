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
#include "pevqe/app.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "pevqe/efg.hpp"
#include "pevqe/environment.hpp"
#include "pevqe/error.hpp"
#include "pevqe/lattice.hpp"
#include "pevqe/scf.hpp"

namespace pevqe::app {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------- values

std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string &s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!cur.empty()) {
                out.push_back(cur);
            }
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) {
        out.push_back(cur);
    }
    return out;
}

[[noreturn]] void bad_value(const std::string &key, const std::string &value,
                            const std::string &what) {
    throw ParseError("config key '" + key + "': expected " + what + ", got '" + value + "'");
}

double to_double(const std::string &key, const std::string &v) {
    double x = 0.0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
        bad_value(key, v, "a number");
    }
    return x;
}

long long to_integer(const std::string &key, const std::string &v) {
    long long x = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
        bad_value(key, v, "an integer");
    }
    return x;
}

bool to_bool(const std::string &key, const std::string &v) {
    if (v == "true" || v == "yes" || v == "on" || v == "1") {
        return true;
    }
    if (v == "false" || v == "no" || v == "off" || v == "0") {
        return false;
    }
    bad_value(key, v, "a boolean");
}

std::string format_double(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

template <class T> std::string join(const std::vector<T> &v) {
    std::ostringstream ss;
    for (std::size_t k = 0; k < v.size(); ++k) {
        ss << (k ? " " : "") << v[k];
    }
    return ss.str();
}

std::string join(const std::vector<fs::path> &v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) {
        s += (k ? " " : "") + v[k].string();
    }
    return s;
}

struct Key {
    std::string name;
    std::function<void(RunConfig &, const std::string &)> set;
    std::function<std::string(const RunConfig &)> get;
};

template <class M> Key string_key(std::string name, M RunConfig::*m) {
    return {name, [m](RunConfig &c, const std::string &v) { c.*m = v; },
            [m](const RunConfig &c) { return fs::path(c.*m).string(); }};
}

Key double_key(std::string name, double RunConfig::*m) {
    return {name, [m, name](RunConfig &c, const std::string &v) { c.*m = to_double(name, v); },
            [m](const RunConfig &c) { return format_double(c.*m); }};
}

Key int_key(std::string name, int RunConfig::*m) {
    return {name,
            [m, name](RunConfig &c, const std::string &v) {
                const long long x = to_integer(name, v);
                if (x < INT32_MIN || x > INT32_MAX) {
                    bad_value(name, v, "an integer in range");
                }
                c.*m = static_cast<int>(x);
            },
            [m](const RunConfig &c) { return std::to_string(c.*m); }};
}

Key uint_key(std::string name, std::uint64_t RunConfig::*m) {
    return {name,
            [m, name](RunConfig &c, const std::string &v) {
                std::uint64_t x = 0;
                const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
                if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
                    bad_value(name, v, "a non-negative integer");
                }
                c.*m = x;
            },
            [m](const RunConfig &c) { return std::to_string(c.*m); }};
}

Key bool_key(std::string name, bool RunConfig::*m) {
    return {name, [m, name](RunConfig &c, const std::string &v) { c.*m = to_bool(name, v); },
            [m](const RunConfig &c) { return std::string(c.*m ? "true" : "false"); }};
}

template <class T> Key list_key(std::string name, std::vector<T> RunConfig::*m) {
    return {name,
            [m, name](RunConfig &c, const std::string &v) {
                std::vector<T> out;
                for (const auto &item : split_list(v)) {
                    if constexpr (std::is_same_v<T, int>) {
                        out.push_back(static_cast<int>(to_integer(name, item)));
                    } else {
                        out.push_back(T(item));
                    }
                }
                c.*m = std::move(out);
            },
            [m](const RunConfig &c) { return join(c.*m); }};
}

const std::vector<Key> &keys() {
    static const std::vector<Key> k{
        string_key("run.task", &RunConfig::task),
        uint_key("run.seed", &RunConfig::seed),
        string_key("run.output", &RunConfig::output),
        int_key("run.jobs", &RunConfig::jobs),
        string_key("input.cell", &RunConfig::cell),
        string_key("input.potential", &RunConfig::potential),
        string_key("input.fcidump", &RunConfig::fcidump),
        string_key("input.properties", &RunConfig::properties),
        list_key("input.job_dirs", &RunConfig::job_dirs),
        string_key("input.name", &RunConfig::name),
        string_key("input.basis", &RunConfig::basis),
        double_key("lattice.cutoff_angstrom", &RunConfig::cutoff_angstrom),
        string_key("lattice.criterion", &RunConfig::criterion),
        list_key("lattice.molecules", &RunConfig::molecules),
        int_key("active.orbitals", &RunConfig::active_orbitals),
        int_key("active.electrons", &RunConfig::active_electrons),
        string_key("solver.method", &RunConfig::method),
        string_key("solver.pool", &RunConfig::pool),
        string_key("solver.shot_model", &RunConfig::shot_model),
        uint_key("solver.shots", &RunConfig::shots),
        double_key("solver.gradient_tolerance", &RunConfig::gradient_tolerance),
        double_key("solver.energy_tolerance", &RunConfig::energy_tolerance),
        int_key("solver.max_macro_iterations", &RunConfig::max_macro_iterations),
        int_key("solver.max_adapt_iterations", &RunConfig::max_adapt_iterations),
        bool_key("solver.warm_start", &RunConfig::warm_start),
        double_key("solver.induced_efg_factor", &RunConfig::induced_efg_factor),
        list_key("efg.inputs", &RunConfig::nqi_inputs),
        string_key("efg.reference", &RunConfig::reference),
        string_key("efg.system", &RunConfig::system),
        list_key("efg.exclude", &RunConfig::exclude),
    };
    return k;
}

const Key &find_key(const std::string &name) {
    for (const auto &k : keys()) {
        if (k.name == name) {
            return k;
        }
    }
    throw ParseError("unknown config key '" + name + "'");
}

// ------------------------------------------------------------- artifacts

void write_text(const fs::path &path, const std::string &text) {
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text) || !out.flush()) {
        throw IoError("cannot write " + path.string());
    }
}

json meta(const RunConfig &cfg) {
    json m;
    m["version"] = version();
    m["task"] = cfg.task;
    m["config_hash"] = config_hash(cfg);
    m["seed"] = cfg.seed;
    return m;
}

std::map<std::string, std::string> meta_map(const RunConfig &cfg) {
    return {{"version", version()},
            {"task", cfg.task},
            {"config_hash", config_hash(cfg)},
            {"seed", std::to_string(cfg.seed)}};
}

json vec_json(const Vec3 &v) { return json::array({v.x(), v.y(), v.z()}); }

json mat_json(const Mat3 &m) {
    json out = json::array();
    for (int a = 0; a < 3; ++a) {
        out.push_back(json::array({m(a, 0), m(a, 1), m(a, 2)}));
    }
    return out;
}

std::string dump(const json &j) { return j.dump(2) + "\n"; }

fs::path default_reference() {
#ifdef PEVQE_DEFAULT_REFERENCE
    return PEVQE_DEFAULT_REFERENCE;
#else
    return "data/reference/experimental.json";
#endif
}

// -------------------------------------------------------- build-supercell

int run_build_supercell(const RunConfig &cfg, std::ostream &log) {
    const auto cell = lattice::parse_cell_file(cfg.cell);
    const auto crit = lattice::parse_criterion(cfg.criterion);
    const auto super =
        lattice::build_supercell(cell, cfg.cutoff_angstrom * pe::kBohrPerAngstrom, crit);
    std::vector<std::size_t> selected;
    if (cfg.molecules.empty()) {
        for (std::size_t m = 0; m < cell.molecules.size(); ++m) {
            selected.push_back(m);
        }
    } else {
        for (int m : cfg.molecules) {
            if (m < 0 || static_cast<std::size_t>(m) >= cell.molecules.size()) {
                throw ValidationError("molecule index " + std::to_string(m) +
                                      " is outside the unit cell");
            }
            selected.push_back(static_cast<std::size_t>(m));
        }
    }
    const auto jobs = lattice::make_jobs(super, selected);

    json j;
    j["meta"] = meta(cfg);
    j["criterion"] = lattice::to_string(crit);
    j["cutoff_angstrom"] = cfg.cutoff_angstrom;
    j["images"] = super.images.size();
    j["molecules"] = super.molecules.size();
    j["atoms"] = super.atom_count();
    j["jobs"] = json::array();
    for (const auto &job : jobs) {
        std::ostringstream name;
        name << "job_" << std::setw(3) << std::setfill('0') << job.cell_molecule;
        const fs::path dir = cfg.output / name.str();
        std::ostringstream pot;
        pe::write_potential(pot, job.environment);
        write_text(dir / "environment.pot", pot.str());

        std::ostringstream xyz;
        xyz << job.qm.atoms.size() << "\nmolecule " << job.cell_molecule
            << " of the central cell (angstrom)\n";
        xyz << std::fixed << std::setprecision(10);
        json atoms = json::array();
        for (const auto &a : job.qm.atoms) {
            const Vec3 r = a.position / pe::kBohrPerAngstrom;
            xyz << a.element << ' ' << r.x() << ' ' << r.y() << ' ' << r.z() << '\n';
            atoms.push_back({{"element", a.element}, {"position_bohr", vec_json(a.position)}});
        }
        write_text(dir / "qm.xyz", xyz.str());
        j["jobs"].push_back({{"name", name.str()},
                             {"cell_molecule", job.cell_molecule},
                             {"qm_atoms", atoms},
                             {"environment_sites", job.environment.size()}});
    }
    write_text(cfg.output / "supercell.json", dump(j));
    log << "supercell: " << super.images.size() << " images, " << super.molecules.size()
        << " molecules, " << super.atom_count() << " atoms; " << jobs.size()
        << " job directories written to " << cfg.output.string() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------- solve-induced

int run_solve_induced(const RunConfig &cfg, std::ostream &log) {
    const auto env = pe::parse_potential_file(cfg.potential);
    const auto fields = pe::static_fields_at_sites(env);
    const auto mu = pe::solve_induced_dipoles(env, fields);

    json j;
    j["meta"] = meta(cfg);
    j["sites"] = json::array();
    for (std::size_t s = 0; s < env.size(); ++s) {
        j["sites"].push_back({{"label", env.sites[s].label},
                              {"position", vec_json(env.sites[s].position)},
                              {"static_field", vec_json(fields[s])},
                              {"induced_dipole", vec_json(mu.dipoles[s])}});
    }
    j["residual"] = mu.residual;
    j["rcond"] = mu.rcond;
    j["sweeps"] = mu.sweeps;
    if (!cfg.properties.empty()) {
        const auto props = scf::parse_properties_file(cfg.properties);
        pe::EnvironmentEfgOptions opts;
        opts.induced_factor = cfg.induced_efg_factor;
        j["environment_efg"] = json::array();
        for (const auto &n : props.nuclei) {
            const auto parts = pe::environment_efg_parts(env, mu, n.position, opts);
            j["environment_efg"].push_back({{"nucleus", n.label},
                                            {"permanent", mat_json(parts.permanent)},
                                            {"induced", mat_json(parts.induced)},
                                            {"total", mat_json(parts.total())}});
        }
    }
    write_text(cfg.output / "induced.json", dump(j));
    log << "induced dipoles: " << env.polarizable_sites().size() << " polarizable sites, residual "
        << mu.residual << '\n';
    return kExitOk;
}

// ---------------------------------------------------- run-vqe / run-scf

struct JobInput {
    std::string name;
    fs::path fcidump;
    fs::path properties;
    fs::path potential;
};

std::vector<JobInput> job_inputs(const RunConfig &cfg) {
    std::vector<JobInput> out;
    if (cfg.job_dirs.empty()) {
        out.push_back({cfg.name, cfg.fcidump, cfg.properties, cfg.potential});
        return out;
    }
    for (const auto &d : cfg.job_dirs) {
        JobInput in;
        in.name = d.filename().empty() ? d.parent_path().filename().string()
                                       : d.filename().string();
        in.fcidump = d / "integrals.fcidump";
        in.properties = d / "properties.txt";
        if (fs::exists(d / "environment.pot")) {
            in.potential = d / "environment.pot";
        }
        out.push_back(in);
    }
    return out;
}

std::vector<std::string> methods(const RunConfig &cfg) {
    if (cfg.method == "both") {
        return {"classical", "simulator"};
    }
    return {cfg.method == "classical-oracle" ? "classical" : "simulator"};
}

std::optional<efg::Quadrupole> bundled_quadrupole(const std::string &label) {
    try {
        return efg::quadrupole_moment(efg::default_isotope(efg::element_of(label)));
    } catch (const ValidationError &) {
        return std::nullopt;
    }
}

json state_json(const scf::ScfState &st, const scf::ActiveSolver &solver) {
    json j;
    j["energy"] = st.energy;
    j["induction_correction"] = st.induction_correction;
    j["converged"] = st.converged;
    j["message"] = st.message;
    j["macro_iterations"] = st.macro_iterations;
    j["micro_iterations"] = st.micro_iterations;
    j["cnot_count"] = st.cnot_count;
    j["orbital_gradient"] = st.orbital_gradient_norm;
    j["wavefunction_gradient"] = st.wavefunction_gradient_norm;
    j["history"] = json::array();
    for (const auto &r : st.history) {
        j["history"].push_back({{"iteration", r.iteration},
                                {"energy", r.energy},
                                {"energy_after_orbitals", r.energy_after_orbitals},
                                {"orbital_gradient", r.orbital_gradient},
                                {"wavefunction_gradient", r.wavefunction_gradient},
                                {"pool_gradient", r.pool_gradient},
                                {"micro_iterations", r.micro_iterations},
                                {"cnot_count", r.cnot_count}});
    }
    j["induced_dipoles"] = json::array();
    for (const auto &m : st.induced.dipoles) {
        j["induced_dipoles"].push_back(vec_json(m));
    }
    if (const auto *adapt = dynamic_cast<const scf::AdaptSolver *>(&solver)) {
        json ops = json::array();
        const auto &a = adapt->ansatz();
        for (std::size_t k = 0; k < a.size(); ++k) {
            ops.push_back({{"label", a.operators[k].label}, {"theta", a.theta[k]}});
        }
        j["ansatz"] = ops;
        json trace = json::array();
        for (const auto &r : adapt->trace()) {
            trace.push_back({{"iteration", r.iteration},
                             {"operator", r.label},
                             {"gradient_norm", r.gradient_norm},
                             {"energy", r.energy},
                             {"cnot_count", r.cnot_count},
                             {"parameters", r.parameters}});
        }
        j["adapt_trace"] = trace;
    }
    return j;
}

struct JobOutcome {
    json result;
    std::vector<efg::NqiRecord> records;
    bool converged = true;
    std::string comparison;
};

std::unique_ptr<scf::ActiveSolver> make_solver(const RunConfig &cfg, const std::string &method) {
    if (method == "classical") {
        return std::make_unique<scf::CiSolver>();
    }
    scf::AdaptSolverOptions o;
    o.pool = qc::parse_pool_kind(cfg.pool);
    o.adapt.gradient_tolerance = cfg.gradient_tolerance;
    o.adapt.energy_tolerance = cfg.energy_tolerance;
    o.adapt.max_iterations = cfg.max_adapt_iterations;
    o.warm_start = cfg.warm_start;
    o.shots = cfg.shot_model == "sampled" ? qc::ShotModel::sampled(cfg.shots, cfg.seed)
                                          : qc::ShotModel::exact();
    return std::make_unique<scf::AdaptSolver>(o);
}

std::string comparison_table(const std::map<std::string, std::map<std::string, double>> &rows,
                             const std::vector<std::string> &order) {
    std::ostringstream csv;
    csv << "quantity,classical,simulator,difference\n";
    csv << std::setprecision(12);
    for (const auto &q : order) {
        const auto &r = rows.at(q);
        csv << q << ',';
        const auto c = r.find("classical");
        const auto s = r.find("simulator");
        if (c != r.end()) {
            csv << c->second;
        }
        csv << ',';
        if (s != r.end()) {
            csv << s->second;
        }
        csv << ',';
        if (c != r.end() && s != r.end()) {
            csv << s->second - c->second;
        }
        csv << '\n';
    }
    return csv.str();
}

JobOutcome run_job(const RunConfig &cfg, const JobInput &in, bool optimize_orbitals,
                   std::ostream &log) {
    const auto sys = scf::load_system(
        in.fcidump, in.properties,
        in.potential.empty() ? std::nullopt : std::optional<fs::path>(in.potential));
    const int n_inactive2 = sys.n_electrons() - cfg.active_electrons;
    if (n_inactive2 < 0 || n_inactive2 % 2 != 0) {
        throw ValidationError("active electron count does not leave a closed-shell core");
    }
    const auto part = scf::OrbitalPartition::from_counts(sys.n_orbitals(), sys.n_electrons(),
                                                         n_inactive2 / 2, cfg.active_orbitals);

    scf::ScfOptions opts;
    opts.energy_tolerance = cfg.energy_tolerance;
    opts.gradient_tolerance = cfg.gradient_tolerance;
    opts.max_macro_iterations = cfg.max_macro_iterations;
    opts.optimize_orbitals = optimize_orbitals;
    opts.perturbation_seed = cfg.seed;

    pe::EnvironmentEfgOptions efg_opts;
    efg_opts.induced_factor = cfg.induced_efg_factor;

    JobOutcome out;
    out.result["meta"] = meta(cfg);
    out.result["job"] = {{"name", in.name},
                         {"basis", cfg.basis},
                         {"fcidump", in.fcidump.string()},
                         {"properties", in.properties.string()},
                         {"potential", in.potential.string()}};
    out.result["partition"] = {{"inactive", part.n_inactive},
                               {"active", part.n_active},
                               {"virtual", part.n_virtual},
                               {"active_electrons", part.active_electrons}};
    out.result["orbital_optimization"] = optimize_orbitals;
    out.result["methods"] = json::object();

    std::map<std::string, std::map<std::string, double>> rows;
    std::vector<std::string> order;
    auto row = [&](const std::string &q, const std::string &m, double v) {
        if (!rows.count(q)) {
            order.push_back(q);
        }
        rows[q][m] = v;
    };

    const bool embedded = !sys.environment.empty();
    for (const auto &method : methods(cfg)) {
        json mj;
        auto solve = [&](const scf::MolecularSystem &s, const std::string &label) {
            auto solver = make_solver(cfg, method);
            auto o = opts;
            o.on_iteration = [&](const scf::MacroRecord &r) {
                log << method << ' ' << label << " macro " << r.iteration << std::setprecision(12)
                    << " E " << r.energy << " orbital-gradient " << r.orbital_gradient
                    << " wavefunction-gradient " << r.wavefunction_gradient << '\n';
            };
            auto st = scf::scf_macro_loop(s, part, *solver, o);
            log << method << ' ' << label << ": " << st.message << ", E = " << std::setprecision(12)
                << st.energy << '\n';
            out.converged = out.converged && st.converged;
            mj[label] = state_json(st, *solver);
            row("energy_" + label, method, st.energy);
            row("macro_iterations_" + label, method, st.macro_iterations);
            if (method == "simulator") {
                row("cnot_count_" + label, method, st.cnot_count);
            }
            return st;
        };
        const auto vacuum = solve(sys.in_vacuum(), "vacuum");
        std::optional<scf::ScfState> env_state;
        if (embedded) {
            env_state = solve(sys, "environment");
        }

        const auto vac_parts = efg::molecular_efg(sys.in_vacuum(), vacuum.density, {});
        std::vector<efg::NucleusEfg> env_parts;
        if (env_state) {
            env_parts = efg::molecular_efg(sys, env_state->density, env_state->induced, efg_opts);
        }
        for (std::size_t k = 0; k < vac_parts.size(); ++k) {
            const auto q = bundled_quadrupole(vac_parts[k].label);
            if (!q) {
                log << "no bundled quadrupole moment for " << vac_parts[k].label
                    << "; NQI skipped\n";
                continue;
            }
            auto add = [&](efg::Channel c, const Mat3 &t) {
                auto r = efg::analyze(t, *q);
                r.molecule = in.name;
                r.nucleus = vac_parts[k].label;
                r.method = method;
                r.basis = cfg.basis;
                r.channel = c;
                const std::string tag = r.nucleus + "_" + efg::to_string(c);
                row("chi_kHz_" + tag, method, r.chi_khz);
                row("eta_" + tag, method, r.eta);
                out.records.push_back(r);
            };
            add(efg::Channel::Vacuum, efg::total_efg(vac_parts[k].electronic, vac_parts[k].nuclear,
                                                     std::nullopt, efg::Channel::Vacuum));
            if (env_state) {
                const auto &p = env_parts[k];
                add(efg::Channel::Environment,
                    efg::total_efg(p.electronic, p.nuclear, std::nullopt,
                                   efg::Channel::Environment));
                add(efg::Channel::Direct, efg::total_efg(p.electronic, p.nuclear,
                                                         p.environment, efg::Channel::Direct));
            }
        }
        out.result["methods"][method] = mj;
    }
    out.comparison = comparison_table(rows, order);
    return out;
}

int run_molecules(const RunConfig &cfg, std::ostream &log, bool optimize_orbitals) {
    const auto inputs = job_inputs(cfg);
    std::vector<JobOutcome> outcomes(inputs.size());
    std::vector<std::exception_ptr> errors(inputs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < inputs.size(); k = next++) {
            const fs::path dir = cfg.output / inputs[k].name;
            try {
                std::error_code ec;
                fs::create_directories(dir, ec);
                std::ofstream job_log(dir / "log.txt");
                if (!job_log) {
                    throw IoError("cannot write " + (dir / "log.txt").string());
                }
                outcomes[k] = run_job(cfg, inputs[k], optimize_orbitals, job_log);
                write_text(dir / "result.json", dump(outcomes[k].result));
                std::ostringstream nqi;
                efg::write_report_json(nqi, outcomes[k].records, {}, meta_map(cfg));
                write_text(dir / "nqi.json", nqi.str());
                write_text(dir / "comparison.csv", outcomes[k].comparison);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const auto n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(std::max(cfg.jobs, 1)), inputs.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto &t : pool) {
        t.join();
    }

    int code = kExitOk;
    json summary;
    summary["meta"] = meta(cfg);
    summary["jobs"] = json::array();
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        json s{{"name", inputs[k].name}};
        if (errors[k]) {
            int c = kExitFailure;
            std::string what;
            try {
                std::rethrow_exception(errors[k]);
            } catch (const ValidationError &e) {
                c = kExitValidation, what = e.what();
            } catch (const ParseError &e) {
                c = kExitValidation, what = e.what();
            } catch (const SingularityError &e) {
                c = kExitValidation, what = e.what();
            } catch (const ConvergenceError &e) {
                c = kExitConvergence, what = e.what();
            } catch (const IoError &e) {
                c = kExitIo, what = e.what();
            } catch (const std::exception &e) {
                what = e.what();
            }
            log << inputs[k].name << ": error: " << what << '\n';
            s["status"] = "error";
            s["error"] = what;
            code = std::max(code, c);
        } else {
            s["status"] = outcomes[k].converged ? "converged" : "not converged";
            if (!outcomes[k].converged) {
                code = std::max(code, kExitConvergence);
            }
            log << inputs[k].name << ": " << s["status"].get<std::string>() << '\n';
            log << "Classical vs Simulator (" << inputs[k].name << ")\n";
            std::istringstream rows(outcomes[k].comparison);
            for (std::string line; std::getline(rows, line);) {
                std::istringstream cells(line);
                std::string cell;
                bool first = true;
                while (std::getline(cells, cell, ',')) {
                    log << (first ? std::left : std::right) << std::setw(first ? 34 : 20) << cell;
                    first = false;
                }
                log << '\n';
            }
        }
        summary["jobs"].push_back(s);
    }
    write_text(cfg.output / "summary.json", dump(summary));
    return code;
}

// ------------------------------------------------------------- efg-report

std::vector<efg::NqiRecord> read_records(const fs::path &input) {
    const fs::path file = fs::is_directory(input) ? input / "nqi.json" : input;
    std::ifstream in(file);
    if (!in) {
        throw IoError("cannot open " + file.string());
    }
    std::vector<efg::NqiRecord> out;
    try {
        const auto j = nlohmann::json::parse(in);
        for (const auto &r : j.at("records")) {
            efg::NqiRecord x;
            x.molecule = r.at("molecule").get<std::string>();
            x.nucleus = r.at("nucleus").get<std::string>();
            x.method = r.at("method").get<std::string>();
            x.basis = r.at("basis").get<std::string>();
            x.channel = efg::parse_channel(r.at("channel").get<std::string>());
            x.eigenvalues = {r.at("eps_xx").get<double>(), r.at("eps_yy").get<double>(),
                             r.at("eps_zz").get<double>()};
            x.chi_khz = r.at("chi_kHz").get<double>();
            x.eta = r.at("eta").get<double>();
            out.push_back(x);
        }
    } catch (const nlohmann::json::exception &e) {
        throw ParseError(file.string() + ": " + e.what());
    }
    return out;
}

int run_efg_report(const RunConfig &cfg, std::ostream &log) {
    std::vector<efg::NqiRecord> records;
    for (const auto &p : cfg.nqi_inputs) {
        const auto r = read_records(p);
        records.insert(records.end(), r.begin(), r.end());
    }
    const auto table =
        efg::load_experimental(cfg.reference.empty() ? default_reference() : cfg.reference);
    const std::map<std::string, efg::ExperimentalValue> *experiment = nullptr;
    if (!cfg.system.empty()) {
        const auto it = table.find(cfg.system);
        if (it == table.end()) {
            throw ValidationError("no experimental values for system '" + cfg.system + "'");
        }
        experiment = &it->second;
    }

    using Group = std::tuple<std::string, std::string, std::string, int>;
    std::map<Group, std::vector<efg::NqiRecord>> groups;
    for (const auto &r : records) {
        groups[{r.basis, r.method, efg::element_of(r.nucleus), static_cast<int>(r.channel)}]
            .push_back(r);
    }
    std::vector<efg::CellAverage> averages;
    for (const auto &[key, rs] : groups) {
        std::optional<efg::ExperimentalValue> ref;
        if (experiment) {
            if (const auto e = experiment->find(std::get<2>(key)); e != experiment->end()) {
                ref = e->second;
            }
        }
        averages.push_back(efg::cell_average(rs, ref, cfg.exclude));
    }

    std::ostringstream js, csv, fig;
    efg::write_report_json(js, records, averages, meta_map(cfg));
    efg::write_table_csv(csv, averages);
    efg::write_decomposition_csv(fig, averages);
    write_text(cfg.output / "report.json", js.str());
    write_text(cfg.output / "table.csv", csv.str());
    write_text(cfg.output / "decomposition.csv", fig.str());
    log << "efg report: " << records.size() << " records, " << averages.size() << " averages\n";
    for (const auto &a : averages) {
        log << "  " << a.basis << ' ' << a.method << ' ' << a.element << ' '
            << efg::to_string(a.channel) << ": chi " << std::setprecision(6) << a.chi_khz
            << " kHz, eta " << a.eta;
        if (a.deviation_khz) {
            log << ", deviation " << *a.deviation_khz << " kHz";
        }
        log << '\n';
    }
    return kExitOk;
}

void check_file(std::vector<Finding> &f, const std::string &key, const fs::path &p,
                bool required) {
    if (p.empty()) {
        if (required) {
            f.push_back({Finding::Severity::Error, key, "required for this task"});
        }
        return;
    }
    if (!fs::exists(p)) {
        f.push_back({Finding::Severity::Error, key, "file not found: " + p.string()});
    }
}

} // namespace

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto &k : keys()) {
        out.push_back(k.name);
    }
    return out;
}

void set_value(RunConfig &cfg, const std::string &key, const std::string &value) {
    find_key(key).set(cfg, trim(value));
}

std::string get_value(const RunConfig &cfg, const std::string &key) {
    return find_key(key).get(cfg);
}

void load_ini(std::istream &in, RunConfig &cfg) {
    std::string section;
    std::string raw;
    for (int line = 1; std::getline(in, raw); ++line) {
        const auto comment = raw.find_first_of("#;");
        const std::string s = trim(comment == std::string::npos ? raw : raw.substr(0, comment));
        if (s.empty()) {
            continue;
        }
        if (s.front() == '[') {
            if (s.back() != ']') {
                throw ParseError("config line " + std::to_string(line) + ": bad section header");
            }
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw ParseError("config line " + std::to_string(line) + ": expected 'name = value'");
        }
        const std::string name = trim(s.substr(0, eq));
        const std::string key = section.empty() ? name : section + "." + name;
        try {
            set_value(cfg, key, s.substr(eq + 1));
        } catch (const ParseError &e) {
            throw ParseError("config line " + std::to_string(line) + ": " + e.what());
        }
    }
}

void load_ini_file(const fs::path &path, RunConfig &cfg) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file " + path.string());
    }
    load_ini(in, cfg);
}

namespace {

std::string canonical_ini(const RunConfig &cfg, bool results_only) {
    std::ostringstream out;
    std::string section;
    for (const auto &k : keys()) {
        if (results_only && (k.name == "run.output" || k.name == "run.jobs")) {
            continue;
        }
        const auto dot = k.name.find('.');
        const std::string s = k.name.substr(0, dot);
        if (s != section) {
            out << (section.empty() ? "" : "\n") << '[' << s << "]\n";
            section = s;
        }
        out << k.name.substr(dot + 1) << " = " << k.get(cfg) << '\n';
    }
    return out.str();
}

} // namespace

std::string to_ini(const RunConfig &cfg) { return canonical_ini(cfg, false); }

std::string config_hash(const RunConfig &cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_ini(cfg, true)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << h;
    return ss.str();
}

std::vector<Finding> validate(const RunConfig &cfg) {
    using S = Finding::Severity;
    std::vector<Finding> f;
    const RunConfig defaults;
    auto error = [&](const std::string &k, const std::string &m) {
        f.push_back({S::Error, k, m});
    };
    auto warn_default = [&](const std::string &k, double v, double d) {
        if (v != d) {
            f.push_back({S::Warning, k, "differs from the default " + format_double(d)});
        }
    };

    const auto &tasks = task_names();
    if (!cfg.task.empty() && std::find(tasks.begin(), tasks.end(), cfg.task) == tasks.end()) {
        error("run.task", "unknown task '" + cfg.task + "'");
    }
    if (cfg.jobs < 1) {
        error("run.jobs", "must be at least 1");
    }
    if (cfg.output.empty()) {
        error("run.output", "must not be empty");
    }
    if (!(cfg.cutoff_angstrom >= 0.0) || !std::isfinite(cfg.cutoff_angstrom)) {
        error("lattice.cutoff_angstrom", "must be a finite non-negative length");
    }
    try {
        lattice::parse_criterion(cfg.criterion);
    } catch (const Error &) {
        error("lattice.criterion", "unknown criterion '" + cfg.criterion + "'");
    }
    if (cfg.active_orbitals < 1) {
        error("active.orbitals", "must be at least 1");
    }
    if (cfg.active_electrons < 0 || cfg.active_electrons > 2 * cfg.active_orbitals) {
        error("active.electrons", "must lie between 0 and twice the active orbitals");
    }
    if (cfg.method != "simulator" && cfg.method != "classical-oracle" && cfg.method != "both") {
        error("solver.method", "expected simulator, classical-oracle or both");
    } else if (cfg.method != "simulator" && cfg.active_orbitals > 8) {
        error("solver.method", "the classical oracle supports at most 8 active orbitals");
    }
    try {
        qc::parse_pool_kind(cfg.pool);
    } catch (const Error &) {
        error("solver.pool", "unknown pool '" + cfg.pool + "'");
    }
    if (cfg.shot_model != "exact" && cfg.shot_model != "sampled") {
        error("solver.shot_model", "expected exact or sampled");
    }
    if (cfg.shots < 1) {
        error("solver.shots", "must be at least 1");
    }
    if (!(cfg.gradient_tolerance > 0.0)) {
        error("solver.gradient_tolerance", "must be positive");
    }
    if (!(cfg.energy_tolerance > 0.0)) {
        error("solver.energy_tolerance", "must be positive");
    }
    if (cfg.max_macro_iterations < 1) {
        error("solver.max_macro_iterations", "must be at least 1");
    }
    if (cfg.max_adapt_iterations < 0) {
        error("solver.max_adapt_iterations", "must be non-negative");
    }
    if (!std::isfinite(cfg.induced_efg_factor)) {
        error("solver.induced_efg_factor", "must be finite");
    }
    warn_default("lattice.cutoff_angstrom", cfg.cutoff_angstrom, defaults.cutoff_angstrom);
    warn_default("solver.gradient_tolerance", cfg.gradient_tolerance,
                 defaults.gradient_tolerance);
    warn_default("solver.energy_tolerance", cfg.energy_tolerance, defaults.energy_tolerance);
    warn_default("solver.shots", static_cast<double>(cfg.shots),
                 static_cast<double>(defaults.shots));
    warn_default("solver.induced_efg_factor", cfg.induced_efg_factor,
                 defaults.induced_efg_factor);

    if (cfg.task == "build-supercell") {
        check_file(f, "input.cell", cfg.cell, true);
    } else if (cfg.task == "solve-induced") {
        check_file(f, "input.potential", cfg.potential, true);
        check_file(f, "input.properties", cfg.properties, false);
    } else if (cfg.task == "run-vqe" || cfg.task == "run-scf") {
        if (cfg.job_dirs.empty()) {
            check_file(f, "input.fcidump", cfg.fcidump, true);
            check_file(f, "input.properties", cfg.properties, true);
            check_file(f, "input.potential", cfg.potential, false);
        } else {
            for (const auto &d : cfg.job_dirs) {
                check_file(f, "input.job_dirs", d / "integrals.fcidump", true);
                check_file(f, "input.job_dirs", d / "properties.txt", true);
            }
        }
    } else if (cfg.task == "efg-report") {
        if (cfg.nqi_inputs.empty()) {
            error("efg.inputs", "required for this task");
        }
        for (const auto &p : cfg.nqi_inputs) {
            check_file(f, "efg.inputs", p, true);
        }
        check_file(f, "efg.reference", cfg.reference, false);
    }
    return f;
}

int run(const RunConfig &cfg, std::ostream &log) {
    const auto findings = validate(cfg);
    bool failed = false;
    for (const auto &x : findings) {
        const bool err = x.severity == Finding::Severity::Error;
        log << (err ? "error: " : "warning: ") << x.key << ": " << x.message << '\n';
        failed = failed || err;
    }
    if (failed) {
        return kExitValidation;
    }
    try {
        write_text(cfg.output / "config.ini", to_ini(cfg));
        if (cfg.task == "build-supercell") {
            return run_build_supercell(cfg, log);
        }
        if (cfg.task == "solve-induced") {
            return run_solve_induced(cfg, log);
        }
        if (cfg.task == "run-vqe") {
            return run_molecules(cfg, log, false);
        }
        if (cfg.task == "run-scf") {
            return run_molecules(cfg, log, true);
        }
        if (cfg.task == "efg-report") {
            return run_efg_report(cfg, log);
        }
        log << "error: run.task: no task given\n";
        return kExitValidation;
    } catch (const ValidationError &e) {
        log << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const ParseError &e) {
        log << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const SingularityError &e) {
        log << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const ConvergenceError &e) {
        log << "error: " << e.what() << '\n';
        return kExitConvergence;
    } catch (const IoError &e) {
        log << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception &e) {
        log << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

std::string version() { return PEVQE_VERSION; }

} // namespace pevqe::app
