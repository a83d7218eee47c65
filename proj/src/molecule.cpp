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
#include "pevqe/molecule.hpp"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "pevqe/error.hpp"

namespace pevqe::scf {

namespace {

const char *const kPacked[6] = {"XX", "XY", "XZ", "YY", "YZ", "ZZ"};

int packed_component(const std::string &c) {
    for (int k = 0; k < 6; ++k) {
        if (c == kPacked[k]) {
            return k;
        }
    }
    return -1;
}

[[noreturn]] void fail(int line, const std::string &msg) {
    throw ParseError("property file line " + std::to_string(line) + ": " + msg);
}

double number(int line, const std::string &tok) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) {
            fail(line, "bad number '" + tok + "'");
        }
        return v;
    } catch (const std::logic_error &) {
        fail(line, "bad number '" + tok + "'");
    }
}

int integer(int line, const std::string &tok) {
    const double v = number(line, tok);
    if (v != static_cast<int>(v)) {
        fail(line, "expected an integer, got '" + tok + "'");
    }
    return static_cast<int>(v);
}

void write_matrix(std::ostream &out, const Eigen::MatrixXd &m) {
    for (Eigen::Index p = 0; p < m.rows(); ++p) {
        for (Eigen::Index q = 0; q <= p; ++q) {
            if (m(p, q) != 0.0) {
                out << std::setw(25) << m(p, q) << ' ' << p + 1 << ' ' << q + 1 << '\n';
            }
        }
    }
}

} // namespace

const Nucleus &PropertyIntegrals::nucleus(const std::string &label) const {
    for (const auto &n : nuclei) {
        if (n.label == label) {
            return n;
        }
    }
    throw ValidationError("unknown nucleus '" + label + "'");
}

PropertyIntegrals parse_properties(std::istream &in) {
    PropertyIntegrals out;
    Eigen::MatrixXd *target = nullptr;
    std::set<std::pair<int, std::string>> site_seen;
    std::set<std::pair<std::string, int>> efg_seen;
    std::string raw;
    int line = 0;
    auto fresh = [&](int l) {
        if (out.n_orbitals <= 0) {
            fail(l, "NORB must precede integral blocks");
        }
        return Eigen::MatrixXd::Zero(out.n_orbitals, out.n_orbitals).eval();
    };
    while (std::getline(in, raw)) {
        ++line;
        if (auto hash = raw.find('#'); hash != std::string::npos) {
            raw.erase(hash);
        }
        std::istringstream ss(raw);
        std::vector<std::string> tok;
        for (std::string t; ss >> t;) {
            tok.push_back(t);
        }
        if (tok.empty()) {
            continue;
        }
        if (tok[0] == "NORB") {
            if (tok.size() != 2 || out.n_orbitals != 0) {
                fail(line, "expected a single 'NORB n'");
            }
            out.n_orbitals = integer(line, tok[1]);
            if (out.n_orbitals <= 0) {
                fail(line, "NORB must be positive");
            }
        } else if (tok[0] == "NUCLEUS") {
            if (tok.size() != 6) {
                fail(line, "expected 'NUCLEUS label Z x y z'");
            }
            for (const auto &n : out.nuclei) {
                if (n.label == tok[1]) {
                    fail(line, "duplicate nucleus '" + tok[1] + "'");
                }
            }
            out.nuclei.push_back({tok[1], integer(line, tok[2]),
                                  Vec3(number(line, tok[3]), number(line, tok[4]),
                                       number(line, tok[5]))});
            target = nullptr;
        } else if (tok[0] == "SITE") {
            if (tok.size() != 3) {
                fail(line, "expected 'SITE id component'");
            }
            const int id = integer(line, tok[1]);
            if (id < 1) {
                fail(line, "site ids start at 1");
            }
            if (!site_seen.insert({id, tok[2]}).second) {
                fail(line, "duplicate block");
            }
            auto &s = out.sites[id];
            if (s.t0.size() == 0) {
                s.t0 = fresh(line);
                for (auto &m : s.t1) {
                    m = fresh(line);
                }
                for (auto &m : s.t2) {
                    m = fresh(line);
                }
            }
            const std::string &c = tok[2];
            if (c == "0") {
                target = &s.t0;
            } else if (c == "X" || c == "Y" || c == "Z") {
                target = &s.t1[static_cast<std::size_t>(c[0] - 'X')];
            } else if (int k = packed_component(c); k >= 0) {
                target = &s.t2[static_cast<std::size_t>(k)];
                s.has_t2 = true;
            } else {
                fail(line, "unknown site component '" + c + "'");
            }
        } else if (tok[0] == "EFG") {
            if (tok.size() != 3) {
                fail(line, "expected 'EFG label component'");
            }
            const int k = packed_component(tok[2]);
            if (k < 0) {
                fail(line, "unknown EFG component '" + tok[2] + "'");
            }
            if (!efg_seen.insert({tok[1], k}).second) {
                fail(line, "duplicate block");
            }
            auto &f = out.efg[tok[1]];
            if (f[0].size() == 0) {
                for (auto &m : f) {
                    m = fresh(line);
                }
            }
            target = &f[static_cast<std::size_t>(k)];
        } else {
            if (tok.size() != 3 || !target) {
                fail(line, "expected 'value p q' inside a SITE or EFG block");
            }
            const double v = number(line, tok[0]);
            const int p = integer(line, tok[1]) - 1;
            const int q = integer(line, tok[2]) - 1;
            if (p < 0 || q < 0 || p >= out.n_orbitals || q >= out.n_orbitals) {
                fail(line, "orbital index out of range");
            }
            (*target)(p, q) = v;
            (*target)(q, p) = v;
        }
    }
    if (out.n_orbitals == 0) {
        throw ParseError("property file has no NORB line");
    }
    for (const auto &[id, s] : out.sites) {
        for (const char *c : {"0", "X", "Y", "Z"}) {
            if (!site_seen.count({id, c})) {
                throw ParseError("site " + std::to_string(id) + " lacks component " + c);
            }
        }
        if (s.has_t2) {
            for (const char *c : kPacked) {
                if (!site_seen.count({id, c})) {
                    throw ParseError("site " + std::to_string(id) + " lacks component " + c);
                }
            }
        }
    }
    for (const auto &[label, f] : out.efg) {
        for (int k = 0; k < 6; ++k) {
            if (!efg_seen.count({label, k})) {
                throw ParseError("EFG block of '" + label + "' lacks component " + kPacked[k]);
            }
        }
        out.nucleus(label);
    }
    if (!out.sites.empty() && out.sites.rbegin()->first != static_cast<int>(out.sites.size())) {
        throw ParseError("site ids must be consecutive from 1");
    }
    return out;
}

PropertyIntegrals parse_properties_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open property file " + path.string());
    }
    return parse_properties(in);
}

void write_properties(std::ostream &out, const PropertyIntegrals &props) {
    const auto flags = out.flags();
    const auto prec = out.precision();
    out << std::scientific << std::setprecision(17);
    out << "NORB " << props.n_orbitals << '\n';
    for (const auto &n : props.nuclei) {
        out << "NUCLEUS " << n.label << ' ' << n.charge << ' ' << n.position.x() << ' '
            << n.position.y() << ' ' << n.position.z() << '\n';
    }
    for (const auto &[id, s] : props.sites) {
        out << "SITE " << id << " 0\n";
        write_matrix(out, s.t0);
        for (int a = 0; a < 3; ++a) {
            out << "SITE " << id << ' ' << static_cast<char>('X' + a) << '\n';
            write_matrix(out, s.t1[static_cast<std::size_t>(a)]);
        }
        if (s.has_t2) {
            for (int k = 0; k < 6; ++k) {
                out << "SITE " << id << ' ' << kPacked[k] << '\n';
                write_matrix(out, s.t2[static_cast<std::size_t>(k)]);
            }
        }
    }
    for (const auto &[label, f] : props.efg) {
        for (int k = 0; k < 6; ++k) {
            out << "EFG " << label << ' ' << kPacked[k] << '\n';
            write_matrix(out, f[static_cast<std::size_t>(k)]);
        }
    }
    out.flags(flags);
    out.precision(prec);
}

void MolecularSystem::validate() const {
    integrals.validate();
    const auto n = static_cast<Eigen::Index>(n_orbitals());
    environment.validate();
    if (site_integrals.size() != environment.size()) {
        throw ValidationError("site integrals do not match the environment sites");
    }
    auto square = [n](const Eigen::MatrixXd &m) { return m.rows() == n && m.cols() == n; };
    for (const auto &s : site_integrals) {
        bool ok = square(s.t0);
        for (const auto &m : s.t1) {
            ok = ok && square(m);
        }
        if (s.has_t2) {
            for (const auto &m : s.t2) {
                ok = ok && square(m);
            }
        }
        if (!ok) {
            throw ValidationError("site integral dimension differs from the orbital count");
        }
    }
    for (const auto &[label, f] : efg_integrals) {
        for (const auto &m : f) {
            if (!square(m)) {
                throw ValidationError("EFG integral dimension differs for '" + label + "'");
            }
        }
    }
}

MolecularSystem MolecularSystem::without_polarizabilities() const {
    MolecularSystem out = *this;
    out.environment = environment.without_polarizabilities();
    return out;
}

MolecularSystem MolecularSystem::in_vacuum() const {
    MolecularSystem out = *this;
    out.environment = {};
    out.site_integrals.clear();
    return out;
}

MolecularSystem make_system(qc::ActiveSpaceProblem integrals, const PropertyIntegrals &props,
                            pe::EnvironmentModel environment) {
    if (props.n_orbitals != integrals.n_orbitals) {
        throw ValidationError("property file and FCIDUMP disagree on the orbital count");
    }
    MolecularSystem sys;
    sys.integrals = std::move(integrals);
    sys.nuclei = props.nuclei;
    sys.efg_integrals = props.efg;
    for (std::size_t s = 0; s < environment.size(); ++s) {
        auto it = props.sites.find(static_cast<int>(s) + 1);
        if (it == props.sites.end()) {
            throw ValidationError("no integrals for environment site " + std::to_string(s + 1));
        }
        sys.site_integrals.push_back(it->second);
    }
    sys.environment = std::move(environment);
    sys.validate();
    return sys;
}

MolecularSystem load_system(const std::filesystem::path &fcidump,
                            const std::filesystem::path &properties,
                            const std::optional<std::filesystem::path> &potential) {
    return make_system(qc::read_fcidump_file(fcidump), parse_properties_file(properties),
                       potential ? pe::parse_potential_file(*potential) : pe::EnvironmentModel{});
}

} // namespace pevqe::scf
