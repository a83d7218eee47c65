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
#include "pevqe/efg.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "pevqe/error.hpp"

namespace pevqe::efg {

std::string to_string(Channel c) {
    switch (c) {
    case Channel::Vacuum:
        return "vacuum";
    case Channel::Environment:
        return "+environment";
    case Channel::Direct:
        return "+direct";
    }
    return "?";
}

Channel parse_channel(const std::string &s) {
    if (s == "vacuum") {
        return Channel::Vacuum;
    }
    if (s == "environment" || s == "+environment") {
        return Channel::Environment;
    }
    if (s == "direct" || s == "+direct") {
        return Channel::Direct;
    }
    throw ValidationError("unknown EFG channel '" + s + "'");
}

Quadrupole quadrupole_moment(const std::string &isotope) {
    if (isotope == "2H" || isotope == "D") {
        return {"2H", 0.0028578};
    }
    if (isotope == "17O") {
        return {"17O", 0.0256};
    }
    throw ValidationError("no bundled quadrupole moment for '" + isotope +
                          "'; give Q explicitly");
}

std::string element_of(const std::string &label) {
    std::string e;
    for (char c : label) {
        if (!std::isalpha(static_cast<unsigned char>(c))) {
            break;
        }
        e += c;
    }
    if (e.empty()) {
        throw ValidationError("nucleus label '" + label + "' has no element symbol");
    }
    return e;
}

std::string default_isotope(const std::string &element) {
    if (element == "H" || element == "D") {
        return "2H";
    }
    if (element == "O") {
        return "17O";
    }
    throw ValidationError("no default quadrupolar isotope for element '" + element + "'");
}

Mat3 electronic_efg(const Eigen::MatrixXd &density, const scf::TensorIntegrals &f) {
    Mat3 out;
    for (int a = 0; a < 3; ++a) {
        for (int b = a; b < 3; ++b) {
            const auto &m = f[static_cast<std::size_t>(pe::packed_index(a, b))];
            if (m.rows() != density.rows() || m.cols() != density.cols()) {
                throw ValidationError("EFG integrals and density differ in dimension");
            }
            out(a, b) = out(b, a) = (m.array() * density.array()).sum();
        }
    }
    return out;
}

Mat3 nuclear_efg(const std::vector<scf::Nucleus> &nuclei, const std::string &probe) {
    const auto it = std::find_if(nuclei.begin(), nuclei.end(),
                                 [&](const scf::Nucleus &n) { return n.label == probe; });
    if (it == nuclei.end()) {
        throw ValidationError("unknown probe nucleus '" + probe + "'");
    }
    Mat3 out = Mat3::Zero();
    for (const auto &n : nuclei) {
        if (&n == &*it) {
            continue;
        }
        const Vec3 d = n.position - it->position;
        const double r = d.norm();
        if (r < 1e-10) {
            throw SingularityError("nuclei " + n.label + " and " + probe + " coincide");
        }
        const double r3 = r * r * r;
        out -= n.charge * (3.0 * d * d.transpose() / (r3 * r * r) - Mat3::Identity() / r3);
    }
    return out;
}

Mat3 total_efg(const Mat3 &electronic, const Mat3 &nuclear, const std::optional<Mat3> &environment,
               Channel channel) {
    if ((channel == Channel::Direct) != environment.has_value()) {
        throw ValidationError("the environment tensor belongs to the +direct channel only");
    }
    Mat3 t = electronic + nuclear;
    if (environment) {
        t += *environment;
    }
    return t;
}

Eigenvalues principal_values(const Mat3 &t) {
    const Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (t + t.transpose()),
                                                 Eigen::EigenvaluesOnly);
    std::array<double, 3> v{es.eigenvalues()(0), es.eigenvalues()(1), es.eigenvalues()(2)};
    std::sort(v.begin(), v.end(), [](double a, double b) {
        return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : a < b;
    });
    Eigenvalues e{v[0], v[1], v[2]};
    if (e.zz != 0.0 && (e.xx - e.yy) / e.zz < 0.0) {
        std::swap(e.xx, e.yy);
    }
    return e;
}

double asymmetry(const Eigenvalues &e) {
    if (e.zz == 0.0) {
        throw ValidationError("asymmetry is undefined for a vanishing largest principal value");
    }
    // + 0.0 maps a signed zero to +0
    return (e.xx - e.yy) / e.zz + 0.0;
}

double nqi_khz(const Eigenvalues &e, const Quadrupole &q) {
    return kMhzPerAuBarn * 1e3 * q.barn * e.zz;
}

std::vector<NucleusEfg> molecular_efg(const scf::MolecularSystem &sys,
                                      const Eigen::MatrixXd &density,
                                      const pe::InducedDipoles &mu,
                                      const pe::EnvironmentEfgOptions &opts) {
    std::vector<NucleusEfg> out;
    for (const auto &n : sys.nuclei) {
        const auto f = sys.efg_integrals.find(n.label);
        if (f == sys.efg_integrals.end()) {
            continue;
        }
        NucleusEfg e;
        e.label = n.label;
        e.electronic = electronic_efg(density, f->second);
        e.nuclear = nuclear_efg(sys.nuclei, n.label);
        if (!sys.environment.empty()) {
            pe::InducedDipoles m = mu;
            if (m.dipoles.empty()) {
                m.dipoles.assign(sys.environment.size(), Vec3::Zero());
            }
            e.environment = pe::environment_efg(sys.environment, m, n.position, opts);
        }
        out.push_back(e);
    }
    return out;
}

NqiRecord analyze(const Mat3 &tensor, const Quadrupole &q) {
    NqiRecord r;
    r.tensor = tensor;
    r.eigenvalues = principal_values(tensor);
    r.chi_khz = nqi_khz(r.eigenvalues, q);
    r.eta = r.eigenvalues.zz == 0.0 ? 0.0 : asymmetry(r.eigenvalues);
    return r;
}

ExperimentalTable parse_experimental(std::istream &in) {
    ExperimentalTable out;
    try {
        const auto j = nlohmann::json::parse(in);
        for (const auto &[system, elements] : j.at("systems").items()) {
            for (const auto &[element, v] : elements.items()) {
                ExperimentalValue e;
                e.chi_khz = v.at("chi_khz").get<double>();
                e.chi_error = v.at("chi_error_khz").get<double>();
                e.eta = v.at("eta").get<double>();
                e.eta_error = v.at("eta_error").get<double>();
                out[system][element] = e;
            }
        }
    } catch (const nlohmann::json::exception &e) {
        throw ParseError(std::string("experimental reference: ") + e.what());
    }
    return out;
}

ExperimentalTable load_experimental(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return parse_experimental(in);
}

CellAverage cell_average(const std::vector<NqiRecord> &records,
                         const std::optional<ExperimentalValue> &reference,
                         const std::vector<std::string> &exclude) {
    CellAverage avg;
    avg.reference = reference;
    double chi = 0.0;
    double eta = 0.0;
    for (const auto &r : records) {
        if (std::find(exclude.begin(), exclude.end(), r.molecule) != exclude.end()) {
            avg.excluded.push_back(r.molecule);
            continue;
        }
        const std::string e = element_of(r.nucleus);
        if (avg.count == 0) {
            avg.element = e;
            avg.channel = r.channel;
            avg.method = r.method;
            avg.basis = r.basis;
        } else if (e != avg.element || r.channel != avg.channel) {
            throw ValidationError("cell average over mixed elements or channels");
        }
        chi += r.chi_khz;
        eta += r.eta;
        ++avg.count;
    }
    if (avg.count == 0) {
        throw ValidationError("cell average needs at least one record");
    }
    avg.chi_khz = chi / static_cast<double>(avg.count);
    avg.eta = eta / static_cast<double>(avg.count);
    if (reference) {
        avg.deviation_khz = std::abs(avg.chi_khz) - reference->chi_khz;
        avg.deviation_eta = avg.eta - reference->eta;
    }
    return avg;
}

namespace {

std::string csv_number(double v) {
    std::ostringstream ss;
    ss << std::setprecision(10) << v;
    return ss.str();
}

std::string csv_optional(const std::optional<double> &v) {
    return v ? csv_number(*v) : std::string();
}

} // namespace

void write_report_json(std::ostream &out, const std::vector<NqiRecord> &records,
                       const std::vector<CellAverage> &averages,
                       const std::map<std::string, std::string> &meta) {
    nlohmann::ordered_json j;
    j["meta"] = meta;
    j["records"] = nlohmann::ordered_json::array();
    for (const auto &r : records) {
        nlohmann::ordered_json x;
        x["molecule"] = r.molecule;
        x["nucleus"] = r.nucleus;
        x["method"] = r.method;
        x["basis"] = r.basis;
        x["channel"] = to_string(r.channel);
        x["eps_xx"] = r.eigenvalues.xx;
        x["eps_yy"] = r.eigenvalues.yy;
        x["eps_zz"] = r.eigenvalues.zz;
        x["chi_kHz"] = r.chi_khz;
        x["eta"] = r.eta;
        j["records"].push_back(x);
    }
    j["averages"] = nlohmann::ordered_json::array();
    for (const auto &a : averages) {
        nlohmann::ordered_json x;
        x["nucleus"] = a.element;
        x["method"] = a.method;
        x["basis"] = a.basis;
        x["channel"] = to_string(a.channel);
        x["count"] = a.count;
        x["chi_kHz"] = a.chi_khz;
        x["eta"] = a.eta;
        x["excluded"] = a.excluded;
        if (a.reference) {
            x["experiment"] = {{"chi_kHz", a.reference->chi_khz},
                               {"chi_error_kHz", a.reference->chi_error},
                               {"eta", a.reference->eta},
                               {"eta_error", a.reference->eta_error}};
            x["deviation_kHz"] = *a.deviation_khz;
            x["deviation_eta"] = *a.deviation_eta;
        } else {
            x["deviation_kHz"] = nullptr;
        }
        j["averages"].push_back(x);
    }
    out << j.dump(2) << '\n';
}

void write_table_csv(std::ostream &out, const std::vector<CellAverage> &averages) {
    out << "basis,nucleus,method,channel,count,chi_kHz,eta,exp_chi_kHz,exp_eta,deviation_kHz\n";
    for (const auto &a : averages) {
        out << a.basis << ',' << a.element << ',' << a.method << ',' << to_string(a.channel)
            << ',' << a.count << ',' << csv_number(a.chi_khz) << ',' << csv_number(a.eta) << ','
            << (a.reference ? csv_number(a.reference->chi_khz) : "") << ','
            << (a.reference ? csv_number(a.reference->eta) : "") << ','
            << csv_optional(a.deviation_khz) << '\n';
    }
}

void write_decomposition_csv(std::ostream &out, const std::vector<CellAverage> &averages) {
    struct Row {
        std::optional<double> chi[3];
        std::optional<double> experiment;
    };
    std::map<std::tuple<std::string, std::string, std::string>, Row> rows;
    for (const auto &a : averages) {
        Row &r = rows[{a.basis, a.method, a.element}];
        r.chi[static_cast<int>(a.channel)] = a.chi_khz;
        if (a.reference) {
            r.experiment = a.reference->chi_khz;
        }
    }
    out << "basis,method,nucleus,vacuum_kHz,pe_kHz,pe_direct_kHz,experiment_kHz\n";
    for (const auto &[key, r] : rows) {
        out << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key);
        for (const auto &c : r.chi) {
            out << ',' << csv_optional(c);
        }
        out << ',' << csv_optional(r.experiment) << '\n';
    }
}

} // namespace pevqe::efg
