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
#include "pevqe/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "pevqe/error.hpp"

namespace pevqe::lattice {

namespace {

constexpr std::array<const char *, 18> kElements = {
    "H", "He", "Li", "Be", "B",  "C",  "N", "O",  "F",
    "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl", "Ar"};

std::string upper(std::string s) {
    for (auto &c : s) {
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return s;
}

// Smallest |L x| with x in the box [n-1, n+1]. The optimum of this convex
// quadratic lies in the relative interior of one face of the box, where it
// equals the unconstrained minimizer over that face's affine hull.
double box_distance(const Mat3 &lattice, const std::array<int, 3> &n) {
    if (n[0] == 0 && n[1] == 0 && n[2] == 0) {
        return 0.0;
    }
    double best = std::numeric_limits<double>::infinity();
    for (int code = 0; code < 27; ++code) {
        std::array<int, 3> mode{code % 3, (code / 3) % 3, code / 9};
        Vec3 fixed = Vec3::Zero();
        std::vector<int> free;
        for (int a = 0; a < 3; ++a) {
            if (mode[a] == 0) {
                free.push_back(a);
            } else {
                fixed[a] = n[a] + (mode[a] == 1 ? -1.0 : 1.0);
            }
        }
        const Vec3 c = lattice * fixed;
        Vec3 x = fixed;
        if (!free.empty()) {
            Eigen::MatrixXd lf(3, free.size());
            for (std::size_t f = 0; f < free.size(); ++f) {
                lf.col(static_cast<Eigen::Index>(f)) = lattice.col(free[f]);
            }
            const Eigen::VectorXd sol =
                (lf.transpose() * lf).ldlt().solve(-lf.transpose() * c);
            bool feasible = true;
            for (std::size_t f = 0; f < free.size(); ++f) {
                const double v = sol[static_cast<Eigen::Index>(f)];
                const int a = free[f];
                feasible = feasible && v >= n[a] - 1.0 && v <= n[a] + 1.0;
                x[a] = v;
            }
            if (!feasible) {
                continue;
            }
        }
        best = std::min(best, (lattice * x).norm());
    }
    return best;
}

} // namespace

void UnitCell::validate() const {
    if (!lattice.allFinite()) {
        throw ValidationError("lattice vectors must be finite");
    }
    const double scale = lattice.col(0).norm() * lattice.col(1).norm() *
                         lattice.col(2).norm();
    if (scale == 0.0 || std::abs(lattice.determinant()) < 1e-10 * scale) {
        throw ValidationError("lattice vectors are linearly dependent");
    }
    for (std::size_t m = 0; m < molecules.size(); ++m) {
        if (molecules[m].atoms.empty()) {
            throw ValidationError("molecule " + std::to_string(m + 1) +
                                  " has no atoms");
        }
    }
}

Vec3 UnitCell::translation(const std::array<int, 3> &image) const {
    return lattice * Vec3(image[0], image[1], image[2]);
}

InclusionCriterion parse_criterion(const std::string &name) {
    const auto n = upper(name);
    if (n == "UNIFORM-BLOCK" || n == "UNIFORM_BLOCK" || n == "BLOCK") {
        return InclusionCriterion::UniformBlock;
    }
    if (n == "ORIGIN-DISTANCE" || n == "ORIGIN_DISTANCE" || n == "ORIGIN") {
        return InclusionCriterion::OriginDistance;
    }
    if (n == "BOX-DISTANCE" || n == "BOX_DISTANCE" || n == "BOX") {
        return InclusionCriterion::BoxClosestApproach;
    }
    throw ValidationError("unknown inclusion criterion '" + name + "'");
}

std::string to_string(InclusionCriterion c) {
    switch (c) {
    case InclusionCriterion::UniformBlock:
        return "uniform-block";
    case InclusionCriterion::OriginDistance:
        return "origin-distance";
    case InclusionCriterion::BoxClosestApproach:
        return "box-distance";
    }
    return "?";
}

double image_distance(const Mat3 &lattice, const std::array<int, 3> &image,
                      InclusionCriterion c) {
    switch (c) {
    case InclusionCriterion::UniformBlock: {
        const int m = std::max({std::abs(image[0]), std::abs(image[1]),
                                std::abs(image[2])});
        return m * lattice.colwise().norm().maxCoeff();
    }
    case InclusionCriterion::OriginDistance:
        return (lattice * Vec3(image[0], image[1], image[2])).norm();
    case InclusionCriterion::BoxClosestApproach:
        return box_distance(lattice, image);
    }
    return 0.0;
}

std::size_t Supercell::central_image() const {
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (images[i] == std::array<int, 3>{0, 0, 0}) {
            return i;
        }
    }
    throw ValidationError("supercell lacks the central image");
}

std::size_t Supercell::atom_count() const {
    std::size_t n = 0;
    for (const auto &m : molecules) {
        n += m.atoms.size();
    }
    return n;
}

Supercell build_supercell(const UnitCell &cell, double cutoff,
                          InclusionCriterion c) {
    if (!(cutoff >= 0.0) || !std::isfinite(cutoff)) {
        throw ValidationError("cutoff must be finite and non-negative");
    }
    cell.validate();
    // Rows of the inverse lattice bound each integer coordinate:
    // |n_a| <= |row_a| * |L n|.
    const Mat3 inv = cell.lattice.inverse();
    std::array<int, 3> bound{};
    for (int a = 0; a < 3; ++a) {
        double b = cutoff * inv.row(a).norm();
        if (c == InclusionCriterion::BoxClosestApproach) {
            b += 1.0;
        } else if (c == InclusionCriterion::UniformBlock) {
            b = cutoff / cell.lattice.colwise().norm().maxCoeff();
        }
        bound[a] = static_cast<int>(std::floor(b)) + 1;
    }

    Supercell out;
    out.cell = cell;
    for (int i = -bound[0]; i <= bound[0]; ++i) {
        for (int j = -bound[1]; j <= bound[1]; ++j) {
            for (int k = -bound[2]; k <= bound[2]; ++k) {
                const std::array<int, 3> n{i, j, k};
                if (image_distance(cell.lattice, n, c) <= cutoff) {
                    out.images.push_back(n);
                }
            }
        }
    }
    out.molecules.reserve(out.images.size() * cell.molecules.size());
    for (std::size_t im = 0; im < out.images.size(); ++im) {
        const Vec3 shift = cell.translation(out.images[im]);
        for (std::size_t m = 0; m < cell.molecules.size(); ++m) {
            SupercellMolecule sm;
            sm.image = im;
            sm.cell_molecule = m;
            sm.atoms = cell.molecules[m].atoms;
            for (auto &a : sm.atoms) {
                a.position += shift;
            }
            out.molecules.push_back(std::move(sm));
        }
    }
    return out;
}

std::vector<EmbeddingJob> make_jobs(const Supercell &super,
                                    const std::vector<std::size_t> &molecules) {
    const std::size_t central = super.central_image();
    const std::size_t per_cell = super.cell.molecules.size();
    for (auto m : molecules) {
        if (m >= per_cell) {
            throw ValidationError("molecule index " + std::to_string(m) +
                                  " outside the unit cell");
        }
    }

    std::vector<EmbeddingJob> jobs;
    for (std::size_t j = 0; j < molecules.size(); ++j) {
        EmbeddingJob job;
        job.index = j;
        job.cell_molecule = molecules[j];
        const std::size_t skip = central * per_cell + molecules[j];
        job.qm.atoms = super.molecules[skip].atoms;
        job.environment.sites.reserve(super.atom_count());
        for (std::size_t m = 0; m < super.molecules.size(); ++m) {
            if (m == skip) {
                continue;
            }
            for (const auto &atom : super.molecules[m].atoms) {
                const auto it = super.cell.parameters.find(atom.element);
                if (it == super.cell.parameters.end()) {
                    throw ValidationError("no environment parameters for '" +
                                          atom.element + "'");
                }
                pe::PolarizableSite site;
                site.label = atom.element;
                site.position = atom.position;
                site.multipoles.charge = it->second.charge;
                site.multipoles.dipole = it->second.dipole;
                site.multipoles.max_order = it->second.dipole.isZero(0.0) ? 0 : 1;
                site.polarizability = it->second.polarizability;
                site.exclusion_group = static_cast<int>(m);
                job.environment.sites.push_back(std::move(site));
            }
        }
        jobs.push_back(std::move(job));
    }
    return jobs;
}

int atomic_number(const std::string &element) {
    for (std::size_t z = 0; z < kElements.size(); ++z) {
        if (element == kElements[z]) {
            return static_cast<int>(z) + 1;
        }
    }
    throw ValidationError("unknown element '" + element + "'");
}

UnitCell parse_cell(std::istream &in) {
    std::vector<std::pair<int, std::vector<std::string>>> lines;
    std::string raw;
    for (int no = 1; std::getline(in, raw); ++no) {
        if (auto p = raw.find_first_of("#!"); p != std::string::npos) {
            raw.erase(p);
        }
        std::istringstream ss(raw);
        std::vector<std::string> tok;
        for (std::string t; ss >> t;) {
            tok.push_back(t);
        }
        if (!tok.empty()) {
            lines.emplace_back(no, std::move(tok));
        }
    }
    auto fail = [](int no, const std::string &what) {
        return ParseError("cell file line " + std::to_string(no) + ": " + what);
    };
    auto number = [&](int no, const std::string &t) {
        try {
            std::size_t used = 0;
            const double v = std::stod(t, &used);
            if (used != t.size()) {
                throw std::invalid_argument(t);
            }
            return v;
        } catch (const std::exception &) {
            throw fail(no, "expected a number, got '" + t + "'");
        }
    };

    if (lines.empty()) {
        throw ParseError("cell file is empty");
    }
    std::size_t pos = 0;
    auto unit_tok = lines[0].second;
    if (upper(unit_tok[0]) == "UNIT" && unit_tok.size() == 2) {
        unit_tok.erase(unit_tok.begin());
    }
    if (unit_tok.size() != 1) {
        throw fail(lines[0].first, "expected a unit header (AA or AU)");
    }
    const auto unit = upper(unit_tok[0]);
    double scale = 1.0;
    if (unit == "AA" || unit == "ANGSTROM") {
        scale = pe::kBohrPerAngstrom;
    } else if (unit != "AU" && unit != "BOHR") {
        throw fail(lines[0].first, "unknown unit '" + unit_tok[0] + "'");
    }
    ++pos;

    UnitCell cell;
    for (int a = 0; a < 3; ++a, ++pos) {
        if (pos >= lines.size() || lines[pos].second.size() != 3) {
            throw ParseError("cell file: expected three lattice-vector lines");
        }
        for (int b = 0; b < 3; ++b) {
            cell.lattice(b, a) =
                number(lines[pos].first, lines[pos].second[b]) * scale;
        }
    }

    bool seen_params = false;
    while (pos < lines.size()) {
        const auto key = upper(lines[pos].second[0]);
        if (lines[pos].second.size() != 1) {
            throw fail(lines[pos].first, "expected MOLECULE or PARAMETERS");
        }
        ++pos;
        auto body_end = pos;
        while (body_end < lines.size() && lines[body_end].second.size() > 1) {
            ++body_end;
        }
        if (key == "MOLECULE") {
            Molecule mol;
            for (; pos < body_end; ++pos) {
                const auto &[no, t] = lines[pos];
                if (t.size() != 4) {
                    throw fail(no, "atom lines are 'element x y z'");
                }
                atomic_number(t[0]);
                mol.atoms.push_back(
                    {t[0], Vec3(number(no, t[1]), number(no, t[2]),
                                number(no, t[3])) *
                               scale});
            }
            if (mol.atoms.empty()) {
                throw fail(lines[pos - 1].first, "empty MOLECULE block");
            }
            cell.molecules.push_back(std::move(mol));
        } else if (key == "PARAMETERS") {
            if (seen_params) {
                throw fail(lines[pos - 1].first, "duplicate PARAMETERS block");
            }
            seen_params = true;
            for (; pos < body_end; ++pos) {
                const auto &[no, t] = lines[pos];
                ElementParameters p;
                if (t.size() != 3 && t.size() != 8) {
                    throw fail(no, "parameter lines are 'element charge alpha' "
                                   "or 'element charge axx axy axz ayy ayz azz'");
                }
                p.charge = number(no, t[1]);
                if (t.size() == 3) {
                    p.polarizability = number(no, t[2]) * Mat3::Identity();
                } else {
                    const double v[6] = {number(no, t[2]), number(no, t[3]),
                                         number(no, t[4]), number(no, t[5]),
                                         number(no, t[6]), number(no, t[7])};
                    p.polarizability << v[0], v[1], v[2], v[1], v[3], v[4],
                        v[2], v[4], v[5];
                }
                if (!cell.parameters.emplace(t[0], p).second) {
                    throw fail(no, "duplicate parameters for '" + t[0] + "'");
                }
            }
        } else {
            throw fail(lines[pos - 1].first,
                       "unknown block '" + lines[pos - 1].second[0] + "'");
        }
    }
    if (cell.molecules.empty()) {
        throw ParseError("cell file has no MOLECULE blocks");
    }
    try {
        cell.validate();
    } catch (const ValidationError &e) {
        throw ParseError(std::string("cell file: ") + e.what());
    }
    return cell;
}

UnitCell parse_cell_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open cell file " + path.string());
    }
    return parse_cell(in);
}

} // namespace pevqe::lattice
