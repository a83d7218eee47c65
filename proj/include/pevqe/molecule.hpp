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

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pevqe/active_space.hpp"
#include "pevqe/environment.hpp"

namespace pevqe::scf {

struct Nucleus {
    std::string label;
    int charge = 0;
    /// bohr
    Vec3 position = Vec3::Zero();
};

/// Six packed components (xx, xy, xz, yy, yz, zz) of a symmetric tensor
/// operator, each an orbital-basis matrix.
using TensorIntegrals = std::array<Eigen::MatrixXd, 6>;

/// One-electron property integrals in the orbital basis of the FCIDUMP.
struct PropertyIntegrals {
    int n_orbitals = 0;
    std::vector<Nucleus> nuclei;
    /// Potential-derivative integrals keyed by 1-based site id.
    std::map<int, pe::SiteIntegrals> sites;
    /// f_ab = +<(3 x_a x_b - r^2 delta_ab) / r^5> about each nucleus, keyed by
    /// nucleus label; the electronic EFG is Tr(f D).
    std::map<std::string, TensorIntegrals> efg;

    const Nucleus &nucleus(const std::string &label) const;
};

/// Text format: "NORB n", "NUCLEUS label Z x y z" (bohr), then blocks headed
/// "SITE id {0|X|Y|Z|XX|XY|XZ|YY|YZ|ZZ}" or "EFG label {XX|...|ZZ}" followed
/// by "value p q" lines (1-based; the transposed element is implied).
/// '#' starts a comment.
PropertyIntegrals parse_properties(std::istream &in);
PropertyIntegrals parse_properties_file(const std::filesystem::path &path);
void write_properties(std::ostream &out, const PropertyIntegrals &props);

/// Full orbital-space problem with its environment, in the input basis.
struct MolecularSystem {
    /// Integrals over every orbital; core holds the nuclear repulsion.
    qc::ActiveSpaceProblem integrals;
    std::vector<Nucleus> nuclei;
    pe::EnvironmentModel environment;
    /// Aligned with environment.sites.
    std::vector<pe::SiteIntegrals> site_integrals;
    std::map<std::string, TensorIntegrals> efg_integrals;

    int n_orbitals() const { return integrals.n_orbitals; }
    int n_electrons() const { return integrals.n_electrons(); }
    /// Throws ValidationError on inconsistent dimensions or missing site
    /// integrals.
    void validate() const;
    /// Copy with every environment polarizability set to zero.
    MolecularSystem without_polarizabilities() const;
    /// Copy with no environment.
    MolecularSystem in_vacuum() const;
};

MolecularSystem make_system(qc::ActiveSpaceProblem integrals, const PropertyIntegrals &props,
                            pe::EnvironmentModel environment = {});

/// Reads an FCIDUMP, a property file and an optional potential file.
MolecularSystem load_system(const std::filesystem::path &fcidump,
                            const std::filesystem::path &properties,
                            const std::optional<std::filesystem::path> &potential = std::nullopt);

} // namespace pevqe::scf
