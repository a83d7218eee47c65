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
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pevqe/environment.hpp"

namespace pevqe::lattice {

struct Atom {
    std::string element;
    Vec3 position = Vec3::Zero(); // bohr
};

struct Molecule {
    std::vector<Atom> atoms;
};

/// Environment parameters attached to every atom of one element.
struct ElementParameters {
    double charge = 0.0;
    Vec3 dipole = Vec3::Zero();
    Mat3 polarizability = Mat3::Zero();
};

struct UnitCell {
    /// Lattice vectors as columns (bohr).
    Mat3 lattice = Mat3::Identity();
    std::vector<Molecule> molecules;
    std::map<std::string, ElementParameters> parameters;

    /// Throws ValidationError for degenerate lattices or empty molecules.
    void validate() const;
    Vec3 translation(const std::array<int, 3> &image) const;
};

enum class InclusionCriterion {
    /// max(|i|,|j|,|k|) times the longest lattice vector within the cutoff.
    UniformBlock,
    /// |i a + j b + k c| within the cutoff.
    OriginDistance,
    /// Closest approach between the central cell box and the image box.
    BoxClosestApproach,
};

InclusionCriterion parse_criterion(const std::string &name);
std::string to_string(InclusionCriterion c);

/// Distance used by a criterion to decide whether an image is included.
double image_distance(const Mat3 &lattice, const std::array<int, 3> &image,
                      InclusionCriterion c);

struct SupercellMolecule {
    std::size_t image = 0;        // index into Supercell::images
    std::size_t cell_molecule = 0; // index into UnitCell::molecules
    std::vector<Atom> atoms;
};

struct Supercell {
    UnitCell cell;
    std::vector<std::array<int, 3>> images;
    std::vector<SupercellMolecule> molecules;

    std::size_t central_image() const;
    std::size_t atom_count() const;
};

/// Every image whose criterion distance is at most cutoff (bohr), in
/// lexicographic (i,j,k) order; molecules follow image order.
Supercell build_supercell(const UnitCell &cell, double cutoff,
                          InclusionCriterion c = InclusionCriterion::UniformBlock);

struct EmbeddingJob {
    std::size_t index = 0;
    std::size_t cell_molecule = 0;
    Molecule qm;
    pe::EnvironmentModel environment;
};

/// One job per central-image molecule index. Each environment molecule
/// becomes its own exclusion group.
std::vector<EmbeddingJob> make_jobs(const Supercell &super,
                                    const std::vector<std::size_t> &molecules);

/// Nuclear charge of an element symbol (H through Ar).
int atomic_number(const std::string &element);

/// Cell file: unit header (AA or AU), three lattice-vector lines, MOLECULE
/// blocks of "element x y z" lines, optional PARAMETERS block of
/// "element charge alpha" or "element charge axx axy axz ayy ayz azz" lines.
UnitCell parse_cell(std::istream &in);
UnitCell parse_cell_file(const std::filesystem::path &path);

} // namespace pevqe::lattice
