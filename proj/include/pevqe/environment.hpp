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
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pevqe/multipole.hpp"

namespace pevqe::pe {

/// Bohr per Angstrom (CODATA 2018).
inline constexpr double kBohrPerAngstrom = 1.0 / 0.529177210903;

struct PolarizableSite {
    std::string label;
    Vec3 position = Vec3::Zero();
    multipole::MultipoleSet multipoles;
    /// Symmetric polarizability tensor (bohr^3); all-zero means the site
    /// does not polarize.
    Mat3 polarizability = Mat3::Zero();
    int exclusion_group = 0;

    bool polarizable() const { return !polarizability.isZero(0.0); }
};

/// Ordered set of embedding sites. Sites sharing an exclusion group neither
/// polarize each other nor contribute permanent fields to each other.
struct EnvironmentModel {
    std::vector<PolarizableSite> sites;

    std::size_t size() const { return sites.size(); }
    bool empty() const { return sites.empty(); }

    /// Throws ValidationError on duplicate positions, asymmetric or
    /// indefinite polarizabilities, negative group ids.
    void validate() const;

    /// Indices of the sites with nonzero polarizability, in site order.
    std::vector<std::size_t> polarizable_sites() const;

    /// Copy with every polarizability set to zero.
    EnvironmentModel without_polarizabilities() const;
};

/// Dense 3N x 3N response matrix over the polarizable sites:
/// diagonal blocks alpha_s^-1, off-diagonal blocks -T^(2)_ss'.
struct ResponseMatrix {
    Eigen::MatrixXd matrix;
    /// Environment site index of each 3x3 block row.
    std::vector<std::size_t> site_index;

    std::size_t blocks() const { return site_index.size(); }
};

/// One dipole per environment site (zero for non-polarizable sites).
struct InducedDipoles {
    std::vector<Vec3> dipoles;
    /// Infinity-norm residual of B mu - F over the polarizable sites.
    double residual = 0.0;
    /// Reciprocal condition estimate (direct solves only, else -1).
    double rcond = -1.0;
    int sweeps = 0;
};

struct SolverOptions {
    enum class Method { Auto, Direct, Iterative };
    Method method = Method::Auto;
    /// Auto switches to the iterative solver above this many polarizable sites.
    std::size_t dense_limit = 3000;
    double tolerance = 1e-8;
    int max_sweeps = 200;
};

ResponseMatrix build_response_matrix(const EnvironmentModel &env);

/// Field at \p point from the permanent multipoles, skipping sites in
/// \p exclude_group. Throws SingularityError if \p point sits on a
/// contributing site.
Vec3 static_field(const EnvironmentModel &env, const Vec3 &point,
                  std::optional<int> exclude_group = std::nullopt);

/// static_field evaluated at every site, honoring exclusion groups.
std::vector<Vec3> static_fields_at_sites(const EnvironmentModel &env);

/// Solve B mu = F. \p fields has one entry per environment site; entries
/// of non-polarizable sites are ignored.
InducedDipoles solve_induced_dipoles(const ResponseMatrix &b,
                                     const std::vector<Vec3> &fields,
                                     const SolverOptions &opts = {});

/// Same system, choosing dense or matrix-free fixed-point iteration from
/// \p opts. The iterative path never forms B.
InducedDipoles solve_induced_dipoles(const EnvironmentModel &env,
                                     const std::vector<Vec3> &fields,
                                     const SolverOptions &opts = {});

struct EnvironmentEfgOptions {
    /// Prefactor of the induced-dipole term.
    double induced_factor = 0.5;
};

struct EnvironmentEfgParts {
    Mat3 permanent = Mat3::Zero();
    Mat3 induced = Mat3::Zero();
    Mat3 total() const { return permanent + induced; }
};

/// Field-gradient tensor generated by the environment at \p point:
///   sum_s sum_k (-1)^k/k! M_s^(k) T^(k+2) + f sum_s mu_s . T^(3)
/// with f = opts.induced_factor.
EnvironmentEfgParts environment_efg_parts(const EnvironmentModel &env,
                                          const InducedDipoles &mu,
                                          const Vec3 &point,
                                          const EnvironmentEfgOptions &opts = {});

Mat3 environment_efg(const EnvironmentModel &env, const InducedDipoles &mu,
                     const Vec3 &point, const EnvironmentEfgOptions &opts = {});

/// Potential-derivative integrals of one site in an orthonormal orbital
/// basis, including the electron charge: t^(k)_pq = -<p| nabla^k 1/|r-R_s| |q>.
struct SiteIntegrals {
    Eigen::MatrixXd t0;
    std::array<Eigen::MatrixXd, 3> t1;
    /// xx, xy, xz, yy, yz, zz
    std::array<Eigen::MatrixXd, 6> t2;
    bool has_t2 = false;

    Eigen::Index dimension() const { return t0.rows(); }
};

/// Index of the (a, b) component in the 6-component packed order.
int packed_index(int a, int b);

struct FoldedOperator {
    Eigen::MatrixXd v_es;
    Eigen::MatrixXd v_ind;
};

/// Environment one-electron operators in the basis of \p integrals:
///   v_es  = sum_s q_s t0 - mu_s . t1 + sum_ab (M_s^ab / 2) t2_ab
///   v_ind = -sum_s mu_s^ind . t1
/// Throws ValidationError when integrals are missing for a site that needs
/// them or a matrix is not symmetric.
FoldedOperator fold_environment_operator(
    const EnvironmentModel &env, const InducedDipoles &mu,
    const std::vector<SiteIntegrals> &integrals);

/// -1/2 Tr(D v_ind), the induction correction of the free energy.
double induction_energy_correction(const Eigen::MatrixXd &v_ind,
                                   const Eigen::MatrixXd &density);

/// Electrostatic potential of the permanent multipoles at \p point.
double static_potential(const EnvironmentModel &env, const Vec3 &point);

// Potential file I/O.

EnvironmentModel parse_potential(std::istream &in);
EnvironmentModel parse_potential_file(const std::filesystem::path &path);
void write_potential(std::ostream &out, const EnvironmentModel &env);
void write_potential_file(const std::filesystem::path &path,
                          const EnvironmentModel &env);

} // namespace pevqe::pe
