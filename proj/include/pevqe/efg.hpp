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

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pevqe/environment.hpp"
#include "pevqe/molecule.hpp"

namespace pevqe::efg {

/// Nuclear quadrupole coupling in MHz per (atomic unit of EFG x barn):
/// e * (E_h / (e a0^2)) * 1e-28 m^2 / h.
inline constexpr double kMhzPerAuBarn = 234.9647;

/// vacuum: electronic (vacuum density) + nuclear.
/// environment: electronic (embedded density) + nuclear.
/// direct: environment plus the field gradient of the environment itself.
enum class Channel { Vacuum, Environment, Direct };

std::string to_string(Channel c);
/// Accepts "vacuum", "environment"/"+environment", "direct"/"+direct".
Channel parse_channel(const std::string &s);

/// Principal values with |zz| >= |yy| >= |xx|.
struct Eigenvalues {
    double xx = 0.0;
    double yy = 0.0;
    double zz = 0.0;
};

struct Quadrupole {
    std::string isotope;
    /// barn (1e-28 m^2)
    double barn = 0.0;
};

/// Bundled moments: "2H" (alias "D") and "17O". Throws ValidationError for
/// anything else.
Quadrupole quadrupole_moment(const std::string &isotope);
/// Element symbol of a nucleus label ("H2" -> "H", "O" -> "O").
std::string element_of(const std::string &label);
/// Isotope measured in the ice experiments: H -> 2H, O -> 17O.
std::string default_isotope(const std::string &element);

/// Tr(f_ab D) for each component; D and f in the same orbital basis.
Mat3 electronic_efg(const Eigen::MatrixXd &density, const scf::TensorIntegrals &f);

/// -sum_{L != K} Z_L [3 dR_a dR_b / |dR|^5 - delta_ab / |dR|^3],
/// dR = R_L - R_K. Throws ValidationError for an unknown probe and
/// SingularityError when another nucleus sits on it.
Mat3 nuclear_efg(const std::vector<scf::Nucleus> &nuclei, const std::string &probe);

/// electronic + nuclear, plus \p environment for Channel::Direct. The
/// environment tensor must be given for Direct and only for Direct.
Mat3 total_efg(const Mat3 &electronic, const Mat3 &nuclear,
               const std::optional<Mat3> &environment, Channel channel);

/// Eigenvalues sorted by magnitude; equal magnitudes put the algebraically
/// smaller value first. xx and yy are swapped when (xx - yy) / zz < 0.
Eigenvalues principal_values(const Mat3 &t);

/// (xx - yy) / zz; throws ValidationError when zz is zero.
double asymmetry(const Eigenvalues &e);

/// Coupling constant in kHz (sign of zz kept).
double nqi_khz(const Eigenvalues &e, const Quadrupole &q);

/// EFG pieces at every nucleus of the system for one density (input basis)
/// and one set of induced dipoles.
struct NucleusEfg {
    std::string label;
    Mat3 electronic = Mat3::Zero();
    Mat3 nuclear = Mat3::Zero();
    /// Field gradient of the environment (zero without one).
    Mat3 environment = Mat3::Zero();
};

std::vector<NucleusEfg> molecular_efg(const scf::MolecularSystem &sys,
                                      const Eigen::MatrixXd &density,
                                      const pe::InducedDipoles &mu,
                                      const pe::EnvironmentEfgOptions &opts = {});

/// One analyzed tensor.
struct NqiRecord {
    std::string molecule;
    std::string nucleus;
    std::string method;
    std::string basis;
    Channel channel = Channel::Vacuum;
    Mat3 tensor = Mat3::Zero();
    Eigenvalues eigenvalues;
    double chi_khz = 0.0;
    double eta = 0.0;
};

/// Principal values, chi and eta of \p tensor. eta is 0 when zz vanishes.
NqiRecord analyze(const Mat3 &tensor, const Quadrupole &q);

struct ExperimentalValue {
    double chi_khz = 0.0;
    double chi_error = 0.0;
    double eta = 0.0;
    double eta_error = 0.0;
};

/// system -> element -> value, e.g. table.at("ice_viii").at("O").
using ExperimentalTable = std::map<std::string, std::map<std::string, ExperimentalValue>>;

ExperimentalTable parse_experimental(std::istream &in);
ExperimentalTable load_experimental(const std::filesystem::path &path);

struct CellAverage {
    std::string element;
    Channel channel = Channel::Vacuum;
    /// Taken from the first averaged record.
    std::string method;
    std::string basis;
    std::size_t count = 0;
    double chi_khz = 0.0;
    double eta = 0.0;
    std::vector<std::string> excluded;
    std::optional<ExperimentalValue> reference;
    /// |mean chi| - reference chi (experiments give the magnitude).
    std::optional<double> deviation_khz;
    std::optional<double> deviation_eta;
};

/// Mean chi and eta of the records not listed in \p exclude (by molecule
/// id). Throws ValidationError on an empty selection or on mixed elements or
/// channels.
CellAverage cell_average(const std::vector<NqiRecord> &records,
                         const std::optional<ExperimentalValue> &reference = std::nullopt,
                         const std::vector<std::string> &exclude = {});

/// JSON report: per-molecule records and cell averages with
/// {nucleus, channel, eps_xx/yy/zz, chi_kHz, eta, deviation_kHz}. \p meta is
/// copied under "meta" (config hash, seed, version).
void write_report_json(std::ostream &out, const std::vector<NqiRecord> &records,
                       const std::vector<CellAverage> &averages,
                       const std::map<std::string, std::string> &meta = {});

/// One row per average: basis, nucleus, method, channel, chi, eta and the
/// experimental values when present.
void write_table_csv(std::ostream &out, const std::vector<CellAverage> &averages);

/// Column-chart data: one row per (basis, method, element) with the vacuum,
/// +environment and +direct chi and the experimental value; missing cells
/// are left empty.
void write_decomposition_csv(std::ostream &out, const std::vector<CellAverage> &averages);

} // namespace pevqe::efg
