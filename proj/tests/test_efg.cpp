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
#include <cmath>
#include <complex>
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "fixtures.hpp"
#include "pevqe/adapt.hpp"
#include "pevqe/efg.hpp"
#include "pevqe/error.hpp"
#include "pevqe/fermion.hpp"
#include "pevqe/multipole.hpp"
#include "pevqe/scf.hpp"

using namespace pevqe;
using namespace pevqe::efg;
using Eigen::MatrixXd;

namespace {

Mat3 random_traceless(std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    Mat3 m;
    for (int a = 0; a < 3; ++a) {
        for (int b = a; b < 3; ++b) {
            m(a, b) = m(b, a) = g(rng);
        }
    }
    m -= m.trace() / 3.0 * Mat3::Identity();
    return m;
}

Mat3 random_rotation(std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    Mat3 a;
    for (auto &x : a.reshaped()) {
        x = g(rng);
    }
    Mat3 q = Eigen::HouseholderQR<Mat3>(a).householderQ();
    if (q.determinant() < 0) {
        q.col(0) *= -1.0;
    }
    return q;
}

// Real roots of det(t - x) = -x^3 + c2 x^2 - c1 x + c0 by the trigonometric
// formula, in ascending order.
std::array<double, 3> cubic_roots(const Mat3 &t) {
    const double c2 = t.trace();
    const double c1 = t(0, 0) * t(1, 1) + t(0, 0) * t(2, 2) + t(1, 1) * t(2, 2) -
                      t(0, 1) * t(0, 1) - t(0, 2) * t(0, 2) - t(1, 2) * t(1, 2);
    const double c0 = t.determinant();
    // x = y + c2/3 gives y^3 + p y + q = 0.
    const double p = c1 - c2 * c2 / 3.0;
    const double q = -2.0 * c2 * c2 * c2 / 27.0 + c2 * c1 / 3.0 - c0;
    const double r = 2.0 * std::sqrt(-p / 3.0);
    const double phi = std::acos(std::clamp(3.0 * q / (p * r), -1.0, 1.0)) / 3.0;
    std::array<double, 3> x{};
    for (int k = 0; k < 3; ++k) {
        x[static_cast<std::size_t>(k)] = r * std::cos(phi - 2.0 * M_PI * k / 3.0) + c2 / 3.0;
    }
    std::sort(x.begin(), x.end());
    return x;
}

scf::TensorIntegrals random_integrals(int n, std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    scf::TensorIntegrals f;
    for (auto &m : f) {
        m = MatrixXd::Zero(n, n);
        for (int p = 0; p < n; ++p) {
            for (int q = 0; q <= p; ++q) {
                m(p, q) = m(q, p) = g(rng);
            }
        }
    }
    return f;
}

scf::MolecularSystem load_fixture(const std::string &name, bool vacuum) {
    const auto j = fixtures::fixture_manifest(name);
    std::optional<std::filesystem::path> pot;
    if (!vacuum && j.contains("potential") && !j["potential"].is_null()) {
        pot = fixtures::fixture_path(name, j["potential"].get<std::string>());
    }
    return scf::load_system(fixtures::fixture_path(name, "integrals.fcidump"),
                            fixtures::fixture_path(name, "properties.txt"), pot);
}

NqiRecord record(const std::string &molecule, const std::string &nucleus, double chi,
                 double eta, Channel c = Channel::Vacuum) {
    NqiRecord r;
    r.molecule = molecule;
    r.nucleus = nucleus;
    r.chi_khz = chi;
    r.eta = eta;
    r.channel = c;
    return r;
}

} // namespace

TEST(ElectronicEfg, ZeroDensityGivesZero) {
    std::mt19937_64 rng(1);
    const auto f = random_integrals(4, rng);
    EXPECT_TRUE(electronic_efg(MatrixXd::Zero(4, 4), f).isZero(0.0));
}

TEST(ElectronicEfg, HandContraction) {
    scf::TensorIntegrals f;
    for (auto &m : f) {
        m = MatrixXd::Zero(2, 2);
    }
    f[0](0, 0) = 1.0;                   // xx
    f[1](0, 1) = f[1](1, 0) = 0.5;      // xy
    f[5](1, 1) = -2.0;                  // zz
    MatrixXd d(2, 2);
    d << 2.0, 0.3, 0.3, 1.0;
    const Mat3 t = electronic_efg(d, f);
    EXPECT_DOUBLE_EQ(t(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(t(0, 1), 0.3);
    EXPECT_DOUBLE_EQ(t(1, 0), 0.3);
    EXPECT_DOUBLE_EQ(t(2, 2), -2.0);
    EXPECT_DOUBLE_EQ(t(1, 1), 0.0);
    EXPECT_THROW(electronic_efg(MatrixXd::Zero(3, 3), f), ValidationError);
}

TEST(ElectronicEfg, MatchesOperatorExpectationOnStatevector) {
    const auto sys = load_fixture("lih_sto3g", true);
    const int n = sys.n_orbitals();
    std::mt19937_64 rng(17);
    const auto pool = qc::build_pool(n, 2, 2, qc::PoolKind::GeneralizedSinglesDoubles);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::uniform_real_distribution<double> angle(-0.5, 0.5);
    qc::AdaptAnsatz a;
    for (int k = 0; k < 10; ++k) {
        a.operators.push_back(pool[pick(rng)]);
        a.theta.push_back(angle(rng));
    }
    const auto psi = qc::prepare_state(a, 2 * n, sys.integrals.reference_determinant());
    const MatrixXd d = qc::measure_rdms(psi, n).one;

    for (const auto &[label, f] : sys.efg_integrals) {
        const Mat3 t = electronic_efg(d, f);
        for (int x = 0; x < 3; ++x) {
            for (int y = x; y < 3; ++y) {
                const auto &m = f[static_cast<std::size_t>(pe::packed_index(x, y))];
                std::vector<qc::FermionTerm> terms;
                for (int p = 0; p < n; ++p) {
                    for (int q = 0; q < n; ++q) {
                        for (int s = 0; s < 2; ++s) {
                            terms.push_back(qc::FermionTerm{
                                m(p, q), {{2 * p + s, true}, {2 * q + s, false}}});
                        }
                    }
                }
                const auto op =
                    qc::QubitHamiltonian::from_sum(qc::jordan_wigner(terms, 2 * n), 1e-8, 0.0);
                EXPECT_NEAR(op.expectation(psi), t(x, y), 1e-10) << label << x << y;
            }
        }
    }
}

TEST(NuclearEfg, SingleChargeOnAxis) {
    const double d = 1.7;
    const std::vector<scf::Nucleus> nuclei{{"K", 8, Vec3::Zero()}, {"L", 1, Vec3(0, 0, d)}};
    const Mat3 t = nuclear_efg(nuclei, "K");
    EXPECT_NEAR(t(2, 2), -2.0 / (d * d * d), 1e-14);
    EXPECT_NEAR(t(0, 0), 1.0 / (d * d * d), 1e-14);
    EXPECT_NEAR(t(1, 1), 1.0 / (d * d * d), 1e-14);
    EXPECT_NEAR(t(0, 2), 0.0, 1e-15);

    // -Z T2(R_L - R_K) for every other nucleus.
    const auto t2 = multipole::interaction_tensor(2, Vec3(0, 0, d));
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            EXPECT_NEAR(t(a, b), -t2(a, b), 1e-14);
        }
    }
}

TEST(NuclearEfg, GeneralPositionsMatchInteractionTensor) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 2.0);
    std::vector<scf::Nucleus> nuclei;
    for (int k = 0; k < 5; ++k) {
        nuclei.push_back({"X" + std::to_string(k), k + 1, Vec3(g(rng), g(rng), g(rng))});
    }
    const Mat3 t = nuclear_efg(nuclei, "X2");
    Mat3 expected = Mat3::Zero();
    for (const auto &n : nuclei) {
        if (n.label != "X2") {
            const auto t2 = multipole::interaction_tensor(2, n.position - nuclei[2].position);
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) {
                    expected(a, b) -= n.charge * t2(a, b);
                }
            }
        }
    }
    EXPECT_LT((t - expected).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(std::abs(t.trace()), 1e-12);
}

TEST(NuclearEfg, LoneNucleusAndOctahedron) {
    EXPECT_TRUE(nuclear_efg({{"O", 8, Vec3(1, 2, 3)}}, "O").isZero(0.0));
    std::vector<scf::Nucleus> oct{{"C", 6, Vec3::Zero()}};
    for (int a = 0; a < 3; ++a) {
        for (double s : {-1.3, 1.3}) {
            Vec3 r = Vec3::Zero();
            r(a) = s;
            oct.push_back({"H" + std::to_string(oct.size()), 1, r});
        }
    }
    EXPECT_LT(nuclear_efg(oct, "C").cwiseAbs().maxCoeff(), 1e-14);
}

TEST(NuclearEfg, Errors) {
    const std::vector<scf::Nucleus> nuclei{{"A", 1, Vec3::Zero()}, {"B", 1, Vec3::Zero()}};
    EXPECT_THROW(nuclear_efg(nuclei, "A"), SingularityError);
    EXPECT_THROW(nuclear_efg(nuclei, "C"), ValidationError);
}

TEST(TotalEfg, ChannelsAndAdditivity) {
    std::mt19937_64 rng(3);
    const Mat3 el = random_traceless(rng);
    const Mat3 nuc = random_traceless(rng);
    const Mat3 env = random_traceless(rng);
    const Mat3 plus_env = total_efg(el, nuc, std::nullopt, Channel::Environment);
    const Mat3 direct = total_efg(el, nuc, env, Channel::Direct);
    EXPECT_LT((direct - plus_env - env).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(total_efg(el, nuc, Mat3::Zero().eval(), Channel::Direct), plus_env);
    for (const Mat3 &t : {plus_env, direct}) {
        EXPECT_LT(std::abs(t.trace()), 1e-10);
        EXPECT_EQ(t, t.transpose());
    }
    EXPECT_THROW(total_efg(el, nuc, std::nullopt, Channel::Direct), ValidationError);
    EXPECT_THROW(total_efg(el, nuc, env, Channel::Vacuum), ValidationError);
}

TEST(TotalEfg, ChannelNames) {
    EXPECT_EQ(to_string(Channel::Vacuum), "vacuum");
    EXPECT_EQ(to_string(Channel::Environment), "+environment");
    EXPECT_EQ(to_string(Channel::Direct), "+direct");
    for (auto c : {Channel::Vacuum, Channel::Environment, Channel::Direct}) {
        EXPECT_EQ(parse_channel(to_string(c)), c);
    }
    EXPECT_EQ(parse_channel("direct"), Channel::Direct);
    EXPECT_THROW(parse_channel("solvent"), ValidationError);
}

TEST(PrincipalValues, DiagonalExamples) {
    for (const Vec3 &d : {Vec3(-1, -1, 2), Vec3(2, -1, -1), Vec3(-1, 2, -1)}) {
        const auto e = principal_values(d.asDiagonal());
        EXPECT_DOUBLE_EQ(e.xx, -1.0);
        EXPECT_DOUBLE_EQ(e.yy, -1.0);
        EXPECT_DOUBLE_EQ(e.zz, 2.0);
    }
    const auto e = principal_values(Vec3(1, 0, -1).asDiagonal());
    EXPECT_DOUBLE_EQ(std::abs(e.zz), 1.0);
    EXPECT_DOUBLE_EQ(e.xx - e.yy, e.zz);
}

TEST(PrincipalValues, MatchCubicRoots) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        const Mat3 t = random_traceless(rng);
        const auto e = principal_values(t);
        auto mine = std::array<double, 3>{e.xx, e.yy, e.zz};
        std::sort(mine.begin(), mine.end());
        const auto roots = cubic_roots(t);
        for (std::size_t k = 0; k < 3; ++k) {
            EXPECT_NEAR(mine[k], roots[k], 1e-10);
        }
        EXPECT_LE(std::abs(e.xx), std::abs(e.yy) + 1e-15);
        EXPECT_LE(std::abs(e.yy), std::abs(e.zz) + 1e-15);
    }
}

TEST(Asymmetry, Endpoints) {
    EXPECT_DOUBLE_EQ(asymmetry(principal_values(Vec3(-1, -1, 2).asDiagonal())), 0.0);
    EXPECT_DOUBLE_EQ(asymmetry(principal_values(Vec3(0, -1, 1).asDiagonal())), 1.0);
    EXPECT_THROW(asymmetry(Eigenvalues{0.0, 0.0, 0.0}), ValidationError);
}

TEST(Asymmetry, InUnitIntervalForRandomTensors) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto e = principal_values(random_traceless(rng));
        const double eta = asymmetry(e);
        EXPECT_DOUBLE_EQ(eta, (e.xx - e.yy) / e.zz);
        EXPECT_GE(eta, 0.0);
        EXPECT_LE(eta, 1.0 + 1e-12);
    }
}

TEST(Nqi, ConversionConstantFromCodata) {
    // CODATA 2018: e, E_h, a0, h.
    const double e = 1.602176634e-19;
    const double hartree = 4.3597447222071e-18;
    const double a0 = 5.29177210903e-11;
    const double h = 6.62607015e-34;
    const double mhz = e * (hartree / (e * a0 * a0)) * 1e-28 / h * 1e-6;
    EXPECT_NEAR(kMhzPerAuBarn, mhz, 1e-4);
}

TEST(Nqi, MomentsAndValues) {
    EXPECT_DOUBLE_EQ(quadrupole_moment("2H").barn, 0.0028578);
    EXPECT_DOUBLE_EQ(quadrupole_moment("D").barn, 0.0028578);
    EXPECT_DOUBLE_EQ(quadrupole_moment("17O").barn, 0.0256);
    EXPECT_THROW(quadrupole_moment("14N"), ValidationError);
    EXPECT_EQ(default_isotope("H"), "2H");
    EXPECT_EQ(default_isotope("O"), "17O");
    EXPECT_EQ(element_of("H12"), "H");
    EXPECT_EQ(element_of("O"), "O");

    const auto o17 = quadrupole_moment("17O");
    EXPECT_DOUBLE_EQ(nqi_khz(Eigenvalues{0.1, -0.1, 0.0}, o17), 0.0);
    // 7140 kHz for 17O corresponds to eps_zz of about 1.187 a.u.
    const double eps = 7140.0 / (kMhzPerAuBarn * 1e3 * o17.barn);
    EXPECT_NEAR(eps, 1.187, 1e-3);
    EXPECT_NEAR(nqi_khz(Eigenvalues{0, 0, eps}, o17), 7140.0, 1e-9);
    EXPECT_LT(nqi_khz(Eigenvalues{0, 0, -eps}, o17), 0.0);
}

TEST(Nqi, AnalyzeZeroTensor) {
    const auto r = analyze(Mat3::Zero(), quadrupole_moment("2H"));
    EXPECT_EQ(r.chi_khz, 0.0);
    EXPECT_EQ(r.eta, 0.0);
}

TEST(CellAverage, MeanAndDeviation) {
    const auto avg = cell_average({record("m1", "H1", 200.0, 0.1), record("m2", "H2", 240.0, 0.2)},
                                  ExperimentalValue{220.0, 3.0, 0.12, 0.03});
    EXPECT_EQ(avg.count, 2u);
    EXPECT_EQ(avg.element, "H");
    EXPECT_DOUBLE_EQ(avg.chi_khz, 220.0);
    EXPECT_DOUBLE_EQ(avg.eta, 0.15000000000000002);
    ASSERT_TRUE(avg.deviation_khz);
    EXPECT_DOUBLE_EQ(*avg.deviation_khz, 0.0);
    EXPECT_NEAR(*avg.deviation_eta, 0.03, 1e-15);
}

TEST(CellAverage, IdenticalInputsAndMagnitudeDeviation) {
    std::vector<NqiRecord> rs;
    for (int k = 0; k < 8; ++k) {
        rs.push_back(record("m" + std::to_string(k), "H1", -230.0, 0.11));
    }
    const auto avg = cell_average(rs, ExperimentalValue{236.2, 0.3, 0.102, 0.005});
    EXPECT_DOUBLE_EQ(avg.chi_khz, -230.0);
    EXPECT_DOUBLE_EQ(avg.eta, 0.11);
    EXPECT_NEAR(*avg.deviation_khz, 230.0 - 236.2, 1e-12);
}

TEST(CellAverage, ExclusionsAndErrors) {
    const std::vector<NqiRecord> rs{record("m1", "O", 7000.0, 0.9), record("m2", "O", 9000.0, 0.5),
                                    record("m3", "O", 7200.0, 0.95)};
    const auto avg = cell_average(rs, std::nullopt, {"m2"});
    EXPECT_EQ(avg.count, 2u);
    EXPECT_DOUBLE_EQ(avg.chi_khz, 7100.0);
    ASSERT_EQ(avg.excluded.size(), 1u);
    EXPECT_EQ(avg.excluded[0], "m2");
    EXPECT_FALSE(avg.deviation_khz);

    EXPECT_THROW(cell_average({}), ValidationError);
    EXPECT_THROW(cell_average(rs, std::nullopt, {"m1", "m2", "m3"}), ValidationError);
    EXPECT_THROW(cell_average({record("m1", "O", 1, 0), record("m1", "H1", 1, 0)}),
                 ValidationError);
    EXPECT_THROW(cell_average({record("m1", "O", 1, 0),
                               record("m2", "O", 1, 0, Channel::Direct)}),
                 ValidationError);
}

TEST(Experimental, BundledReferenceValues) {
    const auto t = load_experimental(std::filesystem::path(PEVQE_DATA_DIR) / "reference" /
                                     "experimental.json");
    EXPECT_DOUBLE_EQ(t.at("ice_viii").at("O").chi_khz, 7140.0);
    EXPECT_DOUBLE_EQ(t.at("ice_viii").at("O").chi_error, 100.0);
    EXPECT_DOUBLE_EQ(t.at("ice_viii").at("H").chi_khz, 236.2);
    EXPECT_DOUBLE_EQ(t.at("ice_viii").at("H").chi_error, 0.3);
    EXPECT_DOUBLE_EQ(t.at("ice_ix").at("O").chi_khz, 6766.0);
    EXPECT_DOUBLE_EQ(t.at("ice_ix").at("O").chi_error, 10.0);
    EXPECT_DOUBLE_EQ(t.at("ice_ix").at("H").chi_khz, 220.0);
    EXPECT_DOUBLE_EQ(t.at("ice_ix").at("H").chi_error, 3.0);
    EXPECT_DOUBLE_EQ(t.at("ice_viii").at("O").eta, 0.97);
    EXPECT_DOUBLE_EQ(t.at("ice_viii").at("H").eta, 0.102);
    EXPECT_DOUBLE_EQ(t.at("ice_ix").at("O").eta, 0.896);
    EXPECT_DOUBLE_EQ(t.at("ice_ix").at("H").eta, 0.12);

    const auto avg = cell_average({record("m1", "O", 7000.0, 0.9)}, t.at("ice_viii").at("O"));
    EXPECT_DOUBLE_EQ(avg.reference->chi_khz, 7140.0);
    EXPECT_DOUBLE_EQ(*avg.deviation_khz, -140.0);
}

TEST(Experimental, ParseErrors) {
    std::istringstream bad("{\"systems\": {\"x\": {\"O\": {\"chi_khz\": 1}}}}");
    EXPECT_THROW(parse_experimental(bad), ParseError);
    std::istringstream broken("{");
    EXPECT_THROW(parse_experimental(broken), ParseError);
    EXPECT_THROW(load_experimental("/nonexistent/ref.json"), IoError);
}

TEST(MolecularEfg, RotationalCovariance) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g;
    const int n = 3;
    const auto f = random_integrals(n, rng);
    MatrixXd d = MatrixXd::Random(n, n);
    d = (d + d.transpose()).eval();
    std::vector<scf::Nucleus> nuclei{{"O", 8, Vec3(0.1, 0.0, 0.2)},
                                     {"H1", 1, Vec3(1.5, 0.3, -0.9)},
                                     {"H2", 1, Vec3(-1.4, 0.2, -1.0)}};
    pe::EnvironmentModel env;
    for (int k = 0; k < 4; ++k) {
        pe::PolarizableSite s;
        s.label = "S" + std::to_string(k);
        s.position = Vec3(g(rng), g(rng), g(rng)) * 3.0 + Vec3(6, 0, 0);
        s.multipoles.charge = g(rng);
        s.multipoles.dipole = Vec3(g(rng), g(rng), g(rng)) * 0.2;
        s.multipoles.quadrupole = random_traceless(rng) * 0.1;
        s.multipoles.max_order = 2;
        env.sites.push_back(s);
    }
    pe::InducedDipoles mu;
    for (int k = 0; k < 4; ++k) {
        mu.dipoles.push_back(Vec3(g(rng), g(rng), g(rng)) * 0.05);
    }

    const Mat3 r = random_rotation(rng);
    auto total = [&](const std::vector<scf::Nucleus> &nu, const pe::EnvironmentModel &e,
                     const pe::InducedDipoles &m, const scf::TensorIntegrals &ff) {
        return electronic_efg(d, ff) + nuclear_efg(nu, "O") +
               pe::environment_efg(e, m, nu[0].position);
    };
    const Mat3 t = total(nuclei, env, mu, f);

    // Rotated frame: positions r x, dipoles r mu, second-rank objects r M r^T.
    auto nuclei_r = nuclei;
    for (auto &x : nuclei_r) {
        x.position = r * x.position;
    }
    auto env_r = env;
    for (auto &s : env_r.sites) {
        s.position = r * s.position;
        s.multipoles.dipole = r * s.multipoles.dipole;
        s.multipoles.quadrupole = r * s.multipoles.quadrupole * r.transpose();
    }
    auto mu_r = mu;
    for (auto &v : mu_r.dipoles) {
        v = r * v;
    }
    scf::TensorIntegrals f_r;
    for (int a = 0; a < 3; ++a) {
        for (int b = a; b < 3; ++b) {
            MatrixXd m = MatrixXd::Zero(n, n);
            for (int c = 0; c < 3; ++c) {
                for (int e = 0; e < 3; ++e) {
                    m += r(a, c) * r(b, e) *
                         f[static_cast<std::size_t>(pe::packed_index(c, e))];
                }
            }
            f_r[static_cast<std::size_t>(pe::packed_index(a, b))] = m;
        }
    }
    const Mat3 t_r = total(nuclei_r, env_r, mu_r, f_r);
    EXPECT_LT((t_r - r * t * r.transpose()).cwiseAbs().maxCoeff(), 1e-10);

    const auto q = quadrupole_moment("17O");
    const auto a = analyze(t, q);
    const auto b = analyze(t_r, q);
    EXPECT_NEAR(a.eigenvalues.xx, b.eigenvalues.xx, 1e-9);
    EXPECT_NEAR(a.eigenvalues.yy, b.eigenvalues.yy, 1e-9);
    EXPECT_NEAR(a.eigenvalues.zz, b.eigenvalues.zz, 1e-9);
    EXPECT_NEAR(a.chi_khz, b.chi_khz, 1e-9 * std::abs(a.chi_khz));
    EXPECT_NEAR(a.eta, b.eta, 1e-9);
}

TEST(MolecularEfg, EnvironmentPartMatchesEnvironmentEfg) {
    const auto sys = load_fixture("h2o_631g", false);
    ASSERT_FALSE(sys.environment.empty());
    const MatrixXd d = MatrixXd::Identity(sys.n_orbitals(), sys.n_orbitals());
    const auto parts = molecular_efg(sys, d, {});
    ASSERT_EQ(parts.size(), 3u);
    pe::InducedDipoles zero;
    zero.dipoles.assign(sys.environment.size(), Vec3::Zero());
    for (const auto &p : parts) {
        const auto &nuc = sys.nuclei.at(static_cast<std::size_t>(&p - parts.data()));
        EXPECT_EQ(p.label, nuc.label);
        EXPECT_EQ(p.environment, pe::environment_efg(sys.environment, zero, nuc.position));
        EXPECT_EQ(p.nuclear, nuclear_efg(sys.nuclei, p.label));
        const Mat3 direct = total_efg(p.electronic, p.nuclear, p.environment, Channel::Direct);
        const Mat3 plus_env = total_efg(p.electronic, p.nuclear, std::nullopt, Channel::Environment);
        EXPECT_LT((direct - plus_env - p.environment).cwiseAbs().maxCoeff(), 1e-15);
    }
}

class VacuumCasscfEfg : public ::testing::TestWithParam<std::string> {};

TEST_P(VacuumCasscfEfg, MatchesReference) {
    const std::string name = GetParam();
    const auto sys = load_fixture(name, true);
    const auto j = fixtures::fixture_manifest(name);
    const auto part = scf::OrbitalPartition::from_counts(
        sys.n_orbitals(), sys.n_electrons(), j["n_inactive"].get<int>(), j["n_active"].get<int>());
    scf::ScfOptions opts;
    opts.energy_tolerance = 1e-10;
    opts.gradient_tolerance = 2e-6;
    opts.max_macro_iterations = 200;
    const auto st = scf::classical_casscf_oracle(sys, part, opts);
    ASSERT_TRUE(st.converged) << st.message;
    const auto parts = molecular_efg(sys, st.density, {});
    const auto &ref = j["reference"]["vacuum_casscf_efg"];
    for (const auto &p : parts) {
        const Mat3 t = total_efg(p.electronic, p.nuclear, std::nullopt, Channel::Vacuum);
        EXPECT_LT(std::abs(t.trace()), 1e-10) << p.label;
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                EXPECT_NEAR(t(a, b), ref[p.label][a][b].get<double>(), 1e-5)
                    << name << ' ' << p.label << ' ' << a << b;
            }
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Fixtures, VacuumCasscfEfg,
                         ::testing::Values("h2_sto3g", "h2_631g", "lih_sto3g", "h2o_631g"));

TEST(Reports, JsonAndCsvLayouts) {
    auto r1 = record("m1", "O", 7000.0, 0.9);
    r1.method = "simulator";
    r1.basis = "6-31G";
    r1.eigenvalues = {-0.1, -1.0, 1.1};
    auto r2 = r1;
    r2.molecule = "m2";
    r2.chi_khz = 7200.0;
    const auto vac = cell_average({r1, r2}, ExperimentalValue{7140.0, 100.0, 0.97, 0.03});
    r1.channel = r2.channel = Channel::Direct;
    const auto dir = cell_average({r1, r2});

    std::ostringstream js;
    write_report_json(js, {r1}, {vac, dir}, {{"seed", "7"}});
    const auto j = nlohmann::json::parse(js.str());
    EXPECT_EQ(j["meta"]["seed"], "7");
    EXPECT_EQ(j["records"][0]["nucleus"], "O");
    EXPECT_EQ(j["records"][0]["channel"], "+direct");
    EXPECT_DOUBLE_EQ(j["records"][0]["eps_zz"].get<double>(), 1.1);
    EXPECT_DOUBLE_EQ(j["averages"][0]["chi_kHz"].get<double>(), 7100.0);
    EXPECT_DOUBLE_EQ(j["averages"][0]["deviation_kHz"].get<double>(), -40.0);
    EXPECT_TRUE(j["averages"][1]["deviation_kHz"].is_null());

    std::ostringstream table;
    write_table_csv(table, {vac});
    EXPECT_EQ(table.str(),
              "basis,nucleus,method,channel,count,chi_kHz,eta,exp_chi_kHz,exp_eta,deviation_kHz\n"
              "6-31G,O,simulator,vacuum,2,7100,0.9,7140,0.97,-40\n");

    std::ostringstream fig;
    write_decomposition_csv(fig, {vac, dir});
    EXPECT_EQ(fig.str(),
              "basis,method,nucleus,vacuum_kHz,pe_kHz,pe_direct_kHz,experiment_kHz\n"
              "6-31G,simulator,O,7100,,7100,7140\n");
}
