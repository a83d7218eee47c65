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
#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "pevqe/error.hpp"
#include "pevqe/multipole.hpp"

using namespace pevqe;
using namespace pevqe::multipole;

namespace {

Vec3 random_point(std::mt19937_64 &rng, double rmin, double rmax) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(rmin, rmax);
    Vec3 v(n(rng), n(rng), n(rng));
    return u(rng) * v.normalized();
}

// d/dr_a of T^(k-1), central differences, assembled as an order-k tensor
// with the derivative index last.
CartesianTensor fd_tensor(int k, const Vec3 &r, double h) {
    CartesianTensor out(k);
    for (int a = 0; a < 3; ++a) {
        Vec3 dr = Vec3::Zero();
        dr[a] = h;
        const auto plus = interaction_tensor(k - 1, r + dr);
        const auto minus = interaction_tensor(k - 1, r - dr);
        for (std::size_t f = 0; f < plus.size(); ++f) {
            out[f * 3 + a] = (plus[f] - minus[f]) / (2 * h);
        }
    }
    return out;
}

} // namespace

TEST(InteractionTensor, LowOrderExamples) {
    EXPECT_DOUBLE_EQ(interaction_tensor(0, Vec3(0, 0, 1))(), 1.0);

    const auto t1 = interaction_tensor(1, Vec3(0, 0, 2)).as_vector();
    EXPECT_DOUBLE_EQ(t1.x(), 0.0);
    EXPECT_DOUBLE_EQ(t1.y(), 0.0);
    EXPECT_DOUBLE_EQ(t1.z(), -0.25);

    const Mat3 t2 = interaction_tensor(2, Vec3(0, 0, 1)).as_matrix();
    Mat3 expected = Vec3(-1, -1, 2).asDiagonal();
    EXPECT_TRUE(t2.isApprox(expected, 1e-15)) << t2;
}

TEST(InteractionTensor, SecondOrderMatchesFiniteDifferenceOfGradient) {
    const Vec3 r(0, 0, 1);
    const auto fd = fd_tensor(2, r, 1e-5);
    const auto t2 = interaction_tensor(2, r);
    for (std::size_t f = 0; f < t2.size(); ++f) {
        EXPECT_NEAR(fd[f], t2[f], 1e-8);
    }
}

TEST(InteractionTensor, AgreesWithFiniteDifferencesOfLowerOrder) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const Vec3 r = random_point(rng, 0.5, 8.0);
        for (int k = 1; k <= 4; ++k) {
            const auto exact = interaction_tensor(k, r);
            const auto fd = fd_tensor(k, r, 1e-5 * r.norm());
            double diff = 0.0;
            for (std::size_t f = 0; f < exact.size(); ++f) {
                diff = std::max(diff, std::abs(exact[f] - fd[f]));
            }
            EXPECT_LE(diff, 1e-6 * exact.max_abs()) << "k=" << k;
        }
    }
}

TEST(InteractionTensor, PermutationsAreBitIdentical) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Vec3 r = random_point(rng, 0.5, 5.0);
        for (int k = 2; k <= 4; ++k) {
            const auto t = interaction_tensor(k, r);
            for (std::size_t f = 0; f < t.size(); ++f) {
                auto idx = unflatten(f, k);
                std::array<int, kMaxOrder> perm = idx;
                std::sort(perm.begin(), perm.begin() + k);
                do {
                    std::span<const int> s(perm.data(), k);
                    EXPECT_EQ(t.at(s), t[f]);
                } while (std::next_permutation(perm.begin(), perm.begin() + k));
            }
        }
    }
}

TEST(InteractionTensor, TraceFreeAwayFromOrigin) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const Vec3 r = random_point(rng, 1.0, 10.0);
        for (int k = 2; k <= 4; ++k) {
            const auto t = interaction_tensor(k, r);
            for (int i = 0; i < k; ++i) {
                for (int j = i + 1; j < k; ++j) {
                    EXPECT_LE(t.trace(i, j).max_abs(), 1e-12);
                }
            }
        }
    }
}

TEST(InteractionTensor, Parity) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Vec3 r = random_point(rng, 0.5, 5.0);
        for (int k = 0; k <= 4; ++k) {
            const auto a = interaction_tensor(k, r);
            const auto b = interaction_tensor(k, -r);
            const double sign = k % 2 == 0 ? 1.0 : -1.0;
            for (std::size_t f = 0; f < a.size(); ++f) {
                EXPECT_EQ(b[f], sign * a[f]);
            }
        }
    }
}

TEST(InteractionTensor, RejectsSingularAndHighOrder) {
    EXPECT_THROW(interaction_tensor(2, Vec3::Zero()), SingularityError);
    EXPECT_THROW(interaction_tensor(5, Vec3(1, 0, 0)), ValidationError);
    EXPECT_THROW(interaction_tensor(-1, Vec3(1, 0, 0)), ValidationError);
}

TEST(Contract, DipoleOnAxis) {
    const auto t2 = interaction_tensor(2, Vec3(0, 0, 1));
    const Vec3 v = contract(t2, moment(Vec3(0, 0, 1))).as_vector();
    // (-1)^1/1! * T^(2) mu = -(0, 0, 2)
    EXPECT_DOUBLE_EQ(v.x(), 0.0);
    EXPECT_DOUBLE_EQ(v.y(), 0.0);
    EXPECT_DOUBLE_EQ(v.z(), -2.0);
}

TEST(Contract, ZeroMomentGivesZero) {
    const auto t4 = interaction_tensor(4, Vec3(0.3, -1.2, 0.8));
    EXPECT_EQ(contract(t4, moment(Mat3::Zero().eval())).max_abs(), 0.0);
    EXPECT_EQ(contract(t4, moment(Vec3::Zero().eval())).max_abs(), 0.0);
    EXPECT_EQ(contract(t4, moment(0.0)).max_abs(), 0.0);
}

TEST(Contract, UnitChargeIsIdentity) {
    const auto t3 = interaction_tensor(3, Vec3(0.3, -1.2, 0.8));
    const auto c = contract(t3, moment(1.0));
    ASSERT_EQ(c.order(), 3);
    for (std::size_t f = 0; f < t3.size(); ++f) {
        EXPECT_EQ(c[f], t3[f]);
    }
}

TEST(Contract, QuadrupoleUsesMultiIndexFactorials) {
    // Multi-index sum: xx/2! + xy/(1!1!) + ... equals half the full
    // Cartesian double sum.
    const Vec3 r(0.4, 1.1, -0.7);
    const auto t2 = interaction_tensor(2, r);
    Mat3 m;
    m << 1.0, 0.2, -0.3, 0.2, -0.5, 0.7, -0.3, 0.7, 0.9;
    const double multi = m(0, 0) * t2(0, 0) / 2 + m(1, 1) * t2(1, 1) / 2 +
                         m(2, 2) * t2(2, 2) / 2 + m(0, 1) * t2(0, 1) +
                         m(0, 2) * t2(0, 2) + m(1, 2) * t2(1, 2);
    EXPECT_NEAR(contract(t2, moment(m))(), multi, 1e-14);
}

TEST(Contract, RankMismatchThrows) {
    const auto t1 = interaction_tensor(1, Vec3(1, 0, 0));
    EXPECT_THROW(contract(t1, moment(Mat3::Identity().eval())),
                 ValidationError);
}

TEST(PotentialDerivative, GradientMatchesFiniteDifferenceOfPotential) {
    MultipoleSet m;
    m.charge = -0.67;
    m.dipole = Vec3(0.1, -0.2, 0.3);
    m.quadrupole << 0.5, 0.1, 0.0, 0.1, -0.2, 0.05, 0.0, 0.05, 0.3;
    const Vec3 r(1.3, -0.4, 2.1);
    const double h = 1e-5;
    const Vec3 grad = potential_derivative(m, r, 1).as_vector();
    const Mat3 hess = potential_derivative(m, r, 2).as_matrix();
    for (int a = 0; a < 3; ++a) {
        Vec3 d = Vec3::Zero();
        d[a] = h;
        const double fd = (potential_derivative(m, r + d, 0)() -
                           potential_derivative(m, r - d, 0)()) /
                          (2 * h);
        EXPECT_NEAR(grad[a], fd, 1e-8);
        const Vec3 fdv = (potential_derivative(m, r + d, 1).as_vector() -
                          potential_derivative(m, r - d, 1).as_vector()) /
                         (2 * h);
        for (int b = 0; b < 3; ++b) {
            EXPECT_NEAR(hess(b, a), fdv[b], 1e-8);
        }
    }
}
