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
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace pevqe {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

namespace multipole {

/// Highest tensor order supported. Quadrupole field gradients need T^(4).
inline constexpr int kMaxOrder = 4;

/// Fully symmetric Cartesian tensor of order k stored densely as 3^k
/// components, index (i1, ..., ik) at flat position sum_j i_j 3^(k-1-j).
class CartesianTensor {
  public:
    CartesianTensor() = default;
    explicit CartesianTensor(int order);

    int order() const { return order_; }
    std::size_t size() const { return data_.size(); }

    double &operator[](std::size_t flat) { return data_[flat]; }
    double operator[](std::size_t flat) const { return data_[flat]; }

    double at(std::span<const int> idx) const;
    double &at(std::span<const int> idx);

    /// Convenience accessors for low orders.
    double operator()() const { return data_.at(0); }
    double operator()(int a) const { return data_.at(a); }
    double operator()(int a, int b) const { return data_.at(3 * a + b); }
    double operator()(int a, int b, int c) const {
        return data_.at(9 * a + 3 * b + c);
    }

    std::span<const double> components() const { return data_; }

    /// Contract an index pair (i, j) with the identity; result has order k-2.
    CartesianTensor trace(int i, int j) const;

    Vec3 as_vector() const;
    Mat3 as_matrix() const;

    CartesianTensor &operator+=(const CartesianTensor &o);
    CartesianTensor &operator*=(double s);
    double max_abs() const;

  private:
    int order_ = 0;
    std::vector<double> data_{0.0};
};

CartesianTensor operator+(CartesianTensor a, const CartesianTensor &b);
CartesianTensor operator*(double s, CartesianTensor a);

/// Decompose a flat index of an order-k tensor into its k Cartesian indices.
std::array<int, kMaxOrder> unflatten(std::size_t flat, int order);

/// nabla^k (1/|r|) at r. Throws SingularityError for |r| == 0 and
/// ValidationError for k outside 0..4.
CartesianTensor interaction_tensor(int order, const Vec3 &r);

/// Moments packaged as symmetric tensors: rank 0 charge, rank 1 dipole,
/// rank 2 Cartesian second moment.
CartesianTensor moment(double charge);
CartesianTensor moment(const Vec3 &dipole);
CartesianTensor moment(const Mat3 &second_moment);

/// Contract the trailing indices of \p tensor with a rank-m moment using the
/// Taylor prefactor (-1)^m / m!. Summing over all 3^m index tuples with 1/m!
/// is the same as summing over distinct multi-indices with 1/(kx! ky! kz!).
/// Throws ValidationError when the moment rank exceeds the tensor order.
CartesianTensor contract(const CartesianTensor &tensor,
                         const CartesianTensor &moment);

/// Site multipoles. The quadrupole is the raw Cartesian second moment; see
/// README for how it enters the electrostatic operator.
struct MultipoleSet {
    double charge = 0.0;
    Vec3 dipole = Vec3::Zero();
    Mat3 quadrupole = Mat3::Zero();
    /// Highest order present in the source data (-1 when none).
    int max_order = -1;

    bool is_zero() const;
    /// Copy with the quadrupole's trace removed.
    MultipoleSet traceless() const;
};

/// Electrostatic potential derivatives of a multipole set, at displacement
/// r = probe - site. Order 0 is the potential, order 1 its gradient, etc.
/// The result is sum_m (-1)^m/m! M^(m) . T^(m+order)(r).
CartesianTensor potential_derivative(const MultipoleSet &m, const Vec3 &r,
                                     int order);

} // namespace multipole
} // namespace pevqe
