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
#include "pevqe/multipole.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pevqe/error.hpp"

namespace pevqe::multipole {

namespace {

constexpr std::size_t pow3(int k) {
    std::size_t n = 1;
    for (int i = 0; i < k; ++i) {
        n *= 3;
    }
    return n;
}

double delta(int a, int b) { return a == b ? 1.0 : 0.0; }

// One component of nabla^k (1/r) for indices already sorted ascending, so
// every permutation of the same multi-index runs identical arithmetic.
double component(int k, const std::array<int, kMaxOrder> &i, const Vec3 &x,
                 double r2, double inv_r) {
    const double inv_r2 = inv_r * inv_r;
    switch (k) {
    case 0:
        return inv_r;
    case 1:
        return -x[i[0]] * inv_r * inv_r2;
    case 2: {
        const double inv_r5 = inv_r * inv_r2 * inv_r2;
        return (3.0 * x[i[0]] * x[i[1]] - r2 * delta(i[0], i[1])) * inv_r5;
    }
    case 3: {
        const double inv_r7 = inv_r * inv_r2 * inv_r2 * inv_r2;
        const double a = x[i[0]], b = x[i[1]], c = x[i[2]];
        const double s = a * delta(i[1], i[2]) + b * delta(i[0], i[2]) +
                         c * delta(i[0], i[1]);
        return -(15.0 * a * b * c - 3.0 * r2 * s) * inv_r7;
    }
    case 4: {
        const double inv_r9 = inv_r * inv_r2 * inv_r2 * inv_r2 * inv_r2;
        const double a = x[i[0]], b = x[i[1]], c = x[i[2]], d = x[i[3]];
        const double two = a * b * delta(i[2], i[3]) +
                           a * c * delta(i[1], i[3]) +
                           a * d * delta(i[1], i[2]) +
                           b * c * delta(i[0], i[3]) +
                           b * d * delta(i[0], i[2]) +
                           c * d * delta(i[0], i[1]);
        const double dd = delta(i[0], i[1]) * delta(i[2], i[3]) +
                          delta(i[0], i[2]) * delta(i[1], i[3]) +
                          delta(i[0], i[3]) * delta(i[1], i[2]);
        return (105.0 * a * b * c * d - 15.0 * r2 * two + 3.0 * r2 * r2 * dd) *
               inv_r9;
    }
    default:
        throw ValidationError("interaction tensor order out of range");
    }
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) {
        f *= i;
    }
    return f;
}

} // namespace

CartesianTensor::CartesianTensor(int order) : order_(order) {
    if (order < 0 || order > kMaxOrder) {
        throw ValidationError("tensor order " + std::to_string(order) +
                              " outside 0.." + std::to_string(kMaxOrder));
    }
    data_.assign(pow3(order), 0.0);
}

std::array<int, kMaxOrder> unflatten(std::size_t flat, int order) {
    std::array<int, kMaxOrder> idx{};
    for (int j = order - 1; j >= 0; --j) {
        idx[j] = static_cast<int>(flat % 3);
        flat /= 3;
    }
    return idx;
}

double CartesianTensor::at(std::span<const int> idx) const {
    std::size_t flat = 0;
    for (int i : idx) {
        flat = flat * 3 + static_cast<std::size_t>(i);
    }
    return data_.at(flat);
}

double &CartesianTensor::at(std::span<const int> idx) {
    std::size_t flat = 0;
    for (int i : idx) {
        flat = flat * 3 + static_cast<std::size_t>(i);
    }
    return data_.at(flat);
}

CartesianTensor CartesianTensor::trace(int i, int j) const {
    if (order_ < 2 || i == j || i < 0 || j < 0 || i >= order_ ||
        j >= order_) {
        throw ValidationError("invalid trace index pair");
    }
    CartesianTensor out(order_ - 2);
    for (std::size_t f = 0; f < data_.size(); ++f) {
        const auto idx = unflatten(f, order_);
        if (idx[i] != idx[j]) {
            continue;
        }
        std::size_t g = 0;
        for (int k = 0; k < order_; ++k) {
            if (k != i && k != j) {
                g = g * 3 + static_cast<std::size_t>(idx[k]);
            }
        }
        out.data_[g] += data_[f];
    }
    return out;
}

Vec3 CartesianTensor::as_vector() const {
    if (order_ != 1) {
        throw ValidationError("as_vector needs an order-1 tensor");
    }
    return {data_[0], data_[1], data_[2]};
}

Mat3 CartesianTensor::as_matrix() const {
    if (order_ != 2) {
        throw ValidationError("as_matrix needs an order-2 tensor");
    }
    Mat3 m;
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            m(a, b) = data_[3 * a + b];
        }
    }
    return m;
}

CartesianTensor &CartesianTensor::operator+=(const CartesianTensor &o) {
    if (o.order_ != order_) {
        throw ValidationError("tensor order mismatch in addition");
    }
    for (std::size_t f = 0; f < data_.size(); ++f) {
        data_[f] += o.data_[f];
    }
    return *this;
}

CartesianTensor &CartesianTensor::operator*=(double s) {
    for (double &v : data_) {
        v *= s;
    }
    return *this;
}

double CartesianTensor::max_abs() const {
    double m = 0.0;
    for (double v : data_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

CartesianTensor operator+(CartesianTensor a, const CartesianTensor &b) {
    a += b;
    return a;
}

CartesianTensor operator*(double s, CartesianTensor a) {
    a *= s;
    return a;
}

CartesianTensor interaction_tensor(int order, const Vec3 &r) {
    if (order < 0 || order > kMaxOrder) {
        throw ValidationError("interaction tensor order " +
                              std::to_string(order) + " not in 0..4");
    }
    const double r2 = r.squaredNorm();
    if (!(r2 > 0.0) || !std::isfinite(r2)) {
        throw SingularityError("interaction tensor at zero separation");
    }
    const double inv_r = 1.0 / std::sqrt(r2);
    CartesianTensor t(order);
    for (std::size_t f = 0; f < t.size(); ++f) {
        auto idx = unflatten(f, order);
        std::sort(idx.begin(), idx.begin() + order);
        t[f] = component(order, idx, r, r2, inv_r);
    }
    return t;
}

CartesianTensor moment(double charge) {
    CartesianTensor t(0);
    t[0] = charge;
    return t;
}

CartesianTensor moment(const Vec3 &dipole) {
    CartesianTensor t(1);
    for (int a = 0; a < 3; ++a) {
        t[a] = dipole[a];
    }
    return t;
}

CartesianTensor moment(const Mat3 &second_moment) {
    CartesianTensor t(2);
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            t[3 * a + b] = second_moment(a, b);
        }
    }
    return t;
}

CartesianTensor contract(const CartesianTensor &tensor,
                         const CartesianTensor &moment) {
    const int m = moment.order();
    const int k = tensor.order() - m;
    if (k < 0) {
        throw ValidationError("moment rank " + std::to_string(m) +
                              " exceeds tensor order " +
                              std::to_string(tensor.order()));
    }
    const double prefactor = (m % 2 == 0 ? 1.0 : -1.0) / factorial(m);
    const std::size_t inner = pow3(m);
    CartesianTensor out(k);
    for (std::size_t outer = 0; outer < out.size(); ++outer) {
        double sum = 0.0;
        for (std::size_t j = 0; j < inner; ++j) {
            sum += moment[j] * tensor[outer * inner + j];
        }
        out[outer] = prefactor * sum;
    }
    return out;
}

bool MultipoleSet::is_zero() const {
    return charge == 0.0 && dipole.isZero(0.0) && quadrupole.isZero(0.0);
}

MultipoleSet MultipoleSet::traceless() const {
    MultipoleSet out = *this;
    out.quadrupole -= (quadrupole.trace() / 3.0) * Mat3::Identity();
    return out;
}

CartesianTensor potential_derivative(const MultipoleSet &m, const Vec3 &r,
                                     int order) {
    CartesianTensor out(order);
    if (m.charge != 0.0) {
        out += contract(interaction_tensor(order, r), moment(m.charge));
    }
    if (!m.dipole.isZero(0.0)) {
        out += contract(interaction_tensor(order + 1, r), moment(m.dipole));
    }
    if (!m.quadrupole.isZero(0.0)) {
        out += contract(interaction_tensor(order + 2, r),
                        moment(m.quadrupole));
    }
    return out;
}

} // namespace pevqe::multipole
