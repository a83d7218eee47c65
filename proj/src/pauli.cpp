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
#include "pevqe/pauli.hpp"

#include <bit>

#include "pevqe/error.hpp"

namespace pevqe::qc {

namespace {

Complex i_power(int k) {
    switch (((k % 4) + 4) % 4) {
    case 0:
        return {1.0, 0.0};
    case 1:
        return {0.0, 1.0};
    case 2:
        return {-1.0, 0.0};
    default:
        return {0.0, -1.0};
    }
}

} // namespace

PauliString PauliString::parse(const std::string &letters, Complex coeff) {
    if (letters.size() > static_cast<std::size_t>(kMaxQubits)) {
        throw ValidationError("Pauli string longer than the supported register");
    }
    PauliString p;
    p.n = static_cast<int>(letters.size());
    p.coeff = coeff;
    for (int q = 0; q < p.n; ++q) {
        const std::uint64_t bit = std::uint64_t{1} << q;
        switch (letters[static_cast<std::size_t>(q)]) {
        case 'I':
            break;
        case 'X':
            p.x |= bit;
            break;
        case 'Y':
            p.x |= bit;
            p.z |= bit;
            break;
        case 'Z':
            p.z |= bit;
            break;
        default:
            throw ValidationError("invalid Pauli letter in '" + letters + "'");
        }
    }
    return p;
}

char PauliString::letter(int q) const {
    const bool bx = (x >> q) & 1U;
    const bool bz = (z >> q) & 1U;
    return bx ? (bz ? 'Y' : 'X') : (bz ? 'Z' : 'I');
}

std::string PauliString::letters() const {
    std::string s;
    for (int q = 0; q < n; ++q) {
        s += letter(q);
    }
    return s;
}

int PauliString::weight() const { return std::popcount(x | z); }

int PauliString::y_count() const { return std::popcount(x & z); }

PauliString operator*(const PauliString &a, const PauliString &b) {
    if (a.n != b.n) {
        throw ValidationError("Pauli strings act on different registers");
    }
    // Letters are i^{nY} X^x Z^z; moving Z^{z_a} past X^{x_b} gives the sign.
    PauliString c;
    c.n = a.n;
    c.x = a.x ^ b.x;
    c.z = a.z ^ b.z;
    const int k = a.y_count() + b.y_count() - c.y_count() +
                  2 * std::popcount(a.z & b.x);
    c.coeff = a.coeff * b.coeff * i_power(k);
    return c;
}

bool commutes(const PauliString &a, const PauliString &b) {
    return std::popcount((a.x & b.z) ^ (a.z & b.x)) % 2 == 0;
}

void PauliSum::add(const PauliString &p) {
    if (terms_.empty() && n_ == 0) {
        n_ = p.n;
    }
    if (p.n != n_) {
        throw ValidationError("Pauli string and sum act on different registers");
    }
    terms_[{p.x, p.z}] += p.coeff;
}

PauliSum &PauliSum::operator+=(const PauliSum &other) {
    for (const auto &p : other.strings()) {
        add(p);
    }
    return *this;
}

PauliSum &PauliSum::operator*=(Complex c) {
    for (auto &[key, v] : terms_) {
        v *= c;
    }
    return *this;
}

PauliSum operator*(const PauliSum &a, const PauliSum &b) {
    PauliSum out(a.n_);
    for (const auto &pa : a.strings()) {
        for (const auto &pb : b.strings()) {
            out.add(pa * pb);
        }
    }
    return out;
}

PauliSum PauliSum::adjoint() const {
    PauliSum out(n_);
    for (const auto &[key, v] : terms_) {
        out.terms_[key] = std::conj(v);
    }
    return out;
}

void PauliSum::simplify(double tol) {
    for (auto it = terms_.begin(); it != terms_.end();) {
        it = std::abs(it->second) <= tol ? terms_.erase(it) : std::next(it);
    }
}

std::vector<PauliString> PauliSum::strings() const {
    std::vector<PauliString> out;
    out.reserve(terms_.size());
    for (const auto &[key, v] : terms_) {
        out.push_back({n_, key.first, key.second, v});
    }
    return out;
}

Complex PauliSum::coefficient(const PauliString &p) const {
    const auto it = terms_.find({p.x, p.z});
    return it == terms_.end() ? Complex{} : it->second;
}

} // namespace pevqe::qc
