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
#include "pevqe/fermion.hpp"

#include <algorithm>
#include <string>

#include "pevqe/error.hpp"

namespace pevqe::qc {

FermionTerm FermionTerm::adjoint() const {
    FermionTerm out;
    out.coeff = std::conj(coeff);
    out.ops.assign(ops.rbegin(), ops.rend());
    for (auto &op : out.ops) {
        op.dagger = !op.dagger;
    }
    return out;
}

PauliSum jordan_wigner(const FermionTerm &term, int n_modes) {
    if (n_modes < 1 || n_modes > kMaxQubits) {
        throw ValidationError("mode count outside the supported register");
    }
    PauliSum out(n_modes);
    out.add({n_modes, 0, 0, term.coeff});
    for (const auto &op : term.ops) {
        if (op.mode < 0 || op.mode >= n_modes) {
            throw ValidationError("ladder operator index " + std::to_string(op.mode) +
                                  " out of range");
        }
        const std::uint64_t bit = std::uint64_t{1} << op.mode;
        const std::uint64_t low = bit - 1;
        PauliSum ladder(n_modes);
        ladder.add({n_modes, bit, low, 0.5});
        ladder.add({n_modes, bit, low | bit, Complex(0.0, op.dagger ? -0.5 : 0.5)});
        out = out * ladder;
    }
    out.simplify();
    return out;
}

PauliSum jordan_wigner(const std::vector<FermionTerm> &terms, int n_modes) {
    PauliSum out(n_modes);
    for (const auto &t : terms) {
        out += jordan_wigner(t, n_modes);
    }
    out.simplify();
    return out;
}

} // namespace pevqe::qc
