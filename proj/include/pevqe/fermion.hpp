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

#include <vector>

#include "pevqe/pauli.hpp"

namespace pevqe::qc {

struct LadderOp {
    int mode = 0;
    bool dagger = false;
};

/// coeff times the product of ladder operators, leftmost applied last.
struct FermionTerm {
    Complex coeff = 1.0;
    std::vector<LadderOp> ops;

    FermionTerm adjoint() const;
};

/// Jordan-Wigner image with mode j on qubit j and |1> meaning occupied:
/// a_j^dagger = Z_0 ... Z_{j-1} (X_j - i Y_j) / 2.
PauliSum jordan_wigner(const FermionTerm &term, int n_modes);
PauliSum jordan_wigner(const std::vector<FermionTerm> &terms, int n_modes);

} // namespace pevqe::qc
