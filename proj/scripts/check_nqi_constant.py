#!/usr/bin/env python3
# Copyright 2026 The pevqe Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Recompute the EFG x Q -> MHz factor from CODATA and compare with the header."""
import re
import sys
from pathlib import Path

try:
    from scipy import constants as c
    e = c.e
    hartree = c.physical_constants["Hartree energy"][0]
    a0 = c.physical_constants["Bohr radius"][0]
    h = c.h
except ImportError:  # CODATA 2018
    e = 1.602176634e-19
    hartree = 4.3597447222071e-18
    a0 = 5.29177210903e-11
    h = 6.62607015e-34

factor = e * (hartree / (e * a0 * a0)) * 1e-28 / h * 1e-6
header = Path(__file__).resolve().parent.parent / "include" / "pevqe" / "efg.hpp"
coded = float(re.search(r"kMhzPerAuBarn = ([0-9.]+);", header.read_text()).group(1))
print(f"computed {factor:.6f} MHz per a.u. barn, header {coded}")
sys.exit(0 if abs(factor - coded) < 1e-4 else 1)
