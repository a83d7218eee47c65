#!/usr/bin/env python3
# Copyright 2026 The pevqe Authors
# Licensed under the Apache License, Version 2.0 (see LICENSE).
"""Writes idealized ice VIII and ice IX unit cells in the pevqe cell format.

Oxygen positions come from the crystallographic sites; hydrogens are placed
0.97 A from each oxygen toward two of its hydrogen-bond partners, chosen
greedily so that no bond carries two protons. The geometries are not
relaxed; they are meant for exercising the lattice tooling.
"""
import itertools
import sys

import numpy as np

OH = 0.97

PARAMETERS = """PARAMETERS
O -0.67 5.0
H 0.335 2.0
"""


def ice_viii_oxygens():
    # bcc oxygen sublattice expressed in the tetragonal cell spanned by
    # (1,1,0), (-1,1,0), (0,0,2) of the cubic bcc cell
    a, c = 4.656, 6.775
    lat = np.diag([a, a, c])
    inv = np.linalg.inv(np.array([[1, -1, 0], [1, 1, 0], [0, 0, 2]], dtype=float))
    frac = []
    for p in itertools.product(np.arange(-2, 2.5, 0.5), repeat=3):
        p = np.array(p)
        if not (np.allclose(p, np.round(p)) or np.allclose(p - 0.5, np.round(p - 0.5))):
            continue
        f = inv @ p
        if np.all(f >= -1e-9) and np.all(f < 1 - 1e-9):
            frac.append(np.abs(f))
    return lat, np.array(frac)


def ice_ix_oxygens():
    a, c = 6.692, 6.715
    lat = np.diag([a, a, c])
    ops = [
        lambda x, y, z: (x, y, z),
        lambda x, y, z: (-x, -y, z + 0.5),
        lambda x, y, z: (-y + 0.5, x + 0.5, z + 0.25),
        lambda x, y, z: (y + 0.5, -x + 0.5, z + 0.75),
        lambda x, y, z: (-x + 0.5, y + 0.5, -z + 0.25),
        lambda x, y, z: (x + 0.5, -y + 0.5, -z + 0.75),
        lambda x, y, z: (y, x, -z),
        lambda x, y, z: (-y, -x, -z + 0.5),
    ]
    frac = []
    for site in [(0.3976, 0.3976, 0.0), (0.1174, 0.2989, 0.2752)]:
        for op in ops:
            f = np.mod(np.array(op(*site)), 1.0)
            if not any(np.allclose(np.mod(f - g + 0.5, 1.0) - 0.5, 0, atol=1e-6) for g in frac):
                frac.append(f)
    return lat, np.array(frac)


def neighbours(lat, frac, i, count):
    out = []
    for j in range(len(frac)):
        for shift in itertools.product((-1, 0, 1), repeat=3):
            if j == i and shift == (0, 0, 0):
                continue
            d = lat @ (frac[j] + np.array(shift) - frac[i])
            out.append((np.linalg.norm(d), j, d))
    out.sort(key=lambda t: t[0])
    return out[:count]


def protonate(lat, frac, coordination):
    # Depth-first search for two donor bonds per oxygen, bond angle between
    # 95 and 125 degrees, at most one proton per bond and two per acceptor.
    cands = []
    for i in range(len(frac)):
        nb = neighbours(lat, frac, i, coordination)
        pairs = []
        for (da, ja, va), (db, jb, vb) in itertools.combinations(nb, 2):
            ang = np.degrees(np.arccos(np.dot(va, vb) / (da * db)))
            if 95.0 <= ang <= 125.0 and ja != jb:
                pairs.append(((ja, va), (jb, vb)))
        cands.append(pairs)
    bonds = set()
    accepted = [0] * len(frac)
    choice = [None] * len(frac)

    def place(i):
        if i == len(frac):
            return True
        for (ja, va), (jb, vb) in cands[i]:
            if (ja, i) in bonds or (jb, i) in bonds or accepted[ja] >= 2 or accepted[jb] >= 2:
                continue
            bonds.update({(i, ja), (i, jb)})
            accepted[ja] += 1
            accepted[jb] += 1
            choice[i] = (va, vb)
            if place(i + 1):
                return True
            bonds.difference_update({(i, ja), (i, jb)})
            accepted[ja] -= 1
            accepted[jb] -= 1
        return False

    if not place(0):
        raise RuntimeError("no proton arrangement found")
    molecules = []
    for i in range(len(frac)):
        o = lat @ frac[i]
        molecules.append([("O", o)] + [("H", o + OH * d / np.linalg.norm(d)) for d in choice[i]])
    return molecules


def write(path, lat, molecules, title):
    with open(path, "w") as f:
        f.write(f"# {title}\n")
        f.write("# Idealized geometry; environment parameters are illustrative.\n")
        f.write("AA\n")
        for v in lat.T:
            f.write("{:.6f} {:.6f} {:.6f}\n".format(*v))
        for mol in molecules:
            f.write("MOLECULE\n")
            for el, p in mol:
                f.write("{} {:.6f} {:.6f} {:.6f}\n".format(el, *p))
        f.write(PARAMETERS)


def check(lat, molecules):
    atoms = [(el, p) for m in molecules for el, p in m]
    inv = np.linalg.inv(lat)
    dmin = 1e9
    for (ea, pa), (eb, pb) in itertools.combinations(atoms, 2):
        f = inv @ (pb - pa)
        f -= np.round(f)
        dmin = min(dmin, np.linalg.norm(lat @ f))
    return dmin


def main(outdir):
    for name, builder, coord in [("ice_viii", ice_viii_oxygens, 8), ("ice_ix", ice_ix_oxygens, 4)]:
        lat, frac = builder()
        mols = protonate(lat, frac, coord)
        print(name, len(mols), "molecules, closest atom pair", round(check(lat, mols), 3), "A")
        write(f"{outdir}/{name}.cell", lat, mols, name.replace("_", " ").upper() + " unit cell")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/cells")
