#!/usr/bin/env python3
# Copyright 2026 The pevqe Authors
# Licensed under the Apache License, Version 2.0 (see LICENSE).
"""Generates the bundled integral fixtures with PySCF.

For every fixture directory this writes
  integrals.fcidump   full-space MO integrals of the vacuum RHF orbitals
  properties.txt      nuclei, per-site potential-derivative integrals and
                      per-nucleus EFG integrals in the same MO basis
  environment.pot     the embedding sites (absent for vacuum-only fixtures)
  fixture.json        orbital partition and PySCF reference values

Sign conventions (atomic units, electron charge included):
  SITE s 0   t0_pq  = -<p| 1/|r-R_s| |q>
  SITE s a   t1_pq  = -<p| d_a 1/|r-R_s| |q>
  SITE s ab  t2_pq  = -<p| d_a d_b 1/|r-R_s| |q>  (traceless part)
  EFG K ab   f_pq   = +<p| (3 x_a x_b - r^2 delta_ab)/r^5 |q>,  x = r - R_K
"""
import json
import os
import sys

import numpy as np
from pyscf import ao2mo, fci, gto, mcscf, scf

COMPS2 = ["XX", "XY", "XZ", "YY", "YZ", "ZZ"]
PAIRS2 = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]


def site_integrals(mol, origin):
    with mol.with_rinv_origin(origin):
        v0 = mol.intor("int1e_rinv")
        ip = mol.intor("int1e_iprinv", comp=3)
        ipip = mol.intor("int1e_ipiprinv", comp=9).reshape(3, 3, *v0.shape)
        ipvip = mol.intor("int1e_iprinvip", comp=9).reshape(3, 3, *v0.shape)
    d1 = -(ip + ip.transpose(0, 2, 1))  # <p| d_a V |q>
    d2 = ipip + ipip.transpose(0, 1, 3, 2) + ipvip + ipvip.transpose(1, 0, 2, 3)
    return v0, d1, d2


def check_signs(mol, origin, h=1e-4):
    v0, d1, d2 = site_integrals(mol, origin)
    for a in range(3):
        e = np.zeros(3)
        e[a] = h
        with mol.with_rinv_origin(origin + e):
            vp = mol.intor("int1e_rinv")
        with mol.with_rinv_origin(origin - e):
            vm = mol.intor("int1e_rinv")
        # d/dr_a of 1/|r-R| equals -d/dR_a
        fd = -(vp - vm) / (2 * h)
        assert np.abs(fd - d1[a]).max() < 1e-6, "first-derivative integral sign"
        for b in range(3):
            fd2 = -(site_integrals(mol, origin + e)[1][b] - site_integrals(mol, origin - e)[1][b]) / (2 * h)
            assert np.abs(fd2 - d2[a, b]).max() < 1e-5, "second-derivative integral sign"


def traceless(m):
    t = (m[0, 0] + m[1, 1] + m[2, 2]) / 3.0
    out = m.copy()
    for a in range(3):
        out[a, a] = out[a, a] - t
    return out


def write_fcidump(path, h, eri, ecore, nelec):
    n = h.shape[0]
    with open(path, "w") as f:
        f.write(f" &FCI NORB={n},NELEC={nelec},MS2=0,\n  ORBSYM={'1,' * n}\n  ISYM=1,\n &END\n")
        for p in range(n):
            for q in range(p + 1):
                for r in range(n):
                    for s in range(r + 1):
                        if p * (p + 1) // 2 + q < r * (r + 1) // 2 + s:
                            continue
                        v = eri[p, q, r, s]
                        if abs(v) > 1e-14:
                            f.write(f"{v: .17e} {p + 1} {q + 1} {r + 1} {s + 1}\n")
        for p in range(n):
            for q in range(p + 1):
                if abs(h[p, q]) > 1e-14:
                    f.write(f"{h[p, q]: .17e} {p + 1} {q + 1} 0 0\n")
        f.write(f"{ecore: .17e} 0 0 0 0\n")


def write_matrix(f, m):
    n = m.shape[0]
    for p in range(n):
        for q in range(p + 1):
            if abs(m[p, q]) > 1e-15:
                f.write(f"{m[p, q]: .17e} {p + 1} {q + 1}\n")


def nucleus_labels(mol):
    labels, count = [], {}
    for i in range(mol.natm):
        s = mol.atom_symbol(i)
        count[s] = count.get(s, 0) + 1
    seen = {}
    for i in range(mol.natm):
        s = mol.atom_symbol(i)
        seen[s] = seen.get(s, 0) + 1
        labels.append(s if count[s] == 1 else f"{s}{seen[s]}")
    return labels


def nuclear_efg(mol, k):
    out = np.zeros((3, 3))
    for l in range(mol.natm):
        if l == k:
            continue
        d = mol.atom_coord(l) - mol.atom_coord(k)
        r = np.linalg.norm(d)
        out -= mol.atom_charge(l) * (3 * np.outer(d, d) / r**5 - np.eye(3) / r**3)
    return out


def write_potential(path, sites):
    with open(path, "w") as f:
        f.write("! embedding sites for the fixture, atomic units\n@COORDINATES\n")
        f.write(f"{len(sites)}\nAU\n")
        for s in sites:
            f.write("{} {:.10f} {:.10f} {:.10f}\n".format(s["label"], *s["pos"]))
        f.write("@MULTIPOLES\nORDER 0\n{}\n".format(len(sites)))
        for i, s in enumerate(sites):
            f.write(f"{i + 1} {s['q']:.10f}\n")
        f.write("ORDER 1\n{}\n".format(len(sites)))
        for i, s in enumerate(sites):
            f.write("{} {:.10f} {:.10f} {:.10f}\n".format(i + 1, *s["mu"]))
        f.write("ORDER 2\n{}\n".format(len(sites)))
        for i, s in enumerate(sites):
            q = s["quad"]
            f.write("{} {}\n".format(i + 1, " ".join(f"{q[a][b]:.10f}" for a, b in PAIRS2)))
        f.write("@POLARIZABILITIES\nORDER 1 1\n{}\n".format(len(sites)))
        for i, s in enumerate(sites):
            f.write("{} {:.10f} 0.0 0.0 {:.10f} 0.0 {:.10f}\n".format(i + 1, s["alpha"], s["alpha"], s["alpha"]))


def build(outdir, name, atom, basis, ninact, nact, nelecas, sites, title):
    path = os.path.join(outdir, name)
    os.makedirs(path, exist_ok=True)
    mol = gto.M(atom=atom, basis=basis, unit="Bohr", verbose=0)
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.kernel()
    c = mf.mo_coeff
    n = c.shape[1]
    h = c.T @ mf.get_hcore() @ c
    eri = ao2mo.restore(1, ao2mo.full(mol, c), n)
    write_fcidump(os.path.join(path, "integrals.fcidump"), h, eri, mol.energy_nuc(), mol.nelectron)

    labels = nucleus_labels(mol)
    with open(os.path.join(path, "properties.txt"), "w") as f:
        f.write(f"# {title}: one-electron property integrals in the RHF MO basis\n")
        f.write(f"NORB {n}\n")
        for k in range(mol.natm):
            f.write("NUCLEUS {} {} {:.12f} {:.12f} {:.12f}\n".format(labels[k], int(mol.atom_charge(k)), *mol.atom_coord(k)))
        for i, s in enumerate(sites):
            check_signs(mol, np.array(s["pos"]))
            v0, d1, d2 = site_integrals(mol, np.array(s["pos"]))
            f.write(f"SITE {i + 1} 0\n")
            write_matrix(f, c.T @ (-v0) @ c)
            for a, comp in enumerate("XYZ"):
                f.write(f"SITE {i + 1} {comp}\n")
                write_matrix(f, c.T @ (-d1[a]) @ c)
            d2t = np.einsum("abpq->pqab", d2)
            d2t = np.array([[traceless(d2t[p, q]) for q in range(d2t.shape[1])] for p in range(d2t.shape[0])])
            for comp, (a, b) in zip(COMPS2, PAIRS2):
                f.write(f"SITE {i + 1} {comp}\n")
                write_matrix(f, c.T @ (-d2t[:, :, a, b]) @ c)
        efg_ao = {}
        for k in range(mol.natm):
            _, _, d2 = site_integrals(mol, mol.atom_coord(k))
            d2t = np.einsum("abpq->pqab", d2)
            d2t = np.array([[traceless(d2t[p, q]) for q in range(d2t.shape[1])] for p in range(d2t.shape[0])])
            efg_ao[labels[k]] = d2t
            for comp, (a, b) in zip(COMPS2, PAIRS2):
                f.write(f"EFG {labels[k]} {comp}\n")
                write_matrix(f, c.T @ d2t[:, :, a, b] @ c)

    if sites:
        write_potential(os.path.join(path, "environment.pot"), sites)

    mc = mcscf.CASSCF(mf, nact, nelecas)
    mc.conv_tol = 1e-11
    mc.conv_tol_grad = 1e-7
    mc.kernel()
    dm = mc.make_rdm1()
    efg_ref = {}
    for k in range(mol.natm):
        el = np.einsum("pqab,pq->ab", efg_ao[labels[k]], dm)
        efg_ref[labels[k]] = (el + nuclear_efg(mol, k)).tolist()

    cas_fci = None
    if ninact == 0 and nact == n:
        cas_fci = fci.FCI(mf).kernel()[0]
    manifest = {
        "title": title,
        "fcidump": "integrals.fcidump",
        "properties": "properties.txt",
        "potential": "environment.pot" if sites else None,
        "n_orbitals": n,
        "n_electrons": mol.nelectron,
        "n_inactive": ninact,
        "n_active": nact,
        "active_electrons": nelecas,
        "reference": {
            "rhf_energy": mf.e_tot,
            "vacuum_casscf_energy": mc.e_tot,
            "vacuum_casscf_efg": efg_ref,
            "fci_energy": cas_fci,
        },
    }
    with open(os.path.join(path, "fixture.json"), "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    print(name, n, "orbitals; RHF", round(mf.e_tot, 8), "CASSCF", round(mc.e_tot, 8))


def main(outdir):
    two_sites = [
        {"label": "O", "pos": [0.3, -0.4, 5.5], "q": -0.45, "mu": [0.05, -0.02, 0.12],
         "quad": [[0.20, 0.05, 0.00], [0.05, -0.10, 0.02], [0.00, 0.02, 0.30]], "alpha": 5.0},
        {"label": "H", "pos": [-1.2, 0.8, -5.0], "q": 0.30, "mu": [0.0, 0.0, 0.0],
         "quad": [[0.0] * 3] * 3, "alpha": 2.5},
    ]
    build(outdir, "h2_sto3g", "H 0 0 0; H 0 0 1.4", "sto-3g", 0, 2, 2, [], "H2 STO-3G, R = 1.4 bohr")
    build(outdir, "h2_631g", "H 0 0 0; H 0 0 1.4", "6-31g", 0, 2, 2, two_sites,
          "H2 6-31G, R = 1.4 bohr, two embedding sites")
    build(outdir, "lih_sto3g", "Li 0 0 0; H 0 0 3.015", "sto-3g", 1, 3, 2, two_sites,
          "LiH STO-3G, R = 3.015 bohr, one inactive orbital, two embedding sites")
    build(outdir, "h2o_631g",
          "O 0 0 0.2217; H 0 1.4309 -0.8867; H 0 -1.4309 -0.8867", "6-31g", 2, 6, 6, two_sites,
          "H2O 6-31G, (6,6) active space, two embedding sites")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/fixtures")
