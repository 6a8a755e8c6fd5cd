"""Generate ideal poly-alanine backbones and freeze reference DSSP on them.

Writes tests/data/ideal_helix.pdb and tests/data/ideal_sheet.pdb plus the
matching *.dssp.txt files produced by mdtraj.

usage: python scripts/ideal_backbones.py --out tests/data
"""

import argparse
import os
import subprocess
import sys

import numpy as np

N_CA, CA_C, C_N, C_O = 1.458, 1.525, 1.329, 1.231
ANG_N_CA_C, ANG_CA_C_N, ANG_C_N_CA, ANG_CA_C_O = 111.2, 116.2, 121.7, 120.5


def place(a, b, c, bond, angle, torsion):
    """Position d so that |cd| = bond, angle bcd = angle, torsion abcd = torsion."""
    angle, torsion = np.radians(angle), np.radians(torsion)
    bc = c - b
    bc /= np.linalg.norm(bc)
    n = np.cross(b - a, bc)
    n /= np.linalg.norm(n)
    m = np.cross(n, bc)
    d2 = np.array([-bond * np.cos(angle), bond * np.sin(angle) * np.cos(torsion),
                   bond * np.sin(angle) * np.sin(torsion)])
    return c + d2[0] * bc + d2[1] * m + d2[2] * n


def backbone(n_res, phi, psi, omega=180.0):
    n = np.array([0.0, 0.0, 0.0])
    ca = np.array([N_CA, 0.0, 0.0])
    ang = np.radians(180.0 - ANG_N_CA_C)
    c = ca + CA_C * np.array([np.cos(ang), np.sin(ang), 0.0])
    res = []
    for i in range(n_res):
        if i > 0:
            n = place(prev_n, prev_ca, prev_c, C_N, ANG_CA_C_N, psi)
            ca = place(prev_ca, prev_c, n, N_CA, ANG_C_N_CA, omega)
            c = place(prev_c, n, ca, CA_C, ANG_N_CA_C, phi)
        next_n = place(n, ca, c, C_N, ANG_CA_C_N, psi)
        o = place(next_n, ca, c, C_O, ANG_CA_C_O, 180.0)
        cb = place(c, n, ca, 1.53, 110.5, -122.5)
        res.append({"N": n, "CA": ca, "C": c, "O": o, "CB": cb})
        prev_n, prev_ca, prev_c = n, ca, c
    return res


def pdb_lines(chains):
    out, serial = [], 1
    for chain_id, residues in chains:
        for i, r in enumerate(residues, start=1):
            for name in ("N", "CA", "C", "O", "CB"):
                x, y, z = r[name]
                out.append("ATOM  %5d  %-3s ALA %s%4d    %8.3f%8.3f%8.3f  1.00  0.00           %s\n"
                           % (serial, name, chain_id, i, x, y, z, name[0]))
                serial += 1
        out.append("TER\n")
    out.append("END\n")
    return "".join(out)


def transform(residues, rot, shift):
    return [{k: rot @ v + shift for k, v in r.items()} for r in residues]


def sheet(gap, slide):
    s1 = backbone(6, -139.0, 135.0)
    ca = np.array([r["CA"] for r in s1])
    centre = ca.mean(axis=0)
    axis = ca[-1] - ca[0]
    axis /= np.linalg.norm(axis)
    # In-plane direction: carbonyl component perpendicular to the strand axis.
    co = s1[2]["O"] - s1[2]["C"]
    across = co - co.dot(axis) * axis
    across /= np.linalg.norm(across)
    normal = np.cross(axis, across)
    rot = 2.0 * np.outer(normal, normal) - np.eye(3)  # 180 degrees about the sheet normal
    pivot = centre + 0.5 * gap * across
    s2 = transform(s1, rot, pivot - rot @ pivot + slide * axis)
    return [("A", s1), ("B", s2)]


def dssp(script_dir, pdb, out_dir):
    subprocess.run([sys.executable, os.path.join(script_dir, "dssp_reference.py"), pdb, "--out", out_dir],
                   check=True, stdout=subprocess.DEVNULL)
    stem = os.path.splitext(os.path.basename(pdb))[0]
    with open(os.path.join(out_dir, stem + ".dssp.txt")) as fh:
        return [line.split()[3] for line in fh]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", required=True)
    args = ap.parse_args()
    here = os.path.dirname(os.path.abspath(__file__))

    helix = os.path.join(args.out, "ideal_helix.pdb")
    with open(helix, "w") as fh:
        fh.write(pdb_lines([("A", backbone(12, -57.0, -47.0))]))
    print("helix", "".join(dssp(here, helix, args.out)))

    target = os.path.join(args.out, "ideal_sheet.pdb")
    best = None
    for gap in np.arange(3.8, 6.01, 0.2):
        for slide in np.arange(-4.0, 4.01, 0.25):
            with open(target, "w") as fh:
                fh.write(pdb_lines(sheet(gap, slide)))
            ss = dssp(here, target, args.out)
            # Most strand residues first, then the most textbook-like spacing.
            score = (sum(c == "E" for c in ss), -abs(gap - 4.8), -abs(slide))
            if best is None or score > best[0]:
                best = (score, gap, slide)
    _, gap, slide = best
    with open(target, "w") as fh:
        fh.write(pdb_lines(sheet(gap, slide)))
    print("sheet gap=%.2f slide=%.2f" % (gap, slide), "".join(dssp(here, target, args.out)))


if __name__ == "__main__":
    main()
