"""Freeze reference 8-class secondary structure for test structures.

Runs mdtraj's DSSP on a cleaned copy of each PDB file (MODEL 1, altLoc ' ' or
'A') and writes one line per protein residue: chain, resSeq, iCode, class.
Loop residues are written as C.

usage: python scripts/dssp_reference.py data/structures/1ubi.pdb ... --out tests/data
"""

import argparse
import os
import tempfile

import mdtraj as md


def clean_pdb(path):
    lines = []
    with open(path) as fh:
        for line in fh:
            rec = line[:6]
            if rec.startswith("ENDMDL"):
                break
            if rec in ("ATOM  ", "HETATM"):
                if line[16] not in (" ", "A"):
                    continue
                lines.append(line[:16] + " " + line[17:])
    lines.append("END\n")
    return "".join(lines)


def residue_keys(path):
    keys = []
    seen = set()
    with open(path) as fh:
        for line in fh:
            if line[:6] not in ("ATOM  ", "HETATM"):
                continue
            key = (line[21], int(line[22:26]), line[26])
            if key not in seen:
                seen.add(key)
                keys.append((key, line[17:20].strip()))
    return keys


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("pdb", nargs="+")
    ap.add_argument("--out", required=True)
    args = ap.parse_args()
    for path in args.pdb:
        stem = os.path.splitext(os.path.basename(path))[0]
        with tempfile.NamedTemporaryFile("w", suffix=".pdb", delete=False) as tmp:
            tmp.write(clean_pdb(path))
            clean = tmp.name
        traj = md.load_pdb(clean, standard_names=False)
        ss = md.compute_dssp(traj, simplified=False)[0]
        keys = residue_keys(clean)
        os.unlink(clean)
        if len(keys) != len(ss):
            raise SystemExit(f"{stem}: residue count mismatch {len(keys)} vs {len(ss)}")
        out = os.path.join(args.out, f"{stem}.dssp.txt")
        with open(out, "w") as fh:
            for ((chain, resseq, icode), _name), code in zip(keys, ss):
                if code == "NA":
                    continue
                letter = "C" if code == " " else code
                fh.write(f"{chain} {resseq} {icode if icode != ' ' else '-'} {letter}\n")
        print(out)


if __name__ == "__main__":
    main()
