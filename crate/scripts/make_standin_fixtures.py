#!/usr/bin/env python3
"""Generate coarse synthetic stand-in PDB files for complexes whose real
coordinates are not vendored in this repository.

Each stand-in is two globular chains packed against each other with a handful
of designed inter-chain salt bridges at the interface. The files carry a
REMARK block saying they are synthetic; replace them with the real entries via
scripts/fetch_fixtures.sh when network access to the PDB is available.

Output is fully deterministic (fixed seeds, fixed formatting).
"""

import math
import random
import sys
from pathlib import Path

# (code, receptor chain, n_receptor, ligand chain, n_ligand, first seq numbers,
#  designed bridges as (receptor_resname, receptor_seq, ligand_resname, ligand_seq))
ENTRIES = [
    ("2ptc", "E", 223, "I", 58, (16, 1),
     [("ASP", 189, "LYS", 15), ("GLU", 70, "ARG", 17), ("LYS", 60, "ASP", 3)]),
    ("1avx", "A", 223, "B", 172, (16, 1),
     [("ASP", 189, "ARG", 63), ("GLU", 151, "LYS", 67), ("ARG", 96, "GLU", 12)]),
    ("1fss", "A", 537, "B", 61, (4, 1),
     [("GLU", 73, "ARG", 11), ("ASP", 74, "LYS", 25), ("ASP", 285, "ARG", 27),
      ("GLU", 292, "LYS", 51)]),
    ("1grn", "A", 191, "B", 198, (1, 1),
     [("ASP", 38, "ARG", 85), ("GLU", 62, "LYS", 122), ("LYS", 16, "ASP", 44)]),
    ("4kc3", "A", 159, "B", 310, (112, 19),
     [("GLU", 144, "ARG", 35), ("ASP", 149, "LYS", 143), ("GLU", 148, "ARG", 198),
      ("LYS", 163, "GLU", 242)]),
]

BACKGROUND = (
    ["ALA"] * 8 + ["GLY"] * 7 + ["LEU"] * 9 + ["SER"] * 7 + ["VAL"] * 7 + ["THR"] * 5
    + ["PRO"] * 5 + ["ILE"] * 5 + ["ASN"] * 4 + ["GLN"] * 4 + ["PHE"] * 4 + ["TYR"] * 3
    + ["MET"] * 2 + ["TRP"] * 1 + ["CYS"] * 2 + ["LYS"] * 6 + ["ARG"] * 5 + ["ASP"] * 5
    + ["GLU"] * 6 + ["HIS"] * 2
)

# Side-chain atoms grown outward from CB; the last atoms of charged residues
# are the charge-carrying groups.
SIDE_CHAINS = {
    "GLY": [],
    "ALA": [],
    "SER": [("OG", "O")],
    "CYS": [("SG", "S")],
    "VAL": [("CG1", "C"), ("CG2", "C")],
    "THR": [("OG1", "O"), ("CG2", "C")],
    "PRO": [("CG", "C"), ("CD", "C")],
    "LEU": [("CG", "C"), ("CD1", "C"), ("CD2", "C")],
    "ILE": [("CG1", "C"), ("CG2", "C"), ("CD1", "C")],
    "MET": [("CG", "C"), ("SD", "S"), ("CE", "C")],
    "ASN": [("CG", "C"), ("OD1", "O"), ("ND2", "N")],
    "GLN": [("CG", "C"), ("CD", "C"), ("OE1", "O"), ("NE2", "N")],
    "PHE": [("CG", "C"), ("CD1", "C"), ("CD2", "C"), ("CE1", "C"), ("CE2", "C"), ("CZ", "C")],
    "TYR": [("CG", "C"), ("CD1", "C"), ("CD2", "C"), ("CE1", "C"), ("CE2", "C"), ("CZ", "C"),
            ("OH", "O")],
    "TRP": [("CG", "C"), ("CD1", "C"), ("CD2", "C"), ("NE1", "N"), ("CE2", "C"), ("CE3", "C"),
            ("CZ2", "C"), ("CZ3", "C"), ("CH2", "C")],
    "HIS": [("CG", "C"), ("ND1", "N"), ("CD2", "C"), ("CE1", "C"), ("NE2", "N")],
    "LYS": [("CG", "C"), ("CD", "C"), ("CE", "C"), ("NZ", "N")],
    "ARG": [("CG", "C"), ("CD", "C"), ("NE", "N"), ("CZ", "C"), ("NH1", "N"), ("NH2", "N")],
    "ASP": [("CG", "C"), ("OD1", "O"), ("OD2", "O")],
    "GLU": [("CG", "C"), ("CD", "C"), ("OE1", "O"), ("OE2", "O")],
}

CHARGED_TIP = {
    "LYS": ["NZ"],
    "ARG": ["NE", "NH1", "NH2"],
    "ASP": ["OD1", "OD2"],
    "GLU": ["OE1", "OE2"],
    "HIS": ["ND1", "NE2"],
}


def add(a, b):
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def scale(a, s):
    return (a[0] * s, a[1] * s, a[2] * s)


def norm(a):
    return math.sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])


def unit(a):
    n = norm(a)
    return scale(a, 1.0 / n) if n > 1e-9 else (1.0, 0.0, 0.0)


def rand_unit(rng):
    while True:
        v = (rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1))
        n = norm(v)
        if 0.1 < n <= 1.0:
            return scale(v, 1.0 / n)


def pack_calphas(rng, n, center, radius):
    """Dart-throw n CA positions inside a sphere with 3.8 A minimum spacing."""
    points = []
    r = radius
    attempts = 0
    while len(points) < n:
        attempts += 1
        if attempts % 20000 == 0:
            r += 1.0
        p = (rng.uniform(-r, r), rng.uniform(-r, r), rng.uniform(-r, r))
        if norm(p) > r:
            continue
        p = add(p, center)
        if all(norm(sub(p, q)) >= 3.8 for q in points):
            points.append(p)
    return points


def residue_atoms(rng, resname, ca, outward, tip=None):
    """Atom list [(name, element, xyz)] for one residue.

    When `tip` is given, the side chain is laid along CB->tip so the last atom
    lands exactly at `tip`.
    """
    atoms = []
    n = add(ca, scale(rand_unit(rng), 1.46))
    c = add(ca, scale(rand_unit(rng), 1.52))
    o = add(c, scale(unit(sub(c, ca)), 1.23))
    atoms += [("N", "N", n), ("CA", "C", ca), ("C", "C", c), ("O", "O", o)]
    if resname == "GLY":
        return atoms
    cb = add(ca, scale(outward, 1.53))
    atoms.append(("CB", "C", cb))
    side = SIDE_CHAINS[resname]
    if not side:
        return atoms
    if tip is None:
        direction = unit(add(outward, scale(rand_unit(rng), 0.4)))
        step = 1.4
        pos = cb
        for name, element in side:
            pos = add(pos, scale(unit(add(direction, scale(rand_unit(rng), 0.3))), step))
            atoms.append((name, element, pos))
        return atoms
    tips = CHARGED_TIP.get(resname, [])
    body = [a for a in side if a[0] not in tips]
    seg = sub(tip, cb)
    k = len(body) + 1
    for i, (name, element) in enumerate(body, start=1):
        atoms.append((name, element, add(cb, scale(seg, i / k))))
    lateral = unit((seg[1], -seg[0], 0.3))
    for j, name in enumerate(tips):
        offset = scale(lateral, 1.1 * j) if j else (0.0, 0.0, 0.0)
        atoms.append((name, name[0], add(tip, offset)))
    return atoms


def build_entry(code, rec_chain, n_rec, lig_chain, n_lig, starts, bridges):
    rng = random.Random("standin-" + code)
    rec_radius = (n_rec * 130.0 * 3 / (4 * math.pi)) ** (1 / 3)
    lig_radius = (n_lig * 130.0 * 3 / (4 * math.pi)) ** (1 / 3)
    rec_center = (0.0, 0.0, 0.0)
    lig_center = (rec_radius + lig_radius + 1.0, 0.0, 0.0)
    rec_ca = pack_calphas(rng, n_rec, rec_center, rec_radius)
    lig_ca = pack_calphas(rng, n_lig, lig_center, lig_radius)

    rec_seqs = list(range(starts[0], starts[0] + n_rec))
    lig_seqs = list(range(starts[1], starts[1] + n_lig))
    rec_names = [rng.choice(BACKGROUND) for _ in rec_seqs]
    lig_names = [rng.choice(BACKGROUND) for _ in lig_seqs]
    # Interface residues are kept neutral apart from the designed bridges.
    axis = unit(sub(lig_center, rec_center))
    contact_point = add(rec_center, scale(axis, rec_radius + 0.5))

    def neutralize(names, cas):
        for i, p in enumerate(cas):
            if norm(sub(p, contact_point)) < 16.0 and names[i] in CHARGED_TIP:
                names[i] = "SER"

    neutralize(rec_names, rec_ca)
    neutralize(lig_names, lig_ca)

    rec_by_dist = sorted(range(n_rec), key=lambda i: norm(sub(rec_ca[i], contact_point)))
    lig_by_dist = sorted(range(n_lig), key=lambda i: norm(sub(lig_ca[i], contact_point)))
    tips_rec = {}
    tips_lig = {}
    used_rec, used_lig = set(), set()
    spread = [(0, 0), (7, 0), (-7, 0), (0, 7), (0, -7), (5, 5)]
    for b, (rres, rseq, lres, lseq) in enumerate(bridges):
        dy, dz = spread[b]
        anchor = add(contact_point, (0.0, float(dy), float(dz)))
        ri = min((i for i in rec_by_dist if i not in used_rec),
                 key=lambda i: norm(sub(rec_ca[i], anchor)))
        li = min((i for i in lig_by_dist if i not in used_lig),
                 key=lambda i: norm(sub(lig_ca[i], anchor)))
        used_rec.add(ri)
        used_lig.add(li)
        # Move the designed residue numbers onto the chosen positions.
        rj = rec_seqs.index(rseq)
        lj = lig_seqs.index(lseq)
        rec_ca[ri], rec_ca[rj] = rec_ca[rj], rec_ca[ri]
        lig_ca[li], lig_ca[lj] = lig_ca[lj], lig_ca[li]
        rec_names[rj] = rres
        lig_names[lj] = lres
        gap = 2.8 + 0.25 * b
        rec_tip = add(anchor, scale(axis, -gap / 2))
        lig_tip = add(anchor, scale(axis, gap / 2))
        tips_rec[rj] = rec_tip
        tips_lig[lj] = lig_tip

    lines = [
        "HEADER    SYNTHETIC STAND-IN                      15-OCT-26   %s              "
        % code.upper(),
        "REMARK   1 SYNTHETIC STAND-IN COORDINATES, NOT THE DEPOSITED %s ENTRY."
        % code.upper(),
        "REMARK   1 GENERATED BY scripts/make_standin_fixtures.py; REPLACE WITH THE",
        "REMARK   1 REAL FILE VIA scripts/fetch_fixtures.sh WHEN ONLINE.",
    ]
    serial = 1
    extras_done = False

    def emit(chain, seqs, names, cas, center, tips):
        nonlocal serial, extras_done
        for i, (seq, resname, ca) in enumerate(zip(seqs, names, cas)):
            outward = unit(sub(ca, center))
            tip = tips.get(i)
            if tip is not None:
                outward = unit(sub(tip, ca))
            for name, element, xyz in residue_atoms(rng, resname, ca, outward, tip):
                altloc = " "
                if code == "2ptc" and not extras_done and chain == "E" and i == 5 and name == "CB":
                    # one alternate-location pair; only 'A' survives parsing
                    lines.append(atom_line("ATOM", serial, name, "A", resname, chain, seq, xyz,
                                           element, 0.6))
                    serial += 1
                    xyz = add(xyz, (0.4, 0.3, 0.0))
                    altloc = "B"
                    extras_done = True
                    lines.append(atom_line("ATOM", serial, name, altloc, resname, chain, seq,
                                           xyz, element, 0.4))
                    serial += 1
                    continue
                lines.append(atom_line("ATOM", serial, name, altloc, resname, chain, seq, xyz,
                                       element, 1.0))
                serial += 1
        lines.append("TER   %5d      %3s %s%4d" % (serial, names[-1], chain, seqs[-1]))
        serial += 1

    emit(rec_chain, rec_seqs, rec_names, rec_ca, rec_center, tips_rec)
    emit(lig_chain, lig_seqs, lig_names, lig_ca, lig_center, tips_lig)
    if code == "2ptc":
        far = add(rec_center, (-rec_radius - 6.0, 0.0, 0.0))
        lines.append(atom_line("HETATM", serial, "CA", " ", " CA", rec_chain, 480, far, "CA", 1.0))
        serial += 1
        for k in range(3):
            w = add(far, (0.0, 3.0 * (k + 1), 0.0))
            lines.append(atom_line("HETATM", serial, "O", " ", "HOH", rec_chain, 501 + k, w, "O",
                                   1.0))
            serial += 1
    lines.append("END")
    return "\n".join(lines) + "\n"


def atom_line(record, serial, name, altloc, resname, chain, seq, xyz, element, occ):
    padded = (" " + name) if len(name) < 4 else name
    return "%-6s%5d %-4s%s%3s %s%4d    %8.3f%8.3f%8.3f%6.2f%6.2f          %2s  " % (
        record, serial, padded, altloc, resname, chain, seq, xyz[0], xyz[1], xyz[2], occ, 20.0,
        element)


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent.parent / "fixtures" / "pdb"
    out.mkdir(parents=True, exist_ok=True)
    for entry in ENTRIES:
        text = build_entry(*entry)
        (out / (entry[0] + ".pdb")).write_text(text)
        print("wrote", out / (entry[0] + ".pdb"))


if __name__ == "__main__":
    main()
