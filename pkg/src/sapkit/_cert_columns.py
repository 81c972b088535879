"""Column-wise transcription of the structural LPs.

Keyed by variable: the ``<= z`` rows each share appears in, with its
coefficient.  Kept apart from the row-wise transcription in ``certlp`` so
that a copy error in one shows up as a disagreement.
"""

from fractions import Fraction

_H = Fraction(1, 2)


def _sz_weight(alpha):
    return Fraction(1) / (8 * (Fraction(alpha) + 1))


_STAIR = {
    "SSWL": {"r2": 1, "r3": 1},
    "SNCS": {"r2": 1, "r4": 1},
    "SNCL": {"r2": 1, "r3": 1},
    "SZ": {"r2": 1},
    "SCr": {"r2": 1, "r3": 1},
    "SBS": {"r2": 1, "r4": 1},
    "SBL": {"r2": 1, "r3": 1},
    "STS": {"r2": 1, "r4": 1},
    "STL": {"r2": 1, "r3": 1},
    "SSWS": {"r2": 1, "r5": 1},
    "LU": {"r1": 1, "r2": 1},
    "LD": {"r1": 1, "r3": 1, "r4": 1, "r5": Fraction(1, 4)},
}

_STAIR_HIGH = {k: dict(v) for k, v in _STAIR.items()}
_STAIR_HIGH["LD"]["r6"] = 1
_STAIR_HIGH["SZ"]["r6"] = _sz_weight

_UNIFORM = {
    "LT": {f"r{k}": 1 for k in range(2, 14)},
    "LB": {f"r{k}": 1 for k in (2, 3, 4, 5, 8, 9, 10, 11, 12, 14)},
    "LM": {f"r{k}": 1 for k in range(2, 13)},
    "SBS": {"r1": 1, "r2": _H, "r7": _H},
    "SBL": {"r1": 1, "r3": 1, "r7": _H},
    "STS": {"r1": 1, "r4": _H, "r6": _H},
    "STL": {"r1": 1, "r5": 1, "r6": _H},
    "SMTS": {"r1": 1, "r6": _H, "r7": _H, "r10": _H},
    "SMTL": {"r1": 1, "r6": _H, "r7": _H, "r9": 1},
    "SMBS": {"r1": 1, "r6": _H, "r7": _H, "r12": _H},
    "SMBL": {"r1": 1, "r6": _H, "r7": _H, "r11": 1},
    "SMSW": {"r1": 1, "r6": _H, "r7": _H, "r13": 1, "r14": 1},
    "SMCr": {"r1": 1, "r8": 1},
}

COLUMNS = {"stair_high": _STAIR_HIGH, "stair_low": _STAIR, "uniform": _UNIFORM}
