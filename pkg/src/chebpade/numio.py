"""Precision-preserving number serialization and canonical JSON output.

All numeric artifacts are written as decimal strings carrying the full
working precision, so that a load/save round trip is lossless and output
files are byte-reproducible across runs.
"""

import json

from mpmath import mp, mpf


def decimal_digits(precision_bits):
    """Decimal digits needed to round-trip a binary float of the given width."""
    return int(precision_bits * 0.30103) + 3


def to_decimal(x, precision_bits):
    """Render an mpf (or float) as a decimal string at full precision."""
    with mp.workprec(precision_bits + 8):
        return mp.nstr(mpf(x), decimal_digits(precision_bits), strip_zeros=True)


def from_decimal(s, precision_bits):
    """Parse a decimal string into an mpf at the given precision."""
    with mp.workprec(precision_bits + 8):
        return mpf(s)


def canonical_json_bytes(obj):
    """Deterministic JSON encoding: sorted keys, fixed separators, trailing newline."""
    return (json.dumps(obj, sort_keys=True, indent=1, separators=(",", ": ")) + "\n").encode(
        "utf-8"
    )


def dump_json(obj, path):
    with open(path, "wb") as fh:
        fh.write(canonical_json_bytes(obj))


def load_json(path):
    with open(path, "rb") as fh:
        return json.loads(fh.read().decode("utf-8"))
