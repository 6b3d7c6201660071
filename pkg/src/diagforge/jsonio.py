"""JSON encoding for reports and parsing of input documents.

Complex numbers are written as ``[re, im]``, rationals as ``"p/q"`` strings,
matrices as lists of rows. Floats are printed with 17 significant digits
and keys are sorted, so identical inputs give byte-identical output.
"""

import json
import math
from fractions import Fraction

import numpy as np

from .errors import InvalidInput
from .rational import fraction_str, to_fraction


def _float(x):
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("non-finite float in report")
    if x == 0:
        return "0"
    s = "%.17g" % x
    if "e" not in s and "." not in s and "inf" not in s:
        s += ".0"
    return s


def _encode(obj, out):
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_float(obj))
    elif isinstance(obj, (complex, np.complexfloating)):
        out.append(f"[{_float(obj.real)}, {_float(obj.imag)}]")
    elif isinstance(obj, Fraction):
        out.append(json.dumps(fraction_str(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj, key=str)):
            if i:
                out.append(", ")
            out.append(json.dumps(str(key)) + ": ")
            _encode(obj[key], out)
        out.append("}")
    elif isinstance(obj, np.ndarray):
        _encode(obj.tolist(), out)
    elif isinstance(obj, (list, tuple, set)):
        items = sorted(obj, key=repr) if isinstance(obj, set) else obj
        out.append("[")
        for i, item in enumerate(items):
            if i:
                out.append(", ")
            _encode(item, out)
        out.append("]")
    elif hasattr(obj, "to_json"):
        _encode(obj.to_json(), out)
    else:
        raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj):
    out = []
    _encode(obj, out)
    return "".join(out) + "\n"


def loads(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"malformed JSON: {exc}") from exc


# -- parsing ---------------------------------------------------------------------------

def parse_complex(v):
    """``[re, im]``, a number or a ``"p/q"`` string to a complex."""
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise InvalidInput(f"complex value must be [re, im], got {v!r}")
        return complex(float(parse_real(v[0])), float(parse_real(v[1])))
    return complex(float(parse_real(v)))


def parse_real(v):
    if isinstance(v, bool):
        raise InvalidInput("booleans are not numbers")
    if isinstance(v, (int, float, Fraction)):
        return v
    if isinstance(v, str):
        return to_fraction(v)
    raise InvalidInput(f"not a number: {v!r}")


def parse_exact_complex(v):
    """Like :func:`parse_complex` but keeps rationals: returns (re, im) Fractions
    when both parts are exact, else a complex."""
    parts = v if isinstance(v, (list, tuple)) else [v, 0]
    if len(parts) != 2:
        raise InvalidInput(f"complex value must be [re, im], got {v!r}")
    re, im = parse_real(parts[0]), parse_real(parts[1])
    if all(isinstance(x, (int, Fraction)) for x in (re, im)):
        return (Fraction(re), Fraction(im))
    return complex(float(re), float(im))


def parse_matrix(rows):
    if not isinstance(rows, list) or not rows:
        raise InvalidInput("matrix must be a nonempty list of rows")
    try:
        M = np.array([[parse_complex(v) for v in row] for row in rows], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"bad matrix: {exc}") from exc
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInput("matrix must be square")
    return M


def encode_matrix(M):
    M = np.asarray(M)
    return [[complex(v) for v in row] for row in M]


def require(doc, key):
    if not isinstance(doc, dict) or key not in doc:
        raise InvalidInput(f"missing field {key!r}")
    return doc[key]
