"""Built-in benchmark problems and problem-config serialization.

Two physical benchmarks over t in [0, 2pi] with unit quadratic weights:

* ``pho`` -- a forced harmonic oscillator (n=2, m=2): xdot1 = x2 + u1,
  xdot2 = -4 x1 + u2, steering (0, 1) to the origin.
* ``psm`` -- two spring-coupled unit masses (n=4, m=2) with positions and
  velocities (x1..x4), forces u1, u2, steering (0, 1, 1, -1) to the origin.

Case 1 constrains controls only; case 2 additionally bounds the first
state from below. Each case carries a recommended relaxation parameter
gamma for the solver.

Problem configs are flat JSON documents with fields n, m, t0, tf, A (n
rows of n), B (n rows of m), q (n), r (m), x0, xf (n), and optional bound
arrays x_lower, x_upper, u_lower, u_upper (m or n entries); a missing
array or a null entry means unbounded on that side.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .errors import ParseError, ValidationError
from .model import ProblemSpec

_CASES = {
    ("pho", 1): 0.60,
    ("pho", 2): 0.95,
    ("psm", 1): 0.55,
    ("psm", 2): 0.95,
}


def builtin_problem(name: str, case: int) -> tuple[ProblemSpec, float]:
    """Benchmark problem by name ('pho' | 'psm') and case (1 | 2).

    Returns the validated spec and the recommended gamma."""
    key = (str(name).lower(), int(case))
    if key not in _CASES:
        raise ValidationError(
            f"unknown problem/case {name!r}/{case!r}; expected "
            "('pho'|'psm', 1|2)"
        )
    gamma = _CASES[key]
    tf = 2.0 * math.pi
    if key[0] == "pho":
        spec = ProblemSpec(
            n=2,
            m=2,
            A=np.array([[0.0, 1.0], [-4.0, 0.0]]),
            B=np.eye(2),
            q=np.ones(2),
            r=np.ones(2),
            x0=np.array([0.0, 1.0]),
            xf=np.zeros(2),
            t0=0.0,
            tf=tf,
            u_lower=np.array([-0.4, -0.5]),
            u_upper=np.array([0.1, 0.1]),
            x_lower=np.array([-0.025, -np.inf]) if key[1] == 2 else None,
        )
    else:
        spec = ProblemSpec(
            n=4,
            m=2,
            A=np.array(
                [
                    [0.0, 1.0, 0.0, 0.0],
                    [-3.0, 0.0, 2.0, 0.0],
                    [0.0, 0.0, 0.0, 1.0],
                    [2.0, 0.0, -2.0, 0.0],
                ]
            ),
            B=np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 0.0], [0.0, 1.0]]),
            q=np.ones(4),
            r=np.ones(2),
            x0=np.array([0.0, 1.0, 1.0, -1.0]),
            xf=np.zeros(4),
            t0=0.0,
            tf=tf,
            u_lower=np.array([-0.5, -0.4]),
            u_upper=np.array([0.5, 0.4]),
            x_lower=np.array([-0.2, -np.inf, -np.inf, -np.inf])
            if key[1] == 2
            else None,
        )
    return spec, gamma


_REQUIRED = ("n", "m", "t0", "tf", "A", "B", "q", "r", "x0", "xf")
_BOUND_KEYS = ("x_lower", "x_upper", "u_lower", "u_upper")


def _bound_array(doc, key, length, sign):
    if key not in doc or doc[key] is None:
        return None
    raw = doc[key]
    if not isinstance(raw, list) or len(raw) != length:
        raise ValidationError(f"{key} must be a list of {length} entries")
    return np.array(
        [sign * np.inf if v is None else float(v) for v in raw], dtype=float
    )


def load_problem_config(text: str) -> ProblemSpec:
    """Parse and validate a JSON problem config.

    Raises ParseError for malformed documents (with position info) and
    ValidationError for structurally invalid problems."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError("config must be a JSON object")
    missing = [key for key in _REQUIRED if key not in doc]
    if missing:
        raise ParseError(f"missing field(s): {', '.join(missing)}")
    try:
        n = int(doc["n"])
        m = int(doc["m"])
    except (TypeError, ValueError) as exc:
        raise ParseError(f"n and m must be integers: {exc}") from exc
    try:
        A = np.array(doc["A"], dtype=float)
        B = np.array(doc["B"], dtype=float)
        q = np.array(doc["q"], dtype=float)
        r = np.array(doc["r"], dtype=float)
        x0 = np.array(doc["x0"], dtype=float)
        xf = np.array(doc["xf"], dtype=float)
        t0 = float(doc["t0"])
        tf = float(doc["tf"])
    except (TypeError, ValueError) as exc:
        raise ParseError(f"non-numeric field: {exc}") from exc
    return ProblemSpec(
        n=n,
        m=m,
        A=A,
        B=B,
        q=q,
        r=r,
        x0=x0,
        xf=xf,
        t0=t0,
        tf=tf,
        x_lower=_bound_array(doc, "x_lower", n, -1),
        x_upper=_bound_array(doc, "x_upper", n, +1),
        u_lower=_bound_array(doc, "u_lower", m, -1),
        u_upper=_bound_array(doc, "u_upper", m, +1),
    )


def serialize_problem_config(spec: ProblemSpec) -> str:
    """Config text for a time-invariant spec; round-trips through
    load_problem_config."""
    if not spec.is_time_invariant:
        raise ValidationError(
            "only constant-matrix problems are serializable; build "
            "time-varying systems programmatically"
        )

    def bound_list(v):
        return [None if not np.isfinite(e) else float(e) for e in v]

    doc = {
        "n": spec.n,
        "m": spec.m,
        "t0": spec.t0,
        "tf": spec.tf,
        "A": spec.A.tolist(),
        "B": spec.B.tolist(),
        "q": spec.q.tolist(),
        "r": spec.r.tolist(),
        "x0": spec.x0.tolist(),
        "xf": spec.xf.tolist(),
        "x_lower": bound_list(spec.x_lower),
        "x_upper": bound_list(spec.x_upper),
        "u_lower": bound_list(spec.u_lower),
        "u_upper": bound_list(spec.u_upper),
    }
    return json.dumps(doc, indent=2)
