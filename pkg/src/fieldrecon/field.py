"""Bandlimited spatial fields on [0, 1] evolving under a linear PDE.

A field with band limit b carries 2b+1 Fourier modes.  Each mode k splits
across the m characteristic roots of its ODE, so the full state at t = 0 is
a (2b+1) x m matrix of modal coefficients: row k holds a_k1(0) .. a_km(0)
and the mode evolves as a_k(t) = sum_i a_ki(0) exp(r_i(k) t).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InfeasiblePde, UnknownScenario
from .pde_core import HarmonicRoots, PdeSpec, characteristic_roots, check_stability, solve_initial_coefficients

# Grid used to rescale random fields to |g| <= 1; at least 2x Nyquist for b <= 1000.
NORMALIZATION_GRID = 4096
# Real fields must not accumulate more imaginary residue than this at a probe.
REAL_GUARD_TOL = 1e-9

DERIVATIVE_POLICIES = ("at_rest", "first_mode")

# Mode-value catalogs for the three reference simulations (k = 0..3; negative
# harmonics are conjugate mirrors so the field is real).
SCENARIO_COEFFICIENTS: dict[str, tuple[complex, ...]] = {
    "set1": (0.3002 + 0j, -0.0413 + 0.0216j, 0.0871 + 0.0343j, -0.1679 - 0.0586j),
    "set2": (0.2445 + 0j, -0.0357 + 0.0478j, 0.0978 + 0.0729j, -0.1796 - 0.0756j),
    "diffusion": (0.11 + 0j, 0.023 - 0.076j, 0.0669 + 0.0551j, 0.2 + 0.0821j),
}

# Catalog PDEs.  Entry 1 is defined by the polynomial q1(z) = 0.01(z^2 - 0.0125 z^4);
# a variant weighting the fourth spatial derivative by 0.125 instead of 0.0125 is a
# different (still feasible) model and is NOT what this catalog encodes.
PDE_CATALOG: dict[int, PdeSpec] = {
    1: PdeSpec((0.0, 3.0, 1.0), (0.0, 0.0, 0.01, 0.0, -0.000125)),
    2: PdeSpec((0.0, 3.0, 1.0), (0.0, 0.0, 0.01)),
    3: PdeSpec((0.0, 1.0), (0.0, 0.0, 0.01)),
}

SCENARIO_DEFAULT_PDE = {"set1": 1, "set2": 2, "diffusion": 3}


@dataclass(frozen=True, eq=False)
class FieldState:
    """Immutable field snapshot: band limit, PDE, modal coefficients, cached roots."""

    b: int
    spec: PdeSpec
    coeffs: np.ndarray  # (2b+1, m) complex; row k+b holds a_k1(0) .. a_km(0)
    roots: tuple[HarmonicRoots, ...]
    real_field: bool = True

    def __post_init__(self) -> None:
        coeffs = np.array(self.coeffs, dtype=complex)
        expected = (2 * self.b + 1, self.spec.degree)
        if coeffs.shape != expected:
            raise ValueError(f"coefficient matrix must be {expected}, got {coeffs.shape}")
        if len(self.roots) != 2 * self.b + 1:
            raise ValueError("one HarmonicRoots entry required per harmonic")
        for offset, hr in enumerate(self.roots):
            if hr.k != offset - self.b:
                raise ValueError("roots must be ordered k = -b..b")
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "roots", tuple(self.roots))

    @property
    def m(self) -> int:
        return self.spec.degree

    @property
    def k_values(self) -> np.ndarray:
        return np.arange(-self.b, self.b + 1)

    def row(self, k: int) -> np.ndarray:
        return self.coeffs[k + self.b]

    def flat_coeffs(self) -> np.ndarray:
        """Stacked coefficient vector, k ascending, root order within each k."""
        return self.coeffs.reshape(-1)

    def root_matrix(self) -> np.ndarray:
        return np.array([hr.roots for hr in self.roots])


def coefficients_at(state: FieldState, t: float) -> np.ndarray:
    """Modal values a_k(t) for k = -b..b; the ground truth at t = 0."""
    if t < 0:
        raise ValueError("t must be non-negative")
    return np.sum(state.coeffs * np.exp(state.root_matrix() * t), axis=1)


def evaluate(state: FieldState, x, t: float):
    """Field value g(x, t); x may be a scalar or an array of positions."""
    a_t = coefficients_at(state, t)
    x_arr = np.asarray(x, dtype=float)
    phases = np.exp(2j * np.pi * np.multiply.outer(x_arr, state.k_values))
    out = phases @ a_t
    if x_arr.ndim == 0:
        return complex(out)
    return out


def evaluate_at_points(state: FieldState, xs, ts) -> np.ndarray:
    """Field values at paired (x_i, t_i) points, via the stacked modal basis."""
    return basis_matrix(state.roots, xs, ts) @ state.flat_coeffs()


def evaluate_gradient(state: FieldState, x: float, t: float) -> tuple[complex, complex]:
    """Analytic (dg/dx, dg/dt) by term-wise differentiation of the modal sum."""
    if t < 0:
        raise ValueError("t must be non-negative")
    root_mat = state.root_matrix()
    k_vals = state.k_values
    factors = np.exp(root_mat * t) * np.exp(2j * np.pi * k_vals * x)[:, None]
    weighted = state.coeffs * factors
    dgdx = 2j * np.pi * np.sum(k_vals[:, None] * weighted)
    dgdt = np.sum(root_mat * weighted)
    return complex(dgdx), complex(dgdt)


def basis_matrix(roots_per_k: Sequence[HarmonicRoots], xs, ts) -> np.ndarray:
    """Rows of modal basis values at paired points.

    Row i, column (k, j) holds exp(r_j(k) * t_i + j*2*pi*k * x_i), with k
    ascending and roots in their deterministic order, so that row . a
    reproduces g(x_i, t_i) for the stacked coefficient vector a.
    """
    xs = np.asarray(xs, dtype=float)
    ts = np.asarray(ts, dtype=float)
    if xs.shape != ts.shape or xs.ndim != 1:
        raise ValueError("xs and ts must be 1-d arrays of equal length")
    m = roots_per_k[0].m
    if any(hr.m != m for hr in roots_per_k):
        raise ValueError("all harmonics must carry the same number of roots")
    ks = np.array([hr.k for hr in roots_per_k], dtype=float)
    root_mat = np.array([hr.roots for hr in roots_per_k])  # (K, m)
    temporal = np.exp(ts[:, None, None] * root_mat[None, :, :])
    spatial = np.exp(2j * np.pi * xs[:, None] * ks[None, :])
    return (temporal * spatial[:, :, None]).reshape(len(xs), len(roots_per_k) * m)


def real_values(state: FieldState, values: np.ndarray) -> np.ndarray:
    """Real parts of probed values, guarding the imaginary residue of real fields."""
    values = np.asarray(values)
    if state.real_field:
        residue = float(np.max(np.abs(values.imag), initial=0.0))
        if residue > REAL_GUARD_TOL:
            raise ValueError(f"imaginary residue {residue:.3g} exceeds the real-field guard")
    return np.ascontiguousarray(values.real)


def _conjugate_pairing(pos: HarmonicRoots, neg: HarmonicRoots) -> list[int]:
    """Index into neg.roots of the conjugate partner of each pos root."""
    out = []
    for r in pos.roots:
        gaps = [abs(s - r.conjugate()) for s in neg.roots]
        out.append(int(np.argmin(gaps)))
    return out


def field_from_mode_values(
    b: int,
    spec: PdeSpec,
    mode_values: Sequence[complex],
    derivative_policy: str = "at_rest",
) -> FieldState:
    """Assemble a real field from mode values a_k(0) for k = 0..b.

    Negative harmonics are conjugate mirrors.  ``derivative_policy`` fixes how
    a mode value splits across its m roots:

    * ``at_rest``: all higher temporal derivatives vanish at t = 0; the split
      comes from the Vandermonde solve.
    * ``first_mode``: the whole value rides the first (slowest) root; the
      other modal coefficients start at zero.

    Both choices reproduce a_k(0) exactly; they differ in the evolution.
    """
    if derivative_policy not in DERIVATIVE_POLICIES:
        raise ValueError(f"unknown derivative policy {derivative_policy!r}")
    values = np.asarray(mode_values, dtype=complex)
    if values.shape != (b + 1,):
        raise ValueError(f"expected {b + 1} mode values for k = 0..b")
    if abs(values[0].imag) > 0:
        raise ValueError("the k = 0 mode value must be real")
    m = spec.degree
    roots = tuple(characteristic_roots(spec, k) for k in range(-b, b + 1))
    coeffs = np.zeros((2 * b + 1, m), dtype=complex)
    for k in range(0, b + 1):
        pos = roots[k + b]
        if derivative_policy == "at_rest":
            conditions = np.zeros(m, dtype=complex)
            conditions[0] = values[k]
            coeffs[k + b] = solve_initial_coefficients(pos, conditions)
            if k > 0:
                coeffs[b - k] = solve_initial_coefficients(roots[b - k], conditions.conj())
        else:
            coeffs[k + b, 0] = values[k]
            if k > 0:
                pairing = _conjugate_pairing(pos, roots[b - k])
                coeffs[b - k, pairing[0]] = values[k].conjugate()
    return FieldState(b=b, spec=spec, coeffs=coeffs, roots=roots, real_field=True)


def random_real_field(
    b: int,
    spec: PdeSpec,
    rng: np.random.Generator,
    derivative_policy: str = "at_rest",
) -> FieldState:
    """Random bounded real field: mode values uniform on [-1, 1] per real and
    imaginary part, conjugate-mirrored, then rescaled so max |g(x, 0)| = 1."""
    report = check_stability(spec, b)
    if not report.feasible:
        raise InfeasiblePde(f"growing modes at k = {report.offending}")
    re = rng.uniform(-1.0, 1.0, size=b + 1)
    im = rng.uniform(-1.0, 1.0, size=b + 1)
    im[0] = 0.0
    state = field_from_mode_values(b, spec, re + 1j * im, derivative_policy)
    xs = np.arange(NORMALIZATION_GRID) / NORMALIZATION_GRID
    peak = float(np.max(np.abs(evaluate(state, xs, 0.0))))
    if peak > 0.0:
        state = FieldState(
            b=b, spec=spec, coeffs=state.coeffs / peak, roots=state.roots, real_field=True
        )
    return state


def scenario_field(
    scenario_id: str,
    pde: int | PdeSpec | None = None,
    derivative_policy: str = "at_rest",
) -> FieldState:
    """Catalog field built from the exact reference mode values.

    ``pde`` selects the governing PDE (catalog index or explicit spec); by
    default each coefficient set pairs with its usual catalog equation.
    """
    if scenario_id not in SCENARIO_COEFFICIENTS:
        raise UnknownScenario(f"unknown scenario {scenario_id!r}")
    if pde is None:
        pde = SCENARIO_DEFAULT_PDE[scenario_id]
    if isinstance(pde, int):
        if pde not in PDE_CATALOG:
            raise UnknownScenario(f"unknown catalog PDE index {pde}")
        spec = PDE_CATALOG[pde]
    else:
        spec = pde
    values = np.array(SCENARIO_COEFFICIENTS[scenario_id], dtype=complex)
    return field_from_mode_values(3, spec, values, derivative_policy)


def field_to_record(state: FieldState) -> dict:
    """Plain-data snapshot (re/im pairs) for replayable experiment logs."""
    return {
        "format": "fieldrecon.field/1",
        "b": state.b,
        "m": state.m,
        "real_field": state.real_field,
        "p_coeffs": list(state.spec.p_coeffs),
        "q_coeffs": list(state.spec.q_coeffs),
        "coeffs": [[[c.real, c.imag] for c in row] for row in state.coeffs],
    }


def field_from_record(record: dict) -> FieldState:
    required = {"format", "b", "m", "real_field", "p_coeffs", "q_coeffs", "coeffs"}
    missing = required - record.keys()
    if missing:
        raise ValueError(f"field record missing keys {sorted(missing)}")
    if record["format"] != "fieldrecon.field/1":
        raise ValueError(f"unsupported field record format {record['format']!r}")
    spec = PdeSpec(tuple(record["p_coeffs"]), tuple(record["q_coeffs"]))
    b = int(record["b"])
    if int(record["m"]) != spec.degree:
        raise ValueError("recorded m disagrees with the PDE order")
    coeffs = np.array(
        [[complex(re, im) for re, im in row] for row in record["coeffs"]], dtype=complex
    )
    roots = tuple(characteristic_roots(spec, k) for k in range(-b, b + 1))
    return FieldState(
        b=b, spec=spec, coeffs=coeffs, roots=roots, real_field=bool(record["real_field"])
    )


def field_to_json(state: FieldState) -> str:
    return json.dumps(field_to_record(state), indent=2, sort_keys=True)


def field_from_json(text: str) -> FieldState:
    return field_from_record(json.loads(text))
