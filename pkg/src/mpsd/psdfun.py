"""Matrix-valued functions on R^n: block Grams, (conditional) positivity tests,
Schoenberg-shifted Grams, Hadamard-exponential semigroups, and growth bounds.

All verdicts on functions are necessarily finite: a check runs over a given
point set and means "no violation found at these points", never a proof of
positivity over all of R^n. Point sets are explicit inputs and random ones
carry a mandatory seed, so every verdict is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .matcore import (
    InputError,
    PsdVerdict,
    Report,
    as_cmatrix,
    cpsd_check,
    default_tol,
    difference_basis,
    hadamard_exp,
    op_norm,
    psd_check,
)

# Declared metadata keys for MatrixFunction.properties.
HERMITIAN_SYMMETRIC = "hermitian_symmetric"  # F(-x) = F(x)*
CPSD_CLAIMED = "cpsd_claimed"
PSD_CLAIMED = "psd_claimed"


@dataclass(frozen=True)
class MatrixFunction:
    """An evaluatable map R^n -> C^{m x m} with declared symmetry metadata."""

    n: int
    m: int
    evaluator: Callable[[np.ndarray], np.ndarray]
    catalog_id: str | None = None
    properties: frozenset = frozenset()

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (self.n,):
            raise InputError(f"point has shape {x.shape}, expected ({self.n},)")
        A = as_cmatrix(self.evaluator(x), name=f"{self.catalog_id or 'function'}({x})")
        if A.shape[0] != self.m:
            raise InputError(f"evaluator returned {A.shape[0]}x{A.shape[0]}, expected m={self.m}")
        return A

    def claims(self, prop: str) -> bool:
        return prop in self.properties


@dataclass(frozen=True)
class PointSet:
    """A finite list of points in R^n."""

    n: int
    points: np.ndarray  # (N, n) float

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.shape[1] != self.n or pts.shape[0] < 1:
            raise InputError(f"points must have shape (N>=1, {self.n}), got {pts.shape}")
        if not np.isfinite(pts).all():
            raise InputError("point coordinates must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def N(self) -> int:
        return self.points.shape[0]

    def to_json_dict(self) -> dict:
        return {"n": self.n, "points": self.points.tolist()}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "PointSet":
        try:
            return cls(n=int(obj["n"]), points=np.asarray(obj["points"], dtype=float))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed point-set JSON: {exc}") from exc


def random_point_set(n: int, N: int, radius: float, seed: int) -> PointSet:
    """Seeded uniform sample from the cube [-radius, radius]^n."""
    rng = np.random.default_rng(seed)
    return PointSet(n=n, points=rng.uniform(-radius, radius, size=(N, n)))


@dataclass(frozen=True)
class BlockGram:
    """The mN x mN matrix with (p,q) block F(x_p - x_q)."""

    m: int
    N: int
    matrix: np.ndarray

    def block(self, p: int, q: int) -> np.ndarray:
        m = self.m
        return self.matrix[p * m : (p + 1) * m, q * m : (q + 1) * m]


def gram(F: MatrixFunction, X: PointSet) -> BlockGram:
    """Assemble the block Gram matrix of F over the point set."""
    if F.n != X.n:
        raise InputError(f"dimension mismatch: function n={F.n}, points n={X.n}")
    N, m = X.N, F.m
    G = np.empty((N * m, N * m), dtype=np.complex128)
    cache: dict[tuple, np.ndarray] = {}
    for p in range(N):
        for q in range(N):
            d = X.points[p] - X.points[q]
            key = tuple(d)
            block = cache.get(key)
            if block is None:
                block = F(d)
                cache[key] = block
            G[p * m : (p + 1) * m, q * m : (q + 1) * m] = block
    return BlockGram(m=m, N=N, matrix=G)


def schoenberg_gram(F: MatrixFunction, X: PointSet) -> BlockGram:
    """Shifted Gram with (p,q) block F(x_p - x_q) - F(x_p) - F(x_q)*."""
    base = gram(F, X)
    m, N = base.m, base.N
    vals = [F(x) for x in X.points]
    G = base.matrix.copy()
    for p in range(N):
        for q in range(N):
            G[p * m : (p + 1) * m, q * m : (q + 1) * m] -= vals[p] + vals[q].conj().T
    return BlockGram(m=m, N=N, matrix=G)


def psd_function_check(F: MatrixFunction, X: PointSet, tol: float | None = None) -> PsdVerdict:
    """PSD test of the block Gram of F over X."""
    return psd_check(gram(F, X).matrix, tol)


def _symmetry_defect(F: MatrixFunction, X: PointSet) -> float:
    """max over sampled differences x of ||F(-x) - F(x)*||_op."""
    worst = 0.0
    seen = set()
    for p in range(X.N):
        for q in range(X.N):
            d = X.points[p] - X.points[q]
            key = tuple(d)
            if key in seen:
                continue
            seen.add(key)
            worst = max(worst, op_norm(F(-d) - F(d).conj().T))
    return worst


def cpsd_function_check(F: MatrixFunction, X: PointSet, tol: float | None = None) -> Report:
    """Conditional PSD test of F over X.

    Two sub-checks: (alpha) the symmetry F(-x) = F(x)* on all sampled
    differences, and (beta) the Gram quadratic form restricted to the single
    linear constraint sum_{p,j} c_{p,j} = 0 on C^{mN} is nonnegative.
    """
    G = gram(F, X).matrix
    if tol is None:
        tol = default_tol(G)
    defect = _symmetry_defect(F, X)
    symmetric = defect <= tol

    mN = G.shape[0]
    H = (G + G.conj().T) / 2
    if mN == 1:
        min_eig, witness = 0.0, np.ones(1, dtype=np.complex128)
    else:
        B = difference_basis(mN)
        R = B.conj().T @ H @ B
        w, V = np.linalg.eigh((R + R.conj().T) / 2)
        min_eig = float(w[0])
        witness = B @ V[:, 0]
        witness = witness / np.linalg.norm(witness)
    constrained_ok = min_eig >= -tol

    rep = Report(kind="cpsd_function_check", meta={"tol": tol, "N": X.N, "m": F.m})
    rep.add("symmetry", symmetric, defect=defect)
    rep.add(
        "constrained_psd",
        constrained_ok,
        min_eig=min_eig,
        witness=witness,
        constraint="sum of all mN coordinates is zero",
    )
    return rep


def weak_cpsd_check(
    F: MatrixFunction, X: PointSet, directions, tol: float | None = None
) -> Report:
    """Directional conditional PSD test.

    For each unit direction f, the scalar N x N matrix {(f, F(x_p - x_q) f)}
    is tested for conditional positivity with the scalar constraint
    sum_p c_p = 0. Verdict is the conjunction over directions.
    """
    G = gram(F, X)
    if tol is None:
        tol = default_tol(G.matrix)
    rep = Report(kind="weak_cpsd_check", meta={"tol": tol, "N": X.N, "m": F.m})
    for i, f in enumerate(directions):
        f = np.asarray(f, dtype=np.complex128).ravel()
        if f.shape != (F.m,):
            raise InputError(f"direction {i} has shape {f.shape}, expected ({F.m},)")
        if abs(np.linalg.norm(f) - 1.0) > 1e-8:
            raise InputError(f"direction {i} must be unit-norm")
        S = np.empty((X.N, X.N), dtype=np.complex128)
        for p in range(X.N):
            for q in range(X.N):
                S[p, q] = f.conj() @ G.block(p, q) @ f
        herm_defect = op_norm((S - S.conj().T) / 2)
        if herm_defect > tol:
            rep.add(f"direction_{i}", False, defect=herm_defect, reason="non-Hermitian scalar Gram")
            continue
        v = cpsd_check(S, tol)
        rep.add(f"direction_{i}", v.verdict, min_eig=v.min_eigenvalue, witness=v.witness)
    return rep


def hadamard_exp_function(F: MatrixFunction, t: float) -> MatrixFunction:
    """Pointwise Hadamard exponential x -> exp_H(t F(x))."""
    if t < 0:
        raise InputError("t must be nonnegative")
    props = set()
    if F.claims(HERMITIAN_SYMMETRIC):
        props.add(HERMITIAN_SYMMETRIC)
    if F.claims(CPSD_CLAIMED):
        props.add(PSD_CLAIMED)
    return MatrixFunction(
        n=F.n,
        m=F.m,
        evaluator=lambda x: hadamard_exp(F.evaluator(x), t),
        catalog_id=f"exp_H({t:g}*{F.catalog_id or 'F'})",
        properties=frozenset(props),
    )


def f0_nonpositive(F: MatrixFunction, tol: float | None = None) -> PsdVerdict:
    """Check F(0) <= 0 via the PSD test of -F(0)."""
    return psd_check(-F(np.zeros(F.n)), tol)


def schoenberg_equivalence_report(
    F: MatrixFunction, X: PointSet, t_grid, tol: float | None = None
) -> Report:
    """Cross-check the three Schoenberg-type conditions on a point set.

    (i) conditional positivity of F, (ii) positivity of exp_H(tF) for each t
    in t_grid, (iii) when F(0) <= 0, positivity of the shifted Gram. The
    consistency flags record (i) <=> all-of-(ii) and (i) and F(0)<=0 => (iii);
    an inconsistency at tolerance is reported, never silently repaired.
    """
    if tol is None:
        tol = default_tol(gram(F, X).matrix)
    rep = Report(kind="schoenberg_equivalence", meta={"tol": tol, "t_grid": list(t_grid)})

    cpsd_rep = cpsd_function_check(F, X, tol)
    cond_i = cpsd_rep.passed
    rep.add("cpsd", True, verdict=cond_i, detail=cpsd_rep.checks)

    exp_verdicts = []
    for t in t_grid:
        v = psd_function_check(hadamard_exp_function(F, t), X, tol)
        exp_verdicts.append(v.verdict)
        rep.add(f"exp_psd_t={t:g}", True, verdict=v.verdict, min_eig=v.min_eigenvalue)
    cond_ii = all(exp_verdicts)

    f0_ok = f0_nonpositive(F, tol).verdict
    cond_iii = None
    if f0_ok:
        v = psd_check(schoenberg_gram(F, X).matrix, tol)
        cond_iii = v.verdict
        rep.add("shifted_gram_psd", True, verdict=v.verdict, min_eig=v.min_eigenvalue)

    rep.add("consistency_i_iff_ii", cond_i == cond_ii, cpsd=cond_i, exp_all=cond_ii)
    if f0_ok:
        rep.add(
            "consistency_i_implies_iii",
            (not cond_i) or bool(cond_iii),
            cpsd=cond_i,
            shifted=cond_iii,
        )
    rep.meta["f0_nonpositive"] = f0_ok
    return rep


def growth_bound_estimate(
    F: MatrixFunction, radii, samples_per_radius: int, seed: int
) -> Report:
    """Sampled quadratic growth ratio sup ||F(x)|| / (1 + |x|^2) against the
    local constant C' = sup_{|y| <= 2} ||F(y)||."""
    rng = np.random.default_rng(seed)
    n = F.n

    def sphere_sample(r: float) -> np.ndarray:
        u = rng.standard_normal(n)
        u /= max(np.linalg.norm(u), 1e-300)
        return r * u

    c_prime = op_norm(F(np.zeros(n)))
    for _ in range(256):
        r = 2.0 * rng.uniform() ** (1.0 / n)
        c_prime = max(c_prime, op_norm(F(sphere_sample(r))))
    for _ in range(64):
        c_prime = max(c_prime, op_norm(F(sphere_sample(2.0))))

    ratio_sup, worst_x = 0.0, np.zeros(n)
    for r in radii:
        for _ in range(samples_per_radius):
            x = sphere_sample(float(r))
            ratio = op_norm(F(x)) / (1.0 + float(x @ x))
            if ratio > ratio_sup:
                ratio_sup, worst_x = ratio, x
    rep = Report(
        kind="growth_bound_estimate",
        meta={"seed": seed, "radii": [float(r) for r in radii]},
    )
    rep.add(
        "ratio_within_local_bound",
        ratio_sup <= c_prime * (1 + 1e-9) + 1e-12,
        ratio_sup=ratio_sup,
        c_prime=c_prime,
        worst_x=worst_x,
    )
    return rep


def lemma_4_13_check(F: MatrixFunction, pairs, tol: float | None = None) -> Report:
    """Necessary inequalities for a conditionally PSD F with F(0) <= 0.

    Per pair (x, y), in operator norm with slack tol:
      (a) F(0) - 2 Re F(x) >= 0,
      (b) ||F(0) - 2 Re F(x)|| <= 2 ||F(x)||,
      (c) ||F(x-y) - F(x) - F(y)*|| <= 2 ||F(x)||^{1/2} ||F(y)||^{1/2},
      (d) ||F(x+y)||^{1/2} <= ||F(x)||^{1/2} + ||F(y)||^{1/2}.
    Violations are reported, signalling that the conditional-positivity claim
    is false; no exception is raised.
    """
    pairs = list(pairs)
    F0 = F(np.zeros(F.n))
    if tol is None:
        tol = default_tol(F0)
    rep = Report(kind="lemma_4_13_check", meta={"tol": tol, "pairs": len(pairs)})
    worst = {"shifted_nonneg": 0.0, "re_bound": 0.0, "cross_bound": 0.0, "subadditive": 0.0}
    for x, y in pairs:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        Fx, Fy = F(x), F(y)
        nx, ny = op_norm(Fx), op_norm(Fy)
        re_x = (Fx + Fx.conj().T) / 2

        v = psd_check(F0 - 2 * re_x, tol)
        worst["shifted_nonneg"] = min(worst["shifted_nonneg"], v.min_eigenvalue)
        worst["re_bound"] = max(worst["re_bound"], op_norm(F0 - 2 * re_x) - 2 * nx)
        worst["cross_bound"] = max(
            worst["cross_bound"],
            op_norm(F(x - y) - Fx - Fy.conj().T) - 2 * np.sqrt(nx) * np.sqrt(ny),
        )
        worst["subadditive"] = max(
            worst["subadditive"], np.sqrt(op_norm(F(x + y))) - np.sqrt(nx) - np.sqrt(ny)
        )
    rep.add("shifted_nonneg", worst["shifted_nonneg"] >= -tol, worst_min_eig=worst["shifted_nonneg"])
    rep.add("re_bound", worst["re_bound"] <= tol, worst_excess=worst["re_bound"])
    rep.add("cross_bound", worst["cross_bound"] <= tol, worst_excess=worst["cross_bound"])
    rep.add("subadditive", worst["subadditive"] <= tol, worst_excess=worst["subadditive"])
    return rep


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CatalogEntry:
    """A named constructor with analytically certain ground-truth properties."""

    id: str
    factory: Callable[..., MatrixFunction]
    defaults: dict
    truth: dict
    notes: str

    def make(self, **params) -> MatrixFunction:
        kw = dict(self.defaults)
        kw.update(params)
        return self.factory(**kw)


def _example_2_13(n: int = 1) -> MatrixFunction:
    A = np.log(0.5) * np.eye(2, dtype=np.complex128)
    return MatrixFunction(
        n=n,
        m=2,
        evaluator=lambda x: A,
        catalog_id="example_2_13",
        properties=frozenset({HERMITIAN_SYMMETRIC}),
    )


def _remark_4_5b(s: float = 1.0) -> MatrixFunction:
    if s <= 0:
        raise InputError("s must be positive")
    S = np.array([[0.0, 1j * s], [-1j * s, 0.0]], dtype=np.complex128)
    return MatrixFunction(
        n=1,
        m=2,
        evaluator=lambda x: 1j * float(x[0]) * S,
        catalog_id="remark_4_5b",
        properties=frozenset({HERMITIAN_SYMMETRIC}),
    )


def _example_4_17_i(a: float, b: float, c: float, y0) -> MatrixFunction:
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    if min(a, b, c) <= 0 or a * c < b * b:
        raise InputError("requires a, b, c > 0 with a*c >= b^2")
    L = np.log(np.array([[a, b], [b, c]], dtype=np.complex128))

    def ev(x):
        return -1j * float(x @ y0) * np.ones((2, 2)) + L

    return MatrixFunction(
        n=y0.shape[0],
        m=2,
        evaluator=ev,
        catalog_id="example_4_17_i",
        properties=frozenset({HERMITIAN_SYMMETRIC, CPSD_CLAIMED}),
    )


def _example_4_17_ii(generator: dict, m: int, n: int | None = None) -> MatrixFunction:
    """Scalar conditionally-PSD generator times the all-ones m x m matrix.

    The generator combines the analytically certain families
    alpha + i (beta . x) - (x . (A x)) with real alpha, real beta, and PSD A.
    """
    alpha = float(generator.get("const", 0.0))
    lin = generator.get("linear")
    quad = generator.get("quadratic")
    if n is None:
        if lin is not None:
            n = len(lin)
        elif quad is not None:
            n = len(quad)
        else:
            n = 1
    beta = np.zeros(n) if lin is None else np.atleast_1d(np.asarray(lin, dtype=float))
    if beta.shape != (n,):
        raise InputError("linear coefficient dimension mismatch")
    A = np.zeros((n, n)) if quad is None else np.asarray(quad, dtype=float)
    if A.shape != (n, n):
        raise InputError("quadratic coefficient must be n x n")
    if quad is not None and not psd_check(A.astype(complex)).verdict:
        raise InputError("quadratic coefficient must be PSD")
    H = np.ones((m, m), dtype=np.complex128)

    def ev(x):
        g0 = alpha + 1j * float(beta @ x) - float(x @ (A @ x))
        return g0 * H

    return MatrixFunction(
        n=n,
        m=m,
        evaluator=ev,
        catalog_id="example_4_17_ii",
        properties=frozenset({HERMITIAN_SYMMETRIC, CPSD_CLAIMED}),
    )


def _constant(A, n: int = 1) -> MatrixFunction:
    A = as_cmatrix(A)
    props = {HERMITIAN_SYMMETRIC} if op_norm(A - A.conj().T) < 1e-12 else set()
    if psd_check(A).verdict:
        props |= {PSD_CLAIMED, CPSD_CLAIMED}
    elif op_norm(A - A.conj().T) < 1e-12 and cpsd_check(A).verdict:
        props.add(CPSD_CLAIMED)
    return MatrixFunction(
        n=n,
        m=A.shape[0],
        evaluator=lambda x: A,
        catalog_id="constant",
        properties=frozenset(props),
    )


def _bochner(mu) -> MatrixFunction:
    """Transform of a nonnegative atomic measure; positive semidefinite by construction."""
    props = {HERMITIAN_SYMMETRIC, PSD_CLAIMED, CPSD_CLAIMED} if mu.is_nonnegative().verdict else set()
    return MatrixFunction(
        n=mu.n,
        m=mu.m,
        evaluator=lambda x: mu.fourier(x),
        catalog_id="bochner",
        properties=frozenset(props),
    )


CATALOG: dict[str, CatalogEntry] = {
    "example_2_13": CatalogEntry(
        id="example_2_13",
        factory=_example_2_13,
        defaults={"n": 1},
        truth={
            "cpsd": False,
            "weak_cpsd": True,
            "psd": False,
            "f0_nonpositive": True,
            "hermitian_symmetric": True,
        },
        notes="constant log(1/2) * I_2; weakly conditionally PSD but not conditionally PSD",
    ),
    "remark_4_5b": CatalogEntry(
        id="remark_4_5b",
        factory=_remark_4_5b,
        defaults={"s": 1.0},
        truth={
            "cpsd": False,
            "psd": False,
            "f0_nonpositive": True,
            "hermitian_symmetric": True,
            "shifted_gram_zero": True,
        },
        notes="F(x) = i x S with S_{12} = i s; shifted Gram vanishes identically yet F is not conditionally PSD",
    ),
    "example_4_17_i": CatalogEntry(
        id="example_4_17_i",
        factory=_example_4_17_i,
        defaults={"a": 2.0, "b": 1.0, "c": 2.0, "y0": [1.0]},
        truth={"cpsd": True, "hermitian_symmetric": True},
        notes="2x2 drift-plus-log family, conditionally PSD whenever a*c >= b^2",
    ),
    "example_4_17_ii": CatalogEntry(
        id="example_4_17_ii",
        factory=_example_4_17_ii,
        defaults={"generator": {"quadratic": [[1.0]]}, "m": 2},
        truth={"cpsd": True, "hermitian_symmetric": True},
        notes="scalar conditionally-PSD generator alpha + i(beta.x) - x.(Ax) times the all-ones matrix",
    ),
    "constant": CatalogEntry(
        id="constant",
        factory=_constant,
        defaults={"A": [[0.0]], "n": 1},
        truth={},
        notes="constant matrix; positivity properties inherited from the matrix itself",
    ),
    "bochner": CatalogEntry(
        id="bochner",
        factory=_bochner,
        defaults={},
        truth={"psd": True, "cpsd": True},
        notes="Fourier transform of a nonnegative atomic matrix measure (positive semidefinite)",
    ),
}


def make_function(catalog_id: str, **params) -> MatrixFunction:
    entry = CATALOG.get(catalog_id)
    if entry is None:
        raise InputError(f"unknown catalog id {catalog_id!r}; known: {sorted(CATALOG)}")
    return entry.make(**params)


@dataclass(frozen=True)
class DefaultCase:
    """A concrete catalog instantiation with pinned parameters and ground truth."""

    label: str
    function: MatrixFunction
    cpsd: bool
    f0_nonpositive: bool


def default_cases() -> list[DefaultCase]:
    """The standard battery used by the verification suite (m <= 4, n <= 3)."""
    ones_m2 = np.ones((2, 2))
    return [
        DefaultCase("example_2_13", make_function("example_2_13"), cpsd=False, f0_nonpositive=True),
        DefaultCase("remark_4_5b(s=1)", make_function("remark_4_5b", s=1.0), cpsd=False, f0_nonpositive=True),
        DefaultCase(
            "example_4_17_i(2,1,2)",
            make_function("example_4_17_i", a=2.0, b=1.0, c=2.0, y0=[1.0]),
            cpsd=True,
            f0_nonpositive=False,
        ),
        DefaultCase(
            "example_4_17_i(0.5,0.5,0.5)_n2",
            make_function("example_4_17_i", a=0.5, b=0.5, c=0.5, y0=[1.0, -0.5]),
            cpsd=True,
            f0_nonpositive=True,
        ),
        DefaultCase(
            "example_4_17_ii(quadratic)_m3",
            make_function("example_4_17_ii", generator={"quadratic": np.eye(1).tolist()}, m=3),
            cpsd=True,
            f0_nonpositive=True,
        ),
        DefaultCase(
            "example_4_17_ii(mixed)_m4_n3",
            make_function(
                "example_4_17_ii",
                generator={
                    "const": -0.5,
                    "linear": [1.0, 0.0, -1.0],
                    "quadratic": np.diag([1.0, 0.5, 2.0]).tolist(),
                },
                m=4,
            ),
            cpsd=True,
            f0_nonpositive=True,
        ),
        DefaultCase(
            "constant(-ones)",
            make_function("constant", A=-ones_m2, n=1),
            cpsd=True,
            f0_nonpositive=True,
        ),
        DefaultCase(
            "constant(ones_3x3)_n2",
            make_function("constant", A=np.ones((3, 3)), n=2),
            cpsd=True,
            f0_nonpositive=False,
        ),
    ]
