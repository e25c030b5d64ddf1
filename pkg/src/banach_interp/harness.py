"""Named verification runs with reproducible reports.

Every run draws its random inputs from ``numpy.random.default_rng([seed,
...])`` streams keyed by trial index, so a configuration determines the
report bit for bit.  Inequalities are always checked in the certified
direction: a computed lower bound on the smaller side against a computed
upper bound on the larger side.  A check whose constant is only an estimate
(a sampled lower bound on a type or convexity constant) is recorded as
``"conditional"`` and never as a pass.

Run identifiers
---------------
``thm31-case1``, ``thm31-case2``, ``thm31-case3``
    Operator norms between interpolated spaces against the interpolated
    operator norms, with the three case constants.
``cor36``
    The same comparison for 2-summing norms.
``logconvex-bm``
    Log-convexity of the Banach-Mazur distance to Hilbert space along an
    interpolation scale.
``cor51-part1``, ``cor51-part2``, ``cor52-part1``, ``cor52-part2``
    Interpolation of injective / projective tensor products of ``l_p``
    (resp. Schatten) spaces.
``pietsch-chain``
    The two chains comparing ``pi_2``, Gaussian averages and square functions.

The environment variable ``BANACH_INTERP_THREADS`` sets the number of
worker processes used for independent trials (default 1).
"""
from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .estimates import to_jsonable
from .factorization import ell_gaussian, gamma2_norm, m2_convexity_constant, pi2_norm, type2_constant
from .handles import OperatorNorm, Pi2Norm
from .interp import InterpolationPair, closed_form_interpolant, interp_matrix_norm
from .spaces import Family, SpaceDescriptor, dual_space, lp, norm, schatten, square_function_norm, weighted_l2
from .tensor import operator_norm, projective_norm, trace_pairing

__all__ = [
    "ExperimentConfig",
    "VerificationReport",
    "parse_space",
    "format_space",
    "EXPERIMENTS",
    "default_config",
    "verify",
    "verify_thm31",
    "verify_cor36",
    "verify_logconvex_bm",
    "verify_cor51",
    "verify_cor52",
    "verify_pietsch_chain",
    "run_all",
]

CSV_COLUMNS = ("trial", "theta", "lhs", "rhs", "constant", "margin", "status")


# ---------------------------------------------------------------------------
# Space strings


def parse_space(text) -> SpaceDescriptor:
    """Parse ``"lp:n:p"``, ``"wl2:w1,w2,..."``, ``"schatten:k:p"`` or a JSON dict.

    Examples
    --------
    >>> parse_space("lp:2:inf")
    SpaceDescriptor(family=<Family.LP: 'Lp'>, dim=2, p=inf, weights=None)
    """
    if isinstance(text, SpaceDescriptor):
        return text
    if isinstance(text, dict):
        return SpaceDescriptor.from_json(text)
    parts = str(text).strip().split(":")
    kind = parts[0].lower()
    if kind == "lp" and len(parts) == 3:
        return lp(int(parts[1]), parts[2])
    if kind == "wl2" and len(parts) == 2:
        return weighted_l2([float(v) for v in parts[1].split(",")])
    if kind == "schatten" and len(parts) == 3:
        return schatten(int(parts[1]), parts[2])
    raise ValueError(f"cannot parse space {text!r}; use lp:n:p, wl2:w1,...,wn or schatten:k:p")


def format_space(X: SpaceDescriptor) -> str:
    """Inverse of :func:`parse_space`."""
    ps = "inf" if math.isinf(X.p) else f"{X.p:g}"
    if X.family is Family.WEIGHTED_L2:
        return "wl2:" + ",".join(f"{w:g}" for w in X.weights)
    if X.family is Family.SCHATTEN:
        return f"schatten:{X.dim}:{ps}"
    return f"lp:{X.dim}:{ps}"


def _interpolate(X0, X1, theta) -> SpaceDescriptor:
    if theta == 0.0:
        return X0
    if theta == 1.0:
        return X1
    X = closed_form_interpolant(InterpolationPair(X0, X1, theta))
    if X is None:
        raise ValueError(f"no closed-form interpolant for {X0} and {X1}")
    return X


# ---------------------------------------------------------------------------
# Configs and reports


@dataclass
class ExperimentConfig:
    """Configuration of one verification run.

    Attributes
    ----------
    experiment : str
        Run identifier (see :data:`EXPERIMENTS`).
    seed : int
        Root seed; mandatory.
    trials : int
        Default number of trials per family.
    thetas : tuple of float
        Interpolation parameters, cycled over trials.
    params : dict
        Run-specific parameters (``families`` etc.).
    tolerances : dict
        Positive tolerances; ``abs`` is the additive slack of every check.
    output : str, optional
        Default report path.
    """

    experiment: str
    seed: int
    trials: int = 100
    thetas: tuple = (0.25, 0.5, 0.75)
    params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=lambda: {"abs": 1e-6})
    output: str | None = None

    def __post_init__(self):
        if self.seed is None or int(self.seed) != self.seed:
            raise ValueError("an integer seed is mandatory")
        self.seed = int(self.seed)
        if self.trials < 0:
            raise ValueError("trials must be nonnegative")
        self.thetas = tuple(float(t) for t in self.thetas)
        if any(not 0.0 <= t <= 1.0 for t in self.thetas):
            raise ValueError("thetas must lie in [0, 1]")
        for k, v in self.tolerances.items():
            if not v > 0:
                raise ValueError(f"tolerance {k} must be positive")

    @property
    def tol(self) -> float:
        return float(self.tolerances.get("abs", 1e-6))

    def to_json(self) -> dict:
        return {
            "experiment": self.experiment,
            "seed": self.seed,
            "trials": self.trials,
            "thetas": list(self.thetas),
            "params": to_jsonable(self.params),
            "tolerances": dict(self.tolerances),
            "output": self.output,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        if "seed" not in obj:
            raise ValueError("an integer seed is mandatory")
        base = default_config(obj["experiment"]) if obj.get("experiment") in EXPERIMENTS else None
        kw = {} if base is None else {k: v for k, v in base.to_json().items()}
        kw.update(obj)
        return cls(
            experiment=kw["experiment"],
            seed=kw["seed"],
            trials=kw.get("trials", 100),
            thetas=tuple(kw.get("thetas", (0.25, 0.5, 0.75))),
            params=dict(kw.get("params", {})),
            tolerances=dict(kw.get("tolerances", {"abs": 1e-6})),
            output=kw.get("output"),
        )


@dataclass
class VerificationReport:
    """Per-trial margins and per-claim verdicts of one run.

    ``rows`` hold ``trial, theta, lhs, rhs, constant, margin, status`` plus
    the check name and family label; ``claims`` map ``check[family]`` to
    ``"pass"``, ``"fail"`` or ``"conditional"``; ``constants`` record each
    constant with its provenance (``closed_form`` or ``estimate``).
    ``runtime`` is kept out of the serialized report so that reruns are
    byte-identical.
    """

    experiment: str
    config: dict
    rows: list = field(default_factory=list)
    constants: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    runtime: float = 0.0

    @property
    def claims(self) -> dict:
        out = {}
        for r in self.rows:
            key = f"{r['check']}[{r['family']}]"
            prev = out.get(key)
            s = r["status"]
            if prev == "fail" or s == "fail":
                out[key] = "fail"
            elif prev == "conditional" or s == "conditional":
                out[key] = "conditional"
            else:
                out[key] = s
        return dict(sorted(out.items()))

    @property
    def passed(self) -> bool:
        return all(v != "fail" for v in self.claims.values())

    def failures(self) -> list:
        return [r for r in self.rows if r["status"] == "fail"]

    def to_json(self, include_runtime: bool = False) -> dict:
        out = {
            "experiment": self.experiment,
            "config": self.config,
            "passed": self.passed,
            "claims": self.claims,
            "constants": self.constants,
            "notes": self.notes,
            "rows": self.rows,
        }
        if include_runtime:
            out["runtime"] = self.runtime
        return to_jsonable(out)

    def dumps(self, include_runtime: bool = False) -> str:
        return json.dumps(self.to_json(include_runtime), sort_keys=True, indent=1)

    def write_json(self, path, include_runtime: bool = False):
        with open(path, "w") as fh:
            fh.write(self.dumps(include_runtime) + "\n")

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for r in self.rows:
                w.writerow([_csv_value(r[c]) for c in CSV_COLUMNS])

    def summary_lines(self) -> list:
        return [f"{self.experiment} {k}: {v}" for k, v in self.claims.items()]


def _csv_value(v):
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else v


def _row(trial, theta, check, family, lhs, rhs, constant, tol, decisive=True):
    lhs, rhs = float(lhs), float(rhs)
    margin = rhs - lhs
    if not decisive:
        status = "conditional"
    else:
        status = "pass" if margin >= -tol else "fail"
    return {
        "trial": int(trial),
        "theta": None if theta is None else float(theta),
        "check": check,
        "family": family,
        "lhs": lhs,
        "rhs": rhs,
        "constant": float(constant),
        "margin": margin,
        "status": status,
    }


# ---------------------------------------------------------------------------
# Constants with provenance


@lru_cache(maxsize=None)
def _type2(text: str):
    est = type2_constant(parse_space(text))
    return est.value_lower, est.is_exact


@lru_cache(maxsize=None)
def _m2(text: str):
    est = m2_convexity_constant(parse_space(text))
    return est.value_lower, est.is_exact


def _constant(kind: str, X: SpaceDescriptor):
    """``(value, exact)``; ``kind`` is ``"T2"`` or ``"M2"``."""
    return (_type2 if kind == "T2" else _m2)(format_space(X))


def _const_record(kind, X):
    v, exact = _constant(kind, X)
    return {"name": kind, "space": format_space(X), "value": v, "provenance": "closed_form" if exact else "estimate"}


def _case_constant(case: int, Es, Fs):
    """Case constant over endpoint spaces; returns ``(c, exact, records)``."""
    recs = []
    vals = []
    exact = True
    for E, F in zip(Es, Fs):
        if case == 1:
            ka, kb = "T2", "T2"
        elif case == 2:
            ka, kb = "T2", "M2"
        else:
            ka, kb = "M2", "M2"
        a, ea = _constant(ka, E)
        b, eb = _constant(kb, F)
        recs += [_const_record(ka, E), _const_record(kb, F)]
        exact = exact and ea and eb
        vals.append(a * b)
    s = max(vals)
    if case == 1:
        c = s ** 2
    elif case == 2:
        c = 2.0 * math.sqrt(2.0 / math.pi) * s ** 2
    else:
        c = 32.0 / math.pi * s ** 2.5
    return c, exact, recs


def _check_case(case: int, Es, Fs):
    if case in (2, 3) and not all(F.is_lattice for F in Fs):
        raise ValueError(f"case {case} needs lattice F endpoints")
    if case == 3 and not all(E.is_lattice for E in Es):
        raise ValueError("case 3 needs lattice E endpoints")


# ---------------------------------------------------------------------------
# Parallel map over trials


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("BANACH_INTERP_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, tasks):
    tasks = list(tasks)
    w = _workers()
    if w <= 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=w) as ex:
        return list(ex.map(fn, *zip(*tasks)))


def _rand(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _family_label(fam) -> str:
    return fam.get("label") or "E=" + "|".join(fam["E"]) + ";F=" + "|".join(fam["F"])


def _families(config: ExperimentConfig):
    fams = config.params.get("families", [])
    out = []
    for f in fams:
        f = dict(f)
        f.setdefault("trials", config.trials)
        f["label"] = _family_label(f)
        out.append(f)
    return out


def _trial_tasks(config, fams, key):
    tasks = []
    for fi, fam in enumerate(fams):
        for k in range(int(fam["trials"])):
            theta = config.thetas[k % len(config.thetas)] if config.thetas else 0.5
            tasks.append((fam, fi, k, theta, config.seed, key))
    return tasks


# ---------------------------------------------------------------------------
# Interpolated operator norms


def _thm31_trial(fam, fi, k, theta, seed, case, tol, c, exact):
    E0, E1 = (parse_space(s) for s in fam["E"])
    F0, F1 = (parse_space(s) for s in fam["F"])
    rng = np.random.default_rng([seed, 31, case, fi, k])
    T = _rand(rng, (F0.dim, E0.dim))
    Et, Ft = _interpolate(E0, E1, theta), _interpolate(F0, F1, theta)
    op = operator_norm(T, Et, dual_space(Ft))
    est = interp_matrix_norm(OperatorNorm(E0, dual_space(F0)), OperatorNorm(E1, dual_space(F1)), theta, T)
    lab = fam["label"]
    return [
        _row(k, theta, "easy", lab, op.lower, est.upper, 1.0, tol),
        _row(k, theta, "hard", lab, est.lower, c * op.upper, c, tol, decisive=exact and op.status != "heuristic"),
    ]


def verify_thm31(case: int, config: ExperimentConfig | None = None) -> VerificationReport:
    """Interpolated operator norms against operator norms between interpolated spaces.

    For each family ``(E0, E1; F0, F1)`` and random ``T``, checks

    * easy: ``||T : E_theta -> F_theta*||`` (lower) ``<= ||T||_[theta]`` (upper);
    * hard: ``||T||_[theta]`` (lower) ``<= c ||T : E_theta -> F_theta*||`` (upper),

    with ``c`` the case constant: ``(max T2(E_i) T2(F_i))^2``,
    ``2 sqrt(2/pi) (max T2(E_i) M2(F_i))^2`` or
    ``32/pi (max M2(E_i) M2(F_i))^(5/2)``.  Hard checks are decisive only when
    every constant is known in closed form.
    """
    if case not in (1, 2, 3):
        raise ValueError("case must be 1, 2 or 3")
    config = config or default_config(f"thm31-case{case}")
    t0 = time.perf_counter()
    rep = VerificationReport(f"thm31-case{case}", config.to_json())
    tasks = []
    for fi, fam in enumerate(_families(config)):
        Es = [parse_space(s) for s in fam["E"]]
        Fs = [parse_space(s) for s in fam["F"]]
        _check_case(case, Es, Fs)
        c, exact, recs = _case_constant(case, Es, Fs)
        rep.constants.append({"family": fam["label"], "case_constant": c, "closed_form": exact, "parts": recs})
        for k in range(int(fam["trials"])):
            theta = config.thetas[k % len(config.thetas)]
            tasks.append((fam, fi, k, theta, config.seed, case, config.tol, c, exact))
    for rows in _map(_thm31_trial, tasks):
        rep.rows.extend(rows)
    rep.runtime = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------------------
# 2-summing norms


def _pi2_handle(X: SpaceDescriptor, target: SpaceDescriptor):
    t = None if (target.family is Family.LP) else target
    return Pi2Norm(X, target.dim, t)


def _pi2_interp_lower(pi_theta, u, F0, F1, theta, Et):
    """Lower bound for the interpolated 2-summing norm of ``u``.

    With ``V`` the contraction from the Pietsch witness at ``theta``, the
    bilinear map ``(V, u) -> (u V e_k)_k`` has norm at most one at both
    endpoints, so ``||u||_[theta] >= ||u V||_{HS, E_theta} / ||V||_[theta]``.
    """
    Sig = pi_theta.lower_witness
    if Sig is None or not isinstance(Sig, np.ndarray):
        return 0.0
    Sig = 0.5 * (Sig + np.conj(Sig.T))
    w, Q = np.linalg.eigh(Sig)
    keep = w > 1e-12 * max(w.max(), 1e-300)
    if not np.any(keep):
        return 0.0
    V = Q[:, keep] * np.sqrt(w[keep])
    r = V.shape[1]
    num = math.sqrt(float(np.sum(Et.weight_array[:, None] * np.abs(u @ V) ** 2)))
    nu0 = OperatorNorm(lp(r, 2), dual_space(F0))
    nu1 = OperatorNorm(lp(r, 2), dual_space(F1))
    den = interp_matrix_norm(nu0, nu1, theta, V, bounds="upper").upper
    return num / den if den > 0 else 0.0


def _cor36_trial(fam, fi, k, theta, seed, tol, cF, cF_exact, cE, cE_exact):
    E0, E1 = (parse_space(s) for s in fam["E"])
    F0, F1 = (parse_space(s) for s in fam["F"])
    rng = np.random.default_rng([seed, 36, fi, k])
    u = _rand(rng, (E0.dim, F0.dim))
    Et, Ft = _interpolate(E0, E1, theta), _interpolate(F0, F1, theta)
    pt = pi2_norm(u, dual_space(Ft), target=None if Et.family is Family.LP else Et)
    nu0 = _pi2_handle(dual_space(F0), E0)
    nu1 = _pi2_handle(dual_space(F1), E1)
    up = interp_matrix_norm(nu0, nu1, theta, u, bounds="upper").upper
    lo = _pi2_interp_lower(pt, u, F0, F1, theta, Et)
    lab = fam["label"]
    return [
        _row(k, theta, "lower-sandwich", lab, pt.lower / cF, up, cF, tol, decisive=cF_exact),
        _row(k, theta, "upper-sandwich", lab, lo, cE * pt.upper, cE, tol, decisive=cE_exact),
    ]


def _cor36_constant(Xs):
    """``C(X)``: ``(max T2)^2``, or ``2 sqrt(2/pi) (max M2)^2`` for lattices.

    The smaller closed-form choice wins; returns ``(c, exact, records)``.
    """
    t2 = [_constant("T2", X) for X in Xs]
    options = [(max(v for v, _ in t2) ** 2, all(e for _, e in t2), [_const_record("T2", X) for X in Xs])]
    if all(X.is_lattice for X in Xs):
        m2 = [_constant("M2", X) for X in Xs]
        c = 2.0 * math.sqrt(2.0 / math.pi) * max(v for v, _ in m2) ** 2
        options.append((c, all(e for _, e in m2), [_const_record("M2", X) for X in Xs]))
    return _best_constant(options)


def verify_cor36(config: ExperimentConfig | None = None) -> VerificationReport:
    """Interpolated 2-summing norms ``Pi_2(F_i*, E_i)`` against ``pi_2(T : F_theta* -> E_theta)``.

    Checks ``pi_2 / C(F) <= ||T||_[theta]`` and ``||T||_[theta] <= C(E*) pi_2``,
    each in the certified direction.  ``E`` endpoints must be Hilbert
    (weighted ``l_2``) so that the 2-summing norms have exact evaluators.
    """
    config = config or default_config("cor36")
    t0 = time.perf_counter()
    rep = VerificationReport("cor36", config.to_json())
    tasks = []
    for fi, fam in enumerate(_families(config)):
        Es = [parse_space(s) for s in fam["E"]]
        Fs = [parse_space(s) for s in fam["F"]]
        if not all(E.is_hilbert and E.is_lattice for E in Es):
            raise ValueError("2-summing families need Hilbert E endpoints")
        cF, eF, rF = _cor36_constant(Fs)
        cE, eE, rE = _cor36_constant([dual_space(E) for E in Es])
        rep.constants.append({"family": fam["label"], "C(F)": cF, "C(E*)": cE, "closed_form": eF and eE, "parts": rF + rE})
        for k in range(int(fam["trials"])):
            theta = config.thetas[k % len(config.thetas)]
            tasks.append((fam, fi, k, theta, config.seed, config.tol, cF, eF, cE, eE))
    for rows in _map(_cor36_trial, tasks):
        rep.rows.extend(rows)
    rep.runtime = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------------------
# Banach-Mazur log-convexity


def _bm_distance(X: SpaceDescriptor, seed):
    return gamma2_norm(np.eye(X.dim, dtype=complex), X, dual_space(X), seed=seed)


def verify_logconvex_bm(config: ExperimentConfig | None = None) -> VerificationReport:
    """Midpoint log-convexity of ``theta -> d([E0, E1]_theta, l_2^n)``.

    ``d`` is ``gamma_2`` of the identity.  For consecutive grid points
    ``theta_1 < theta_mid < theta_2`` checks
    ``lower(theta_mid)^2 <= upper(theta_1) upper(theta_2) (1 + rel)``;
    for ``l_p`` scales the estimates are also compared with the closed form
    ``n^|1/p - 1/2|`` (within ``rel``).
    """
    config = config or default_config("logconvex-bm")
    t0 = time.perf_counter()
    rep = VerificationReport("logconvex-bm", config.to_json())
    rel = float(config.tolerances.get("rel", 0.05))
    thetas = sorted(config.thetas)
    for fi, fam in enumerate(_families(config)):
        X0, X1 = (parse_space(s) for s in fam["E"])
        lab = fam["label"]
        ests = [_bm_distance(_interpolate(X0, X1, th), config.seed) for th in thetas]
        for j in range(1, len(thetas) - 1):
            a, m, b = ests[j - 1], ests[j], ests[j + 1]
            rep.rows.append(_row(j, thetas[j], "log-convex", lab, m.lower ** 2, a.upper * b.upper * (1 + rel), 1 + rel, 0.0))
        for j, th in enumerate(thetas):
            X = _interpolate(X0, X1, th)
            if X.family is not Family.LP:
                continue
            r = 0.0 if math.isinf(X.p) else 1.0 / X.p
            cf = X.dim ** abs(r - 0.5)
            rep.rows.append(_row(j, th, "closed-form-upper", lab, ests[j].upper, cf * (1 + rel), 1 + rel, 0.0))
            rep.rows.append(_row(j, th, "closed-form-lower", lab, cf * (1 - rel), ests[j].lower, 1 - rel, 0.0))
    rep.runtime = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------------------
# Tensor products of l_p and Schatten spaces


def _rank_one_dual_lower(T, witness, Es, Fs, theta):
    """Lower bound for the interpolated injective norm from a rank-one functional.

    ``S = eta (x) x`` pairs with ``T`` as ``eta^T T x``.  Its dual norm at the
    endpoints is at most ``||x||_{E_i*} ||eta||_{F_i*}``, the dual of the
    interpolated norm is the interpolated dual norm, and interpolated norms
    are bounded by the geometric mean of the endpoint norms.
    """
    if not witness:
        return 0.0
    x, eta = witness["x"], witness["functional"]
    val = abs(complex(eta @ (T @ x)))
    ends = []
    for E, F in zip(Es, Fs):
        D, Fd = dual_space(E), dual_space(F)
        ends.append(norm(D, x.reshape(D.shape)) * norm(Fd, eta.reshape(Fd.shape)))
    den = ends[0] ** (1.0 - theta) * ends[1] ** theta
    return val / den if den > 0 else 0.0


def _tensor_trial(fam, fi, k, theta, seed, part, tol, c, exact, tag):
    E0, E1 = (parse_space(s) for s in fam["E"])
    F0, F1 = (parse_space(s) for s in fam["F"])
    rng = np.random.default_rng([seed, 51 if tag == "cor51" else 52, part, fi, k])
    T = _rand(rng, (F0.size, E0.size))
    if fam.get("rank_one"):
        T = np.outer(_rand(rng, F0.size), _rand(rng, E0.size))
    Et, Ft = _interpolate(E0, E1, theta), _interpolate(F0, F1, theta)
    lab = fam["label"]
    if part == 1:
        # injective norm: operator norm E* -> F
        direct = operator_norm(T, dual_space(Et), Ft)
        est = interp_matrix_norm(OperatorNorm(dual_space(E0), F0), OperatorNorm(dual_space(E1), F1), theta, T)
        lower = max(est.lower, _rank_one_dual_lower(T, direct.lower_witness, (E0, E1), (F0, F1), theta))
        decisive = exact and direct.status != "heuristic"
        return [
            _row(k, theta, "easy", lab, direct.lower, est.upper, 1.0, tol),
            _row(k, theta, "hard", lab, lower, c * direct.upper, c, tol, decisive=decisive),
        ]
    # projective norm: dual of the operator norm E -> F*
    direct = projective_norm(T, Et, Ft)
    p0 = projective_norm(T, E0, F0)
    p1 = projective_norm(T, E1, F1)
    S = direct.lower_witness
    num = abs(trace_pairing(S, T))
    den = interp_matrix_norm(OperatorNorm(E0, dual_space(F0)), OperatorNorm(E1, dual_space(F1)), theta, S, bounds="upper").upper
    lower = num / den if den > 0 else 0.0
    upper = p0.upper ** (1 - theta) * p1.upper ** theta
    return [
        _row(k, theta, "easy", lab, lower, direct.upper, 1.0, tol),
        _row(k, theta, "hard", lab, direct.lower, c * upper, c, tol, decisive=exact),
    ]


def _best_constant(options):
    """Smallest closed-form option, else the smallest estimate (conditional)."""
    exact = [o for o in options if o[1]]
    pool = exact or options
    return min(pool, key=lambda o: o[0])


def _tensor_constant(part, Es, Fs):
    """Constant of the operator-norm pair behind the tensor norms.

    Part 1 (injective) interpolates ``L(E_i*, F_i)``, i.e. the pair
    ``(E_i*, F_i*)`` in the operator convention ``A -> B*``; part 2
    (projective) is dual to ``L(E_i, F_i*)``.  Returns
    ``(c, exact, records, case)``.
    """
    A = [dual_space(E) for E in Es] if part == 1 else list(Es)
    B = [dual_space(F) for F in Fs] if part == 1 else list(Fs)
    options = [(*_case_constant(1, A, B), 1)]
    if all(X.is_lattice for X in B):
        options.append((*_case_constant(2, A, B), 2))
    if all(X.is_lattice for X in A + B):
        options.append((*_case_constant(3, A, B), 3))
    return _best_constant(options)


def _verify_tensor(tag, part, config):
    if part not in (1, 2):
        raise ValueError("part must be 1 or 2")
    name = f"{tag}-part{part}"
    config = config or default_config(name)
    t0 = time.perf_counter()
    rep = VerificationReport(name, config.to_json())
    tasks = []
    for fi, fam in enumerate(_families(config)):
        Es = [parse_space(s) for s in fam["E"]]
        Fs = [parse_space(s) for s in fam["F"]]
        lo, hi = (1.0, 2.0) if part == 1 else (2.0, math.inf)
        if any(not lo <= X.p <= hi for X in Es + Fs):
            rep.notes.append(f"{fam['label']}: exponents outside [{lo:g}, {hi:g}]")
        c, exact, recs, case = _tensor_constant(part, Es, Fs)
        rep.constants.append({"family": fam["label"], "case": case, "constant": c, "closed_form": exact, "parts": recs})
        for k in range(int(fam["trials"])):
            theta = config.thetas[k % len(config.thetas)]
            tasks.append((fam, fi, k, theta, config.seed, part, config.tol, c, exact, tag))
    for rows in _map(_tensor_trial, tasks):
        rep.rows.extend(rows)
    rep.runtime = time.perf_counter() - t0
    return rep


def verify_cor51(part: int, config: ExperimentConfig | None = None) -> VerificationReport:
    """Interpolation of ``l_p^2 (x) l_q^2`` tensor norms.

    Part 1: injective norms (exponents in ``[1, 2]``); part 2: projective
    norms (exponents in ``[2, inf]``).  The interpolated tensor norm is
    sandwiched against the tensor norm of the interpolated spaces:

    * part 1: ``inj_theta <= [inj]_theta <= c inj_theta``;
    * part 2: ``proj_theta / c <= [proj]_theta <= proj_theta``, with the
      lower bound of ``[proj]_theta`` from duality against interpolated
      operator norms and the upper bound ``proj_0^(1-theta) proj_1^theta``.
    """
    return _verify_tensor("cor51", part, config)


def verify_cor52(part: int, config: ExperimentConfig | None = None) -> VerificationReport:
    """Schatten analogue of :func:`verify_cor51` on ``S_p`` of ``2 x 2`` matrices."""
    return _verify_tensor("cor52", part, config)


# ---------------------------------------------------------------------------
# Pietsch chains


def _pietsch_trial(k, seed, p, n, m, tol, ell_trials):
    rng = np.random.default_rng([seed, 32, k])
    X = lp(m, p)
    T = _rand(rng, (n, m))
    pi = pi2_norm(T, dual_space(X), seed=seed)
    ell = ell_gaussian(T.T, X, trials=ell_trials, seed=[seed, 33, k])
    sq = square_function_norm(X, T)
    t2, t2_exact = _constant("T2", X)
    m2, m2_exact = _constant("M2", X)
    lab = format_space(X) + f";n={n}"
    return [
        _row(k, None, "pi2<=ell", lab, pi.lower, ell.value_lower + 3 * ell.std_error, 1.0, tol),
        _row(k, None, "ell<=T2*pi2", lab, ell.value_lower, t2 * pi.upper + 3 * ell.std_error, t2, tol, decisive=t2_exact),
        _row(k, None, "pi2<=square", lab, math.sqrt(math.pi) / 2 * pi.lower, sq, math.sqrt(math.pi) / 2, tol),
        _row(k, None, "square<=M2*pi2", lab, sq, m2 * pi.upper, m2, tol, decisive=m2_exact),
    ]


def verify_pietsch_chain(config: ExperimentConfig | None = None) -> VerificationReport:
    """Chains ``pi_2 <= l <= T2 pi_2`` and ``(sqrt(pi)/2) pi_2 <= square function <= M2 pi_2``.

    Operators ``T : X* -> l_2^n`` with ``X = l_p^m``; ``p`` cycles over
    ``params["exponents"]`` and ``(n, m)`` over ``params["dims"]``.
    """
    config = config or default_config("pietsch-chain")
    t0 = time.perf_counter()
    rep = VerificationReport("pietsch-chain", config.to_json())
    ps = [float(p) if str(p) != "inf" else math.inf for p in config.params.get("exponents", [2, 4, "inf"])]
    dims = [tuple(d) for d in config.params.get("dims", [[2, 2], [3, 2], [2, 3], [3, 3]])]
    ell_trials = int(config.params.get("ell_trials", 4000))
    tasks = []
    for k in range(config.trials):
        n, m = dims[k % len(dims)]
        tasks.append((k, config.seed, ps[k % len(ps)], n, m, config.tol, ell_trials))
    seen = set()
    for _, _, p, _, m, _, _ in tasks:
        X = lp(m, p)
        if format_space(X) not in seen:
            seen.add(format_space(X))
            rep.constants += [_const_record("T2", X), _const_record("M2", X)]
    for rows in _map(_pietsch_trial, tasks):
        rep.rows.extend(rows)
    rep.runtime = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------------------
# Registry and defaults


def _fam(E, F, trials, **kw):
    return {"E": list(E), "F": list(F), "trials": trials, **kw}


_DEFAULTS = {
    "thm31-case1": dict(
        trials=100,
        params={
            "families": [
                _fam(["lp:2:2", "wl2:1,3"], ["lp:2:2", "wl2:2,1"], 100),
                _fam(["lp:2:2", "lp:2:4"], ["lp:2:2", "lp:2:4"], 6),
            ]
        },
    ),
    "thm31-case2": dict(
        trials=100,
        params={
            "families": [
                _fam(["lp:2:2", "wl2:1,2"], ["lp:2:4", "lp:2:inf"], 100),
                _fam(["lp:2:2", "lp:2:2"], ["lp:2:2", "lp:2:4"], 100),
                _fam(["lp:2:2", "lp:2:4"], ["lp:2:4", "lp:2:inf"], 6),
            ]
        },
    ),
    "thm31-case3": dict(
        trials=100,
        params={
            "families": [
                _fam(["lp:2:2", "lp:2:4"], ["lp:2:4", "lp:2:inf"], 100),
                _fam(["lp:2:1", "lp:2:2"], ["lp:2:2", "lp:2:4"], 6),
            ]
        },
    ),
    "cor36": dict(
        trials=12,
        params={
            "families": [
                _fam(["lp:2:2", "wl2:1,2"], ["lp:2:inf", "lp:2:2"], 12),
                _fam(["lp:2:2", "wl2:2,1"], ["lp:2:2", "wl2:1,3"], 6, label="hilbert"),
            ]
        },
    ),
    "logconvex-bm": dict(
        trials=0,
        thetas=(0.0, 0.25, 0.5, 0.75, 1.0),
        params={
            "families": [
                _fam(["lp:2:1", "lp:2:inf"], [], 0, label="l1-linf n=2"),
                _fam(["lp:3:1", "lp:3:inf"], [], 0, label="l1-linf n=3"),
            ]
        },
        tolerances={"abs": 1e-6, "rel": 0.05},
    ),
    "cor51-part1": dict(
        trials=9,
        params={
            "families": [
                _fam(["lp:2:1", "lp:2:2"], ["lp:2:2", "lp:2:1"], 9),
                _fam(["lp:2:1.5", "lp:2:1"], ["lp:2:1", "lp:2:2"], 6),
                _fam(["lp:2:2", "lp:2:2"], ["lp:2:2", "lp:2:2"], 3, label="hilbert"),
            ]
        },
    ),
    "cor51-part2": dict(
        trials=9,
        params={
            "families": [
                _fam(["lp:2:2", "lp:2:4"], ["lp:2:4", "lp:2:2"], 9),
                _fam(["lp:2:4", "lp:2:inf"], ["lp:2:2", "lp:2:inf"], 6),
                _fam(["lp:2:2", "lp:2:2"], ["lp:2:2", "lp:2:2"], 3, label="hilbert"),
            ]
        },
    ),
    "cor52-part1": dict(
        trials=3,
        thetas=(0.5,),
        params={
            "families": [
                _fam(["schatten:2:2", "schatten:2:1.5"], ["schatten:2:1.5", "schatten:2:2"], 3),
                _fam(["schatten:2:2", "schatten:2:2"], ["schatten:2:2", "schatten:2:2"], 2, label="hilbert-schmidt"),
            ]
        },
    ),
    "cor52-part2": dict(
        trials=3,
        thetas=(0.5,),
        params={
            "families": [
                _fam(["schatten:2:2", "schatten:2:4"], ["schatten:2:4", "schatten:2:2"], 3),
                _fam(["schatten:2:2", "schatten:2:2"], ["schatten:2:2", "schatten:2:2"], 2, label="hilbert-schmidt"),
            ]
        },
    ),
    "pietsch-chain": dict(
        trials=50,
        thetas=(),
        params={"exponents": [2, 4, "inf"], "dims": [[2, 2], [3, 2], [2, 3], [3, 3]], "ell_trials": 4000},
    ),
}

EXPERIMENTS = {
    "thm31-case1": lambda c: verify_thm31(1, c),
    "thm31-case2": lambda c: verify_thm31(2, c),
    "thm31-case3": lambda c: verify_thm31(3, c),
    "cor36": lambda c: verify_cor36(c),
    "logconvex-bm": lambda c: verify_logconvex_bm(c),
    "cor51-part1": lambda c: verify_cor51(1, c),
    "cor51-part2": lambda c: verify_cor51(2, c),
    "cor52-part1": lambda c: verify_cor52(1, c),
    "cor52-part2": lambda c: verify_cor52(2, c),
    "pietsch-chain": lambda c: verify_pietsch_chain(c),
}


def default_config(experiment: str, seed: int = 0) -> ExperimentConfig:
    """Shipped configuration of a run (desk scale, seed 0)."""
    if experiment not in _DEFAULTS:
        raise KeyError(f"unknown experiment {experiment!r}; known: {sorted(_DEFAULTS)}")
    d = json.loads(json.dumps(_DEFAULTS[experiment]))
    return ExperimentConfig(
        experiment=experiment,
        seed=seed,
        trials=d.get("trials", 100),
        thetas=tuple(d.get("thetas", (0.25, 0.5, 0.75))),
        params=d.get("params", {}),
        tolerances=d.get("tolerances", {"abs": 1e-6}),
    )


def verify(experiment: str, config: ExperimentConfig | None = None) -> VerificationReport:
    """Run one experiment by identifier."""
    if experiment not in EXPERIMENTS:
        raise KeyError(f"unknown experiment {experiment!r}; known: {sorted(EXPERIMENTS)}")
    if config is not None and config.experiment != experiment:
        raise ValueError(f"config is for {config.experiment!r}, not {experiment!r}")
    return EXPERIMENTS[experiment](config or default_config(experiment))


def run_all(config=None, experiments=None, out_dir=None) -> dict:
    """Run experiments (default: all shipped runs) and summarize.

    Parameters
    ----------
    config : int or dict, optional
        ``None`` runs the shipped defaults with seed 0; an int is used as the
        seed of the defaults; a dict maps identifiers to
        :class:`ExperimentConfig` overrides (others use seed-0 defaults).
    experiments : sequence of str, optional
        Identifiers; ``None`` means every shipped run and ``[]`` runs nothing.
    out_dir : path, optional
        Where to write ``<id>.json`` and ``<id>.csv``.

    Returns
    -------
    dict
        ``{"passed", "experiments": {id: {"passed", "claims"}}, "reports": {id: report}}``.

    Examples
    --------
    >>> run_all(experiments=[])["experiments"]
    {}
    """
    ids = list(EXPERIMENTS) if experiments is None else list(experiments)
    unknown = [e for e in ids if e not in EXPERIMENTS]
    if unknown:
        raise KeyError(f"unknown experiments: {unknown}")
    seed, overrides = 0, {}
    if isinstance(config, dict):
        overrides = config
    elif config is not None:
        seed = int(config)
    reports = {}
    for e in ids:
        reports[e] = verify(e, overrides.get(e) or default_config(e, seed))
        if out_dir is not None:
            os.makedirs(out_dir, exist_ok=True)
            reports[e].write_json(os.path.join(out_dir, f"{e}.json"))
            reports[e].write_csv(os.path.join(out_dir, f"{e}.csv"))
    return {
        "passed": all(r.passed for r in reports.values()),
        "experiments": {e: {"passed": r.passed, "claims": r.claims} for e, r in reports.items()},
        "reports": reports,
    }
