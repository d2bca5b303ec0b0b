"""Benchmark harness: parameter tables, alpha sweeps and rate runs.

Reports are plain CSV (or a markdown pipe table) with one row per
``(ell, i, rule)`` cell.  Floating-point fields are written in scientific
notation with six significant digits, and rows hold exactly the values
that get written, so a report survives a write/read round trip
unchanged.
"""

from concurrent.futures import ThreadPoolExecutor
import csv
from dataclasses import astuple, dataclass, field, fields
import io
import os
import time

import numpy as np

from . import __version__
from .problems import NOISE_GENERATOR, PROBLEM_NAMES, add_noise, make_problem, relative_error
from .rates import measure_rate
from .selection import RULES, RuleInapplicable, SelectionRule
from .solver import ProjectedProblem
from .spectral import d_metric

__all__ = [
    "BENCH_COLUMNS",
    "RATE_COLUMNS",
    "SWEEP_COLUMNS",
    "BenchConfig",
    "ReportRow",
    "ExperimentReport",
    "SweepReport",
    "run_bench",
    "run_sweep",
    "run_rates",
    "read_report",
    "read_sweep",
    "thread_count",
]

BENCH_COLUMNS = (
    "problem", "n", "xi", "seed", "ell", "d_ell", "i", "rule",
    "alpha", "rel_err", "h_ell", "reason", "wall_ms",
)
RATE_COLUMNS = BENCH_COLUMNS + ("slope_fit", "slope_theory")
SWEEP_COLUMNS = ("kind", "alpha", "rel_err")

_FLOAT_FIELDS = {"xi", "d_ell", "alpha", "rel_err", "h_ell", "wall_ms",
                 "slope_fit", "slope_theory"}
_INT_FIELDS = {"n", "seed", "ell", "i"}
MISSING = "-"


def sig6(x):
    """Round to the six significant digits used in reports."""
    if x is None:
        return None
    return float(f"{float(x):.5e}")


def _fmt(value):
    if value is None:
        return MISSING
    if isinstance(value, float):
        return f"{value:.5e}"
    return str(value)


def _parse(name, text):
    if text == MISSING:
        return None
    if name in _INT_FIELDS:
        return int(text)
    if name in _FLOAT_FIELDS:
        return float(text)
    return text


def thread_count():
    """Worker count from ``IAT_THREADS`` (default 1)."""
    raw = os.environ.get("IAT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"IAT_THREADS must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class BenchConfig:
    """Parameters of one table-style experiment.

    ``n`` is the problem size; for ``blur`` it is the image side length and
    the operator acts on ``n**2`` pixels.
    """

    problem: str
    n: int
    xi: float
    seed: int = 11
    ell_list: tuple = (10,)
    iter_list: tuple = (1,)
    rules: tuple = RULES
    tau: float = 1.0

    def __post_init__(self):
        if self.problem not in PROBLEM_NAMES:
            raise ValueError(f"unknown problem {self.problem!r}; expected one of {PROBLEM_NAMES}")
        if not 0.0 < self.xi < 1.0:
            raise ValueError(f"xi must lie in (0, 1), got {self.xi}")
        for name in ("ell_list", "iter_list", "rules"):
            if len(getattr(self, name)) == 0:
                raise ValueError(f"{name} must be nonempty")
        if any(int(v) < 1 for v in self.ell_list + self.iter_list):
            raise ValueError("ell and i values must be positive")
        bad = set(self.rules) - set(RULES)
        if bad:
            raise ValueError(f"unknown rules {sorted(bad)}; expected a subset of {RULES}")


@dataclass
class ReportRow:
    problem: str
    n: int
    xi: float
    seed: int
    ell: int
    d_ell: float
    i: int
    rule: str
    alpha: float
    rel_err: float
    h_ell: float
    reason: str
    wall_ms: float

    @property
    def applicable(self):
        return self.alpha is not None


@dataclass
class RateRow(ReportRow):
    slope_fit: float = None
    slope_theory: float = None


@dataclass
class ExperimentReport:
    rows: list
    metadata: dict = field(default_factory=dict)

    def columns(self):
        if self.rows:
            return tuple(f.name for f in fields(self.rows[0]))
        return BENCH_COLUMNS

    def to_csv(self, include_wall=True):
        """Serialize to CSV text (LF line endings, ``#`` metadata lines)."""
        cols = [c for c in self.columns() if include_wall or c != "wall_ms"]
        buf = io.StringIO()
        for key in sorted(self.metadata):
            buf.write(f"# {key}={self.metadata[key]}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for row in self.rows:
            rec = dict(zip(self.columns(), astuple(row)))
            w.writerow([_fmt(rec[c]) for c in cols])
        return buf.getvalue()

    def to_markdown(self):
        """Pipe table with one column pair per rule, like the usual
        ell / d_ell / i layout of parameter-choice comparisons."""
        rules = sorted({r.rule for r in self.rows}, key=RULES.index)
        head = ["ell", "d_ell", "i"]
        for rule in rules:
            head += [f"{rule} alpha", f"{rule} rel_err"]
        lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
        cells = {}
        for r in self.rows:
            cells.setdefault((r.ell, r.i), {"d": r.d_ell})[r.rule] = r
        for (ell, i), cell in cells.items():
            out = [str(ell), _fmt(cell["d"]), str(i)]
            for rule in rules:
                r = cell.get(rule)
                out += [_fmt(r.alpha), _fmt(r.rel_err)] if r else [MISSING, MISSING]
            lines.append("| " + " | ".join(out) + " |")
        meta = ", ".join(f"{k}={v}" for k, v in sorted(self.metadata.items()))
        return (f"<!-- {meta} -->\n" if meta else "") + "\n".join(lines) + "\n"

    def write(self, path, fmt="csv"):
        text = self.to_markdown() if fmt == "markdown" else self.to_csv()
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _read_table(text):
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            meta[key] = val
        elif line:
            body.append(line)
    reader = csv.reader(body)
    header = next(reader)
    return meta, header, list(reader)


def read_report(text):
    """Parse CSV text written by :meth:`ExperimentReport.to_csv`."""
    meta, header, records = _read_table(text)
    cls = RateRow if "slope_fit" in header else ReportRow
    rows = []
    for rec in records:
        vals = {h: _parse(h, v) for h, v in zip(header, rec)}
        vals.setdefault("wall_ms", None)
        vals["reason"] = vals["reason"] or ""
        rows.append(cls(**vals))
    return ExperimentReport(rows, meta)


def _metadata(seed):
    return {"generator": NOISE_GENERATOR, "seed": seed, "version": __version__}


# Bench ---------------------------------------------------------------------

def _bench_cell(cfg, prob, noisy, ell):
    t0 = time.perf_counter()
    proj = ProjectedProblem(prob.operator, noisy.y_delta, ell)
    d_ell = sig6(d_metric(prob.operator, proj.decomposition, proj.svd, prob.x_true))
    xnorm = float(np.linalg.norm(prob.x_true))
    h = proj.h if "R2" in cfg.rules else None
    setup_ms = 1e3 * (time.perf_counter() - t0)
    rows = []
    for i in cfg.iter_list:
        for kind in cfg.rules:
            t1 = time.perf_counter()
            if kind == "R1":
                rule = SelectionRule("R1", tau=cfg.tau)
            else:
                rule = SelectionRule("R2", tau=cfg.tau, x_true_norm=xnorm, h_ell=h)
            alpha = err = None
            reason = ""
            try:
                sel = proj.select(rule, i, noisy.delta)
            except RuleInapplicable as exc:
                reason = exc.reason
            else:
                alpha = sig6(sel.alpha)
                err = sig6(relative_error(prob.x_true, proj.solve(sel.alpha, i).x))
            wall = setup_ms + 1e3 * (time.perf_counter() - t1)
            rows.append(ReportRow(
                cfg.problem, prob.n, sig6(cfg.xi), cfg.seed, ell, d_ell, i, kind,
                alpha, err, sig6(h), reason, sig6(wall),
            ))
    return rows


def run_bench(cfg, threads=None):
    """Run every ``(ell, i, rule)`` cell of ``cfg``.

    One Arnoldi decomposition is built per ``ell`` and shared by all
    ``(i, rule)`` pairs.  Cells for different ``ell`` run on up to
    ``threads`` workers (``IAT_THREADS`` by default).
    """
    prob = make_problem(cfg.problem, cfg.n)
    noisy = add_noise(prob, cfg.xi, cfg.seed)
    threads = threads or thread_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda ell: _bench_cell(cfg, prob, noisy, ell), cfg.ell_list))
    else:
        parts = [_bench_cell(cfg, prob, noisy, ell) for ell in cfg.ell_list]
    rows = [r for part in parts for r in part]
    return ExperimentReport(rows, _metadata(cfg.seed))


# Sweep ---------------------------------------------------------------------

@dataclass
class SweepReport:
    rows: list
    metadata: dict = field(default_factory=dict)

    def markers(self):
        return {k: (a, e) for k, a, e in self.rows if k != "grid"}

    def grid(self):
        return [(a, e) for k, a, e in self.rows if k == "grid"]

    def to_csv(self):
        buf = io.StringIO()
        for key in sorted(self.metadata):
            buf.write(f"# {key}={self.metadata[key]}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for kind, alpha, err in self.rows:
            w.writerow([kind, _fmt(alpha), _fmt(err)])
        return buf.getvalue()

    def write(self, path, fmt="csv"):
        if fmt == "markdown":
            lines = ["| kind | alpha | rel_err |", "|---|---|---|"]
            lines += [f"| {k} | {_fmt(a)} | {_fmt(e)} |" for k, a, e in self.rows]
            text = "\n".join(lines) + "\n"
        else:
            text = self.to_csv()
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def read_sweep(text):
    meta, _, records = _read_table(text)
    return SweepReport([(k, float(a), float(e)) for k, a, e in records], meta)


def run_sweep(cfg, ell, i, alpha_min=1e-6, alpha_max=1e4, points=200, problem=None):
    """Relative error over a log-spaced alpha grid for a single ``(ell, i)``.

    Marker rows ``R1``/``R2`` give the rule-selected parameters when the
    rules apply.  ``problem`` overrides the generated test problem.
    """
    if not 0 < alpha_min < alpha_max:
        raise ValueError("need 0 < alpha_min < alpha_max")
    if points < 2:
        raise ValueError("points must be at least 2")
    prob = problem if problem is not None else make_problem(cfg.problem, cfg.n)
    noisy = add_noise(prob, cfg.xi, cfg.seed)
    proj = ProjectedProblem(prob.operator, noisy.y_delta, ell)
    rows = []
    for a in np.geomspace(alpha_min, alpha_max, points):
        err = relative_error(prob.x_true, proj.solve(a, i).x)
        rows.append(("grid", sig6(a), sig6(err)))
    xnorm = float(np.linalg.norm(prob.x_true))
    for kind in cfg.rules:
        if kind == "R1":
            rule = SelectionRule("R1", tau=cfg.tau)
        else:
            rule = SelectionRule("R2", tau=cfg.tau, x_true_norm=xnorm, h_ell=proj.h)
        try:
            sel = proj.select(rule, i, noisy.delta)
        except RuleInapplicable:
            continue
        err = relative_error(prob.x_true, proj.solve(sel.alpha, i).x)
        rows.append((kind, sig6(sel.alpha), sig6(err)))
    meta = _metadata(cfg.seed)
    meta.update(problem=cfg.problem, ell=ell, i=i, xi=cfg.xi)
    return SweepReport(rows, meta)


AXES_NOTE = """\
x axis: alpha (log scale), column "alpha"
y axis: relative error ||x_true - x|| / ||x_true||, column "rel_err"
series: rows with kind == "grid" form the curve
markers: rows with kind == "R1" / "R2" are the rule-selected parameters
"""


def write_axes_note(path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(AXES_NOTE)


# Rates ---------------------------------------------------------------------

def run_rates(cfg, problem_name=None, seed=None):
    """Run :func:`measure_rate` and return its rows as a report.

    Rows are ordered by decreasing noise level; ``xi`` holds the relative
    level and skipped levels carry their reason code.
    """
    result = measure_rate(cfg)
    name = problem_name or cfg.problem.name
    rows = []
    for p in sorted(result.points, key=lambda p: -p.xi):
        rows.append(RateRow(
            name, cfg.problem.n, sig6(p.xi), cfg.seed, p.ell, None, cfg.i, "R1",
            sig6(p.alpha), sig6(p.rel_err), sig6(p.h_ell), p.reason, sig6(p.wall_ms),
            sig6(result.slope_fit), sig6(result.slope_theory),
        ))
    meta = _metadata(cfg.seed)
    meta.update(nu=cfg.nu, rho=cfg.rho)
    return ExperimentReport(rows, meta), result
