"""Trace FES states along invertible local operation curves and classify them.

Usage:
    fesilo basis --n 4
    fesilo curve --n 3 --state GHZ --t-grid -0.99:0.99:199 --targets 30,12
    fesilo stability --n 3 --state GHZ --target 12
    fesilo classify --n 4 --coeffs 0,1,0
    fesilo demo-ghz3 --t 0.5
    fesilo demo-four --mu 1.0
    fesilo closest-product --n 5 --state GHZ

Coefficient lists are in FesVector order, q ascending: for n = 3 GHZ that is
``--coeffs 0.5,0.8660254037844386`` (c_30 first, then c_12).

Output is deterministic: ``#`` header lines echo the version and the
configuration, numbers are written with 17 significant digits.

Exit status: 0 ok, 1 a self-check disagreed, 2 bad arguments, 3 invalid
state (not normalizable or not FES), 4 numerical domain error (t = +-1).
"""

from __future__ import annotations

import csv
import io
import json
import os
import sys
from dataclasses import dataclass, fields
from typing import Any, NamedTuple, Sequence

import click
import numpy as np

from . import __version__
from .classify import (
    build_g,
    canonical_four,
    classify,
    closest_symmetric_product,
    g_mu,
    ghz3_probability_closed_form,
    log_eps_grid,
    named_state,
    stability_sweep,
)
from .errors import DomainError, FesError, InvalidStateError
from .fes_basis import (
    BasisIndex,
    FesVector,
    degeneracy,
    embed,
    expand,
    fes_dimension,
    fes_indices,
    psi_pq,
)
from .ilo import (
    FPolicy,
    IloParams,
    check_parameter,
    curve_trace,
    dense_probability,
    m_of_t,
    success_probability,
)
from .statevec import MAX_QUBITS, StateVector, fidelity, is_fes

SCHEMA_VERSION = 1
NORM_TOL = 1e-6
THREADS_ENV = "FESILO_THREADS"

EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_INVALID_STATE = 3
EXIT_DOMAIN = 4

COMMANDS = ("basis", "curve", "stability", "classify", "demo-ghz3", "demo-four", "closest-product")


class UsageError(ValueError):
    """A RunConfig that cannot be interpreted."""


class RunResult(NamedTuple):
    status: int
    text: str
    error: str = ""


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines one run. Grids and lists are kept as typed."""

    command: str
    n: int | None = None
    state: str | None = None
    coeffs: str | None = None
    t_grid: str | None = None
    eps_grid: str | None = None
    targets: str | None = None
    target: str | None = None
    t: float | None = None
    mu: str | None = None
    grid_size: int | None = None
    refine_tol: float | None = None
    amplitudes: bool = False
    f_policy: str | None = None
    format: str | None = None

    def echo(self) -> dict[str, Any]:
        out = {}
        for f in fields(self):
            val = getattr(self, f.name)
            if val is not None and val is not False:
                out[f.name] = val
        return out


# parsing


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:count``, endpoints included."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must look like start:stop:count, got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}: {exc}") from None
    if count < 1:
        raise UsageError(f"grid count must be >= 1, got {count}")
    if count == 1:
        return np.array([start])
    return np.linspace(start, stop, count)


def parse_t_grid(text: str) -> np.ndarray:
    grid = parse_grid(text)
    for t in grid:
        try:
            check_parameter(float(t))
        except DomainError:
            raise DomainError(
                f"t-grid {text!r} contains t = {t:.17g}, within 1e-12 of +-1 where M(t) is singular"
            ) from None
    return grid


def parse_eps_grid(text: str) -> np.ndarray:
    """``start:stop:count`` or ``log:start_exp:stop_exp:per_decade``."""
    if text.startswith("log:"):
        parts = text.split(":")[1:]
        if len(parts) != 3:
            raise UsageError(f"log grid must look like log:start_exp:stop_exp:per_decade, got {text!r}")
        try:
            return log_eps_grid(float(parts[0]), float(parts[1]), int(parts[2]))
        except ValueError as exc:
            raise UsageError(f"bad grid {text!r}: {exc}") from None
    return parse_grid(text)


def parse_index(token: str, n: int) -> BasisIndex:
    """``3_0``, ``3/0``, ``3-0`` or plain digits ``30`` (split so that p + q = n)."""
    token = token.strip()
    for sep in ("_", "/", "-", ":"):
        if sep in token:
            p, _, q = token.partition(sep)
            try:
                idx = BasisIndex(int(p), int(q))
            except ValueError:
                break
            if idx.n != n:
                raise UsageError(f"basis index {token!r} has p + q != n = {n}")
            return idx
    if token.isdigit():
        splits = [
            BasisIndex(int(token[:k]), int(token[k:]))
            for k in range(1, len(token))
            if int(token[:k]) + int(token[k:]) == n
        ]
        if len(splits) == 1:
            return splits[0]
    raise UsageError(f"cannot read basis index {token!r} for n = {n}; try p_q, e.g. 3_0")


def parse_even_index(token: str, n: int) -> BasisIndex:
    idx = parse_index(token, n)
    if idx.q % 2:
        raise UsageError(f"{idx} has odd q and is not an FES basis state")
    return idx


def parse_coeffs(text: str, n: int) -> FesVector:
    try:
        vals = [complex(tok.strip().replace(" ", "")) for tok in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad coefficient list {text!r}: {exc}") from None
    if len(vals) != fes_dimension(n):
        raise UsageError(
            f"n = {n} needs {fes_dimension(n)} coefficients (q ascending), got {len(vals)}"
        )
    v = FesVector(n, vals)
    nrm = v.norm()
    if abs(nrm - 1.0) > NORM_TOL:
        raise InvalidStateError(f"coefficients have norm {nrm:.17g}; must be 1 within {NORM_TOL:g}")
    return v.normalized()


def _require_n(cfg: RunConfig) -> int:
    if cfg.n is None:
        raise UsageError(f"{cfg.command} needs --n")
    if cfg.n < 1:
        raise UsageError(f"--n must be >= 1, got {cfg.n}")
    return cfg.n


def _dense_named(cfg: RunConfig, n: int) -> StateVector:
    if n > MAX_QUBITS:
        raise UsageError(f"named states are built densely; n = {n} exceeds the cap of {MAX_QUBITS}")
    try:
        return named_state(cfg.state, n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def resolve_state(cfg: RunConfig) -> FesVector:
    n = _require_n(cfg)
    if (cfg.state is None) == (cfg.coeffs is None):
        raise UsageError("give exactly one of --state NAME or --coeffs LIST")
    if cfg.coeffs is not None:
        return parse_coeffs(cfg.coeffs, n)
    dense = _dense_named(cfg, n)
    try:
        return expand(dense)
    except InvalidStateError:
        raise InvalidStateError(f"{cfg.state} (n = {n}) is not flip-and-exchange symmetric") from None


def resolve_dense(cfg: RunConfig) -> StateVector:
    n = _require_n(cfg)
    if (cfg.state is None) == (cfg.coeffs is None):
        raise UsageError("give exactly one of --state NAME or --coeffs LIST")
    if cfg.coeffs is not None:
        if n > MAX_QUBITS:
            raise UsageError(f"dense evaluation is capped at n = {MAX_QUBITS}")
        return embed(parse_coeffs(cfg.coeffs, n))
    return _dense_named(cfg, n)


def _policy(cfg: RunConfig) -> FPolicy:
    try:
        return FPolicy(cfg.f_policy or FPolicy.POVM_MAX.value)
    except ValueError:
        raise UsageError(f"unknown f policy {cfg.f_policy!r}; use unit or povm_max") from None


# formatting


def fmt_num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _header(cfg: RunConfig) -> list[str]:
    return [
        f"# fesilo {__version__} schema_version={SCHEMA_VERSION}",
        "# config: " + json.dumps(cfg.echo(), separators=(",", ":")),
    ]


def render_csv(cfg: RunConfig, columns: Sequence[str], rows: Sequence[Sequence], notes=()) -> str:
    buf = io.StringIO()
    for line in _header(cfg):
        buf.write(line + "\n")
    for note in notes:
        buf.write(f"# {note}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt_num(x) if not isinstance(x, str) else x for x in row])
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


def render_json(cfg: RunConfig, payload: dict) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "tool": "fesilo",
        "version": __version__,
        "command": cfg.command,
        "config": cfg.echo(),
    }
    doc.update(payload)
    return json.dumps(_jsonable(doc), indent=2, allow_nan=False) + "\n"


def _emit(cfg: RunConfig, columns, rows, payload: dict, notes=()) -> str:
    if cfg.format == "json":
        return render_json(cfg, payload)
    if cfg.format in (None, "csv"):
        return render_csv(cfg, columns, rows, notes)
    raise UsageError(f"unknown output format {cfg.format!r}; use csv or json")


def _coeff_pairs(v: FesVector) -> list[list[float]]:
    return [[c.real, c.imag] for c in v.coeffs]


# commands


def _run_basis(cfg: RunConfig) -> str:
    n = _require_n(cfg)
    dense_ok = n <= MAX_QUBITS
    if cfg.amplitudes and not dense_ok:
        raise UsageError(f"--amplitudes needs n <= {MAX_QUBITS}")
    entries = []
    for idx in fes_indices(n):
        entry = {
            "p": idx.p,
            "q": idx.q,
            "degeneracy": degeneracy(idx.p, idx.q),
            "entangled": idx.entangled,
        }
        if dense_ok:
            psi = psi_pq(idx.p, idx.q)
            entry["is_fes"] = is_fes(psi)
            entry["norm"] = psi.norm()
            if cfg.amplitudes:
                entry["amplitudes"] = [
                    [format(b, f"0{n}b"), a.real, a.imag]
                    for b, a in enumerate(psi.amps)
                    if abs(a) > 1e-15
                ]
        entries.append(entry)
    payload = {"n": n, "dimension": fes_dimension(n), "basis": entries}
    if cfg.amplitudes:
        columns = ["p", "q", "bitstring", "re", "im"]
        rows = [[e["p"], e["q"], b, re, im] for e in entries for b, re, im in e["amplitudes"]]
    else:
        columns = ["p", "q", "degeneracy", "entangled", "is_fes", "norm"]
        rows = [
            [e["p"], e["q"], e["degeneracy"], e["entangled"], e.get("is_fes", ""), e.get("norm", "")]
            for e in entries
        ]
    return _emit(cfg, columns, rows, payload, notes=[f"fes_dimension={fes_dimension(n)}"])


def _targets(cfg: RunConfig, n: int) -> list[BasisIndex]:
    if not cfg.targets:
        return []
    return [parse_even_index(tok, n) for tok in cfg.targets.split(",")]


def _workers() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def _curve_output(cfg: RunConfig, v: FesVector, grid, targets, extra_payload=None, notes=()) -> str:
    samples = curve_trace(v, [float(t) for t in grid], _policy(cfg), targets, workers=_workers())
    labels = [idx.label for idx in v.indices]
    columns = ["t"]
    for lab in labels:
        columns += [f"c_{lab}_re", f"c_{lab}_im"]
    columns.append("probability")
    columns += [f"fidelity_{idx.label}" for idx in targets]
    rows = []
    for s in samples:
        row = [s.t]
        for c in s.state.coeffs:
            row += [c.real, c.imag]
        row.append(s.probability)
        row += [s.target_fidelities[idx] for idx in targets]
        rows.append(row)
    payload = dict(extra_payload or {})
    payload.update(
        {
            "n": v.n,
            "basis": [{"p": i.p, "q": i.q} for i in v.indices],
            "initial_coeffs": _coeff_pairs(v),
            "samples": [
                {
                    "t": s.t,
                    "coeffs": _coeff_pairs(s.state),
                    "probability": s.probability,
                    "fidelities": {idx.label: s.target_fidelities[idx] for idx in targets},
                }
                for s in samples
            ],
        }
    )
    return _emit(cfg, columns, rows, payload, notes)


def _run_curve(cfg: RunConfig) -> str:
    v = resolve_state(cfg)
    if not cfg.t_grid:
        raise UsageError("curve needs --t-grid start:stop:count")
    return _curve_output(cfg, v, parse_t_grid(cfg.t_grid), _targets(cfg, v.n))


def _run_stability(cfg: RunConfig) -> str:
    v = resolve_state(cfg)
    if not cfg.target:
        raise UsageError("stability needs --target p_q")
    target = parse_even_index(cfg.target, v.n)
    eps = parse_eps_grid(cfg.eps_grid or "log:-1:-6:5")
    try:
        samples = stability_sweep(v, target, [float(e) for e in eps], _policy(cfg))
    except ValueError as exc:
        if isinstance(exc, FesError):
            raise
        raise UsageError(str(exc)) from None
    columns = ["epsilon", "t", "infidelity", "probability"]
    rows = [[s.epsilon, s.t, s.infidelity, s.probability] for s in samples]
    payload = {
        "n": v.n,
        "target": {"p": target.p, "q": target.q, "entangled": target.entangled},
        "samples": [
            {"epsilon": s.epsilon, "t": s.t, "infidelity": s.infidelity, "probability": s.probability}
            for s in samples
        ],
    }
    return _emit(cfg, columns, rows, payload)


def _run_classify(cfg: RunConfig) -> str:
    v = resolve_state(cfg)
    report = classify(v)
    # always JSON: a class report is nested
    return render_json(cfg, {"coeffs": _coeff_pairs(v), "report": report.to_dict()})


def _run_demo_ghz3(cfg: RunConfig) -> str:
    t = 0.5 if cfg.t is None else float(cfg.t)
    check_parameter(t)
    ghz = named_state("GHZ", 3)
    v = expand(ghz)
    rows, entries = [], []
    for policy in (FPolicy.UNIT, FPolicy.POVM_MAX):
        params = IloParams(t, policy)
        closed = ghz3_probability_closed_form(t, params.f)
        spectral = success_probability(v, params)
        dense = dense_probability(ghz, m_of_t(params))
        spread = max(abs(closed - spectral), abs(closed - dense), abs(spectral - dense))
        agree = spread < 1e-10
        rows.append([policy.value, t, params.f, closed, spectral, dense, spread, agree])
        entries.append(
            {
                "f_policy": policy.value,
                "t": t,
                "f": params.f,
                "closed_form": closed,
                "spectral": spectral,
                "dense": dense,
                "max_abs_diff": spread,
                "agree": agree,
            }
        )
    columns = ["f_policy", "t", "f", "closed_form", "spectral", "dense", "max_abs_diff", "agree"]
    text = _emit(cfg, columns, rows, {"ghz3_probability": entries})
    return RunResult(0 if all(e["agree"] for e in entries) else EXIT_CHECK_FAILED, text)


def _parse_mu(text: str | None) -> complex:
    if text is None:
        return 1.0
    try:
        mu = complex(text.strip().replace(" ", ""))
    except ValueError:
        raise UsageError(f"bad --mu {text!r}") from None
    return mu.real if mu.imag == 0 else mu


def _run_demo_four(cfg: RunConfig) -> str:
    mu = _parse_mu(cfg.mu)
    v = expand(canonical_four(mu))
    p22 = psi_pq(2, 2)
    g0 = build_g(0, -1, 0, 1).normalized()
    g1 = build_g(1, -1, 0, 2).normalized()
    checks = {
        "mu": [complex(mu).real, complex(mu).imag],
        "fidelity_G_0_-1_0_1_psi_2_2": fidelity(g0, p22),
        "fidelity_G_1_-1_0_2_psi_2_2": fidelity(g1, p22),
        "mu_of_G_1_-1_0_2": g_mu(1, 2),
    }
    notes = [f"{k}={fmt_num(val) if not isinstance(val, list) else val}" for k, val in checks.items()]
    grid = parse_t_grid(cfg.t_grid or "-0.99:0.99:199")
    targets = fes_indices(4)
    return _curve_output(cfg, v, grid, targets, extra_payload={"four_qubit": checks}, notes=notes)


def _run_closest_product(cfg: RunConfig) -> str:
    state = resolve_dense(cfg)
    if abs(state.norm() - 1.0) > NORM_TOL:
        raise InvalidStateError("closest-product needs a normalized state")
    fit = closest_symmetric_product(
        state,
        grid_size=cfg.grid_size or 4096,
        refine_tol=cfg.refine_tol if cfg.refine_tol is not None else 1e-12,
    )
    product_fes = is_fes(fit.product_state())
    columns = ["n", "theta", "overlap_sq", "degenerate", "product_is_fes"]
    row = [state.n, fit.theta, fit.overlap_sq, fit.degenerate, product_fes]
    payload = dict(zip(columns, row))
    return _emit(cfg, columns, [row], payload)


_DISPATCH = {
    "basis": _run_basis,
    "curve": _run_curve,
    "stability": _run_stability,
    "classify": _run_classify,
    "demo-ghz3": _run_demo_ghz3,
    "demo-four": _run_demo_four,
    "closest-product": _run_closest_product,
}


def run(cfg: RunConfig) -> RunResult:
    """Execute one configuration; errors become a non-zero status, never an exception."""
    try:
        if cfg.command not in _DISPATCH:
            raise UsageError(f"unknown command {cfg.command!r}; expected one of {', '.join(COMMANDS)}")
        out = _DISPATCH[cfg.command](cfg)
    except (UsageError, FesError) as exc:
        return RunResult(exit_code_for(exc), "", str(exc))
    return out if isinstance(out, RunResult) else RunResult(0, out)


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, DomainError):
        return EXIT_DOMAIN
    if isinstance(exc, InvalidStateError):
        return EXIT_INVALID_STATE
    return EXIT_USAGE


# click wiring


def _execute(ctx: click.Context, output: str | None, **kwargs) -> None:
    result = run(RunConfig(command=ctx.info_name, **kwargs))
    if result.error:
        click.echo(f"error: {result.error}", err=True)
        ctx.exit(result.status)
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(result.text)
    else:
        click.echo(result.text, nl=False)
    ctx.exit(result.status)


def _state_options(fn):
    fn = click.option("--coeffs", help="FES coefficients, q ascending, e.g. 0.5,0.8660254037844386 for n=3 GHZ.")(fn)
    fn = click.option("--state", help="Named state: GHZ, W, W_fes (n=3) or S.")(fn)
    fn = click.option("--n", type=int, help="Number of qubits.")(fn)
    return fn


def _output_options(fn, formats=True):
    fn = click.option("--output", "-o", type=click.Path(dir_okay=False), help="Write here instead of stdout.")(fn)
    if formats:
        fn = click.option("--format", "format", type=click.Choice(["csv", "json"]), default="csv", show_default=True)(fn)
    return fn


_policy_option = click.option(
    "--f-policy",
    type=click.Choice([p.value for p in FPolicy]),
    default=FPolicy.POVM_MAX.value,
    show_default=True,
    help="Scalar f(t): unit (f=1) or povm_max (f=1/(1+|t|)).",
)


@click.group(help=__doc__.split("\n\n")[0])
@click.version_option(__version__, prog_name="fesilo")
def cli():
    pass


@cli.command(help="List the even-q FES basis for n qubits.")
@click.option("--n", type=int, required=True)
@click.option("--amplitudes", is_flag=True, help="Emit dense amplitudes (long format).")
@_output_options
@click.pass_context
def basis(ctx, **kw):
    _execute(ctx, **kw)


@cli.command(help="Trace the ILO curve through a state over a t grid.")
@_state_options
@click.option("--t-grid", required=True, help="start:stop:count, endpoints included; must avoid +-1.")
@click.option("--targets", help="Comma-separated basis indices to report fidelity against, e.g. 30,12.")
@_policy_option
@_output_options
@click.pass_context
def curve(ctx, **kw):
    _execute(ctx, **kw)


@cli.command(help="Approach a curve endpoint: infidelity and probability vs epsilon.")
@_state_options
@click.option("--target", required=True, help="Endpoint basis index, e.g. 12.")
@click.option("--eps-grid", default="log:-1:-6:5", show_default=True, help="start:stop:count or log:start_exp:stop_exp:per_decade.")
@_policy_option
@_output_options
@click.pass_context
def stability(ctx, **kw):
    _execute(ctx, **kw)


@cli.command("classify", help="Equivalence-class report (JSON).")
@_state_options
@click.option("--output", "-o", type=click.Path(dir_okay=False))
@click.pass_context
def classify_cmd(ctx, **kw):
    _execute(ctx, **kw)


@cli.command("demo-ghz3", help="GHZ3 success probability: closed form vs spectral vs dense.")
@click.option("--t", type=float, default=0.5, show_default=True)
@_output_options
@click.pass_context
def demo_ghz3(ctx, **kw):
    _execute(ctx, **kw)


@cli.command("demo-four", help="Four-qubit canonical form (GHZ4 + mu D4)/norm and its ILO curve.")
@click.option("--mu", default="1.0", show_default=True, help="Complex mu, or inf for the Dicke state.")
@click.option("--t-grid", default="-0.99:0.99:199", show_default=True)
@_policy_option
@_output_options
@click.pass_context
def demo_four(ctx, **kw):
    _execute(ctx, **kw)


@cli.command("closest-product", help="Closest symmetric product state (cos t|0>+sin t|1>)^n.")
@_state_options
@click.option("--grid-size", type=int, default=4096, show_default=True)
@click.option("--refine-tol", type=float, default=1e-12, show_default=True)
@_output_options
@click.pass_context
def closest_product(ctx, **kw):
    _execute(ctx, **kw)


def main(argv: Sequence[str] | None = None) -> None:
    cli.main(args=list(argv) if argv is not None else None, prog_name="fesilo")


if __name__ == "__main__":
    main(sys.argv[1:])
