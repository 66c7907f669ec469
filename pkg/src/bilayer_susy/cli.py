"""Command-line front end: profile, spectrum, state and verify.

Every command writes a table.  CSV output carries '#' header lines with
the full run configuration and a JSON sidecar (PATH.json) holding the same
metadata; JSON output bundles metadata and columns in one document.
Floats are written in shortest round-trip form.

Exit codes: 0 success, 1 a verification check failed, 2 bad configuration.
"""

import argparse
import io
import json
import sys
from dataclasses import asdict, dataclass, fields

import numpy as np

from .bilayer import (closed_form_k, electron_energy, k_to_kappa, kappa_to_k,
                      level_records, partner_profile, physical_branch, spinor_state,
                      standard_ordering, vector_potential, _with_kappa)
from .errors import (ClosedFormUnavailable, ConvergenceFailure, NoBranch,
                     RelationInconsistent, SusyError)
from .numerics import SampledFunction, fd_spectrum, grid_with_spacing, integrate, make_grid
from .observables import continuity_residual, current_density, probability_density
from .potentials import make_model
from .susy import (factorization_residual, make_transform,
                   partner_potential, reconstruct_v0_from_eta, w_closed_form,
                   w_quadrature)

UNITS_NOTE = "hbar = m* = e/c = 1; E~ = 2E; B = eta'/2; k = eta/2 - A (Landau gauge)"

FAMILY_ALIASES = {"ho": "shifted_ho", "shifted_ho": "shifted_ho", "trig": "trig_rm",
                  "trig_rm": "trig_rm", "hyp": "hyp_rm", "hyp_rm": "hyp_rm"}

FAMILY_DEFAULTS = {
    ("shifted_ho", "consecutive"): {"omega": 1.0, "kappa": 1.0, "j": 1},
    ("shifted_ho", "confluent"): {"omega": 1.0, "kappa": 1.0, "j": 0, "w0": -1.0},
    ("trig_rm", "consecutive"): {"D": 4.0, "alpha": 1.0, "kappa": -7.0, "j": 1},
    ("trig_rm", "confluent"): {"D": 2.0, "alpha": 1.0, "kappa": -2.0, "j": 0, "w0": -1.0},
    ("hyp_rm", "consecutive"): {"D": 8.0, "alpha": 1.0, "kappa": 1.0, "j": 1},
    ("hyp_rm", "confluent"): {"D": 8.0, "alpha": 1.0, "kappa": 1.0, "j": 0, "w0": -1.0},
}

FAMILY_PARAMS = {"shifted_ho": ("omega", "kappa"), "trig_rm": ("D", "alpha", "kappa"),
                 "hyp_rm": ("D", "alpha", "kappa")}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str = "profile"
    family: str = "shifted_ho"
    omega: float | None = None
    D: float | None = None
    alpha: float | None = None
    kappa: float | None = None
    transform: str = "consecutive"
    j: int | None = None
    w0: float | None = None
    k: float | None = None
    n: int = 0
    nmax: int = 6
    ksweep: str | None = None
    grid: str | None = None
    format: str = "csv"
    out: str | None = None
    tol: float | None = None


# ------------------------------------------------------------ config
def _parse_triple(text, name):
    try:
        a, b, c = [s.strip() for s in str(text).split(",")]
        return float(a), float(b), int(c)
    except ValueError:
        raise ConfigError(f"--{name} expects 'min,max,N', got {text!r}") from None


def resolve_config(cfg):
    """Fill family defaults and validate; returns a new RunConfig."""
    fam = FAMILY_ALIASES.get(str(cfg.family).lower())
    if fam is None:
        raise ConfigError(f"unknown family {cfg.family!r}; choose shifted_ho, trig_rm or hyp_rm")
    if cfg.transform not in ("consecutive", "confluent"):
        raise ConfigError(f"unknown transform {cfg.transform!r}; choose consecutive or confluent")
    if cfg.format not in ("csv", "json"):
        raise ConfigError(f"unknown format {cfg.format!r}; choose csv or json")
    out = RunConfig(**asdict(cfg))
    out.family = fam
    for key, val in FAMILY_DEFAULTS[(fam, cfg.transform)].items():
        if getattr(out, key) is None and not (key == "kappa" and cfg.k is not None):
            setattr(out, key, val)
    if cfg.transform == "consecutive" and cfg.w0 is not None:
        raise ConfigError("--w0 only applies to the confluent transform")
    if cfg.k is not None and cfg.kappa is not None:
        raise ConfigError("give either --k or --kappa, not both")
    for name in {"shifted_ho": ("D", "alpha"), "trig_rm": ("omega",), "hyp_rm": ("omega",)}[fam]:
        if getattr(cfg, name) is not None:
            raise ConfigError(f"--{name} does not apply to family {fam}")
    if out.grid is not None:
        _parse_triple(out.grid, "grid")
    if out.ksweep is not None:
        _parse_triple(out.ksweep, "ksweep")
    if out.tol is not None and not out.tol > 0:
        raise ConfigError("--tol must be positive")
    if out.n < 0 or out.nmax < 0:
        raise ConfigError("--n and --nmax must be non-negative")
    return out


def build(cfg):
    """(model, transform) for a resolved config.

    With --k the model's kappa is solved from the closed-form relation; when
    several real branches exist the physical (convex lowest energy) one is
    taken.
    """
    params = {p: getattr(cfg, p) for p in FAMILY_PARAMS[cfg.family]}
    if params["kappa"] is None:
        # placeholder for the relation solve below
        params["kappa"] = FAMILY_DEFAULTS[(cfg.family, cfg.transform)]["kappa"]
    model = make_model(cfg.family, **params)
    w0 = cfg.w0 if cfg.transform == "confluent" else None
    transform = make_transform(model, cfg.transform, cfg.j, w0)
    if cfg.k is None:
        return model, transform
    model = model_for_k(model, transform, cfg.k)
    return model, make_transform(model, cfg.transform, cfg.j, w0)


def model_for_k(model, transform, k):
    roots = sorted(set(k_to_kappa(model, transform, k)))
    if len(roots) == 1:
        kappa = roots[0]
    else:
        kappa, _ = physical_branch(model, transform, k)
    return _with_kappa(model, kappa)


def grid_for(cfg, transform, n_max=None):
    if cfg.grid is None:
        return transform.default_grid(n_max if n_max is not None else cfg.nmax)
    lo, hi, npts = _parse_triple(cfg.grid, "grid")
    grid = make_grid(lo, hi, npts)
    transform.model.check_inside(grid.points)
    return grid


# ------------------------------------------------------------ tables
def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _parse(cell):
    if cell == "":
        return None
    for conv in (int, float):
        try:
            return conv(cell)
        except ValueError:
            pass
    return cell


def emit_csv(header, columns, rows):
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def read_csv(text):
    """(header lines, column names, rows) from emit_csv output."""
    header, columns, rows = [], None, []
    for line in text.splitlines():
        if line.startswith("# "):
            header.append(line[2:])
        elif columns is None:
            columns = line.split(",")
        else:
            rows.append([_parse(c) for c in line.split(",")])
    return header, columns or [], rows


def _config_header(cfg, command):
    lines = [f"bilayer-susy {command}", f"units: {UNITS_NOTE}"]
    for f in fields(RunConfig):
        lines.append(f"{f.name} = {json.dumps(getattr(cfg, f.name))}")
    return lines


def _json_value(v):
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


def write_output(cfg, command, columns, rows, meta, stream=None):
    meta = {"command": command, "units": UNITS_NOTE, "config": asdict(cfg),
            **{k: _json_value(v) for k, v in meta.items()}}
    if cfg.format == "json":
        doc = dict(meta, columns=columns,
                   data={c: [_json_value(r[i]) for r in rows] for i, c in enumerate(columns)})
        text = json.dumps(doc, indent=1) + "\n"
        sidecar = None
    else:
        header = _config_header(cfg, command) + [
            f"{k} = {json.dumps(v)}" for k, v in meta.items() if k not in ("command", "units", "config")]
        text = emit_csv(header, columns, rows)
        sidecar = json.dumps(dict(meta, columns=columns), indent=1) + "\n"
    if cfg.out is None:
        (stream or sys.stdout).write(text)
        return
    with open(cfg.out, "w") as fh:
        fh.write(text)
    if sidecar is not None:
        with open(cfg.out + ".json", "w") as fh:
            fh.write(sidecar)


# ------------------------------------------------------------ commands
def cmd_profile(cfg, stream=None):
    model, transform = build(cfg)
    grid = grid_for(cfg, transform)
    x = grid.points
    prof = partner_profile(transform, grid)
    rows = [list(r) for r in zip(x, prof.V0, prof.V2, prof.B, prof.A, prof.f_extra)]
    meta = {"kappa_used": model.kappa, "C1": prof.C1, "k_eta": prof.k,
            "eta_zeros": prof.eta_zeros}
    write_output(cfg, "profile", ["x", "V0", "V2", "B", "A", "f_extra"], rows, meta, stream)
    return 0


def _spectrum_rows(cfg, base_model, base_transform, k):
    w0 = cfg.w0 if cfg.transform == "confluent" else None
    status = "ok"
    try:
        model = model_for_k(base_model, base_transform, k)
    except ClosedFormUnavailable:
        model, status = base_model, "fixed_kappa"
    except NoBranch:
        return [[k, None, None, None, None, None, "absent"]]
    transform = make_transform(model, cfg.transform, cfg.j, w0)
    recs = standard_ordering(level_records(transform, cfg.nmax), transform)
    return [[k, model.kappa, r.n_aux, r.m_std, r.energy, bool(r.degenerate_with), status]
            for r in recs]


def cmd_spectrum(cfg, stream=None):
    model, transform = build(cfg)
    lo, hi, npts = _parse_triple(cfg.ksweep or "-5,5,11", "ksweep")
    ks = np.linspace(lo, hi, npts) if npts > 1 else np.array([lo])
    rows = []
    for k in ks:
        rows.extend(_spectrum_rows(cfg, model, transform, float(k)))
    try:
        closed_form_k(model, transform)
        relation = "closed_form"
    except (ClosedFormUnavailable, NoBranch):
        relation = "none (kappa held fixed, energies independent of k)"
    meta = {"kappa_relation": relation}
    write_output(cfg, "spectrum", ["k", "kappa", "n_aux", "m_std", "E", "degenerate", "status"],
                 rows, meta, stream)
    return 0


def cmd_state(cfg, stream=None):
    model, transform = build(cfg)
    grid = grid_for(cfg, transform, max(cfg.nmax, cfg.n + 2))
    rel = kappa_to_k(model, transform, grid)
    state = spinor_state(model, transform, cfg.n, k=rel.k, grid=grid)
    recs = standard_ordering(level_records(transform, max(cfg.nmax, cfg.n)), transform)
    m_std = next(r.m_std for r in recs if r.n_aux == cfg.n)
    A = vector_potential(transform, grid, rel.C1)
    psi2, psi0 = state.components
    rho = probability_density(state)
    jx, jy = current_density(state, A)
    rows = [list(r) for r in zip(grid.points, psi0, psi2, rho, jx, jy)]
    meta = {"kappa_used": model.kappa, "k_eta": rel.k, "energy": state.energy,
            "hole_energy": state.hole_energy, "m_std": m_std,
            "two_component": state.two_component, "spinor_sign": state.sign,
            "norm": integrate(SampledFunction(grid, rho))}
    write_output(cfg, "state", ["x", "psi0", "psi2", "rho", "Jx", "Jy"], rows, meta, stream)
    return 0


def sample_points(transform, grid, count=100, frac=0.05):
    """count points spread over the central part of the grid span where
    eta is representable (it underflows deep in some tails)."""
    x = grid.points
    live = x[np.abs(transform.eta(x)) > 1e-150]
    lo, hi = live[0], live[-1]
    return np.linspace(lo + frac * (hi - lo), hi - frac * (hi - lo), count)


def factorization_error(transform, n, x, edge=0.02):
    """Largest pointwise error of L2^+ L2^- psi_n = (E_n-eps1)(E_n-eps2) psi_n
    on the interior where |psi_n| > 1e-8; relative to the right side, or to
    max |psi_n| when the factor vanishes."""
    res, rhs = factorization_residual(transform, n, x)
    psi = transform.model.eigen_jet(n, x, 0).value
    cut = max(2, int(edge * len(x)))
    mask = np.abs(psi) > 1e-8
    mask[:cut] = mask[-cut:] = False
    E = transform.model.energy(n)
    factor = (E - transform.eps1) * (E - transform.eps2)
    if abs(factor) < 1e-12:
        return float(np.max(np.abs(res[mask])) / np.max(np.abs(psi)))
    return float(np.max(np.abs(res[mask]) / np.abs(rhs[mask])))


def run_checks(cfg):
    """List of {check, value, tol, passed} for the resolved configuration."""
    model, transform = build(cfg)
    grid = grid_for(cfg, transform)
    tol = (lambda t: cfg.tol if cfg.tol is not None else t)
    out = []

    def add(name, value, t):
        out.append({"check": name, "value": float(value), "tol": float(tol(t)),
                    "passed": bool(value < tol(t))})

    xs = sample_points(transform, grid)
    add("v0_reconstruction", np.max(np.abs(reconstruct_v0_from_eta(transform, xs) - model.potential(xs))), 1e-6)
    add("factorization", max(factorization_error(transform, n, grid.points)
                             for n in range(min(5, model.bound_state_count() - 1) + 1)), 1e-6)

    levels = transform.partner_levels(cfg.nmax)[:4]
    fine = grid_with_spacing(grid.x_min, grid.x_max, min(grid.h, 0.01))
    v2 = partner_potential(transform, fine.points)
    fd = fd_spectrum(SampledFunction(fine, v2), len(levels)).energies
    exact = np.array([model.energy(n) for n in levels])
    add("partner_spectrum_fd", np.max(np.abs(fd - exact) / (1.0 + np.abs(exact))), 5e-3)

    try:
        rel = kappa_to_k(model, transform, grid, check=False)
        A = vector_potential(transform, grid, rel.C1)
        g = 0.5 * (transform.eta(grid.points) - 2.0 * A)
        cut = max(2, len(g) // 50)
        spread = float(np.std(g[cut:-cut]))
        add("wavenumber_constancy", spread / (1.0 + abs(rel.k)), 1e-8)
    except RelationInconsistent as exc:
        out.append({"check": "wavenumber_constancy", "value": float("inf"), "tol": tol(1e-8),
                    "passed": False, "note": str(exc)})
        return out

    for n in range(min(cfg.nmax, model.bound_state_count() - 1) + 1):
        if n > 5:
            break
        electron_energy(model, transform, n)
        st = spinor_state(model, transform, n, k=rel.k, grid=grid)
        amp = max(np.max(np.abs(st.lower.values)), np.max(np.abs(st.upper.values)))
        add(f"coupled_residual_n{n}", max(st.checks["residual_minus"], st.checks["residual_plus"]) / amp, 1e-5)
        rho = probability_density(st)
        add(f"norm_n{n}", abs(integrate(SampledFunction(grid, rho)) - 1.0), 1e-6)
        jx, jy = current_density(st, A)
        add(f"jx_zero_n{n}", np.max(np.abs(jx)), 1e-8)
        scale = np.max(np.abs(jy))
        add(f"continuity_n{n}", continuity_residual(st, A) / scale if scale > 0 else 0.0, 1e-5)

    if transform.kind == "confluent":
        try:
            wc = w_closed_form(transform, xs)
            add("w_closed_vs_quadrature", np.max(np.abs(wc - w_quadrature(transform, xs))), 1e-7)
        except (ClosedFormUnavailable, ConvergenceFailure) as exc:
            out.append({"check": "w_closed_vs_quadrature", "value": None, "tol": tol(1e-7),
                        "passed": True, "note": f"closed form unavailable: {exc}"})
    return out


def cmd_verify(cfg, stream=None):
    checks = run_checks(cfg)
    rows = [[c["check"], c["value"], c["tol"], "pass" if c["passed"] else "FAIL", c.get("note", "")]
            for c in checks]
    ok = all(c["passed"] for c in checks)
    write_output(cfg, "verify", ["check", "value", "tol", "status", "note"], rows,
                 {"all_passed": ok}, stream)
    return 0 if ok else 1


COMMANDS = {"profile": cmd_profile, "spectrum": cmd_spectrum, "state": cmd_state, "verify": cmd_verify}


# ------------------------------------------------------------ entry point
def _parser():
    p = argparse.ArgumentParser(prog="bilayer-susy", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    p.add_argument("--family")
    for name in ("omega", "D", "alpha", "kappa", "w0", "k", "tol"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--transform", choices=["consecutive", "confluent"])
    for name in ("j", "n", "nmax"):
        p.add_argument(f"--{name}", type=int)
    p.add_argument("--ksweep", help="k sweep 'min,max,N' for spectrum")
    p.add_argument("--grid", help="grid 'min,max,N'")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--out", help="output path (stdout when omitted)")
    return p


def config_from_args(argv):
    args = _parser().parse_args(argv)
    values = {}
    if args.config:
        try:
            with open(args.config) as fh:
                values.update(json.load(fh))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from None
        known = {f.name for f in fields(RunConfig)}
        bad = set(values) - known
        if bad:
            raise ConfigError(f"unknown config keys: {sorted(bad)}")
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    values["command"] = args.command
    return RunConfig(**values)


def main(argv=None, stream=None):
    try:
        cfg = resolve_config(config_from_args(argv))
        return COMMANDS[cfg.command](cfg, stream)
    except (ConfigError, SusyError) as exc:
        print(f"bilayer-susy: configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
