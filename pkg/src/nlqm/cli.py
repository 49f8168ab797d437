"""Command-line laboratory: run packaged experiments from JSON configs.

    nlqm run CONFIG.json [--out DIR]
    nlqm compare A.csv B.csv [--norm linf|l2] [--tol X]
    nlqm list-experiments

A config is a single scenario object or ``{"scenarios": [...]}``; each
scenario names an ``experiment``, an optional output ``name``, and typed
parameters (see ``list-experiments``).  Complex parameters are written as
``[re, im]`` (a bare number means a real value).

Every scenario writes ``<name>.csv`` (first column is always ``t``: the time
grid, or the sweep/record coordinate for time-free experiments) and
``<name>.report.json``.  Output is byte-reproducible: fixed float formatting,
LF line endings, sorted JSON keys, and no randomness anywhere in the library.
The output directory is ``--out``, else ``$NLQM_OUT``, else ``./nlqm-out``.

Exit status: 0 all scenarios passed, 1 at least one failed, 2 the config
itself was unusable.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from .core import ValidationError, sigma3
from .observables import (
    SingularObservableError,
    bilinear,
    canonical,
    cubic,
    moment_power,
    nonlinear_operator,
    power_family,
    singular_inverse,
)
from .spectra import (
    diagonal_values,
    eigenfrequencies,
    find_eigenstates,
    moment_probabilities,
)
from .dynamics import (
    BlochParams,
    IntegrationError,
    integrate_bloch,
    integrate_nls,
    neo_hamiltonian,
)
from . import composite
from . import atom as atom_mod

__all__ = ["main"]


class SchemaError(ValueError):
    """A scenario violated its experiment's parameter schema."""


@dataclass(frozen=True)
class Field:
    name: str
    kind: str  # real | int | bool | str | complex | real_list | int_list | complex_list
    default: object = None
    required: bool = False
    choices: tuple = ()
    help: str = ""


def _as_real(v, field):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"field '{field}' must be a real number")
    return float(v)


def _as_int(v, field):
    if isinstance(v, bool) or not isinstance(v, int):
        raise SchemaError(f"field '{field}' must be an integer")
    return int(v)


def _as_bool(v, field):
    if not isinstance(v, bool):
        raise SchemaError(f"field '{field}' must be true or false")
    return v


def _as_str(v, field, choices=()):
    if not isinstance(v, str):
        raise SchemaError(f"field '{field}' must be a string")
    if choices and v not in choices:
        raise SchemaError(f"field '{field}' must be one of {list(choices)}, got '{v}'")
    return v


def _as_complex(v, field):
    if isinstance(v, bool):
        raise SchemaError(f"field '{field}' must be a number or [re, im] pair")
    if isinstance(v, (int, float)):
        return complex(v)
    if (isinstance(v, list) and len(v) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)):
        return complex(v[0], v[1])
    raise SchemaError(f"field '{field}' must be a number or [re, im] pair")


def _as_real_list(v, field):
    if not isinstance(v, list) or not v:
        raise SchemaError(f"field '{field}' must be a non-empty list of numbers")
    return [_as_real(x, field) for x in v]


def _as_int_list(v, field):
    if not isinstance(v, list) or not v:
        raise SchemaError(f"field '{field}' must be a non-empty list of integers")
    return [_as_int(x, field) for x in v]


def _as_complex_list(v, field):
    if not isinstance(v, list) or not v:
        raise SchemaError(f"field '{field}' must be a non-empty list of entries")
    return [_as_complex(x, field) for x in v]


_COERCE = {
    "real": _as_real,
    "int": _as_int,
    "bool": _as_bool,
    "complex": _as_complex,
    "real_list": _as_real_list,
    "int_list": _as_int_list,
    "complex_list": _as_complex_list,
}


def _coerce_params(scenario: dict, fields) -> dict:
    known = {f.name for f in fields}
    for key in scenario:
        if key not in known and key not in ("experiment", "name"):
            raise SchemaError(f"unknown field '{key}'")
    out = {}
    for f in fields:
        if f.name not in scenario:
            if f.required:
                raise SchemaError(f"missing required field '{f.name}'")
            out[f.name] = f.default
            continue
        v = scenario[f.name]
        if f.kind == "str":
            out[f.name] = _as_str(v, f.name, f.choices)
        else:
            out[f.name] = _COERCE[f.kind](v, f.name)
    return out


# ---------------------------------------------------------------------------
# Experiment runners.  Each returns (header, rows, metrics, passed).


def _family_observable(p):
    fam = p["family"]
    if fam == "canonical":
        return canonical(p["e1"], p["e2"], p["eps"])
    if fam == "cubic":
        return cubic(p["e1"], p["e2"], p["eps"])
    if fam == "even-power":
        return power_family(p["e1"], p["e2"], p["eps"], power=p["power"])
    return singular_inverse(p["eps"])


_FAMILY_FIELDS = (
    Field("family", "str", default="canonical",
          choices=("canonical", "cubic", "even-power", "singular"),
          help="two-level moment family (singular uses eps as its coefficient)"),
    Field("e1", "real", default=0.0, help="lower level weight"),
    Field("e2", "real", default=1.0, help="upper level weight"),
    Field("eps", "real", default=1.0, help="nonlinearity strength"),
    Field("power", "int", default=2, help="moment exponent for even-power"),
)


def _run_eigen_census(p):
    obs = _family_observable(p)
    diag = {}
    recs = find_eigenstates(obs, 2, grid=tuple(p["grid"]), diagnostics=diag)
    rows = []
    for i, r in enumerate(recs):
        w = np.abs(r.state.amplitudes) ** 2
        rows.append([float(i), r.eigenvalue, r.residual, float(w[0]), float(w[1])])
    metrics = {"count": len(recs), **diag}
    passed = p["expected_count"] < 0 or len(recs) == p["expected_count"]
    return (["t", "eigenvalue", "residual", "weight_0", "weight_1"],
            rows, metrics, passed)


def _run_diagonal_census(p):
    obs = _family_observable(p)
    z = np.asarray(p["state"], dtype=complex)
    vals = diagonal_values(obs, z)
    n = float(np.vdot(z, z).real)
    rows = [[float(i), v] for i, v in enumerate(vals)]
    metrics = {"average": obs.value(z) / n, "count": len(vals)}
    return ["t", "diagonal_value"], rows, metrics, True


def _run_eigenfrequency(p):
    e = np.asarray(p["e_levels"], dtype=float)
    eps = np.asarray(p["eps_levels"], dtype=float)
    z0 = np.asarray(p["state"], dtype=complex)
    if not (e.size == eps.size == z0.size):
        raise SchemaError("e_levels, eps_levels and state must have equal length")
    obs = bilinear(np.diag(e)) + moment_power(np.diag(eps.astype(complex)), 2)
    builder = lambda z: nonlinear_operator(obs, z)
    traj = integrate_nls(builder, z0, p["t_end"], p["dt"])
    measured = eigenfrequencies(traj)
    n = float(np.vdot(z0, z0).real)
    avg = float(np.sum(eps * np.abs(z0) ** 2) / n)
    rows, devs = [], []
    for k, (om, weight) in enumerate(measured):
        pred = float(e[k] + 2.0 * avg * eps[k] - avg ** 2)
        dev = abs(om - pred) if weight > 1e-10 else 0.0
        devs.append(dev)
        rows.append([float(k), weight, om, pred, dev])
    metrics = {"max_deviation": max(devs)}
    return (["t", "weight", "omega_measured", "omega_predicted", "deviation"],
            rows, metrics, max(devs) < p["tol"])


def _run_probability_inconsistency(p):
    obs = canonical(p["e"], p["e"], p["eps"])
    thetas = np.linspace(0.0, np.pi / 2.0, p["samples"])
    e, eps = p["e"], p["eps"]
    rows, disc, closed_dev = [], [], []
    for th in thetas:
        z = np.array([np.cos(th), np.sin(th)], dtype=complex)
        mp = moment_probabilities(obs, z, "first-moment")
        p_first = float(mp.probabilities[1])
        p_star = float(mp.other_probabilities[1])
        s2 = float(np.cos(2.0 * th) ** 2)
        cf_first = s2
        cf_star = ((4.0 * eps ** 2 + 2.0 * e * eps) * s2
                   - 3.0 * eps ** 2 * s2 ** 2) / (2.0 * e * eps + eps ** 2)
        disc.append(mp.discrepancy)
        closed_dev.append(max(abs(p_first - cf_first), abs(p_star - cf_star)))
        rows.append([float(th), p_first, p_star, mp.discrepancy])
    metrics = {"max_discrepancy": float(np.max(disc)),
               "closed_form_deviation": float(np.max(closed_dev))}
    return (["t", "p_first_moment", "p_star_square", "discrepancy"],
            rows, metrics, float(np.max(closed_dev)) < 1e-9)


def _telegraph_rows(rep):
    rows = [[float(t), float(s)] for t, s in zip(rep.times, rep.signal)]
    metrics = {
        "fitted_frequency": rep.fitted_frequency,
        "fitted_amplitude": rep.fitted_amplitude,
        "predicted_frequency": rep.predicted_frequency,
        "predicted_amplitude": rep.predicted_amplitude,
    }
    ok = (abs(rep.fitted_frequency - rep.predicted_frequency)
          < 1e-2 * max(rep.predicted_frequency, 1e-12)
          and abs(rep.fitted_amplitude - rep.predicted_amplitude)
          < 2e-2 * max(rep.predicted_amplitude, 1e-12))
    return ["t", "signal"], rows, metrics, ok


def _run_gisin(p):
    rep = composite.gisin_telegraph(
        composite.TelegraphParams(alpha=p["alpha"], beta=p["beta"], eps=p["eps"],
                                  e1=p["e1"], e2=p["e2"]),
        p["t_end"], p["dt"])
    return _telegraph_rows(rep)


def _run_mobility(p):
    rep = composite.mobility_telegraph(p["eps"], p["tilt"], p["t_end"], p["dt"])
    return _telegraph_rows(rep)


def _run_no_signaling(p):
    a, b = p["alpha"], p["beta"]
    if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > 1e-10:
        raise SchemaError("alpha, beta must satisfy |alpha|^2 + |beta|^2 = 1")
    u = np.array([[a, -np.conj(b)], [b, np.conj(a)]], dtype=complex)
    rep = composite.no_signaling_check(p["description"], u, p["t_end"], p["dt"],
                                       eps=p["eps"], e1=p["e1"], e2=p["e2"])
    rows = [[float(t), float(d)] for t, d in zip(rep.times, rep.deviations)]
    metrics = {"max_deviation": rep.max_deviation}
    if p["expect"] == "silent":
        ok = rep.max_deviation < 1e-8
    else:
        ok = rep.max_deviation > 1e-2
    return ["t", "deviation"], rows, metrics, ok


def _run_reduced_flow(p):
    eps = np.diag(np.asarray(p["eps_levels"], dtype=complex))
    d = eps.shape[0]
    diag = np.asarray(p["rho_diag"], dtype=float)
    if diag.size != d:
        raise SchemaError("rho_diag must match eps_levels in length")
    rho0 = np.diag(diag.astype(complex))
    rho0[0, 1] += p["delta"]
    rho0[1, 0] += p["delta"]
    plain = composite.polchinski_reduced_flow("plain", eps, rho0, p["t_end"], p["dt"])
    purity = composite.polchinski_reduced_flow("purity-weighted", eps, rho0,
                                               p["t_end"], p["dt"])
    rows = [[float(t), a.real, a.imag, b.real, b.imag]
            for t, a, b in zip(plain.times, plain.rhos[:, 0, 1], purity.rhos[:, 0, 1])]
    rate_a = plain.offdiagonal_phase_rate()
    rate_b = purity.offdiagonal_phase_rate()
    if abs(rate_a) < 1e-12:
        raise ValidationError(
            "plain flow shows no rotation for this configuration (the state "
            "sits at a fixed point), so the rate ratio is undefined; choose "
            "eps_levels and rho_diag with a nonzero weighted average")
    tr = float(np.trace(rho0).real)
    predicted = float(np.trace(rho0 @ rho0).real) / tr ** 2
    ratio = rate_b / rate_a
    metrics = {"rate_plain": rate_a, "rate_purity": rate_b,
               "ratio": ratio, "predicted_ratio": predicted}
    return (["t", "re_plain", "im_plain", "re_purity", "im_purity"],
            rows, metrics, abs(ratio - predicted) < 1e-4)


def _run_atom_inversion(p):
    params = atom_mod.AtomFieldParams(
        omega_levels=tuple(p["omega_levels"]),
        eps_levels=tuple(p["eps_levels"]),
        omega=p["omega"], q=p["q"], n_max=p["n_max"])
    builder = atom_mod.build_atom_field(p["description"], params)
    z0 = atom_mod.product_state(params, p["level"], p["photons"])
    series = atom_mod.inversion_trajectory(builder, z0, p["t_end"], p["dt"])
    metrics = {"leak": series.leak}
    header = ["t", "w"]
    rows = [[float(t), float(w)] for t, w in zip(series.times, series.w)]
    passed = True
    if p["compare"] != "none":
        if p["level"] > 1:
            raise SchemaError("closed-form comparison needs the coupled pair (level 0 or 1)")
        n_prime = -0.5 if p["level"] == 0 else 0.5
        n_big = n_prime + p["photons"]
        om = params.rabi(n_big)
        if p["compare"] == "elliptic":
            wc = atom_mod.elliptic_inversion(om, params.varsigma(), series.times)
            key = "linf_vs_elliptic"
        else:
            wc = -np.cos(om * series.times)
            key = "linf_vs_cos"
        if p["level"] == 1:
            wc = -wc
        dev = float(np.max(np.abs(series.w - wc)))
        metrics[key] = dev
        header.append("w_closed")
        rows = [r + [float(w)] for r, w in zip(rows, wc)]
        passed = dev < p["tol"]
    return header, rows, metrics, passed


def _run_bloch(p):
    r0 = np.asarray(p["r0"], dtype=float)
    if r0.size != 3:
        raise SchemaError("r0 must have exactly three components")
    bp = BlochParams(delta=p["delta"], omega=p["omega"], a=p["a"], eps=p["eps"],
                     rotating_frame=(p["mode"] == "rotating"))
    btraj = integrate_bloch(bp, r0, p["t_end"], p["dt"])
    header = ["t", "u", "v", "w"]
    rows = [[float(t)] + [float(x) for x in r] for t, r in zip(btraj.times, btraj.r)]
    metrics = {"final_length_squared": float(np.dot(btraj.r[-1], btraj.r[-1]))}
    passed = True
    if p["compare_wave"]:
        if abs(float(np.dot(r0, r0)) - 1.0) > 1e-9:
            raise SchemaError("wave comparison needs |r0| = 1 (a pure state)")
        th = np.arccos(np.clip(r0[2], -1.0, 1.0))
        ph = np.arctan2(r0[1], r0[0])
        psi0 = np.array([np.cos(th / 2.0),
                         np.sin(th / 2.0) * np.exp(1j * ph)], dtype=complex)
        base = 0.5 * (p["delta"] * sigma3
                      - p["omega"] * np.array([[0, 1], [1, 0]], dtype=complex))
        wb = neo_hamiltonian(p["a"], p["eps"], base)
        wtraj = integrate_nls(wb, psi0, p["t_end"], p["dt"])
        paulis = (np.array([[0, 1], [1, 0]], dtype=complex),
                  np.array([[0, -1j], [1j, 0]], dtype=complex),
                  sigma3)
        amps = wtraj.amplitudes()
        norms = np.sum(np.abs(amps) ** 2, axis=1)
        rw = np.stack([np.einsum("ti,ij,tj->t", amps.conj(), s, amps).real / norms
                       for s in paulis], axis=1)
        dev = float(np.max(np.abs(btraj.r - rw)))
        metrics["wave_deviation"] = dev
        header += ["u_wave", "v_wave", "w_wave"]
        rows = [r + [float(x) for x in rv] for r, rv in zip(rows, rw)]
        if p["mode"] == "rotating" or p["a"] == 0.0:
            passed = dev < p["tol"]
    return header, rows, metrics, passed


def _run_intention(p):
    rep = composite.intention_paradox(
        composite.ParadoxParams(lambda1=p["lambda1"], lambda2=p["lambda2"],
                                f=p["f"], t=p["t"]), p["dt"])
    angle_rate = 2.0 * p["lambda2"] * p["f"]
    rows = [[float(t), float(s), 0.5 * p["lambda2"] * float(np.cos(angle_rate * t))]
            for t, s in zip(rep.times, rep.sigma3_series)]
    metrics = {"x_value": rep.x_value,
               "analytic_gap": rep.analytic_gap,
               "duality_gap": rep.duality_gap,
               "sigma3_final": rep.sigma3_final,
               "sigma3_predicted": rep.sigma3_predicted}
    passed = rep.analytic_gap < 1e-8 and rep.duality_gap < 1e-8
    return ["t", "sigma3", "sigma3_predicted"], rows, metrics, passed


EXPERIMENTS = {
    "eigen-census": (
        "enumerate nonlinear eigenstates of a two-level moment family",
        _FAMILY_FIELDS + (
            Field("grid", "int_list", default=[32, 16], help="seed grid (theta, phi)"),
            Field("expected_count", "int", default=-1,
                  help="fail unless this many distinct states (-1 disables)"),
        ),
        _run_eigen_census),
    "diagonal-census": (
        "eigenvalues of the state-dependent operator at a given state",
        _FAMILY_FIELDS + (
            Field("state", "complex_list", required=True, help="amplitude vector"),
        ),
        _run_diagonal_census),
    "eigenfrequency": (
        "trajectory phase rates of a diagonal family vs the closed form",
        (Field("e_levels", "real_list", required=True),
         Field("eps_levels", "real_list", required=True),
         Field("state", "complex_list", required=True),
         Field("t_end", "real", default=30.0),
         Field("dt", "real", default=0.01),
         Field("tol", "real", default=1e-5)),
        _run_eigenfrequency),
    "probability-inconsistency": (
        "two moment-based probability rules disagree for a degenerate family",
        (Field("e", "real", default=1.0),
         Field("eps", "real", default=0.1),
         Field("samples", "int", default=41)),
        _run_probability_inconsistency),
    "gisin-telegraph": (
        "remote-preparation telegraph under the slice-sum pair extension",
        (Field("alpha", "complex", default=complex(np.sqrt(3.0) / 2.0)),
         Field("beta", "complex", default=complex(0.5)),
         Field("eps", "real", default=0.1),
         Field("e1", "real", default=0.0),
         Field("e2", "real", default=0.0),
         Field("t_end", "real", default=40.0),
         Field("dt", "real", default=0.05)),
        _run_gisin),
    "mobility-telegraph": (
        "telegraph from a tilted correlation basis",
        (Field("eps", "real", default=0.1),
         Field("tilt", "real", default=float(np.pi / 8.0)),
         Field("t_end", "real", default=40.0),
         Field("dt", "real", default=0.05)),
        _run_mobility),
    "no-signaling": (
        "does a remote unitary move the local reduced state?",
        (Field("description", "str", default="polchinski-plain",
               choices=("polchinski-plain", "polchinski-purity", "weinberg")),
         Field("alpha", "complex", default=complex(np.sqrt(3.0) / 2.0)),
         Field("beta", "complex", default=complex(0.5)),
         Field("eps", "real", default=0.1),
         Field("e1", "real", default=0.0),
         Field("e2", "real", default=0.0),
         Field("t_end", "real", default=5.0),
         Field("dt", "real", default=0.01),
         Field("expect", "str", default="silent", choices=("silent", "signal"))),
        _run_no_signaling),
    "reduced-flow-variants": (
        "reduced-flow rotation rate: plain vs purity-weighted extension",
        (Field("eps_levels", "real_list", default=[1.0, -1.0]),
         Field("rho_diag", "real_list", default=[0.75, 0.25]),
         Field("delta", "real", default=1e-5, help="off-diagonal seed"),
         Field("t_end", "real", default=20.0),
         Field("dt", "real", default=0.01)),
        _run_reduced_flow),
    "atom-inversion": (
        "population inversion of the atom-field models vs closed forms",
        (Field("description", "str", default="polchinski",
               choices=("linear", "polchinski", "weinberg-fock")),
         Field("omega_levels", "real_list", default=[0.0, 1.0]),
         Field("eps_levels", "real_list", default=[-0.5, 0.5]),
         Field("omega", "real", default=1.0),
         Field("q", "complex", default=complex(1.0)),
         Field("n_max", "int", default=4),
         Field("level", "int", default=0),
         Field("photons", "int", default=1),
         Field("t_end", "real", default=13.5),
         Field("dt", "real", default=0.005),
         Field("compare", "str", default="elliptic",
               choices=("none", "elliptic", "cos")),
         Field("tol", "real", default=1e-4)),
        _run_atom_inversion),
    "bloch-neoclassical": (
        "damped-driven Bloch forms against the nonlinear wave equation",
        (Field("delta", "real", default=0.0),
         Field("omega", "real", default=1.0),
         Field("a", "real", default=0.2),
         Field("eps", "real", default=0.3),
         Field("r0", "real_list", default=[0.0, 0.0, -1.0]),
         Field("t_end", "real", default=20.0),
         Field("dt", "real", default=0.01),
         Field("mode", "str", default="rotating", choices=("fixed", "rotating")),
         Field("compare_wave", "bool", default=True),
         Field("tol", "real", default=1e-5)),
        _run_bloch),
    "intention-paradox": (
        "mixture-composition-dependent rotation of a density matrix",
        (Field("lambda1", "real", default=0.5),
         Field("lambda2", "real", default=0.5),
         Field("f", "real", default=1.0),
         Field("t", "real", default=float(np.pi)),
         Field("dt", "real", default=0.001)),
        _run_intention),
}


# ---------------------------------------------------------------------------
# Output plumbing


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([_fmt(v) for v in row])


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


def _write_report(path: str, report: dict) -> None:
    with open(path, "w", newline="") as fh:
        json.dump(_jsonable(report), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _out_dir(arg) -> str:
    if arg:
        return arg
    env = os.environ.get("NLQM_OUT")
    if env:
        return env
    return os.path.join(".", "nlqm-out")


def _cmd_run(args) -> int:
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except OSError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as e:
        print(f"config error: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}",
              file=sys.stderr)
        return 2

    if isinstance(cfg, dict) and "scenarios" in cfg:
        scenarios = cfg["scenarios"]
        if not isinstance(scenarios, list) or not scenarios:
            print("config error: 'scenarios' must be a non-empty list", file=sys.stderr)
            return 2
    elif isinstance(cfg, dict):
        scenarios = [cfg]
    else:
        print("config error: top level must be an object", file=sys.stderr)
        return 2

    out = _out_dir(args.out)
    os.makedirs(out, exist_ok=True)

    prepared = []
    seen = set()
    for i, sc in enumerate(scenarios):
        if not isinstance(sc, dict):
            print(f"config error: scenario {i + 1} must be an object", file=sys.stderr)
            return 2
        exp = sc.get("experiment")
        if exp not in EXPERIMENTS:
            known = ", ".join(EXPERIMENTS)
            print(f"config error: scenario {i + 1} names unknown experiment "
                  f"{exp!r} (known: {known})", file=sys.stderr)
            return 2
        name = sc.get("name", f"{exp}-{i + 1}")
        if not isinstance(name, str) or not name or any(
                c not in "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-_"
                for c in name):
            print(f"config error: scenario {i + 1} has an unusable name {name!r} "
                  "(letters, digits, '-', '_')", file=sys.stderr)
            return 2
        if name in seen:
            print(f"config error: duplicate scenario name '{name}'", file=sys.stderr)
            return 2
        seen.add(name)
        _, fields, runner = EXPERIMENTS[exp]
        try:
            params = _coerce_params(sc, fields)
        except SchemaError as e:
            print(f"config error: scenario '{name}': {e}", file=sys.stderr)
            return 2
        prepared.append((name, exp, params, runner))

    all_ok = True
    for name, exp, params, runner in prepared:
        report = {"experiment": exp, "name": name,
                  "params": {k: _jsonable(v) for k, v in params.items()}}
        try:
            header, rows, metrics, passed = runner(params)
        except (ValidationError, IntegrationError, SingularObservableError,
                SchemaError, np.linalg.LinAlgError) as e:
            report["passed"] = False
            report["error"] = str(e)
            _write_report(os.path.join(out, f"{name}.report.json"), report)
            print(f"{name}: FAIL ({exp}) — {e}")
            all_ok = False
            continue
        csv_name = f"{name}.csv"
        _write_csv(os.path.join(out, csv_name), header, rows)
        report["csv"] = csv_name
        report["metrics"] = metrics
        report["passed"] = bool(passed)
        _write_report(os.path.join(out, f"{name}.report.json"), report)
        print(f"{name}: {'pass' if passed else 'FAIL'} ({exp})")
        all_ok = all_ok and passed
    return 0 if all_ok else 1


def _read_csv(path):
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        rows = [[float(x) for x in row] for row in rd]
    return header, np.asarray(rows, dtype=float)


def _cmd_compare(args) -> int:
    try:
        ha, a = _read_csv(args.a)
        hb, b = _read_csv(args.b)
    except (OSError, ValueError, StopIteration) as e:
        print(f"compare error: {e}", file=sys.stderr)
        return 2
    if ha != hb:
        print("compare error: column headers differ", file=sys.stderr)
        return 2
    if a.shape != b.shape:
        print(f"compare error: row counts differ ({a.shape[0]} vs {b.shape[0]})",
              file=sys.stderr)
        return 2
    if a.size == 0:
        print("compare error: no data rows", file=sys.stderr)
        return 2
    if float(np.max(np.abs(a[:, 0] - b[:, 0]))) > 1e-12:
        print("compare error: t grids differ beyond 1e-12", file=sys.stderr)
        return 2
    diff = a[:, 1:] - b[:, 1:]
    if args.norm == "linf":
        val = float(np.max(np.abs(diff))) if diff.size else 0.0
    else:
        val = float(np.sqrt(np.sum(diff ** 2)))
    print(f"{args.norm} difference: {_fmt(val)}")
    return 0 if val <= args.tol else 1


def _cmd_list(_args) -> int:
    for name, (desc, fields, _runner) in EXPERIMENTS.items():
        print(f"{name}: {desc}")
        for f in fields:
            bits = [f.kind]
            if f.required:
                bits.append("required")
            else:
                bits.append(f"default={_jsonable(f.default)}")
            if f.choices:
                bits.append("choices=" + "|".join(f.choices))
            line = f"  {f.name} ({', '.join(bits)})"
            if f.help:
                line += f" — {f.help}"
            print(line)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nlqm",
        description="numerical laboratory for nonlinear quantum mechanics")
    sub = parser.add_subparsers(dest="command")
    runp = sub.add_parser("run", help="run scenarios from a JSON config")
    runp.add_argument("config")
    runp.add_argument("--out", default=None,
                      help="output directory (else $NLQM_OUT, else ./nlqm-out)")
    cmpp = sub.add_parser("compare", help="compare two result CSV files")
    cmpp.add_argument("a")
    cmpp.add_argument("b")
    cmpp.add_argument("--norm", choices=("linf", "l2"), default="linf")
    cmpp.add_argument("--tol", type=float, default=1e-9)
    sub.add_parser("list-experiments", help="describe available experiments")
    args = parser.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "compare":
        return _cmd_compare(args)
    if args.command == "list-experiments":
        return _cmd_list(args)
    parser.print_help()
    return 2
