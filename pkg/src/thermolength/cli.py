"""Command-line front end.

    thermolength metric   --preset fig1 --out metric.csv
    thermolength pareto   --config run.toml --out front.csv --threads 4
    thermolength validate --preset fig1

Exit codes: 0 success, 1 failed validation or numerical breakdown,
2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import cycle, fock, lindblad, metrics, models, optimizer
from .curves import constant_curve
from .errors import ConfigError, ThermoLengthError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

PIPELINES = ("quantum-gaussian", "classical", "lindblad", "fock-validate")
MODELS = ("coupled", "single", "scaling", "classical-ho")
PROTOCOLS = ("harmonic", "constant")

SCHEMA = {
    "model": {"name": str, "omega0": float, "kappa0": float, "gamma": float},
    "protocol": {"name": str, "T_c": float, "T_h": float, "delta_T": float, "point": list},
    "run": {
        "pipeline": str,
        "eps": list,
        "eps_points": int,
        "N": int,
        "N_list": list,
        "samples": int,
        "grid": int,
        "method": str,
        "truncation": int,
        "sweep": list,
        "sweep_key": str,
    },
}


@dataclass
class RunConfig:
    model: str = "coupled"
    omega0: float = 1.0
    kappa0: float | None = 0.4
    gamma: float = 0.1
    protocol: str = "harmonic"
    T_c: float = 0.25
    T_h: float | None = None
    delta_T: float | None = 1.0
    point: list | None = None
    pipeline: str = "quantum-gaussian"
    eps: list = field(default_factory=lambda: list(np.linspace(0.0, 1.0, 51)))
    N: int = 50
    N_list: list = field(default_factory=lambda: [50, 100, 200, 400, 800])
    samples: int = 101
    grid: int = optimizer.GRID
    method: str = "modal"
    truncation: int = 120
    sweep: list = field(default_factory=list)
    sweep_key: str = "T_c"

    @property
    def t_hot(self):
        if self.T_h is not None:
            return self.T_h
        return self.T_c + (self.delta_T if self.delta_T is not None else self.omega0)

    def validate(self):
        if self.pipeline not in PIPELINES:
            raise ConfigError(f"run.pipeline must be one of {PIPELINES}, got {self.pipeline!r}", "run.pipeline")
        if self.model not in MODELS:
            raise ConfigError(f"model.name must be one of {MODELS}, got {self.model!r}", "model.name")
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol.name must be one of {PROTOCOLS}, got {self.protocol!r}", "protocol.name")
        if not self.omega0 > 0:
            raise ConfigError("model.omega0 must be positive", "model.omega0")
        if not self.gamma > 0:
            raise ConfigError("model.gamma must be positive", "model.gamma")
        if not self.T_c > 0:
            raise ConfigError("protocol.T_c must be positive", "protocol.T_c")
        if not self.t_hot > self.T_c:
            raise ConfigError("protocol.T_h must exceed protocol.T_c", "protocol.T_h")
        if self.protocol == "constant":
            if self.point is None:
                raise ConfigError("protocol.point is required for a constant protocol", "protocol.point")
        eps = [float(e) for e in self.eps]
        if any(not 0.0 <= e <= 1.0 for e in eps) or eps != sorted(eps):
            raise ConfigError("run.eps must be sorted values in [0, 1]", "run.eps")
        self.eps = eps
        if self.N < 2:
            raise ConfigError("run.N must be at least 2", "run.N")
        if self.grid < optimizer.GRID:
            raise ConfigError(f"run.grid must be at least {optimizer.GRID}", "run.grid")
        if self.samples < 2:
            raise ConfigError("run.samples must be at least 2", "run.samples")
        if self.method not in ("modal", "direct", "spectral"):
            raise ConfigError("run.method must be modal, direct or spectral", "run.method")
        if self.truncation < 2:
            raise ConfigError("run.truncation must be at least 2", "run.truncation")
        if self.sweep_key not in ("T_c", "omega0", "kappa0"):
            raise ConfigError("run.sweep_key must be T_c, omega0 or kappa0", "run.sweep_key")
        if self.pipeline == "classical" and self.model not in ("single", "classical-ho", "scaling"):
            raise ConfigError("the classical pipeline needs a single-mode model", "model.name")
        return self


def _coerce(section, key, value):
    kind = SCHEMA[section][key]
    name = f"{section}.{key}"
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name} must be a number, got {value!r}", name)
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name} must be an integer, got {value!r}", name)
        return value
    if not isinstance(value, kind):
        raise ConfigError(f"{name} must be a {kind.__name__}, got {value!r}", name)
    return value


def parse_config(data, base=None):
    """Overlay a parsed TOML mapping on ``base`` (defaults if None)."""
    cfg = base or RunConfig()
    for section, body in data.items():
        if section not in SCHEMA:
            raise ConfigError(f"unknown config section {section!r}", section)
        if not isinstance(body, dict):
            raise ConfigError(f"{section} must be a table", section)
        for key, value in body.items():
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown config key {section}.{key}", f"{section}.{key}")
            value = _coerce(section, key, value)
            attr = key
            if key == "name":
                attr = "model" if section == "model" else "protocol"
            if key == "eps_points":
                if value < 2:
                    raise ConfigError("run.eps_points must be at least 2", "run.eps_points")
                cfg.eps = list(np.linspace(0.0, 1.0, value))
                continue
            setattr(cfg, attr, value)
    return cfg.validate()


def load_config(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}", "--config") from exc
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}", "--config") from exc
    return data


def preset_config(name):
    pr = models.get_preset(name)
    cfg = RunConfig(
        model="classical-ho" if pr.classical else "coupled",
        omega0=pr.omega0,
        kappa0=pr.kappa0,
        T_c=pr.T_c[0],
        delta_T=pr.delta_T,
        pipeline="classical" if pr.classical else "quantum-gaussian",
        N=pr.N,
    )
    if pr.sweep == "T_c" and len(pr.T_c) > 1:
        cfg.sweep, cfg.sweep_key = list(pr.T_c), "T_c"
    elif pr.sweep == "omega0":
        cfg.sweep, cfg.sweep_key = list(pr.omega0_values), "omega0"
    elif pr.sweep == "kappa0":
        cfg.sweep, cfg.sweep_key = list(pr.kappa0_values), "kappa0"
    return cfg


# model / curve assembly


def build_model(cfg):
    classical = cfg.pipeline == "classical" or cfg.model == "classical-ho"
    if cfg.model == "coupled":
        base = models.coupled_oscillators(cfg.omega0, cfg.kappa0 if cfg.kappa0 is not None else 0.0)
    elif cfg.model == "scaling":
        base = models.scaling_oscillator(cfg.omega0, classical=classical)
    else:
        base = models.single_oscillator(classical=classical)
    if cfg.pipeline == "lindblad":
        return lindblad.thermal_damping(base, cfg.gamma)
    return base


def base_model(model):
    return model.model if hasattr(model, "jumps") else model


def build_curve(cfg, model):
    if cfg.protocol == "constant":
        point = np.asarray(cfg.point, dtype=float)
        if point.shape != (base_model(model).n_params + 1,):
            raise ConfigError(f"protocol.point must have {base_model(model).n_params + 1} entries", "protocol.point")
        return constant_curve(point)
    kappa0 = cfg.kappa0 if base_model(model).n_params == 2 else None
    if base_model(model).n_params == 2 and kappa0 is None:
        raise ConfigError("model.kappa0 is required for the coupled model", "model.kappa0")
    if cfg.model == "scaling":
        # scale factor c oscillates around 1
        return models.harmonic_protocol(1.0 / cfg.T_c, 1.0 / cfg.t_hot, 1.0, None)
    return models.harmonic_protocol(1.0 / cfg.T_c, 1.0 / cfg.t_hot, cfg.omega0, kappa0)


def cells(cfg):
    """``(label, cfg)`` for each sweep value, or a single unlabeled cell."""
    if not cfg.sweep:
        return [("", cfg)]
    out = []
    for v in cfg.sweep:
        c = RunConfig(**{k: getattr(cfg, k) for k in cfg.__dataclass_fields__})
        c.sweep = []
        if cfg.sweep_key == "T_c":
            c.T_c = float(v)
            if cfg.T_h is not None:
                raise ConfigError("sweeping T_c needs protocol.delta_T rather than T_h", "protocol.T_h")
        else:
            setattr(c, cfg.sweep_key, float(v))
        out.append((f"{cfg.sweep_key}={float(v)!r}", c.validate()))
    return out


def cell_path(out, label, many):
    if not many:
        return out
    p = Path(out)
    safe = label.replace("=", "_")
    return p.with_name(f"{p.stem}_{safe}{p.suffix}")


# output helpers


def fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in r])
    _write(path, buf.getvalue())


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    raise TypeError(type(x))


def write_jsonl(path, records):
    text = "".join(json.dumps(r, sort_keys=True, default=_json_default) + "\n" for r in records)
    _write(path, text)


# commands


def _metric_fn(model, cfg):
    return optimizer.metric_function(model, cfg.method)


def cmd_metric(cfg, out, threads):
    many = len(cells(cfg)) > 1
    for label, c in cells(cfg):
        model = build_model(c)
        curve = build_curve(c, model)
        fn = _metric_fn(model, c)
        t = np.linspace(0.0, 1.0, c.samples)
        pts = curve.point(t)
        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            pairs = list(pool.map(fn, pts))
        names = ("beta",) + tuple(base_model(model).names)
        k = len(names)
        header = ["t", *names]
        header += [f"m_{names[a]}_{names[b]}" for a in range(k) for b in range(k)]
        header += [f"g_{names[a]}_{names[b]}" for a in range(k) for b in range(k)]
        rows = []
        for ti, p, (m, g) in zip(t, pts, pairs):
            rows.append([ti, *p, *m.ravel(), *g.ravel()])
        write_csv(cell_path(out, label, many), header, rows)
    return 0


def _geometry(cfg, threads):
    model = build_model(cfg)
    curve = build_curve(cfg, model)
    return model, optimizer.CycleGeometry.build(model, curve, intervals=optimizer.GRID - 1,
                                                method=cfg.method, threads=threads)


def cmd_length(cfg, out, threads):
    many = len(cells(cfg)) > 1
    for label, c in cells(cfg):
        _, geo = _geometry(c, threads)
        rows = [[e, geo.length(e), geo.work] for e in c.eps]
        write_csv(cell_path(out, label, many), ["eps", "length", "adiabatic_work"], rows)
    return 0


def cmd_optimize(cfg, out, threads):
    many = len(cells(cfg)) > 1
    for label, c in cells(cfg):
        _, geo = _geometry(c, threads)
        rows = []
        for e in c.eps:
            s = optimizer.optimal_schedule(geo, e, grid=c.grid)
            dphi = s.dphi
            ratio = (np.abs(dphi) / c.N) ** 2
            for ti, ph, d, r in zip(s.t, s.phi, dphi, ratio):
                rows.append([e, ti, ph, d, r])
        write_csv(cell_path(out, label, many), ["eps", "t", "phi", "dphi_dt", "slow_ratio"], rows)
    return 0


def cmd_pareto(cfg, out, threads):
    many = len(cells(cfg)) > 1
    for label, c in cells(cfg):
        _, geo = _geometry(c, threads)
        pts = optimizer.pareto_sweep(geo, c.eps, c.N, threads=threads)
        bc = geo.curve.beta_c
        W = abs(geo.work)
        L1 = geo.length(1.0)
        dw_star = L1 / math.sqrt(c.N) / bc  # k_B T_c L_1 / sqrt(N)
        header = ["eps", "delta_eta", "delta_w_tilde", "delta_w_rel", "delta_w_star_rel",
                  "length", "objective", "adiabatic_work", "slow_ok", "singular"]
        rows = []
        for p in pts:
            rel = p.delta_w / (bc * W)  # Delta W~ / |beta_c W| = Delta W / |W|
            rows.append([p.eps, p.delta_eta, p.delta_w, rel, dw_star / W, p.length,
                         p.objective, geo.work, p.slow_ok, p.singular])
        write_csv(cell_path(out, label, many), header, rows)
    return 0


def cmd_oracle(cfg, out, threads):
    records = []
    for label, c in cells(cfg):
        model = build_model(c)
        if hasattr(model, "jumps"):
            raise ConfigError("the discrete oracle runs step cycles; use a closed pipeline", "run.pipeline")
        curve = build_curve(c, model)
        led = cycle.run_cycle(model, curve, c.N)
        rec = {"record": "cycle", "cell": label, **led.summary()}
        records.append(rec)
        if c.protocol != "constant":
            geo = optimizer.CycleGeometry.build(model, curve, method=c.method, threads=threads)
            tab = cycle.convergence_study(model, geo, optimizer.Schedule.identity(), c.N_list)
            for row in tab.rows:
                records.append({"record": "convergence", "cell": label, **row.as_dict()})
            records.append({"record": "fit", "cell": label, "var_exponent": tab.var_exponent,
                            "deta_exponent": tab.deta_exponent})
    write_jsonl(out, records)
    return 0


def _check(records, name, measured, tol, passed=None, **extra):
    ok = bool(measured <= tol) if passed is None else bool(passed)
    records.append({"check": name, "measured": float(measured), "tolerance": tol, "pass": ok, **extra})
    return ok


def validation_records(cfg):
    """Run the oracle agreement suite; returns JSON-ready records."""
    rec = []
    # Gaussian vs. Fock for the single oscillator
    single = models.single_oscillator()
    for w in (0.5, 1.0, 2.0, 5.0):
        for b in (0.5, 1.0, 2.0, 5.0):
            pt = np.array([b, w])
            F = fock.adapted(single, pt, cfg.truncation)
            try:
                mf = fock.metric_m_fock(F, pt)
                gf = fock.metric_g_fock(F, pt)
            except ThermoLengthError as exc:
                rec.append({"check": "fock-vs-gaussian", "omega": w, "beta": b, "pass": False,
                            "error": str(exc), "suggested_n_max": getattr(exc, "suggested_n_max", None)})
                continue
            m, g = metrics.metric_pair(single, pt)
            dm = abs(m[1, 1] - mf[1, 1]) / abs(mf[1, 1])
            dg = float(np.max(np.abs(g - gf) / np.abs(gf)))
            _check(rec, "fock-vs-gaussian", max(dm, dg), 1e-6, omega=w, beta=b)
    # entropy-production identity on the requested cycle
    model = build_model(cfg)
    if not hasattr(model, "jumps") and cfg.protocol != "constant":
        curve = build_curve(cfg, model)
        for N in (10, 50, 200):
            led = cycle.run_cycle(model, curve, N)
            gap, scale = led.identity_gap()
            _check(rec, "entropy-identity", gap / scale, 1e-10, N=N)
    # commuting-force reduction
    sc = models.scaling_oscillator(1.0)
    pt = np.array([1.3, 0.9])
    m, g = metrics.metric_pair(sc, pt)
    _check(rec, "commuting-reduction", abs(g[1, 1] - pt[0] ** 2 * m[1, 1]) / g[1, 1], 1e-9)
    lm = lindblad.thermal_damping(sc, 0.2)
    m, g = lindblad.open_metrics(lm, pt)
    _check(rec, "commuting-reduction-open", abs(g[1, 1] - pt[0] ** 2 * m[1, 1]) / g[1, 1], 1e-9)
    # detailed balance of the damped oscillator
    dho = models.damped_ho_lindblad(1.0, cfg.gamma)
    worst = max(lindblad.detailed_balance_gap(dho, np.array([b, 1.0])) for b in np.linspace(0.8, 4.0, 9))
    _check(rec, "lindblad-detailed-balance", worst, 1e-8)
    return rec


def cmd_validate(cfg, out, threads):
    rec = validation_records(cfg)
    write_jsonl(out, rec)
    return 0 if all(r["pass"] for r in rec) else 1


COMMANDS = {
    "metric": cmd_metric,
    "length": cmd_length,
    "optimize": cmd_optimize,
    "pareto": cmd_pareto,
    "oracle": cmd_oracle,
    "validate": cmd_validate,
}


def build_parser():
    p = argparse.ArgumentParser(prog="thermolength", description=__doc__.split("\n")[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", metavar="PATH", help="TOML run configuration")
    p.add_argument("--preset", metavar="NAME", help=f"built-in parameter set: {', '.join(sorted(models.PRESETS))}")
    p.add_argument("--out", metavar="PATH", default="-", help="output file ('-' for stdout)")
    p.add_argument("--threads", metavar="K", type=int, default=1, help="worker threads")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1", "--threads")
        base = None
        if args.preset:
            try:
                base = preset_config(args.preset)
            except ValueError as exc:
                raise ConfigError(str(exc), "--preset") from exc
        data = load_config(args.config) if args.config else {}
        cfg = parse_config(data, base)
        if cfg.pipeline == "fock-validate" and args.command != "validate":
            raise ConfigError("the fock-validate pipeline only runs with the validate command", "run.pipeline")
        return COMMANDS[args.command](cfg, args.out, args.threads)
    except ConfigError as exc:
        print(f"config error [{exc.key}]: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ArithmeticError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
