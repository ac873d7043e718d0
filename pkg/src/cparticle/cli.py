"""Command-line driver: run verification suites and emit reports."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from importlib import resources
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from . import coords, dynamics, lbop, poisson, quantum, spectrum
from .coords import Domain, SingularChartError, domains_for
from .core import Signature

SCHEMA = "cp-report/1"
# equation tags attached to each record, keyed by check family
REFS = json.loads(resources.files(__package__).joinpath("refs.json").read_text(encoding="utf-8"))
RNG_ALGORITHM = "numpy.random.PCG64 (SeedSequence(seed, spawn_key=(suite_index,)))"
SUITES = ("coords", "lb", "spectrum", "critdim", "dynamics", "algebra")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    dims: list = field(default_factory=lambda: [2, 3, 4, 5, 6])
    signature: str = "both"
    ell_max: int = 16
    seed: int = 0
    tol_abs: float | None = None
    tol_rel: float | None = None
    output: str | None = None
    fmt: str = "json"
    samples: int = 50

    def __post_init__(self):
        if not self.dims or any(int(d) < 2 for d in self.dims):
            raise ConfigError("dims must be integers >= 2")
        self.dims = sorted({int(d) for d in self.dims})
        if self.signature not in ("euclid", "minkowski", "both"):
            raise ConfigError(f"unknown signature {self.signature!r}")
        if self.ell_max < 0:
            raise ConfigError("ell-max must be >= 0")
        if self.fmt not in ("json", "csv", "text"):
            raise ConfigError(f"unknown format {self.fmt!r}")
        if self.samples < 1:
            raise ConfigError("samples must be >= 1")
        for name in ("tol_abs", "tol_rel"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(f"{name} must be positive")

    @property
    def signatures(self):
        names = ("euclid", "minkowski") if self.signature == "both" else (self.signature,)
        return [Signature.parse(n) for n in names]

    def rng(self, suite: str) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(SUITES.index(suite),))
        return np.random.Generator(np.random.PCG64(ss))

    def threshold(self, kind: str, pinned: float) -> float:
        if kind == "abs" and self.tol_abs is not None:
            return self.tol_abs
        if kind == "rel" and self.tol_rel is not None:
            return self.tol_rel
        return pinned

    def echo(self) -> dict:
        return {
            "dims": self.dims, "signature": self.signature, "ell_max": self.ell_max, "seed": self.seed,
            "tol_abs": self.tol_abs, "tol_rel": self.tol_rel, "samples": self.samples,
        }


def _jsonable(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset, np.ndarray)):
        seq = sorted(x, key=repr) if isinstance(x, (set, frozenset)) else list(x)
        return [_jsonable(v) for v in seq]
    if x is None or isinstance(x, str):
        return x
    return str(x)


@dataclass
class Check:
    id: str
    paper_ref: str
    inputs: dict
    expected: object
    actual: object
    residual: float | None
    passed: bool
    tolerance: float | None = None

    def to_dict(self) -> dict:
        inputs = _jsonable(self.inputs)
        digest = hashlib.sha256(json.dumps(inputs, sort_keys=True).encode()).hexdigest()[:16]
        return {
            "id": self.id, "paper_ref": self.paper_ref, "inputs": inputs, "inputs_digest": digest,
            "expected": _jsonable(self.expected), "actual": _jsonable(self.actual),
            "residual": _jsonable(self.residual), "tolerance": self.tolerance, "pass": bool(self.passed),
        }


@dataclass
class Report:
    suite: str
    checks: list
    config: dict

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def summary(self) -> dict:
        n = len(self.checks)
        ok = sum(c.passed for c in self.checks)
        return {"total": n, "passed": ok, "failed": n - ok}

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "artifact_version": __version__,
            "suite": self.suite,
            "rng": RNG_ALGORITHM,
            "config": self.config,
            "summary": self.summary(),
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", "paper_ref", "inputs_digest", "residual", "tolerance", "pass"])
        for c in self.checks:
            d = c.to_dict()
            w.writerow([d["id"], d["paper_ref"], d["inputs_digest"], repr(d["residual"]), repr(d["tolerance"]),
                        "1" if d["pass"] else "0"])
        return buf.getvalue()

    def to_text(self) -> str:
        lines = [f"{self.suite}: {self.summary()['passed']}/{self.summary()['total']} checks passed"]
        width = max((len(c.id) for c in self.checks), default=10)
        for c in self.checks:
            res = "" if c.residual is None else f"{c.residual:.3e}"
            lines.append(f"  {'PASS' if c.passed else 'FAIL'}  {c.id:<{width}}  {res:>10}  [{c.paper_ref}]")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        return {"json": self.to_json, "csv": self.to_csv, "text": self.to_text}[fmt]()


def _numeric(cfg, cid, ref, inputs, residual, pinned, kind="abs", expected=0.0):
    tol = cfg.threshold(kind, pinned)
    residual = float(residual)
    return Check(cid, ref, inputs, expected, residual, residual, bool(residual <= tol), tol)


def _exact(cid, ref, inputs, expected, actual):
    return Check(cid, ref, inputs, expected, actual, None, expected == actual, None)


# ---------------------------------------------------------------------------
# suites


PARTIAL_U_SAMPLES = 10


def cmd_coords(cfg: RunConfig) -> Report:
    rng = cfg.rng("coords")
    checks = []
    for D in cfg.dims:
        for sig in cfg.signatures:
            for dom in domains_for(sig):
                inputs = {"D": D, "signature": str(sig), "domain": dom.name, "n": cfg.samples}
                rt = ident = 0.0
                dres = 0.0
                field_fn = lbop.pullback(lbop.test_fields(D, sig)[4], dom)

                def f(r, a, g=field_fn):
                    return r * r * g(r, a)

                for i in range(cfg.samples):
                    p = coords.random_point(rng, D, sig, dom)
                    u = coords.to_cartesian(p)
                    back = coords.to_cartesian(coords.from_cartesian(u, sig))
                    rt = max(rt, float(np.max(np.abs(back - u)) / max(1.0, np.max(np.abs(u)))))
                    ir = coords.identity_residuals(p)
                    ident = max(ident, ir["first_pair"], ir["partial_sum"])
                    # the dual-number oracle is slow; a prefix of the samples suffices
                    for m in range(D if i < PARTIAL_U_SAMPLES else 0):
                        try:
                            a = coords.partial_u(f, m, p)
                            b = coords.partial_u_oracle(f, m, p)
                        except SingularChartError:
                            continue
                        dres = max(dres, abs(complex(a) - complex(b)) / max(1.0, abs(complex(b))))
                checks.append(_numeric(cfg, f"coords.roundtrip.D{D}.{str(sig)}.{dom.name}", REFS["roundtrip"],
                                       inputs, rt, 1e-9, "rel"))
                checks.append(_numeric(cfg, f"coords.identities.D{D}.{str(sig)}.{dom.name}", REFS["identities"],
                                       inputs, ident, 1e-9))
                checks.append(_numeric(cfg, f"coords.partial_u.D{D}.{str(sig)}.{dom.name}", REFS["partial_u"],
                                       {**inputs, "n": min(cfg.samples, PARTIAL_U_SAMPLES)}, dres, 1e-7, "rel"))
    return Report("coords", checks, cfg.echo())


def lb_equivalence(rng, D: int, sig: Signature, dom: Domain, n: int = 100) -> float:
    """max over test fields and n points of |cartesian - spherical| / max(1, |cartesian|)."""
    pts = [coords.random_point(rng, D, sig, dom) for _ in range(n)]
    U = np.array([coords.to_cartesian(p) for p in pts]).T
    r = np.array([p.r for p in pts])
    angles = [np.array([p.angles[k] for p in pts]) for k in range(D - 1)]
    worst = 0.0
    for f in lbop.test_fields(D, sig):
        a = np.asarray(lbop.lb_cartesian(f, U, sig))
        b = np.asarray(lbop.lb_spherical(lbop.pullback(f, dom), (r, angles, dom, sig)))
        worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(a)))))
    return worst


def cmd_lb(cfg: RunConfig) -> Report:
    rng = cfg.rng("lb")
    checks = []
    n = max(cfg.samples, 100)
    for D in cfg.dims:
        for sig in cfg.signatures:
            for dom in domains_for(sig):
                inputs = {"D": D, "signature": str(sig), "domain": dom.name, "n": n, "fields": 10}
                checks.append(_numeric(cfg, f"lb.equivalence.D{D}.{str(sig)}.{dom.name}", REFS["lb_equivalence"],
                                       inputs, lb_equivalence(rng, D, sig, dom, n), 1e-6, "rel"))
                pts = [coords.random_point(rng, D, sig, dom) for _ in range(20)]
                U = np.array([coords.to_cartesian(p) for p in pts]).T
                worst = 0.0
                for f in lbop.test_fields(D, sig)[:4]:
                    a = lbop.lb_cartesian(f, U, sig)
                    b = lbop.lb_generator_sum(f, U, sig)
                    worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(a)))))
                    split = lbop.box_split_residual(lbop.cartesian(lambda u, f=f: f(u) * u[0]), U, sig)
                    worst = max(worst, float(np.max(split)))
                checks.append(_numeric(cfg, f"lb.box_split.D{D}.{str(sig)}.{dom.name}", REFS["box_split"],
                                       {**inputs, "n": 20, "fields": 4}, worst, 1e-7, "rel"))
        if D <= 4:
            for sig in cfg.signatures:
                checks.append(_lorentz_check(cfg, D, sig))
    return Report("lb", checks, cfg.echo())


def _lorentz_check(cfg, D, sig) -> Check:
    """[L^{mu nu}, L^{rho sigma}] closes and commutes with Delta_LB on a cubic polynomial."""
    import sympy as sp

    u = lbop.coordinate_symbols(D)
    p = sum((k + 1) * u[k] ** 2 * u[(k + 1) % D] for k in range(D)) + u[0] * u[D - 1]
    bad = 0
    pairs = [(a, b) for a in range(D) for b in range(a + 1, D)]
    lb = lbop.lb_poly(p, D, sig)
    for mu, nu in pairs:
        Lp = lbop.generator_poly(mu, nu, p, D, sig)
        if sp.expand(lbop.lb_poly(Lp, D, sig) - lbop.generator_poly(mu, nu, lb, D, sig)) != 0:
            bad += 1
        for rho, sg in pairs:
            lhs = lbop.generator_poly(mu, nu, lbop.generator_poly(rho, sg, p, D, sig), D, sig) \
                - lbop.generator_poly(rho, sg, Lp, D, sig)
            rhs = sum(c * lbop.generator_poly(a, b, p, D, sig) for c, a, b in
                      lbop.lorentz_commutator_rhs(mu, nu, rho, sg, D, sig))
            if sp.expand(lhs - rhs) != 0:
                bad += 1
    return _exact(f"lb.lorentz_algebra.D{D}.{str(sig)}", REFS["lorentz_algebra"], {"D": D, "signature": str(sig)}, 0, bad)


def cmd_spectrum(cfg: RunConfig) -> Report:
    rng = cfg.rng("spectrum")
    checks = []
    L = cfg.ell_max
    for D in cfg.dims:
        for sig in cfg.signatures:
            inputs = {"D": D, "signature": str(sig), "ell_max": L}
            cat, adm, cat1 = spectrum.catalog(D, sig, L), spectrum.admissible_spectrum(D, sig, L), spectrum.catalog(D, sig, L + 1)
            ok = cat <= adm <= cat1
            checks.append(Check(f"spectrum.catalog.D{D}.{str(sig)}", REFS["spectrum"], inputs,
                                sorted(cat), sorted(adm), None, ok))
            worst = 0.0
            count = 0
            for sol in spectrum.solutions(D, sig, min(L, 5)):
                if not sol.admissible:
                    continue
                for dom in domains_for(sig):
                    worst = max(worst, spectrum.residual(sol, rng, dom, cfg.samples))
                    count += 1
            checks.append(_numeric(cfg, f"spectrum.residual.D{D}.{str(sig)}", REFS["spectrum"],
                                   {**inputs, "ell_max": min(L, 5), "solutions_x_domains": count, "n": cfg.samples},
                                   worst, 1e-8))
            if 3 <= D <= 4:
                found = spectrum.exhaustiveness_scan(D, sig, seed=cfg.seed)
                checks.append(Check(f"spectrum.scan.D{D}.{str(sig)}", REFS["scan"],
                                    {**inputs, "exponents": [-6, 6]}, f"subset of catalog(ell_max={L})",
                                    sorted(found), None, found <= cat1))
    if 3 in cfg.dims and any(s.is_euclid for s in cfg.signatures):
        got = spectrum.admissible_spectrum(3, "euclid", 10)
        want = {-ell * (ell + 1) for ell in range(11)}
        checks.append(_exact("spectrum.d3_euclid", REFS["d3_euclid"], {"ell_max": 10}, sorted(want), sorted(got)))
    return Report("spectrum", checks, cfg.echo())


EXPECTED_CRITICAL = {"euclid": [2, 4, 6], "minkowski": [4]}


def cmd_critdim(cfg: RunConfig) -> Report:
    checks = []
    for sig in cfg.signatures:
        res = spectrum.critical_dimensions(sig)
        wit = {str(D): str(w) for D, w in res.witnesses.items()}
        c = _exact(f"critdim.{str(sig)}", REFS["critdim"], {"signature": str(sig), "bound": res.bound},
                   EXPECTED_CRITICAL[str(sig)], list(res.dims))
        c.inputs["witnesses"] = wit
        checks.append(c)
    return Report("critdim", checks, cfg.echo())


def cmd_dynamics(cfg: RunConfig) -> Report:
    rng = cfg.rng("dynamics")
    checks = []
    dims = [D for D in cfg.dims if D >= 2]
    drift = {"ell": 0.0, "ell0": 0.0, "momentum": 0.0, "first_integral": 0.0}
    for D in dims:
        for _ in range(2):
            kappa = float(rng.uniform(0.3, 1.5))
            st = dynamics.null_initial_state(rng, D, kappa, g=complex(rng.uniform(0.5, 1.5), rng.uniform(-0.5, 0.5)))
            tr = dynamics.integrate(st, tau_span=(0.0, 1.0), step=1e-3)
            for k, v in tr.drift().items():
                drift[k] = max(drift[k], v)
    inputs = {"dims": dims, "runs_per_dim": 2, "tau": [0, 1], "step": 1e-3}
    checks.append(_numeric(cfg, "dynamics.constraint_drift", REFS["constraint_drift"], inputs,
                           max(drift["ell"], drift["ell0"]), 1e-8))
    checks.append(_numeric(cfg, "dynamics.momentum_drift", REFS["momentum"], inputs, drift["momentum"], 1e-8))
    checks.append(_numeric(cfg, "dynamics.first_integral", REFS["first_integral"], inputs, drift["first_integral"], 1e-8))

    n_vel = 0
    worst_v = 0.0
    mink = Signature.parse("minkowski")
    for i in range(20):
        D = dims[i % len(dims)] if max(dims) >= 3 else 4
        D = max(D, 3)
        n = rng.normal(size=D - 1)
        k = np.concatenate([[1.0], n / np.linalg.norm(n)])
        sol = dynamics.closed_form(rng.normal(size=D) + 1j * rng.normal(size=D), k,
                                   complex(rng.uniform(0.5, 1.5), rng.uniform(-1, 1)), float(rng.uniform(0.3, 1.5)),
                                   mink, amplitude=float(rng.uniform(0.5, 2.0)))
        vc = dynamics.velocity_conditions(sol.z0, sol.kappa)
        worst_v = max(worst_v, abs(vc["real_part"] - 1), abs(vc["cross"]), abs(vc["abs_sum"] - 1), vc["v2_norm"])
        n_vel += vc["pass"]
    checks.append(_numeric(cfg, "dynamics.velocity_conditions", REFS["velocity_conditions"], {"states": 20}, worst_v, 1e-6))

    worst_g = 0.0
    worst_nt = 0.0
    for i in range(20):
        D = dims[i % len(dims)]
        sig = cfg.signatures[i % len(cfg.signatures)]
        path = dynamics.random_path(rng, D, sig, float(rng.uniform(0.2, 1.5)))
        params = dynamics.random_params(rng)
        rep = dynamics.gauge_variation(path, params)
        worst_g = max(worst_g, rep.residual / max(1.0, abs(rep.deltaL_direct)))
        gp = dynamics.gauge_params(path, params.eps, float(rng.normal()))
        rep2 = dynamics.gauge_variation(path, gp)
        worst_nt = max(worst_nt, rep2.non_total / max(1.0, abs(rep2.deltaL_direct)))
    checks.append(_numeric(cfg, "dynamics.gauge_identity", REFS["gauge_identity"], {"pairs": 20}, worst_g, 1e-7))
    checks.append(_numeric(cfg, "dynamics.gauge_total_derivative", REFS["gauge_total"], {"pairs": 20}, worst_nt, 1e-7))
    return Report("dynamics", checks, cfg.echo())


def cmd_algebra(cfg: RunConfig) -> Report:
    checks = []
    for ident in poisson.verify_algebra(raise_on_fail=False):
        checks.append(_exact(f"poisson.{ident.name}", REFS["poisson_table"], {}, "0", str(ident.residual.expr)))
    for ident in poisson.flow_identities() + poisson.momentum_bracket() + poisson.gauge_generator_action():
        checks.append(_exact(f"poisson.{ident.name}", REFS["poisson_flow"], {}, "0", str(ident.residual.expr)))
    rng = cfg.rng("algebra")
    failed = []
    for i in range(50):
        res = poisson.bracket_axioms(*(poisson.random_polynomial(rng) for _ in range(3)))
        failed += [f"{i}:{k}" for k, v in res.items() if not v.is_zero()]
    checks.append(_exact("poisson.bracket_axioms", REFS["bracket_axioms"], {"triples": 50, "max_degree": 3}, [], failed))
    table = quantum.commutator_check(6)
    for (n, m), res in table.items():
        checks.append(_exact(f"quantum.commutator.L{n}.L{m}", REFS["commutator"], {"max_degree": 6}, "0", str(res)))
    br = quantum.brst_nilpotency(6)
    checks.append(_exact("quantum.brst.divisible", REFS["brst"], {"max_degree": 6}, True, br["divisible"]))
    checks.append(_exact("quantum.brst.vanishes_at_D/4", REFS["brst_critical"], {"max_degree": 6}, True, br["vanish_at_critical"]))
    checks.append(_exact("quantum.brst.nonzero_generic", REFS["brst_critical"], {"max_degree": 6}, True, br["nonzero"]))
    bad = [D for D in range(2, 33) if quantum.k_constant(D, Fraction(D, 4)) != Fraction(D * (D - 4), 4)]
    checks.append(_exact("quantum.K_formula", REFS["K_formula"], {"D": [2, 32]}, [], bad))
    return Report("algebra", checks, cfg.echo())


COMMANDS = {
    "coords": cmd_coords, "lb": cmd_lb, "spectrum": cmd_spectrum, "critdim": cmd_critdim,
    "dynamics": cmd_dynamics, "algebra": cmd_algebra,
}


def cmd_all(cfg: RunConfig) -> Report:
    with ThreadPoolExecutor(max_workers=len(SUITES)) as ex:
        futures = [ex.submit(COMMANDS[s], cfg) for s in SUITES]
        reports = [f.result() for f in futures]
    checks = [c for r in reports for c in r.checks]
    return Report("all", checks, cfg.echo())


COMMANDS["all"] = cmd_all


# ---------------------------------------------------------------------------
# argument parsing


def _dims(text: str) -> list:
    out = []
    try:
        for part in text.split(","):
            part = part.strip()
            if "-" in part or ".." in part:
                a, b = part.replace("..", "-").split("-")
                out.extend(range(int(a), int(b) + 1))
            elif part:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dims {text!r}; use e.g. 2,3,4 or 2-6")
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cparticle", description=__doc__)
    ap.add_argument("command", choices=list(COMMANDS))
    ap.add_argument("--dims", type=_dims, default=[2, 3, 4, 5, 6], help="e.g. 2,3,4 or 2-6 (default 2-6)")
    ap.add_argument("--signature", choices=("euclid", "minkowski", "both"), default="both")
    ap.add_argument("--ell-max", type=int, default=16)
    ap.add_argument("--seed", type=int, default=0, help="overridden by $CP_SEED")
    ap.add_argument("--samples", type=int, default=50, help="random points per (D, signature, domain)")
    ap.add_argument("--tol-abs", type=float, default=None, help="override pinned absolute thresholds")
    ap.add_argument("--tol-rel", type=float, default=None, help="override pinned relative thresholds")
    ap.add_argument("--output", default=None, help="file path (default stdout)")
    ap.add_argument("--format", dest="fmt", choices=("json", "csv", "text"), default="json")
    return ap


def config_from_args(argv=None, environ=None) -> tuple[str, RunConfig]:
    environ = os.environ if environ is None else environ
    args = build_parser().parse_args(argv)
    seed = args.seed
    if environ.get("CP_SEED"):
        try:
            seed = int(environ["CP_SEED"])
        except ValueError:
            raise ConfigError(f"CP_SEED must be an integer, got {environ['CP_SEED']!r}")
    cfg = RunConfig(args.dims, args.signature, args.ell_max, seed, args.tol_abs, args.tol_rel,
                    args.output, args.fmt, args.samples)
    return args.command, cfg


def main(argv=None) -> int:
    try:
        command, cfg = config_from_args(argv)
    except ConfigError as e:
        print(f"cparticle: error: {e}", file=sys.stderr)
        return 2
    report = COMMANDS[command](cfg)
    text = report.render(cfg.fmt)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for c in report.failures():
        print(f"FAIL {c.id} [{c.paper_ref}]", file=sys.stderr)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
