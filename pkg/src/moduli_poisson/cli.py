"""Command-line front end: alcove, verify, cohomology, sample and bracket."""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import report as rp
from .cartan_alcove import alcove_table
from .config import DEFAULT_TOLERANCES, RunConfig, load_ini, parse_grid, parse_targets
from .errors import ConfigError, NotSmoothPoint, SingularOmega
from .moduli_forms import ExtendedModuli, OrbitTuple
from .poisson_moduli import (InvariantFunction, bracket_path, casimir_check, default_wilson_menu,
                             flow_bracket, jacobi_check, leaf_coordinates, poisson_bracket,
                             sample_rep)
from .surface_words import (SurfaceData, Word, build_chain_c, build_chain_c_tilde, evaluate,
                            expected_boundary_c, expected_boundary_c_tilde, fox_jacobian,
                            group_presentation, random_assignment, relator, x, y, z)
from .twisted_cohomology import SVD_TOL, build_complex, cohomology_dims, parabolic_form_matrix, harmonic_h1_basis

INTEGER_TOL = 0.5


def point_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for sample ``index``, independent of worker scheduling."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def parse_function(spec: str, s: SurfaceData) -> InvariantFunction:
    """'x1 -y1 z2' is the Wilson function of that word; 'class:k' or 'class:k^m' a boundary class."""
    spec = spec.strip()
    if spec.startswith("class:"):
        body = spec[len("class:"):]
        k, _, m = body.partition("^")
        try:
            return InvariantFunction.boundary_class(s, int(k), int(m) if m else 1)
        except (ValueError, KeyError):
            raise ConfigError(f"bad class function {spec!r}") from None
    letters = []
    for tok in spec.replace(",", " ").split():
        sign = -1 if tok.startswith("-") else 1
        tok = tok.lstrip("-+")
        kind, idx = tok[:1], tok[1:]
        try:
            j = int(idx)
        except ValueError:
            raise ConfigError(f"bad letter {tok!r} in {spec!r}") from None
        if kind in "xy" and 1 <= j <= s.genus:
            g = x(j) if kind == "x" else y(j)
        elif kind == "z" and 1 <= j <= s.boundaries:
            g = z(s, j)
        else:
            raise ConfigError(f"letter {tok!r} does not exist on this surface")
        letters.append(sign * g)
    if not letters:
        raise ConfigError(f"empty function spec {spec!r}")
    return InvariantFunction.wilson(Word(tuple(letters)), spec)


def _map(fn, items, workers):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


# -- alcove -------------------------------------------------------------------------


def cmd_alcove(cfg: RunConfig) -> dict:
    from .cartan_alcove import EPS_MULT
    G = cfg.lie_group
    grid = cfg.grid or [round(0.05 * k, 10) for k in range(1, 14)]
    rows = alcove_table(G, grid)
    records = [dict(check="alcove", index=i, value=None, tolerance=EPS_MULT, passed=None, **row)
               for i, row in enumerate(rows)]
    return rp.build_report("alcove", cfg.to_dict(), records), rows


# -- verify ---------------------------------------------------------------------------


def _unit(rng, n):
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def _fox_residual(G, s, rng, h=1e-6):
    """Fox jacobian of the relator against centred differences of its value."""
    pres = group_presentation(s)
    phi = random_assignment(G, pres, rng)
    gens = list(pres.generators)
    r = relator(s)
    J = fox_jacobian(G, r, phi, gens)
    u = _unit(rng, J.shape[1])
    d = G.dim

    def val(t):
        return evaluate(r, {g: G.exp_vec(t * u[(g - 1) * d:g * d]) @ phi[g] for g in gens})

    R0 = val(0.0)
    fd = (val(h) - val(-h)) @ R0.conj().T / (2 * h)
    return float(np.abs(G.vec(fd) - J @ u).max())


def _verify_point(args):
    cfg, i = args
    cfg = RunConfig(**cfg)
    tol = cfg.tolerances
    G, s = cfg.lie_group, cfg.surface
    rng = point_rng(cfg.seed, i)
    M = ExtendedModuli(G, s, beta_sign=cfg.beta_sign)
    out = []

    def guarded(name, fn):
        try:
            fn()
        except Exception as exc:  # a failing check must not hide the others
            out.append(rp.record(name, None, tol.get(name, 1.0), passed=False, index=i,
                                 error=f"{type(exc).__name__}: {exc}"))

    def forms():
        p = M.random_point(rng)
        dirs = [_unit(rng, M.dim) for _ in range(3)]
        out.append(rp.record("closed", abs(M.exterior_derivative_fd(p, dirs)), tol["closed"], index=i))
        thetas = [G.random_element(rng) for _ in range(s.boundaries + 1)]
        T = M.tangent_basis(p)
        v, w = (M.split(T @ rng.standard_normal(T.shape[1])) for _ in range(2))
        q = M.act(thetas, p)
        inv = abs(M.omega_total(q, M.push_tangent(thetas, p, v), M.push_tangent(thetas, p, w))
                  - M.omega_total(p, v, w))
        out.append(rp.record("invariance", inv, tol["invariance"], index=i))
        W = M.omega_gram(p)
        u = _unit(rng, M.dim)
        mom = max(abs(-M.fundamental_field(p, j, X).gens @ W @ u - M.momentum_fd(p, j, X, u))
                  for j in range(s.boundaries + 1) for X in [G.random_algebra(rng)])
        out.append(rp.record("momentum", mom, tol["momentum"], index=i))

    def fox():
        out.append(rp.record("fox", _fox_residual(G, s, rng), tol["fox"], index=i))

    def zero_locus():
        pz = M.random_point(rng, zero_locus=True)
        deficit = M.dim - M.rank_omega(pz, tol["rank"])
        out.append(rp.record("rank_zero_locus", deficit, INTEGER_TOL, index=i, dim=M.dim))
        for space in ("constrained", "extended"):
            r = M.presymplectic_check(pz, space)
            worst = max(r.isotropic_residual, r.coisotropic_residual, r.momentum_residual)
            out.append(rp.record(f"presymplectic_{space}", worst, 1e-8, passed=r.passed, index=i,
                                 dim_H=r.dim_H, rank_H=r.rank_H))
        K = build_complex(G, M.group_point(pz), s, "absolute")
        out.append(rp.record("d1d0", K.chain_residual(), tol["chain"], index=i))
        _, res = M.reduce_and_cover(pz, OrbitTuple(tuple(pz.lifts[1:])), n_pairs=10, rng=rng)
        out.append(rp.record("cover", res, tol["cover"], index=i))

    def poisson():
        rho = sample_rep(G, s, rng, cfg.mode, cfg.targets)
        menu = default_wilson_menu(s)
        try:
            cas = max(casimir_check(k, rho, menu) for k in range(1, s.boundaries + 1))
        except (NotSmoothPoint, SingularOmega) as exc:
            out.append(rp.record("casimir", None, tol["casimir"], passed=None, index=i,
                                 error=type(exc).__name__))
            return
        out.append(rp.record("casimir", cas, tol["casimir"], index=i))
        if rho.dims[1] == 0 or len(menu) < 2:
            return
        f, g = menu[0], menu[1]
        diff = abs(poisson_bracket(f, g, rho) - flow_bracket(f, g, rho, rng=i))
        out.append(rp.record("flow", diff, tol["flow"], index=i))
        if i < cfg.jacobi_points and len(menu) >= 3:
            out.append(rp.record("jacobi", jacobi_check(*menu[:3], rho), tol["jacobi"], index=i))

    guarded("forms", forms)
    guarded("fox", fox)
    if s.boundaries >= 1:
        guarded("zero_locus", zero_locus)
        guarded("poisson", poisson)
    return out


def _chain_records(s: SurfaceData) -> list:
    c = build_chain_c(s)
    ok_c = c.boundary() == expected_boundary_c(s)
    ok_t = build_chain_c_tilde(c, s).boundary() == expected_boundary_c_tilde(s)
    return [rp.record("chain_boundary", 0 if ok_c else 1, INTEGER_TOL, index=None),
            rp.record("chain_boundary_tilde", 0 if ok_t else 1, INTEGER_TOL, index=None)]


def cmd_verify(cfg: RunConfig) -> dict:
    records = _chain_records(cfg.surface)
    for recs in _map(_verify_point, [(cfg.to_dict(), i) for i in range(cfg.samples)], cfg.workers):
        records.extend(recs)
    return rp.build_report("verify", cfg.to_dict(), records), None


# -- cohomology and sample --------------------------------------------------------------


def _cohomology_point(args):
    cfg, i = args
    cfg = RunConfig(**cfg)
    G, s = cfg.lie_group, cfg.surface
    try:
        rho = sample_rep(G, s, point_rng(cfg.seed, i), cfg.mode, cfg.targets)
        dims = {v: cohomology_dims(build_complex(G, rho.images, s, v))
                for v in ("absolute", "parabolic", "relative")}
        Kp = build_complex(G, rho.images, s, "parabolic")
        W = parabolic_form_matrix(Kp, harmonic_h1_basis(Kp))
        rank = int(np.linalg.matrix_rank(W, tol=1e-8 * max(1.0, np.abs(W).max(initial=0.0)))) if W.size else 0
        mismatch = (abs(dims["parabolic"][0] - dims["absolute"][0])
                    + abs(dims["parabolic"][2] - dims["relative"][2]))
        return [rp.record("cohomology", mismatch, INTEGER_TOL, index=i,
                          h_absolute=list(dims["absolute"]), h_parabolic=list(dims["parabolic"]),
                          h_relative=list(dims["relative"]), form_rank=rank, svd_tol=SVD_TOL)]
    except Exception as exc:
        return [rp.record("cohomology", None, INTEGER_TOL, passed=False, index=i,
                          error=f"{type(exc).__name__}: {exc}")]


def cmd_cohomology(cfg: RunConfig) -> dict:
    records = []
    for recs in _map(_cohomology_point, [(cfg.to_dict(), i) for i in range(cfg.samples)], cfg.workers):
        records.extend(recs)
    rows = [{k: v for k, v in r.items() if k not in ("check",)} for r in records]
    return rp.build_report("cohomology", cfg.to_dict(), records), rows


def _sample_point(args):
    cfg, i = args
    cfg = RunConfig(**cfg)
    G, s = cfg.lie_group, cfg.surface
    try:
        rho = sample_rep(G, s, point_rng(cfg.seed, i), cfg.mode, cfg.targets)
        leaf = [list(t) for t in leaf_coordinates(rho)]
        rec = rp.record("relation", rho.relation_residual, 1e-10, index=i, leaf=leaf,
                        dims=list(rho.dims), smooth=rho.is_smooth)
        if cfg.mode == "constrained":
            err = float(np.abs(np.array(leaf) - np.array(cfg.targets)).max())
            return [rec, rp.record("class_target", err, 1e-8, index=i)]
        return [rec]
    except Exception as exc:
        return [rp.record("relation", None, 1e-10, passed=False, index=i,
                          error=f"{type(exc).__name__}: {exc}")]


def cmd_sample(cfg: RunConfig) -> dict:
    records = []
    for recs in _map(_sample_point, [(cfg.to_dict(), i) for i in range(cfg.samples)], cfg.workers):
        records.extend(recs)
    return rp.build_report("sample", cfg.to_dict(), records), None


# -- bracket ----------------------------------------------------------------------------


def _default_path(cfg: RunConfig):
    G = cfg.lie_group
    n = 2 if G.family == "SO" else G.n
    start = cfg.path_start or [[0.1] + [0.0] * (n - 2) + [-0.1]] * cfg.boundaries
    end = cfg.path_end or [[0.35] + [0.0] * (n - 2) + [-0.35]] * cfg.boundaries
    if len(start) != cfg.boundaries or len(end) != cfg.boundaries:
        raise ConfigError("path endpoints need one class target per boundary circle")
    A, B = np.array(start, dtype=float), np.array(end, dtype=float)
    return [list(map(list, A + t * (B - A))) for t in np.linspace(0.0, 1.0, cfg.path_steps)]


def cmd_bracket(cfg: RunConfig) -> dict:
    G, s = cfg.lie_group, cfg.surface
    if s.boundaries == 0:
        raise ConfigError("bracket paths need at least one boundary circle")
    f, g = parse_function(cfg.f, s), parse_function(cfg.g, s)
    path = _default_path(cfg)
    tests = [f, g] + default_wilson_menu(s)
    rows = bracket_path(G, s, f, g, path, rng=point_rng(cfg.seed, 0), casimir_tests=tests)
    records = []
    for r in rows:
        ok = r["smooth"] and r["casimir"] < cfg.tolerances["casimir"] and abs(r["self_bracket"]) < 1e-12
        records.append(dict(check="bracket", value=r.get("casimir"), tolerance=cfg.tolerances["casimir"],
                            passed=bool(ok) if r["smooth"] else None, **r))
    # continuity: jumps between neighbouring path points stay bounded by the local slope
    vals = [r["bracket"] for r in rows]
    if all(v is not None for v in vals) and len(vals) >= 3:
        jumps = np.abs(np.diff(vals))
        second = np.abs(np.diff(vals, 2))
        bound = 10 * float(jumps.max()) + 1e-12
        records.append(rp.record("bracket_continuity", float(second.max()), bound, index=None))
    out_rows = [{**{k: v for k, v in r.items() if k != "targets"},
                 "targets": "|".join(",".join(map(str, t)) for t in r["targets"])} for r in rows]
    return rp.build_report("bracket", cfg.to_dict(), records), out_rows


COMMANDS = {
    "alcove": cmd_alcove,
    "verify": cmd_verify,
    "cohomology": cmd_cohomology,
    "sample": cmd_sample,
    "bracket": cmd_bracket,
}


# -- argument parsing -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="moduli-poisson",
                                     description="Numerical checks for moduli of flat connections on surfaces")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="INI file with [run] and [tolerances] sections")
        p.add_argument("--group")
        p.add_argument("--genus", type=int)
        p.add_argument("--boundaries", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--samples", type=int)
        p.add_argument("--mode", choices=["free", "constrained"])
        p.add_argument("--targets", help="class targets, e.g. '0.2,-0.2;0.3,-0.3'")
        p.add_argument("--out", help="write the JSON report here (default: stdout)")
        p.add_argument("--csv", help="also write the table as CSV")
        p.add_argument("--workers", type=int)
        for key in DEFAULT_TOLERANCES:
            p.add_argument(f"--tol-{key}", type=float, dest=f"tol_{key}")
        if name == "alcove":
            p.add_argument("--grid", help="'start:stop:count' or a comma separated list of nu")
        if name == "verify":
            p.add_argument("--beta-sign", type=int, choices=[1, -1], help=argparse.SUPPRESS)
            p.add_argument("--jacobi-points", type=int)
        if name == "bracket":
            p.add_argument("--f")
            p.add_argument("--g")
            p.add_argument("--path-start")
            p.add_argument("--path-end")
            p.add_argument("--path-steps", type=int)
    return parser


def config_from_args(args) -> RunConfig:
    cfg = load_ini(args.config) if args.config else RunConfig()
    for key in ("group", "genus", "boundaries", "seed", "samples", "mode", "out", "csv", "workers",
                "beta_sign", "jacobi_points", "f", "g", "path_steps"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    if args.targets:
        cfg.targets = parse_targets(args.targets)
    if getattr(args, "grid", None):
        cfg.grid = parse_grid(args.grid)
    for key in ("path_start", "path_end"):
        val = getattr(args, key, None)
        if val:
            setattr(cfg, key, parse_targets(val))
    for key in DEFAULT_TOLERANCES:
        val = getattr(args, f"tol_{key}", None)
        if val is not None:
            cfg.tolerances[key] = val
    return cfg.validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        report, rows = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    text = rp.dumps(report)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if cfg.csv:
        data = rows if rows is not None else report["records"]
        with open(cfg.csv, "w", encoding="utf-8") as fh:
            fh.write(rp.to_csv(rp._clean(data)))
    summary = report["summary"]
    print(f"{args.command}: {summary['n_records'] - summary['n_failed']}/{summary['n_records']} records ok",
          file=sys.stderr)
    return 0 if summary["passed"] else 1
