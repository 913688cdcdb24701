"""Command-line front end.

    vertexfusion --config run.json --out results/ [--seed N] [--jobs N]

The config is one JSON document; ``command`` selects the pipeline.  Exit
codes: 0 all checks passed, 1 a mathematical check failed, 2 the
configuration or the truncation window was invalid.
"""

import argparse
import json
import os
import random
import sys
import warnings

from .affine import (ModuleError, algebra_from_spec, check_bracket_invariant,
                     check_restricted, contragredient, module_from_spec, vacuum_module)
from .field import check_level_parameter, field_from_env
from .formal import WindowError
from .fusion import (FusionError, QzActions, TensorWindow, check_intertwining_jacobi,
                     check_yprime_closure, compare_routes, compute_circ, compute_hboxtr,
                     compute_ZN, random_window_functionals)
from .liealg import LieAlgebraError
from .sugawara import (SugawaraError, Sugawara, central_charge, check_mode_commutator,
                       check_virasoro, generalized_eigenspaces, lowest_conformal_weight,
                       spectrum_csv)
from .voa import (VertexOperators, c1_quotient_dimension, check_conformal_modes,
                  check_generator_modes, check_jacobi, check_translation, generator_state)

SCHEMA = 1
COMMANDS = ("algebra-info", "module-build", "sugawara-check", "voa-check",
            "fusion-compute", "fusion-verify", "compat-check")
DEFAULT_CAP = 6


class ConfigError(ValueError):
    pass


class RunConfig:
    def __init__(self, doc, seed=None, jobs=1):
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        self.command = doc.get("command")
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        try:
            self.field = field_from_env(doc.get("field", "rational"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        self.algebra = doc.get("algebra", "sl2")
        self.kappa_str = str(doc.get("kappa", "-1"))
        self.z_str = str(doc.get("z", "1"))
        try:
            self.depth = int(doc.get("depth", 2))
            self.cap = int(doc.get("depth_cap", DEFAULT_CAP))
            self.kappa = self.field.parse(self.kappa_str)
            self.z = self.field.parse(self.z_str)
            self.samples = int(doc.get("samples", 20))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed value: {exc}") from exc
        if self.depth < 0:
            raise ConfigError("depth must be natural")
        if self.depth > self.cap:
            raise ConfigError(f"depth {self.depth} exceeds the cap {self.cap}")
        if self.z == 0:
            raise ConfigError("z must be nonzero")
        self.seed = int(seed if seed is not None else doc.get("seed", 0))
        self.jobs = max(1, int(jobs))
        self.modules = self._module_specs(doc)
        self._g = None

    def _module_specs(self, doc):
        if "modules" in doc:
            specs = doc["modules"]
        elif "weights" in doc:
            specs = []
            for w in doc["weights"]:
                w = list(w) if isinstance(w, (list, tuple)) else [w]
                if any(w):
                    specs.append({"lowest": {"type": "irrep", "weight": w}})
                else:
                    specs.append({"lowest": {"type": "trivial"}})
        else:
            specs = [{"lowest": {"type": "trivial"}}]
        if not isinstance(specs, list) or not specs:
            raise ConfigError("modules must be a nonempty list")
        return specs

    def build(self, spec, depth):
        full = {"algebra": self.algebra, "kappa": self.kappa_str, "depth": depth}
        full.update({k: v for k, v in spec.items() if k != "depth"})
        return module_from_spec(full, self.field, self.g)

    @property
    def g(self):
        if self._g is None:
            self._g = algebra_from_spec(self.algebra, self.field)
        return self._g

    def provenance(self, g):
        return {
            "algebra": self.algebra,
            "normalization": g.normalization,
            "field": self.field.mode,
            "kappa": self.kappa_str,
            "level": str(self.kappa - g.h),
            "seed": self.seed,
        }


class Report:
    def __init__(self):
        self.results = {}
        self.checks = []
        self.tables = {}

    def check(self, name, passed, detail=None):
        entry = {"name": name, "passed": bool(passed)}
        if detail is not None:
            entry["detail"] = detail
        self.checks.append(entry)

    def guarded(self, name, fn):
        """Run ``fn``; an AssertionError becomes a failed check."""
        try:
            detail = fn()
        except AssertionError as exc:
            self.check(name, False, str(exc))
            return None
        self.check(name, True, detail)
        return detail

    @property
    def passed(self):
        return all(c["passed"] for c in self.checks)


def _s(x):
    return str(x)


def _dims_csv(rows, header):
    lines = [",".join(header)] + [",".join(str(x) for x in r) for r in rows]
    return "\n".join(lines) + "\n"


# -- commands -------------------------------------------------------------------


def cmd_algebra_info(cfg, rep):
    g = cfg.g
    rep.guarded("lie_algebra_axioms", lambda: g.validate() or "antisymmetry, Jacobi, invariance, nondegeneracy")
    rep.results.update({
        "dimension": g.dim,
        "labels": g.labels,
        "dual_coxeter": _s(g.h),
        "normalization": g.normalization,
        "structure": g.to_json(),
    })
    return g


def cmd_module_build(cfg, rep):
    g = cfg.g
    D = cfg.depth
    out = []
    rows = []
    for i, spec in enumerate(cfg.modules):
        W = cfg.build(spec, D)
        dims = W.graded_dims()
        out.append({"spec": spec, "graded_dims": dims})
        rows += [[i, d, n] for d, n in enumerate(dims)]
        rep.guarded(f"bracket_invariant[{i}]", lambda W=W: check_bracket_invariant(W))
        rep.check(f"restricted[{i}]", check_restricted(W))
        dual = contragredient(W)
        rep.check(f"contragredient_dims[{i}]", dual.graded_dims() == dims)
    rep.results["modules"] = out
    rep.tables["graded_dims.csv"] = _dims_csv(rows, ["module", "depth", "dimension"])
    return g


def cmd_sugawara_check(cfg, rep):
    g = cfg.g
    W = cfg.build(cfg.modules[0], cfg.depth)
    sug = Sugawara(W)
    c = central_charge(W)
    rep.results["central_charge"] = _s(c)
    rep.results["lowest_conformal_weight"] = _s(lowest_conformal_weight(W, sug))
    measured = set()
    skipped = []
    for m in range(-2, 3):
        for n in range(-2, 3):
            try:
                measured.add(check_virasoro(W, m, n, sug))
            except SugawaraError:
                skipped.append([m, n])
            except AssertionError as exc:
                rep.check("virasoro", False, str(exc))
                break
    if not any(ch["name"] == "virasoro" for ch in rep.checks):
        rep.check("virasoro", measured == {c}, {"skipped": skipped})
    bad = None
    skipped = []
    for k in range(-2, 3):
        for n in range(-3, 4):
            try:
                check_mode_commutator(W, k, n, sug)
            except SugawaraError:
                skipped.append([k, n])
            except AssertionError as exc:
                bad = str(exc)
    rep.check("mode_commutator", bad is None, bad or {"skipped": skipped})
    if cfg.field.mode == "rational":
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            spaces = generalized_eigenspaces(W, sug)
        rep.results["jordan_blocks"] = any("Jordan" in str(w.message) for w in caught)
        rep.tables["spectrum.csv"] = spectrum_csv(W, spaces)
    return g


def cmd_voa_check(cfg, rep):
    g = cfg.g
    D = cfg.depth
    V = vacuum_module(g, cfg.kappa, D)
    rng = random.Random(cfg.seed)
    mods = [cfg.build(spec, D) for spec in cfg.modules]
    results = []
    for i, W in enumerate(mods):
        ops = VertexOperators(V, W)
        entry = {}
        entry["generator_modes"] = rep.guarded(
            f"generator_modes[{i}]", lambda: check_generator_modes(ops, range(-D, D + 1)))
        pool = [j for j, d in enumerate(V.depths) if d < D]
        states = [{j: V.field.one} for j in rng.sample(pool, min(cfg.samples, len(pool)))]
        entry["translation"] = rep.guarded(
            f"translation[{i}]", lambda: check_translation(ops, states, range(-D, D + 1)))
        entry["conformal_modes"] = rep.guarded(
            f"conformal_modes[{i}]", lambda: check_conformal_modes(ops, range(-2, 3)))
        jac = 0
        if W.D >= 1:
            for a in range(g.dim):
                for b in range(g.dim):
                    u, v = generator_state(V, a), generator_state(V, b)
                    w = W.basis_vector(W.piece_list[0][0])
                    try:
                        n, _ = check_jacobi(ops, u, v, w, box=min(3, D))
                    except AssertionError as exc:
                        rep.check(f"jacobi[{i}]", False, str(exc))
                        break
                    jac += n
        entry["jacobi_coefficients"] = jac
        if not any(c["name"] == f"jacobi[{i}]" for c in rep.checks):
            rep.check(f"jacobi[{i}]", jac > 0, jac)
        if D >= 2:
            dim, stable = c1_quotient_dimension(ops)
            entry["c1_quotient"] = dim
            rep.check(f"c1_cofinite[{i}]", dim <= W.lowest.dim, {"dimension": dim, "stabilized": stable})
        results.append(entry)
    rep.results["modules"] = results
    return g


def _pair(cfg, depth):
    if len(cfg.modules) == 1:
        specs = cfg.modules * 2
    elif len(cfg.modules) == 2:
        specs = cfg.modules
    else:
        raise ConfigError("fusion needs one or two module specs")
    return specs, cfg.build(specs[0], depth), cfg.build(specs[1], depth)


def _zn_table(W1, W2, z, D):
    table = []
    for N in range(1, D + 2):
        for d, n in enumerate(compute_ZN(W1, W2, z, N, D).dims):
            table.append([N, d, n])
    return table


def cmd_fusion_compute(cfg, rep):
    g = cfg.g
    D = cfg.depth
    specs, W1, W2 = _pair(cfg, D + 2)
    kl = compute_circ(W1, W2, cfg.z, D)
    rep.results.update({"pair": specs, "z": cfg.z_str, "depth": D,
                        "kl_dims": kl.graded_dims, "ZN_table": _zn_table(W1, W2, cfg.z, D)})
    rep.check("restriction_injective", kl.info["injective"])
    rep.tables["kl_dims.csv"] = _dims_csv(enumerate(kl.graded_dims), ["degree", "dimension"])
    return g


def cmd_fusion_verify(cfg, rep):
    g = cfg.g
    D = cfg.depth
    specs, W1, W2 = _pair(cfg, D + 2)
    kl = compute_circ(W1, W2, cfg.z, D)
    hlz = compute_hboxtr(W1, W2, cfg.z, D, jobs=cfg.jobs)
    same = kl.same_bases(hlz)
    rep.results.update({"pair": specs, "z": cfg.z_str, "depth": D,
                        "kl_dims": kl.graded_dims, "hlz_dims": hlz.graded_dims,
                        "equal": same and kl.graded_dims == hlz.graded_dims,
                        "ZN_table": _zn_table(W1, W2, cfg.z, D)})
    rep.check("kl_equals_hlz", rep.results["equal"])
    acts = QzActions(W1, W2, cfg.z)
    samples = TensorWindow(W1, W2, min(1, D)).pairs
    jr = check_intertwining_jacobi(acts, kl, samples, box=2)
    rep.check("intertwining_jacobi", jr.holds,
              {"checked": jr.checked, "skipped": jr.skipped, "truncation": jr.truncation_checked})
    rep.check("yprime_closure", check_yprime_closure(acts, kl))
    rows = [[d, a, b] for d, (a, b) in enumerate(zip(kl.graded_dims, hlz.graded_dims))]
    rep.tables["fusion_dims.csv"] = _dims_csv(rows, ["degree", "kl", "hlz"])
    return g


def cmd_compat_check(cfg, rep):
    g = cfg.g
    D = cfg.depth
    specs, W1, W2 = _pair(cfg, D + 2)
    acts = QzActions(W1, W2, cfg.z)
    window = TensorWindow(W1, W2, D)
    rng = random.Random(cfg.seed)
    lams = random_window_functionals(acts, window, rng, cfg.samples)
    agree = disagree = 0
    witnesses = []
    passing = 0
    for s, (kind, N, lam) in enumerate(lams):
        for i, n, a, b in compare_routes(acts, lam, window.pairs, D + 2, D + 2, D + 2):
            if a == b:
                agree += 1
                passing += a
            else:
                disagree += 1
                witnesses.append([s, kind, i, n])
    rep.results.update({"pair": specs, "depth": D, "samples": len(lams),
                        "agreements": agree, "disagreements": disagree,
                        "slt_true": passing})
    rep.check("slt_equals_compatibility", disagree == 0, {"witnesses": witnesses[:10]})
    return g


HANDLERS = {
    "algebra-info": cmd_algebra_info,
    "module-build": cmd_module_build,
    "sugawara-check": cmd_sugawara_check,
    "voa-check": cmd_voa_check,
    "fusion-compute": cmd_fusion_compute,
    "fusion-verify": cmd_fusion_verify,
    "compat-check": cmd_compat_check,
}


def run(cfg):
    """Execute a config; returns (exit code, report document, tables)."""
    rep = Report()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        check_level_parameter(cfg.field, cfg.kappa)
    g = HANDLERS[cfg.command](cfg, rep)
    doc = {
        "schema": SCHEMA,
        "command": cfg.command,
        "provenance": cfg.provenance(g),
        "warnings": sorted({str(w.message) for w in caught}),
        "results": rep.results,
        "checks": rep.checks,
        "passed": rep.passed,
    }
    return (0 if rep.passed else 1), doc, rep.tables


def emit_report(doc, tables, out):
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "report.json"), "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    for name, text in sorted(tables.items()):
        with open(os.path.join(out, name), "w") as fh:
            fh.write(text)


def main(argv=None):
    ap = argparse.ArgumentParser(prog="vertexfusion", description=__doc__.splitlines()[0])
    ap.add_argument("--config", required=True)
    ap.add_argument("--out", default="vertexfusion-out")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args(argv)
    try:
        with open(args.config) as fh:
            doc = json.load(fh)
        cfg = RunConfig(doc, seed=args.seed, jobs=args.jobs)
        code, report, tables = run(cfg)
    except (OSError, json.JSONDecodeError, ConfigError, ModuleError, LieAlgebraError,
            WindowError, FusionError, SugawaraError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        emit_report(report, tables, args.out)
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return 2
    status = "passed" if code == 0 else "FAILED"
    print(f"{cfg.command}: {status} ({sum(c['passed'] for c in report['checks'])}/{len(report['checks'])} checks)")
    for c in report["checks"]:
        if not c["passed"]:
            print(f"  failed: {c['name']}: {c.get('detail')}")
    return code


if __name__ == "__main__":
    sys.exit(main())
