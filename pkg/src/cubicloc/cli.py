"""Command-line entry point: ``cubicloc <command> [options]``.

Every run writes ``<command>.config.json`` (the fully resolved parameters),
``<command>.json`` (summary) and, for tabular results, ``<command>.csv`` into
the output directory.  Feeding the emitted config back through ``--config``
reproduces the CSV byte for byte.

Exit codes: 0 success, 1 usage error, 2 invariant violation.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

FORMAT_VERSION = 1
OUT_ENV = "CUBICLOC_OUT"

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2

SCHEMAS = {
    "model-info": [],
    "syndrome": ["site", "x", "y", "z", "type"],
    "validity": [],
    "degeneracy": [],
    "certify-no-strings": ["type", "dx", "dy", "dz", "separation", "diameter", "verdict", "placements",
                           "rank_restricted", "rank_augmented", "witness_weight"],
    "local-gap": [],
    "count-sparse": ["L", "m", "d", "v", "sparse_count", "total", "fraction", "bound_simple", "bound_product"],
    "entropy": ["region", "size", "S_bits", "rank_region", "rank_complement", "group_rank"],
    "evolve": ["t", "amplitude_abs", "reference_abs", "abs_error"],
    "spectral-flow": ["band", "level", "lower", "upper", "width", "gap_above"],
    "offdiag": ["reference", "min_separation", "sector", "abs_sum", "truncation_norm"],
    "iom": ["t", "expectation", "drift", "bound_local", "bound_band"],
}

DEFAULTS = {
    "common": {"model": None, "L": None, "dims": None, "J": 1.0, "stencil": None, "seed": 0},
    "model-info": {},
    "syndrome": {"pauli": None},
    "validity": {"defects": None},
    "degeneracy": {},
    "certify-no-strings": {"dmax": 4},
    "local-gap": {"defects": None},
    "count-sparse": {"m": 2, "d": 2, "dimension": 3, "bound_only": False},
    "entropy": {"sides": "1,2,3", "random_regions": 0, "excitation": None, "sector": None},
    "evolve": {"system": "chain", "chain_length": 201, "hopping": 1.0, "tmax": 20.0, "nt": 401,
               "tol": 1e-10, "max_error": 1e-6, "s": 0.05},
    "spectral-flow": {"s": 0.05, "gamma": None, "flow_tol": 1e-6, "ode_tol": 1e-9, "within": "zero",
                      "profile": True, "profile_qubit": 0},
    "offdiag": {"s": 0.05, "gamma": None, "band": 2, "reference": 0, "tmax": 10.0, "nt": 41},
    "iom": {"s": 0.05, "gamma": None, "band": 2, "d_loc": 2, "tmax": 10.0, "nt": 41},
}

NEEDS_MODEL = {"model-info", "syndrome", "validity", "degeneracy", "certify-no-strings", "local-gap",
               "entropy", "spectral-flow", "offdiag", "iom"}


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_common(p: argparse.ArgumentParser, sweep_L: bool = False):
    s = argparse.SUPPRESS
    p.add_argument("--model", default=s, help="cubic_code, toric_code_2d, wen_plaquette or ising_chain")
    if sweep_L:
        p.add_argument("--L", default=s, help="linear size (comma list allowed)")
    else:
        p.add_argument("--L", type=int, default=s, help="linear size used for every lattice axis")
    p.add_argument("--dims", default=s, help="comma-separated lattice dimensions, e.g. 3,4")
    p.add_argument("--J", type=float, default=s)
    p.add_argument("--stencil", default=s, help="JSON stencil file (overrides --model)")
    p.add_argument("--seed", type=int, default=s)
    p.add_argument("--config", default=None, help="JSON file of parameters; explicit flags take precedence")
    p.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or .)")
    p.add_argument("--threads", type=int, default=None, help="cap on BLAS/OpenMP threads")
    p.add_argument("--schema", action="store_true", help="print the CSV columns of this command and exit")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cubicloc", description="Stabilizer-model localization toolkit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    s = argparse.SUPPRESS

    sub_p = {name: sub.add_parser(name) for name in SCHEMAS}
    for name, p in sub_p.items():
        _add_common(p, sweep_L=name == "count-sparse")
    sub_p["syndrome"].add_argument("--pauli", default=s, help='letters on qubits, e.g. "X3 Z5 Y7"')
    for name in ("validity", "local-gap"):
        sub_p[name].add_argument("--defects", default=s, help='site:type pairs, e.g. "0:X 13:X"')
    sub_p["certify-no-strings"].add_argument("--dmax", type=int, default=s)
    p = sub_p["count-sparse"]
    p.add_argument("--m", default=s, help="defect count (comma list allowed)")
    p.add_argument("--d", default=s, help="minimum separation (comma list allowed)")
    p.add_argument("--dimension", type=int, default=s)
    p.add_argument("--bound-only", dest="bound_only", action="store_true", default=s)
    p = sub_p["entropy"]
    p.add_argument("--sides", default=s, help="box side lengths, comma separated")
    p.add_argument("--random-regions", dest="random_regions", type=int, default=s)
    p.add_argument("--excitation", default=s, help="Pauli applied to the ground state")
    p.add_argument("--sector", default=s, help="logical basis per pair, e.g. ZZ or XZ")
    p = sub_p["evolve"]
    p.add_argument("--system", choices=["chain", "model"], default=s)
    p.add_argument("--chain-length", dest="chain_length", type=int, default=s)
    p.add_argument("--hopping", type=float, default=s, help="hopping amplitude lambda")
    p.add_argument("--tmax", type=float, default=s)
    p.add_argument("--nt", type=int, default=s)
    p.add_argument("--tol", type=float, default=s)
    p.add_argument("--max-error", dest="max_error", type=float, default=s)
    p.add_argument("--s", type=float, default=s)
    p = sub_p["spectral-flow"]
    p.add_argument("--s", type=float, default=s)
    p.add_argument("--gamma", type=float, default=s)
    p.add_argument("--flow-tol", dest="flow_tol", type=float, default=s)
    p.add_argument("--ode-tol", dest="ode_tol", type=float, default=s)
    p.add_argument("--within", choices=["zero", "bump"], default=s)
    p.add_argument("--no-profile", dest="profile", action="store_false", default=s)
    p.add_argument("--profile-qubit", dest="profile_qubit", type=int, default=s)
    for name in ("offdiag", "iom"):
        p = sub_p[name]
        p.add_argument("--s", type=float, default=s)
        p.add_argument("--gamma", type=float, default=s)
        p.add_argument("--band", type=int, default=s, help="number of defects in the band")
        p.add_argument("--tmax", type=float, default=s)
        p.add_argument("--nt", type=int, default=s)
    sub_p["offdiag"].add_argument("--reference", type=int, default=s)
    sub_p["iom"].add_argument("--d-loc", dest="d_loc", type=int, default=s)
    return parser


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS["common"])
    cfg.update(DEFAULTS[command])
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        loaded = loaded.get("config", loaded)
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise UsageError(f"unknown config keys for {command}: {sorted(unknown)}")
        cfg.update(loaded)
    for key, value in vars(args).items():
        if key in cfg:
            cfg[key] = value
    if cfg["dims"] is not None and isinstance(cfg["dims"], str):
        cfg["dims"] = [int(v) for v in cfg["dims"].split(",") if v.strip()]
    if command == "count-sparse":
        try:
            for key in ("L", "m", "d"):
                if cfg[key] is not None:
                    cfg[key] = _int_list(cfg[key])
        except ValueError:
            raise UsageError(f"count-sparse: --{key} must be an integer or comma list, got {cfg[key]!r}") from None
    if command in NEEDS_MODEL and cfg["model"] is None and cfg["stencil"] is None:
        raise UsageError(f"{command} needs --model or --stencil")
    if command in NEEDS_MODEL and cfg["L"] is None and cfg["dims"] is None:
        raise UsageError(f"{command} needs --L or --dims")
    return cfg


def _model(cfg):
    from .models import BUILTIN_STENCILS, Stencil, build_model, model_from_stencil

    if cfg["stencil"]:
        stencil = Stencil.load(cfg["stencil"])
        dims = cfg["dims"] if cfg["dims"] is not None else cfg["L"]
        return model_from_stencil(stencil, dims, cfg["J"])
    if cfg["model"] not in BUILTIN_STENCILS:
        raise UsageError(f"unknown model {cfg['model']!r}; choose from {sorted(BUILTIN_STENCILS)}")
    dims = cfg["dims"] if cfg["dims"] is not None else cfg["L"]
    return build_model(cfg["model"], dims, cfg["J"])


def _parse_defects(model, text):
    from .syndrome import DefectConfiguration

    if not text:
        raise UsageError("--defects is required")
    pairs = []
    for item in str(text).replace(",", " ").split():
        site, _, label = item.partition(":")
        t = model.type_index(label) if label and not label.isdigit() else int(label or 0)
        pairs.append((int(site), t))
    return DefectConfiguration.from_defects(model, pairs)


def _parse_pauli(lattice, text):
    from .gf2 import PauliOperator

    letters = {}
    for item in str(text).split():
        letter, q = item[0].upper(), int(item[1:])
        if letter not in "XYZ" or not 0 <= q < lattice.n_qubits:
            raise UsageError(f"bad Pauli factor {item!r}")
        letters[q] = letter
    return PauliOperator.from_letters(lattice, letters)


def _int_list(value) -> list[int]:
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    return [int(v) for v in str(value).split(",") if v.strip()]


def _grid(tmax, nt):
    import numpy as np

    return np.linspace(0.0, float(tmax), int(nt))


class Report:
    def __init__(self, command: str, cfg: dict, out: Path):
        self.command, self.cfg, self.out = command, cfg, out
        self.summary: dict = {}
        self.rows: list[dict] | None = None
        self.extra_csv: dict[str, tuple[list[str], list[dict]]] = {}
        self.line = ""
        self.code = EXIT_OK

    def write(self):
        self.out.mkdir(parents=True, exist_ok=True)
        cfg_doc = {"format_version": FORMAT_VERSION, "command": self.command, "config": self.cfg}
        (self.out / f"{self.command}.config.json").write_text(json.dumps(cfg_doc, indent=1, sort_keys=True) + "\n")
        doc = {"format_version": FORMAT_VERSION, "command": self.command, "config": self.cfg,
               "exit_code": self.code, "summary": self.summary}
        (self.out / f"{self.command}.json").write_text(json.dumps(doc, indent=1, sort_keys=True, default=_jsonable) + "\n")
        if self.rows is not None:
            _write_csv(self.out / f"{self.command}.csv", SCHEMAS[self.command], self.rows)
        for name, (cols, rows) in self.extra_csv.items():
            _write_csv(self.out / f"{self.command}_{name}.csv", cols, rows)


def _jsonable(obj):
    import numpy as np

    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


def _write_csv(path: Path, columns: list[str], rows: list[dict]):
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row.get(k, "")) for k in columns})


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


# commands -------------------------------------------------------------------


def cmd_model_info(cfg, rep):
    from .syndrome import degeneracy

    model = _model(cfg)
    info = model.describe()
    info["k"] = degeneracy(model)
    rep.summary = info
    rep.line = f"{model.name} dims={list(model.lattice.dims)} qubits={model.n_qubits} generators={model.n_generators} k={info['k']}"


def cmd_syndrome(cfg, rep):
    from .syndrome import syndrome

    model = _model(cfg)
    if not cfg["pauli"]:
        raise UsageError("--pauli is required")
    p = _parse_pauli(model.lattice, cfg["pauli"])
    conf = syndrome(model, p)
    rep.rows = []
    for site, t in conf.defects():
        x, y, z = model.lattice.site_coords(site)
        rep.rows.append({"site": site, "x": x, "y": y, "z": z, "type": model.type_label(t)})
    rep.summary = {"pauli": str(p), "n_defects": conf.n_defects, "defects": conf.defects()}
    rep.line = f"{conf.n_defects} defects: " + " ".join(f"{r['type']}@({r['x']},{r['y']},{r['z']})" for r in rep.rows)


def cmd_validity(cfg, rep):
    from .syndrome import is_valid

    model = _model(cfg)
    conf = _parse_defects(model, cfg["defects"])
    res = is_valid(model, conf)
    rep.summary = {"defects": conf.defects(), "valid": res.valid, "rank": res.rank,
                   "augmented_rank": res.augmented_rank, "witness": str(res.witness) if res.witness else None}
    rep.line = f"valid={res.valid} rank={res.rank} augmented_rank={res.augmented_rank}"
    if res.valid:
        rep.line += f" witness_weight={res.witness.weight}"


def cmd_degeneracy(cfg, rep):
    from .syndrome import degeneracy

    model = _model(cfg)
    k = degeneracy(model)
    rep.summary = {"k": k, "degeneracy": 2**k, "n_qubits": model.n_qubits}
    rep.line = f"k={k}, degeneracy {2**k}"


def cmd_certify(cfg, rep):
    from .mobility import VacuousQueryError, certify_no_strings

    model = _model(cfg)
    try:
        rows = certify_no_strings(model, int(cfg["dmax"]))
    except VacuousQueryError as exc:
        raise UsageError(str(exc)) from None
    rep.rows = [r.as_csv() for r in rows]
    n_exist = sum(r.verdict == "exists" for r in rows)
    all_cert = all(r.all_certified for r in rows if r.verdict == "none")
    rep.summary = {"rows": len(rows), "exists": n_exist, "none": len(rows) - n_exist,
                   "all_rank_certified": all_cert,
                   "no_strings_expected": bool(model.metadata.get("no_strings_expected"))}
    rep.line = f"{len(rows)} pair/box queries: {n_exist} transporters, {len(rows) - n_exist} none (rank-certified: {all_cert})"
    if model.metadata.get("no_strings_expected") and (n_exist or not all_cert):
        rep.code = EXIT_VIOLATION


def cmd_local_gap(cfg, rep):
    from .mobility import local_gap_certificate

    model = _model(cfg)
    conf = _parse_defects(model, cfg["defects"])
    try:
        cert = local_gap_certificate(model, conf)
    except ValueError as exc:
        raise UsageError(f"local-gap {cfg['defects']!r}: {exc}") from None
    rep.summary = {"defects": conf.defects(), "certified_diameter": cert.certified_diameter,
                   "energy_gap": cert.energy_gap, "min_separation": cert.min_separation}
    rep.line = f"locally gapped up to diameter {cert.certified_diameter} with gap {cert.energy_gap:g}"


def cmd_count_sparse(cfg, rep):
    from .counting import CountingBudgetError, SparsityQuery, count_sparse_exact, typicality_bound

    Ls = _int_list(cfg["L"] if cfg["L"] is not None else cfg["dims"] or [])
    if not Ls:
        raise UsageError("count-sparse needs --L")
    rows = []
    for L in Ls:
        for m in _int_list(cfg["m"]):
            for d in _int_list(cfg["d"]):
                try:
                    q = SparsityQuery(L, m, d, int(cfg["dimension"]))
                except ValueError as exc:
                    raise UsageError(str(exc)) from None
                b = typicality_bound(q)
                row = {"L": L, "m": m, "d": d, "v": q.v, "bound_simple": float(b.simple), "bound_product": float(b.product)}
                if not cfg["bound_only"]:
                    try:
                        c = count_sparse_exact(q)
                    except CountingBudgetError as exc:
                        raise UsageError(f"count-sparse L={L} m={m} d={d}: {exc}") from None
                    row.update(sparse_count=c.sparse_count, total=c.total_count, fraction=float(c.fraction))
                    if c.fraction < b.simple or c.fraction < b.product:
                        rep.code = EXIT_VIOLATION
                rows.append(row)
    rep.rows = rows
    rep.summary = {"rows": len(rows)}
    last = rows[-1]
    if "sparse_count" in last:
        rep.line = (f"fraction {last['sparse_count']}/{last['total']} = {last['fraction']:.6f}, "
                    f"bound {last['bound_simple']:.4g} (simple) / {last['bound_product']:.6f} (product)")
    else:
        rep.line = f"bound {last['bound_simple']:.4g} (simple) / {last['bound_product']:.6f} (product)"


def cmd_entropy(cfg, rep):
    import numpy as np

    from .entanglement import Region, SectorLabelError, entropy_diagnostics, stabilizer_entropy

    model = _model(cfg)
    regions = []
    for a in _int_list(cfg["sides"]):
        regions.append((f"box{a}", Region.box(model, (0, 0, 0), a)))
    rng = np.random.default_rng(cfg["seed"])
    for i in range(int(cfg["random_regions"])):
        regions.append((f"random{i}", Region.random(model, rng)))
    exc = _parse_pauli(model.lattice, cfg["excitation"]) if cfg["excitation"] else None
    rows = []
    try:
        for name, region in regions:
            s = stabilizer_entropy(model, region, exc, cfg["sector"])
            diag = entropy_diagnostics(model, region, cfg["sector"])
            if s != diag["S_bits"]:
                rep.code = EXIT_VIOLATION
            rows.append({"region": name, "size": len(region), "S_bits": s, "rank_region": diag["rank_region"],
                         "rank_complement": diag["rank_complement"], "group_rank": diag["group_rank"]})
    except SectorLabelError as exc_:
        raise UsageError(str(exc_)) from None
    rep.rows = rows
    rep.summary = {"regions": len(rows)}
    rep.line = ", ".join(f"S({r['region']})={r['S_bits']}" for r in rows)


def _dense_guard(model):
    from .numerics.paulisum import DENSE_QUBIT_CAP

    if model.n_qubits > DENSE_QUBIT_CAP:
        raise UsageError(f"{model.name} with {model.n_qubits} qubits exceeds the dense cap of {DENSE_QUBIT_CAP}")


def cmd_evolve(cfg, rep):
    import numpy as np

    ts = _grid(cfg["tmax"], cfg["nt"])
    if cfg["system"] == "chain":
        from .numerics.chain import bessel_j0_series, survival_amplitudes

        lam = float(cfg["hopping"])
        amps = np.abs(survival_amplitudes(int(cfg["chain_length"]), lam, ts, tol=float(cfg["tol"])))
        ref = np.abs([bessel_j0_series(lam * t) for t in ts])
        err = np.abs(amps - ref)
        rep.rows = [{"t": float(t), "amplitude_abs": float(a), "reference_abs": float(r), "abs_error": float(e)}
                    for t, a, r, e in zip(ts, amps, ref, err)]
        rep.summary = {"max_abs_error": float(err.max()), "max_error_allowed": cfg["max_error"]}
        rep.line = f"hopping chain |amplitude| vs |J0|: max error {err.max():.3e}"
        if err.max() > float(cfg["max_error"]):
            rep.code = EXIT_VIOLATION
        return
    from .numerics.krylov import evolve, evolve_dense
    from .numerics.paulisum import PerturbedHamiltonian
    from .numerics.states import sector_state

    if cfg["model"] is None and cfg["stencil"] is None:
        raise UsageError("evolve --system model needs --model")
    if cfg["L"] is None and cfg["dims"] is None:
        raise UsageError("evolve --system model needs --L or --dims")
    model = _model(cfg)
    ham = PerturbedHamiltonian.with_fields(model, float(cfg["s"]))
    h = ham.sparse()
    psi0 = sector_state(model, seed=cfg["seed"])
    psi = psi0
    rows, last = [], 0.0
    dense = h.toarray() if model.n_qubits <= 10 else None
    worst = 0.0
    for t in ts:
        psi = evolve(h, psi, t - last, tol=float(cfg["tol"]))
        last = t
        amp = abs(np.vdot(psi0, psi))
        ref = abs(np.vdot(psi0, evolve_dense(dense, psi0, t))) if dense is not None else float("nan")
        worst = max(worst, abs(amp - ref)) if dense is not None else worst
        rows.append({"t": float(t), "amplitude_abs": float(amp), "reference_abs": float(ref),
                     "abs_error": float(abs(amp - ref))})
    rep.rows = rows
    rep.summary = {"max_abs_error": worst, "dense_reference": dense is not None}
    rep.line = f"{model.name} ground-state survival at s={cfg['s']}: final |amplitude| {rows[-1]['amplitude_abs']:.6f}"
    if dense is not None and worst > float(cfg["max_error"]):
        rep.code = EXIT_VIOLATION


def _flow_setup(cfg):
    from .numerics.flow import SpectralFlow
    from .numerics.paulisum import PerturbedHamiltonian

    model = _model(cfg)
    _dense_guard(model)
    ham = PerturbedHamiltonian.with_fields(model, float(cfg["s"]))
    flow = SpectralFlow(ham, cfg["gamma"], cfg.get("within", "zero"))
    return model, ham, flow


def cmd_spectral_flow(cfg, rep):
    from .gf2 import PauliOperator
    from .numerics.flow import locality_profile

    model, ham, flow = _flow_setup(cfg)
    spec = flow.spectra.spectrum(float(cfg["s"]))
    rows = []
    for n, level in enumerate(spec.levels):
        rows.append({"band": n, "level": float(level), "lower": float(spec.lower[n]), "upper": float(spec.upper[n]),
                     "width": float(spec.widths[n]),
                     "gap_above": float(spec.gaps[n]) if n < len(spec.gaps) else ""})
    rep.rows = rows
    if spec.collision:
        rep.summary = {"collision": True, "min_gap": spec.min_gap}
        rep.line = f"band collision at s={cfg['s']} (min gap {spec.min_gap:.4g})"
        rep.code = EXIT_VIOLATION
        return
    state = flow.integrate(float(cfg["s"]), tol=float(cfg["ode_tol"]))
    defect = flow.projector_defect(state)
    unitarity = state.unitarity_defect()
    fd = None
    if cfg["s"] >= 1e-4:
        worst, slack = flow.projector_derivative_check(float(cfg["s"]), 0)
        fd = {"max_entry_error": worst, "allowed": slack, "passes": worst <= slack}
    rep.summary = {"projector_defect": defect, "unitarity_defect": unitarity, "steps": state.steps,
                   "rejected_steps": state.rejected, "min_gap": spec.min_gap, "finite_difference": fd,
                   "gamma": flow.gamma}
    if cfg["profile"]:
        op = PauliOperator.single(model.lattice, int(cfg["profile_qubit"]), "Z")
        prof = locality_profile(state, op)
        rep.extra_csv["profile"] = (["r", "shell_norm"], [{"r": int(r), "shell_norm": float(v)}
                                                           for r, v in zip(prof.abscissa, prof.ordinate)])
        rep.summary["profile"] = prof.ordinate.tolist()
        rep.summary["profile_strictly_decreasing"] = prof.strictly_decreasing()
    rep.line = f"||U P0 U^+ - P_s|| = {defect:.3e}, unitarity {unitarity:.1e}, {state.steps} steps"
    if defect > float(cfg["flow_tol"]) or (fd and not fd["passes"]):
        rep.code = EXIT_VIOLATION


def _band(cfg):
    from .numerics.dynamics import FlowedBand
    from .numerics.states import ConfigurationBasis

    model, ham, flow = _flow_setup(cfg)
    state = flow.integrate(float(cfg["s"]))
    labels, basis0 = ConfigurationBasis(model, seed=cfg["seed"]).band(int(cfg["band"]))
    if not labels:
        raise UsageError(f"no valid configurations with {cfg['band']} defects")
    return model, FlowedBand.build(flow, state, labels, basis0)


def cmd_offdiag(cfg, rep):
    from .numerics.dynamics import offdiagonal_sum, survival_check
    from .numerics.states import min_separation

    model, band = _band(cfg)
    ref = int(cfg["reference"])
    if not 0 <= ref < band.size:
        raise UsageError(f"reference {ref} outside band of size {band.size}")
    rows = []
    for i, lab in enumerate(band.labels):
        od = offdiagonal_sum(band, i)
        rows.append({"reference": i, "min_separation": min_separation(lab.config),
                     "sector": "".join(map(str, lab.sector)), "abs_sum": od.abs_sum,
                     "truncation_norm": od.truncation_norm})
    rep.rows = rows
    chk = survival_check(band, ref, _grid(cfg["tmax"], cfg["nt"]))
    by_sep: dict[int, list[float]] = {}
    for r in rows:
        by_sep.setdefault(r["min_separation"], []).append(r["abs_sum"])
    rep.summary = {"band_size": band.size, "leakage": band.leakage, "survival_bound_holds": chk.holds(),
                   "survival_margin": chk.margin, "mean_abs_sum_by_separation": {str(k): sum(v) / len(v) for k, v in sorted(by_sep.items())}}
    rep.line = f"band of {band.size} states; survival bound holds: {chk.holds()} (margin {chk.margin:.3g})"
    if not chk.holds():
        rep.code = EXIT_VIOLATION


def cmd_iom(cfg, rep):
    from .numerics.dynamics import iom_drift
    from .numerics.states import min_separation

    model, band = _band(cfg)
    local = [i for i, lab in enumerate(band.labels) if min_separation(lab.config) >= int(cfg["d_loc"])]
    if not local:
        raise UsageError(f"no band states with defect separation >= {cfg['d_loc']}")
    start = local[0]
    term = model.generator_index(*band.labels[start].config.defects()[0])
    res = iom_drift(band, term, local, start, _grid(cfg["tmax"], cfg["nt"]))
    t = res.profile.abscissa
    rep.rows = [{"t": float(a), "expectation": float(b), "drift": float(c), "bound_local": float(a * res.commutator_local),
                 "bound_band": float(a * res.commutator_band)} for a, b, c in zip(t, res.profile.ordinate, res.drift)]
    rep.summary = {"term": term, "p_loc_size": len(local), "commutator_local": res.commutator_local,
                   "commutator_band": res.commutator_band, "holds_local": res.holds_local(),
                   "holds_band": res.holds_band()}
    rep.line = (f"max drift {res.drift.max():.3g}; band bound holds: {res.holds_band()}; "
                f"P_loc bound holds: {res.holds_local()}")
    if not res.holds_band():
        rep.code = EXIT_VIOLATION


COMMANDS = {
    "model-info": cmd_model_info,
    "syndrome": cmd_syndrome,
    "validity": cmd_validity,
    "degeneracy": cmd_degeneracy,
    "certify-no-strings": cmd_certify,
    "local-gap": cmd_local_gap,
    "count-sparse": cmd_count_sparse,
    "entropy": cmd_entropy,
    "evolve": cmd_evolve,
    "spectral-flow": cmd_spectral_flow,
    "offdiag": cmd_offdiag,
    "iom": cmd_iom,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    if args.schema:
        print(json.dumps({"command": args.command, "format_version": FORMAT_VERSION,
                          "csv_columns": SCHEMAS[args.command]}))
        return EXIT_OK
    if args.threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)
    out = Path(args.out or os.environ.get(OUT_ENV, "."))
    try:
        cfg = resolve_config(args.command, args)
        rep = Report(args.command, cfg, out)
        COMMANDS[args.command](cfg, rep)
    except UsageError as exc:
        print(f"cubicloc {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"cubicloc {args.command}: invalid query: {exc}", file=sys.stderr)
        return EXIT_USAGE
    rep.write()
    print(rep.line)
    return rep.code


if __name__ == "__main__":
    raise SystemExit(main())
