"""Command-line front end: ``qnet4 build | analyze | verify | witness``.

Reports are JSON documents (sorted keys) on stdout; a short human summary
goes to stderr. Exit codes: 0 pass, 1 check failure, 2 usage error,
3 I/O or state-file format error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from dataclasses import asdict, dataclass, fields
from itertools import combinations
from math import prod
from pathlib import Path
from typing import Sequence

import numpy as np

from . import certify
from . import tolerances as tol
from .channels import ChannelPlacement, apply, parse_channel
from .infotheory import entropy_table, i2, marginal_report, mutual_information
from .layout import ENV, INCIDENCE, NODES, TOPOLOGIES, Particle, SystemLayout, incidence
from .netbuild import (
    MixtureSpec,
    NetworkState,
    SourceSpec,
    bell_source,
    build_mixture,
    build_network,
    ghz_source,
    product_source,
    random_specs,
    random_unitaries,
    sample_source,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
FORMAT = "qnet4/1"
_ELAPSED = "_elapsed_seconds"

CHECKS = ("i4zero", "channels", "bounds", "ranks", "additivity", "gme", "ssa", "identities", "structural")
IQN_ONLY = ("channels", "bounds")
GLOBAL_CHECKS = ("ssa", "identities")
DEFAULT_TRIALS = {
    "i4zero": 100,
    "channels": 50,
    "bounds": 50,
    "ranks": 25,
    "additivity": 25,
    "ssa": 50,
    "identities": 100,
    "structural": 25,
    "gme": 0,
}


class UsageError(Exception):
    pass


class StateFileError(Exception):
    pass


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    """Flat run configuration; every field can be set in the config file or on the command line."""

    topology: str = "iqn"
    d: int = 2
    sources: str = "ghz"
    unitaries: str = "identity"
    mixture: int = 0
    channels: str = ""
    trials: int | None = None
    seed: int = 0
    check: str = "all"
    tol_entropy: float | None = None
    tol_rank: float = tol.RANK_RTOL

    def validate(self, allow_all_topologies: bool = False) -> None:
        allowed = TOPOLOGIES + (("all",) if allow_all_topologies else ())
        if self.topology not in allowed:
            raise UsageError(f"unknown topology {self.topology!r}; choose from {', '.join(allowed)}")
        if self.d < 2:
            raise UsageError("d must be >= 2")
        if self.unitaries not in ("identity", "haar"):
            raise UsageError("unitaries must be 'identity' or 'haar'")
        if self.mixture < 0:
            raise UsageError("mixture must be >= 0")
        if self.trials is not None and self.trials < 1:
            raise UsageError("trials must be >= 1")
        if self.check != "all" and self.check not in CHECKS:
            raise UsageError(f"unknown check {self.check!r}; choose from all, {', '.join(CHECKS)}")
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must be a 64-bit unsigned integer")


def _coerce(name: str, text: str):
    kinds = {f.name: f.type for f in fields(RunConfig)}
    if name not in kinds:
        raise UsageError(f"unknown config key {name!r}")
    kind = kinds[name]
    try:
        if "int" in kind:
            return None if text.lower() == "none" else int(text, 0)
        if "float" in kind:
            return None if text.lower() == "none" else float(text)
    except ValueError as exc:
        raise UsageError(f"bad value for {name}: {text!r}") from exc
    return text


def parse_config_text(text: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment; dashes in keys map to underscores."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"config line {lineno}: expected key=value, got {raw!r}")
        key = key.strip().replace("-", "_")
        out[key] = _coerce(key, value.strip())
    return out


def load_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if getattr(args, "config", None):
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise StateFileError(f"cannot read config {args.config}: {exc}") from exc
        values.update(parse_config_text(text))
    for item in getattr(args, "set", None) or []:
        values.update(parse_config_text(item))
    for name in ("topology", "seed", "trials", "tol_entropy", "tol_rank"):
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    check = getattr(args, "check_flag", None) or getattr(args, "check", None)
    if check:
        values["check"] = check
    return RunConfig(**values)


# ---------------------------------------------------------------------------
# state construction


def _source_from_item(item: str, arity: int, d: int, rng: np.random.Generator):
    kind, _, rest = item.strip().partition(":")
    if kind == "bell":
        if arity != 2:
            raise UsageError("bell sources are bipartite; use ghz for tripartite sources")
        return bell_source(d)
    if kind == "ghz":
        return ghz_source(d, arity)
    if kind == "product":
        return product_source(d, arity)
    try:
        if kind == "pure":
            marg = tuple(int(x) for x in rest.split(",")) if rest else ()
            spec = SourceSpec(arity, d, "pure", 1, marg)
        elif kind == "mixed":
            rank, _, marg_text = rest.partition(":")
            marg = tuple(int(x) for x in marg_text.split(",")) if marg_text else ()
            spec = SourceSpec(arity, d, "mixed", int(rank), marg)
        else:
            raise UsageError(f"unknown source kind {item!r}")
        spec.check_feasible()
    except ValueError as exc:
        raise UsageError(f"source {item!r}: {exc}") from exc
    return sample_source(spec, rng)


def build_sources(cfg: RunConfig, rng: np.random.Generator) -> list:
    table = INCIDENCE[cfg.topology]
    items = [s for s in cfg.sources.split(";") if s.strip()]
    if len(items) == 1:
        items = items * len(table)
    if len(items) != len(table):
        raise UsageError(f"{cfg.topology} has {len(table)} sources; got {len(items)} source items")
    if all(i.strip() == "random" for i in items):
        return [sample_source(s, rng) for s in random_specs(cfg.topology, cfg.d, rng, kind="any")]
    if any(i.strip() == "random" for i in items):
        raise UsageError("'random' must be used for every source or none")
    return [_source_from_item(item, len(nodes), cfg.d, rng) for item, (_, nodes) in zip(items, table)]


def parse_placement(text: str, layout: SystemLayout, rng: np.random.Generator) -> ChannelPlacement:
    """``A:depolarizing:0.3;C:random:2`` style placement string."""
    chans = {}
    for item in filter(None, (s.strip() for s in text.split(";"))):
        node, _, preset = item.partition(":")
        if node not in NODES or not preset:
            raise UsageError(f"bad channel item {item!r}; expected NODE:preset")
        dims = [layout.particles[i].dim for i in layout.node_particles(node)]
        try:
            chans[node] = parse_channel(preset, dims, rng)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    return ChannelPlacement(chans)


def build_state(cfg: RunConfig) -> NetworkState:
    cfg.validate()
    rng = certify.trial_rng(cfg.seed, "build", 0)
    layout = incidence(cfg.topology, cfg.d)

    def branch():
        sources = build_sources(cfg, rng)
        us = random_unitaries(layout, rng) if cfg.unitaries == "haar" else None
        return sources, us

    if cfg.mixture:
        branches = [branch() for _ in range(cfg.mixture)]
        w = rng.dirichlet(np.ones(cfg.mixture))
        w[-1] = 1 - w[:-1].sum()
        state = build_mixture(cfg.topology, MixtureSpec(tuple(w), tuple(branches)))
    else:
        state = build_network(cfg.topology, *branch())
    if cfg.channels and cfg.channels != "identity":
        state = apply(parse_placement(cfg.channels, state.network_layout, rng), state)
    return state


# ---------------------------------------------------------------------------
# state files


def write_state(state: NetworkState, path: str | Path) -> None:
    layout = state.layout
    lines = [
        f"format={FORMAT}",
        f"rep={'pure' if state.is_pure else 'density'}",
        "particles=" + ",".join(f"{p.id}:{p.dim}:{p.node}:{p.source}" for p in layout.particles),
    ]
    if layout.topology:
        lines.append(f"topology={layout.topology}")
    data = state.psi if state.is_pure else state.rho.reshape(-1)
    lines += [f"{float(z.real).hex()} {float(z.imag).hex()}" for z in data]
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_float(text: str) -> float:
    try:
        return float.fromhex(text) if "0x" in text.lower() else float(text)
    except ValueError as exc:
        raise StateFileError(f"bad number {text!r}") from exc


def read_state(path: str | Path) -> NetworkState:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise StateFileError(f"cannot read {path}: {exc}") from exc
    header: dict[str, str] = {}
    payload: list[str] = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if not payload and "=" in line:
            key, _, value = line.partition("=")
            header[key.strip()] = value.strip()
        else:
            payload.append(line)
    if header.get("format") != FORMAT:
        raise StateFileError(f"unsupported or missing format line (want format={FORMAT})")
    rep = header.get("rep")
    if rep not in ("pure", "density"):
        raise StateFileError("rep must be 'pure' or 'density'")
    try:
        particles = []
        for item in header["particles"].split(","):
            pid, dim, node, source = item.split(":")
            particles.append(Particle(int(pid), int(dim), source, node))
        topology = header.get("topology")
        if topology is not None and topology not in TOPOLOGIES:
            raise StateFileError(f"unknown topology {topology!r} in header")
        layout = SystemLayout(tuple(particles), topology)
    except (KeyError, ValueError) as exc:
        raise StateFileError(f"bad particles header: {exc}") from exc
    n = prod(layout.dims)
    expected = n if rep == "pure" else n * n
    if len(payload) != expected:
        raise StateFileError(f"payload has {len(payload)} amplitudes, header implies {expected}")
    values = np.empty(expected, dtype=complex)
    for k, line in enumerate(payload):
        parts = line.split()
        if len(parts) != 2:
            raise StateFileError(f"amplitude line {k} should hold 're im'")
        values[k] = complex(_parse_float(parts[0]), _parse_float(parts[1]))
    try:
        if rep == "pure":
            return NetworkState.from_vector(values, layout)
        return NetworkState.from_density(values.reshape(n, n), layout)
    except ValueError as exc:
        raise StateFileError(f"invalid state: {exc}") from exc


# ---------------------------------------------------------------------------
# commands


def _layout_summary(layout: SystemLayout) -> dict:
    return {
        "topology": layout.topology,
        "dims": list(layout.dims),
        "nodes": {n: list(layout.node_particles(n)) for n in layout.nodes},
        "env_particles": [p.id for p in layout.particles if p.node == ENV],
    }


def cmd_build(cfg: RunConfig, out: str | None) -> tuple[dict, int]:
    if not out:
        raise UsageError("build needs --out")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        state = build_state(cfg)
    try:
        write_state(state, out)
    except OSError as exc:
        raise StateFileError(f"cannot write {out}: {exc}") from exc
    report = {
        "command": "build",
        "config": asdict(cfg),
        "layout": _layout_summary(state.layout),
        "rep": "pure" if state.is_pure else "density",
        "out": str(out),
        "warnings": [str(w.message) for w in caught],
        "passed": True,
    }
    return report, EXIT_OK


def analyze_state(state: NetworkState, rank_tol: float = tol.RANK_RTOL) -> dict:
    nodes = state.layout.nodes
    mr = marginal_report(state, rank_tol)
    S = entropy_table(state)
    out = {"marginals": mr.to_dict()}
    out["i2"] = {f"{x}:{y}": i2(S, x, y) for x, y in combinations(nodes, 2)}
    out["i3"] = {":".join(c): mutual_information(S, c).value for c in combinations(nodes, 3)}
    if len(nodes) == 4:
        out["i4"] = mutual_information(S, list(nodes)).value
        out["log_negativity"] = {f"{n}|rest": certify.node_log_negativity(state, "".join(nodes), n) for n in nodes}
    return out


def cmd_analyze(cfg: RunConfig, path: str) -> tuple[dict, int]:
    state = read_state(path)
    report = {"command": "analyze", "state": str(path), "layout": _layout_summary(state.layout)}
    report.update(analyze_state(state, cfg.tol_rank))
    report["passed"] = True
    return report, EXIT_OK


def _plan(cfg: RunConfig) -> list[tuple[str, str | None]]:
    topologies = TOPOLOGIES if cfg.topology == "all" else (cfg.topology,)
    names = CHECKS if cfg.check == "all" else (cfg.check,)
    plan = []
    for name in names:
        if name in GLOBAL_CHECKS:
            plan.append((name, None))
        elif name in IQN_ONLY:
            if "iqn" in topologies:
                plan.append((name, "iqn"))
            elif cfg.check != "all":
                raise UsageError(f"check {name!r} is defined on the iqn topology only")
        else:
            plan.extend((name, t) for t in topologies)
    return plan


def run_check(name: str, topology: str | None, cfg: RunConfig) -> certify.CertReport:
    trials = cfg.trials or DEFAULT_TRIALS[name]
    seed, d = cfg.seed, cfg.d
    if name == "i4zero":
        return certify.check_i4_zero(topology, trials, seed, d)
    if name == "channels":
        return certify.check_channel_signs(trials, seed, d=d)
    if name == "bounds":
        return certify.check_three_channel_bounds(trials, seed, d, identity=cfg.channels == "identity")
    if name == "ranks":
        return certify.check_rank_table(topology, trials, seed, d, rank_tol=cfg.tol_rank)
    if name == "additivity":
        return certify.check_additivity(topology, trials, seed, d)
    if name == "gme":
        return certify.check_gme(topology)
    if name == "ssa":
        return certify.ssa_selftest(trials, seed)
    if name == "identities":
        return certify.check_identities(trials, seed)
    if name == "structural":
        return certify.check_structural(topology, trials, seed, d)
    raise UsageError(f"unknown check {name!r}")


def cmd_verify(cfg: RunConfig) -> tuple[dict, int]:
    cfg.validate(allow_all_topologies=True)
    overrides = {k: cfg.tol_entropy for k in tol.ENTROPIC} if cfg.tol_entropy is not None else {}
    reports, elapsed = [], []
    with tol.overridden(**overrides):
        for name, topology in _plan(cfg):
            start = time.perf_counter()
            rep = run_check(name, topology, cfg)
            elapsed.append(time.perf_counter() - start)
            rep.metadata.setdefault("topology", topology)
            reports.append(rep.to_dict())
    passed = all(r["passed"] for r in reports)
    report = {"command": "verify", "config": asdict(cfg), "checks": reports, "passed": passed}
    # wall times go to the stderr summary only, so stdout stays reproducible
    report[_ELAPSED] = elapsed
    return report, EXIT_OK if passed else EXIT_FAIL


def cmd_witness(cfg: RunConfig, path: str) -> tuple[dict, int]:
    cfg.validate()
    state = read_state(path)
    layout = state.layout
    if not state.is_pure or layout.dims != (2, 2, 2, 2) or sorted(p.node for p in layout.particles) != list(NODES):
        raise UsageError("witness needs a pure 4-qubit state with one particle per node")
    order = [next(p.id for p in layout.particles if p.node == n) for n in NODES]
    psi = state.psi.reshape(2, 2, 2, 2).transpose(order).reshape(-1)
    overrides = {"GME_ENTROPY": cfg.tol_entropy} if cfg.tol_entropy is not None else {}
    with tol.overridden(**overrides):
        gme = certify.gme_check(psi)
        witness = certify.gme_witness(cfg.topology)
        verdict = certify.witness_verdict(psi, cfg.topology)
    report = {
        "command": "witness",
        "state": str(path),
        "topology": cfg.topology,
        "gme": gme,
        "witness": witness.to_dict(),
        "verdict": verdict,
        "passed": True,
    }
    return report, EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj).__name__}")


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, default=_json_default, allow_nan=True) + "\n"


def _summary(report: dict) -> str:
    cmd = report["command"]
    if cmd == "verify":
        lines = []
        elapsed = report.get(_ELAPSED) or [None] * len(report["checks"])
        for r, secs in zip(report["checks"], elapsed):
            where = r["metadata"].get("topology") or "-"
            line = f"[{'PASS' if r['passed'] else 'FAIL'}] {r['name']:<11} {where:<6}"
            lines.append(line + (f" {secs:8.2f} s" if secs is not None else ""))
        lines.append(f"overall: {'PASS' if report['passed'] else 'FAIL'}")
        return "\n".join(lines)
    if cmd == "witness":
        return f"verdict: {report['verdict']} (gme={report['gme']}, topology={report['topology']})"
    if cmd == "analyze":
        i4 = report.get("i4")
        return f"analyzed {report['state']}" + (f": I4 = {i4:.6g} bits" if i4 is not None else "")
    return f"wrote {report['out']} ({report['rep']}, dims {report['layout']['dims']})"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qnet4",
        description="Build, analyze and certify four-node quantum network states.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    common = argparse.ArgumentParser(add_help=False, argument_default=None)
    common.add_argument("--config", help="flat key=value config file (keys are RunConfig fields)")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")
    common.add_argument("--seed", type=int, help="master seed (default 0)")
    common.add_argument("--tol-entropy", type=float, help="replace every entropic assertion tolerance")
    common.add_argument("--tol-rank", type=float, help=f"relative numerical-rank threshold (default {tol.RANK_RTOL})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", parents=[common], help="write a network state file")
    p.add_argument("--topology", choices=TOPOLOGIES, help="network topology (default iqn)")
    p.add_argument("--out", help="output state file")

    p = sub.add_parser("analyze", parents=[common], help="entropies, ranks, I_n and log-negativities of a state file")
    p.add_argument("state", help="state file")

    p = sub.add_parser("verify", parents=[common], help="run certification checks")
    p.add_argument("check", nargs="?", help=f"all or one of {', '.join(CHECKS)} (default all)")
    p.add_argument("--check", dest="check_flag", help="same as the positional check name")
    p.add_argument("--topology", help="iqn, itcn1, itcn2 or all (default all)")
    p.add_argument("--trials", type=int, help=f"trials per check (default per check: {DEFAULT_TRIALS})")

    p = sub.add_parser("witness", parents=[common], help="GME incompatibility verdict for a 4-qubit pure state")
    p.add_argument("state", help="state file with four qubits, one per node")
    p.add_argument("--topology", choices=TOPOLOGIES, help="network topology (default iqn)")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        if args.command == "verify" and args.topology is None and "topology" not in _config_keys(args):
            cfg.topology = "all"
        if args.command == "build":
            report, code = cmd_build(cfg, args.out)
        elif args.command == "analyze":
            report, code = cmd_analyze(cfg, args.state)
        elif args.command == "verify":
            report, code = cmd_verify(cfg)
        else:
            report, code = cmd_witness(cfg, args.state)
    except UsageError as exc:
        print(f"qnet4: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StateFileError as exc:
        print(f"qnet4: error: {exc}", file=sys.stderr)
        return EXIT_IO
    summary = _summary(report)
    report.pop(_ELAPSED, None)
    sys.stdout.write(dumps(report))
    print(summary, file=sys.stderr)
    return code


def _config_keys(args: argparse.Namespace) -> set[str]:
    keys: set[str] = set()
    if args.config:
        keys |= set(parse_config_text(Path(args.config).read_text()))
    for item in args.set or []:
        keys |= set(parse_config_text(item))
    return keys


if __name__ == "__main__":
    sys.exit(main())
