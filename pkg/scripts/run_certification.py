"""Run the certification checks over several master seeds and tabulate the worst values.

    python scripts/run_certification.py --seeds 0 1 2 --trials 20 --out results.json
"""

from __future__ import annotations

import argparse
import json
import time
from dataclasses import asdict, dataclass, field

from qnet4 import cli


@dataclass
class CertificationConfig:
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2])
    topology: str = "all"
    check: str = "all"
    trials: int | None = None  # None keeps the per-check defaults


def run(cfg: CertificationConfig) -> dict:
    rows = []
    for seed in cfg.seeds:
        run_cfg = cli.RunConfig(topology=cfg.topology, check=cfg.check, trials=cfg.trials, seed=seed)
        run_cfg.validate(allow_all_topologies=True)
        for name, topology in cli._plan(run_cfg):
            start = time.perf_counter()
            rep = cli.run_check(name, topology, run_cfg)
            rows.append(
                {
                    "seed": seed,
                    "check": name,
                    "topology": topology,
                    "passed": rep.passed,
                    "seconds": round(time.perf_counter() - start, 3),
                    "records": {r["label"]: r["value"] for r in rep.records},
                }
            )
            status = "PASS" if rep.passed else "FAIL"
            print(f"[{status}] seed={seed} {name:<11} {topology or '-':<6} {rows[-1]['seconds']:7.2f} s")
    return {"config": asdict(cfg), "rows": rows, "passed": all(r["passed"] for r in rows)}


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    p.add_argument("--topology", default="all")
    p.add_argument("--check", default="all")
    p.add_argument("--trials", type=int)
    p.add_argument("--out", help="write the table as JSON")
    a = p.parse_args()
    result = run(CertificationConfig(a.seeds, a.topology, a.check, a.trials))
    if a.out:
        with open(a.out, "w") as fh:
            json.dump(result, fh, indent=2, sort_keys=True)
    print("overall:", "PASS" if result["passed"] else "FAIL")


if __name__ == "__main__":
    main()
