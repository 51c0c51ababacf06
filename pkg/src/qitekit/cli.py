"""Command-line experiment runner.

Writes ``trajectory.csv`` (``method,step,beta,energy,fidelity,extra``) and
``summary.json`` into the output directory.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import time
from pathlib import Path

from .config import ConfigError, RunConfig, parse_config
from .model import (
    GroundTruth,
    build_tfim,
    exact_ground,
    exact_ite_evolve,
    hamiltonian_from_text,
)
from .pauli import MAX_MATRIX_QUBITS, PauliSum
from .qite import run_qite
from .statevec import init_basis_state
from .varqite import Ansatz, run_varqite

log = logging.getLogger("qitekit")

CSV_HEADER = "method,step,beta,energy,fidelity,extra"


def _fmt(v) -> str:
    return "" if v is None else "%.12e" % v


@dataclasses.dataclass
class RunResult:
    rows: list[tuple]
    summary: dict


def load_hamiltonian(cfg: RunConfig) -> PauliSum:
    if cfg.hamiltonian_path is not None:
        return hamiltonian_from_text(Path(cfg.hamiltonian_path).read_text())
    return build_tfim(cfg.tfim)


def execute(cfg: RunConfig) -> RunResult:
    """Run every method the configuration asks for and collect the rows."""
    h = load_hamiltonian(cfg)
    n = h.n_qubits
    bits = cfg.initial_state or "0" * n
    if len(bits) != n:
        raise ValueError(f"initial_state has {len(bits)} bits for {n} qubits")
    psi0 = init_basis_state(n, bits)

    ground: GroundTruth | None = None
    if n <= MAX_MATRIX_QUBITS:
        ground = exact_ground(h, cfg.degeneracy_tol)
    elif cfg.method in ("ed", "ite", "all"):
        raise ValueError(f"exact methods need n <= {MAX_MATRIX_QUBITS}")
    reference = None
    if ground is not None and cfg.emit_fidelity:
        reference = ground if cfg.degenerate else ground.single()

    rows: list[tuple] = []
    finals: dict[str, dict] = {}
    summary: dict = {
        "e_gs": ground.e_gs if ground else None,
        "degeneracy": ground.degeneracy if ground else None,
    }

    def finish(label, recs):
        last = recs[-1]
        finals[label] = {"energy": last[3], "fidelity": last[4], "steps": last[1]}

    wants = {cfg.method} if cfg.method != "all" else {"ite", "qite", "varqite"}

    if cfg.method == "ed":
        recs = [("ed", 0, None, ground.e_gs, 1.0 if reference else None, None)]
        rows += recs
        finish("ed", recs)

    if "ite" in wants:
        recs = []
        traj = exact_ite_evolve(h, psi0, cfg.ite.dtau, cfg.ite.steps, ground)
        for m, (_, state, e) in enumerate(traj):
            f = reference.fidelity(state) if reference else None
            recs.append(("ite", m, m * cfg.ite.dtau, e, f, None))
        rows += recs
        finish("ite", recs)

    if "qite" in wants:
        for d in cfg.domain_sizes:
            qcfg = dataclasses.replace(cfg.qite, domain_size=d,
                                       record_fidelity=reference is not None)
            label = f"qite_D{d}"
            traj = run_qite(h, psi0, qcfg, reference)
            recs = [
                (label, r.step, r.beta, r.energy, r.fidelity,
                 r.max_residual if r.pieces else None)
                for r in traj.reports
            ]
            rows += recs
            finish(label, recs)

    if "varqite" in wants:
        ansatz = Ansatz.ladder(n, cfg.reps)
        vcfg = dataclasses.replace(cfg.varqite, record_fidelity=reference is not None)
        traj = run_varqite(h, ansatz, vcfg, reference)
        recs = [
            ("varqite", r.step, r.beta, r.energy, r.fidelity, r.v_norm)
            for r in traj.records
        ]
        rows += recs
        finish("varqite", recs)
        summary["varqite_converged"] = traj.converged
        summary["ansatz"] = ansatz.to_dict()
        summary["final_theta"] = traj.theta.tolist()

    summary["final_energy"] = {k: v["energy"] for k, v in finals.items()}
    summary["final_fidelity"] = {k: v["fidelity"] for k, v in finals.items()}
    summary["steps"] = {k: v["steps"] for k, v in finals.items()}
    return RunResult(rows, summary)


def format_csv(rows) -> str:
    lines = [CSV_HEADER]
    for label, step, beta, energy, fid, extra in rows:
        lines.append(",".join([label, str(step), _fmt(beta), _fmt(energy),
                               _fmt(fid), _fmt(extra)]))
    return "\n".join(lines) + "\n"


def run(cfg: RunConfig, out_dir: Path | str) -> RunResult:
    """Execute ``cfg`` and write ``trajectory.csv`` and ``summary.json``.

    On failure any file this call created is removed before re-raising.
    """
    out_dir = Path(out_dir)
    start = time.perf_counter()
    result = execute(cfg)
    result.summary["wall_seconds"] = time.perf_counter() - start
    result.summary["config"] = cfg.to_dict()

    out_dir.mkdir(parents=True, exist_ok=True)
    targets = [out_dir / "trajectory.csv", out_dir / "summary.json"]
    written = []
    try:
        with open(targets[0], "w", encoding="utf-8", newline="\n") as fh:
            written.append(targets[0])
            fh.write(format_csv(result.rows))
        with open(targets[1], "w", encoding="utf-8", newline="\n") as fh:
            written.append(targets[1])
            json.dump(result.summary, fh, indent=2, default=str)
            fh.write("\n")
    except BaseException:
        for p in written:
            p.unlink(missing_ok=True)
        raise
    return result


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qitekit",
        description="Ground states by exact ITE, QITE and varQITE.",
    )
    parser.add_argument("--config", required=True, help="run configuration file")
    parser.add_argument("--out", help="output directory (overrides [run] out)")
    parser.add_argument("--seed", type=int, default=None,
                        help="reserved; all methods are deterministic")
    parser.add_argument("--verbose", "-v", action="count", default=0)
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=(logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)],
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        path = Path(args.config)
        cfg = parse_config(path.read_text(), base_dir=path.parent)
        out = args.out or cfg.out_dir
        if out is None:
            raise ConfigError("no output directory: pass --out or set [run] out")
        result = run(cfg, out)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"qitekit: error: {exc}", file=sys.stderr)
        return 1
    for label, e in result.summary["final_energy"].items():
        f = result.summary["final_fidelity"][label]
        tail = "" if f is None else f"  fidelity {f:.6f}"
        print(f"{label:>10}: energy {e:.10f}{tail}")
    if result.summary["e_gs"] is not None:
        print(f"{'e_gs':>10}: energy {result.summary['e_gs']:.10f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
