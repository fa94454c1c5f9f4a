"""Experiment grid runner: sweeps (n, m, rho, gamma), averages iterations,
and writes one CSV row per grid point.

Desk-scale defaults keep a full sweep fast; --paper-scale switches to the
large grid (n up to 500, m = 100K). Baseline comparison columns are
reserved in the schema but left unpopulated.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import math
import random
import statistics
import sys
from dataclasses import dataclass

from .errors import FssaError, InvalidArgument
from .protocol import plan_parameters
from .sim import DropPoint, SimConfig, run_simulation

CSV_COLUMNS = [
    "n",
    "m",
    "rho",
    "gamma",
    "t",
    "d",
    "q",
    "chunk_count",
    "feasible",
    "iterations",
    "client_keygen_ns_mean",
    "client_keygen_ns_std",
    "client_share_encrypt_ns_mean",
    "client_share_encrypt_ns_std",
    "client_sum_ns_mean",
    "client_sum_ns_std",
    "server_route_ns_mean",
    "server_route_ns_std",
    "server_reconstruct_ns_mean",
    "server_reconstruct_ns_std",
    "bytes_per_client_mean",
    "bytes_per_client_std",
    "baseline_client_ns",
    "baseline_server_ns",
    "baseline_bytes_per_client",
]

DESK_CLIENTS = [50, 100, 200]
DESK_VECTOR_SIZE = 10_000
PAPER_CLIENTS = [100, 200, 300, 400, 500]
PAPER_VECTOR_SIZE = 100_000
RATE_GRID = [0.0, 0.1, 0.2, 0.3]


@dataclass
class SweepSpec:
    clients: list
    vector_sizes: list
    dropout_rates: list
    corruption_rates: list
    iterations: int = 5
    seed_base: int = 0
    output: str = "sweep.csv"
    degenerate_privacy_ok: bool = False
    security_level: str = "production"

    def __post_init__(self):
        if self.iterations < 1:
            raise InvalidArgument("iterations must be >= 1")
        for lst, name in [
            (self.clients, "clients"),
            (self.vector_sizes, "vector sizes"),
            (self.dropout_rates, "dropout rates"),
            (self.corruption_rates, "corruption rates"),
        ]:
            if not lst:
                raise InvalidArgument(f"empty {name} axis")

    def grid(self):
        return list(
            itertools.product(
                self.clients, self.vector_sizes, self.dropout_rates, self.corruption_rates
            )
        )


def build_case_spec(case: int, args) -> SweepSpec:
    """The four preset evaluation cases, at desk scale or full scale."""
    ns = PAPER_CLIENTS if args.paper_scale else DESK_CLIENTS
    m = PAPER_VECTOR_SIZE if args.paper_scale else DESK_VECTOR_SIZE
    n_fixed = [max(ns)] if args.paper_scale else [100]
    m_sweep = [m // 2, m, 2 * m]
    if case == 1:
        axes = (ns, [m], [0.3], RATE_GRID)
    elif case == 2:
        axes = (n_fixed, m_sweep, [0.3], RATE_GRID)
    elif case == 3:
        axes = (ns, [m], RATE_GRID, [0.3])
    elif case == 4:
        axes = (n_fixed, m_sweep, RATE_GRID, [0.3])
    else:
        raise InvalidArgument(f"unknown case {case}")
    return SweepSpec(
        clients=list(axes[0]),
        vector_sizes=list(axes[1]),
        dropout_rates=list(axes[2]),
        corruption_rates=list(axes[3]),
        iterations=args.iterations,
        seed_base=args.seed,
        output=args.output,
        degenerate_privacy_ok=args.degenerate_privacy_ok,
    )


def _mean_std(values):
    if not values:
        return 0.0, 0.0
    if len(values) == 1:
        return float(values[0]), 0.0
    return statistics.fmean(values), statistics.stdev(values)


def run_point(spec: SweepSpec, index: int, n, m, rho, gamma) -> dict:
    """All iterations of one grid point; returns a CSV row dict."""
    row = {c: "" for c in CSV_COLUMNS}
    row.update(n=n, m=m, rho=rho, gamma=gamma, iterations=spec.iterations)
    try:
        params = plan_parameters(
            n, m, rho=rho, gamma=gamma,
            degenerate_privacy_ok=spec.degenerate_privacy_ok,
            security_level=spec.security_level,
        )
    except FssaError:
        row["feasible"] = "no"
        return row
    row.update(t=params.t, d=params.d, q=params.fp.q, chunk_count=params.chunk_count)
    row["feasible"] = "yes"

    keygen, share_enc, sumt, route, recon, bytes_pc = [], [], [], [], [], []
    # One discarded warmup iteration absorbs one-time costs (allocator growth,
    # BLAS initialization) so the measured iterations reflect steady state.
    for it in range(-1, spec.iterations):
        seed = spec.seed_base + index + max(it, 0)
        drop_count = math.floor(rho * n + 1e-9)
        # Dropouts happen after key advertisement, before share upload.
        dropped = random.Random(seed).sample(range(1, n + 1), drop_count)
        cfg = SimConfig(
            n=n,
            m=m,
            rho=rho,
            gamma=gamma,
            seed=seed,
            dropout_schedule={u: DropPoint.AFTER_ROUND0 for u in dropped},
            security_level=spec.security_level,
            degenerate_privacy_ok=spec.degenerate_privacy_ok,
        )
        report = run_simulation(cfg)
        if it < 0:
            continue
        survivors = [u for u, ph in report.client_phase_ns.items() if "sum" in ph]
        # Key establishment: Round-0 keypair generation plus Round-1 pairwise
        # key agreement.
        keygen.append(statistics.fmean(
            ph["keygen"] + ph.get("agree", 0)
            for ph in report.client_phase_ns.values()
            if "keygen" in ph
        ))
        share_enc.append(statistics.fmean(
            report.client_phase_ns[u]["share"] + report.client_phase_ns[u]["encrypt"]
            for u in survivors
        ))
        sumt.append(statistics.fmean(report.client_phase_ns[u]["sum"] for u in survivors))
        route.append(report.server_phase_ns.get("route", 0))
        recon.append(report.server_phase_ns.get("reconstruct", 0))
        bytes_pc.append(statistics.fmean(report.bytes_sent[u] for u in survivors))

    for col, vals in [
        ("client_keygen_ns", keygen),
        ("client_share_encrypt_ns", share_enc),
        ("client_sum_ns", sumt),
        ("server_route_ns", route),
        ("server_reconstruct_ns", recon),
        ("bytes_per_client", bytes_pc),
    ]:
        mean, std = _mean_std(vals)
        row[f"{col}_mean"] = mean
        row[f"{col}_std"] = std
    return row


def run_experiment_grid(spec: SweepSpec) -> list[dict]:
    rows = []
    for index, (n, m, rho, gamma) in enumerate(spec.grid()):
        rows.append(run_point(spec, index, n, m, rho, gamma))
    return rows


def emit_csv(rows, path):
    try:
        with open(path, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            for row in rows:
                writer.writerow(row)
    except OSError as e:
        raise IOError(f"cannot write {path}: {e}") from e


def _parse_list(text, cast):
    return [cast(tok) for tok in text.split(",") if tok.strip()]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fssa-bench",
        description="Sweep aggregation experiments and emit CSV metrics.",
    )
    parser.add_argument("--clients", type=str, default=None,
                        help="comma-separated client counts")
    parser.add_argument("--vector-size", type=str, default=None,
                        help="comma-separated input vector lengths")
    parser.add_argument("--dropout-rate", type=str, default=None,
                        help="comma-separated dropout rates in [0, 1)")
    parser.add_argument("--corruption-rate", type=str, default=None,
                        help="comma-separated corruption rates in [0, 1)")
    parser.add_argument("--iterations", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--case", type=str, default="custom",
                        choices=["1", "2", "3", "4", "custom"])
    parser.add_argument("--output", type=str, default="sweep.csv")
    parser.add_argument("--paper-scale", action="store_true")
    parser.add_argument("--degenerate-privacy-ok", action="store_true")
    args = parser.parse_args(argv)

    if args.case != "custom":
        spec = build_case_spec(int(args.case), args)
    else:
        spec = SweepSpec(
            clients=_parse_list(args.clients or "50,100,200", int),
            vector_sizes=_parse_list(
                args.vector_size
                or str(PAPER_VECTOR_SIZE if args.paper_scale else DESK_VECTOR_SIZE),
                int,
            ),
            dropout_rates=_parse_list(args.dropout_rate or "0.3", float),
            corruption_rates=_parse_list(args.corruption_rate or "0.3", float),
            iterations=args.iterations,
            seed_base=args.seed,
            output=args.output,
            degenerate_privacy_ok=args.degenerate_privacy_ok,
        )

    rows = run_experiment_grid(spec)
    emit_csv(rows, spec.output)
    infeasible = sum(1 for r in rows if r["feasible"] == "no")
    print(f"wrote {len(rows)} rows to {spec.output} ({infeasible} infeasible)")
    return 2 if infeasible else 0


if __name__ == "__main__":
    sys.exit(main())
