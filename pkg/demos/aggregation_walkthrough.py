"""One complete secure-aggregation run, narrated.

Eight clients each hold a small integer vector. The server learns only the
sum of the vectors of the clients that survived to Round 2 -- never any
individual vector -- and the run tolerates clients dropping out at every
round boundary.

Run:  python3 demos/aggregation_walkthrough.py
"""

from fssa.protocol import plan_parameters
from fssa.sim import DropPoint, SimConfig, run_simulation

n, m = 8, 12
inputs = [[(u * 10 + i) % 50 for i in range(m)] for u in range(1, n + 1)]

# Plan parameters for a 25% dropout budget and 12.5% corruption budget:
# t is the reconstruction threshold, d the packing width, q the field modulus.
params = plan_parameters(n, m, B=64, rho=0.25, gamma=0.125)
print(f"planned: t={params.t} (dropout budget {n - params.t}), d={params.d}, "
      f"q={params.fp.q}, chunks={params.chunk_count}")

# Client 3 advertises a key but never uploads shares; client 6 uploads shares
# but vanishes before sending its Round-2 sums. Both are within budget.
cfg = SimConfig(
    n=n, m=m, B=64, rho=0.25, gamma=0.125, seed=42,
    inputs=inputs,
    dropout_schedule={
        3: DropPoint.AFTER_ROUND0,
        6: DropPoint.AFTER_ROUND1_SEND,
    },
)
report = run_simulation(cfg)

print(f"status: {report.status}")
print(f"rosters: U1={report.roster_sizes['u1']} advertised keys, "
      f"U2={report.roster_sizes['u2']} uploaded shares, "
      f"U3={report.roster_sizes['u3']} sent sums")

# The aggregate is the exact sum over the clients that uploaded shares (U2):
# client 3 is excluded entirely; client 6's input is still included because
# its shares were uploaded and survive inside the other clients' sums.
expected = [sum(inputs[u - 1][i] for u in range(1, n + 1) if u != 3) for i in range(m)]
print(f"aggregate: {report.aggregate}")
print(f"expected : {expected}")
assert report.aggregate == expected

total_bytes = sum(report.bytes_sent.values())
print(f"client bytes on the wire: {total_bytes} total, "
      f"max per client {max(report.bytes_sent.values())}")
phases = report.server_phase_ns
print("server phases (us): " +
      ", ".join(f"{k} {v / 1e3:.0f}" for k, v in sorted(phases.items())))
