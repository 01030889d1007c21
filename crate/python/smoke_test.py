"""Smoke test for the freebound extension module.

    pip install --no-build-isolation -e crates/python
    python3 python/smoke_test.py
"""

import math

import freebound as fb


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


p = fb.ModelParams(a=1.0, gamma=5.0, mu=0.1, P=1.0, R=2, N=16)
assert close(p.stationary_xi(), 1.0, 1e-15)
assert fb.pi_bounds(3.0, p) == (1.0, 3.0)

lin = fb.linearized_prediction(1, p)
assert close(lin["omega"], math.sqrt(5.0) * math.pi, 1e-12), lin

# Stationary state: nothing moves.
traj = fb.run(p, "stationary", t_end=0.5, output_dt=0.1)
assert traj.error is None
assert len(traj) == 6
energy = traj.column("total_energy")
assert max(energy) - min(energy) <= 1e-13, energy
snap = traj.snapshot(-1)
assert max(abs(v) for v in snap["v"]) <= 1e-14
assert all(close(x, 1.0, 1e-14) for x in snap["xi"])

# Low mode: only nonlinear transfer into damped modes dissipates, O(amp^4).
traj = fb.run(p, "single_mode", t_end=1.0, output_dt=0.25, k=1, amplitude=0.001)
assert max(abs(d) for d in traj.column("dissipation_cum")) <= 1e-11
assert max(abs(r) for r in traj.column("energy_residual")) <= 1e-8

# Fast and dense right-hand sides agree on a small state.
alpha = [0.01 / (k + 1) ** 2 for k in range(16)]
gtilde = [0.005 / (k + 1) ** 2 for k in range(16)]
fast = fb.assemble_rhs(p, alpha, gtilde, 1.1)
dense = fb.dense_rhs(p, alpha, gtilde, 1.1)
assert max(abs(x - y) for x, y in zip(fast[0], dense[0])) <= 1e-8

# Bad parameters surface as ValueError.
try:
    fb.ModelParams(P=0.0)
except ValueError:
    pass
else:
    raise AssertionError("P = 0 accepted")

cfg = """
schema_version = 1
[model]
a = 1.0
gamma = 5.0
mu = 0.1
P = 1.0
R = 2
N = 8
[time]
t_end = 0.2
output_dt = 0.1
[initial]
preset = "boundary_relax"
pi0 = 1.5
"""
traj = fb.run_config(cfg)
pis = traj.column("pi")
assert pis[0] == 1.5 and 1.0 < pis[-1] < 1.5, pis

print("python smoke test ok")
