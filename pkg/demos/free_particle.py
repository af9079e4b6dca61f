"""
Free particle and projectile on the flat plane
==============================================

"""

import numpy as np

from finsler_kahler import finsler as fs
from finsler_kahler import kahler as kh
from finsler_kahler import verify as vf
from finsler_kahler.dynamics import lagrangian_standard
from finsler_kahler.integrate import IntegratorConfig, integrate, lagrangian_flow

F = fs.euclidean(2)
m = kh.ModelParams(1.0)

# no potential: the flow is a straight line
free = lagrangian_standard([1.0, 1.0], 0.0, lambda x: x[1])
tr = integrate(lagrangian_flow(free, F, m), fs.PhasePoint([0.0, 0.0], [1.0, 0.5]), (0.0, 2.0))
print("free particle end point", tr.x[-1], "velocity", tr.y[-1])
print("max deviation from the line", np.abs(tr.x - tr.t[:, None] * [1.0, 0.5]).max())

# with gravity on x2 the model gives a constant fiber acceleration
flow = lagrangian_flow(vf.projectile_lagrangian(2), F, m)
p0 = fs.PhasePoint([0.0, 0.0], [3.0, 4.0])
print("rhs at the start", flow.rhs(p0.z))

# doubling a doubles the acceleration
flow2 = lagrangian_flow(vf.projectile_lagrangian(2), F, kh.ModelParams(2.0))
print("rhs with a = 2  ", flow2.rhs(p0.z))

# RK4 order check: endpoint differences shrink by 2^4
print("Richardson ratio", vf.richardson_ratio(flow, p0, 1.0, 0.1))

tr = integrate(flow, p0, (0.0, 1.0), IntegratorConfig("rk4-fixed", step=0.05))
print(tr.to_csv()[:300])
