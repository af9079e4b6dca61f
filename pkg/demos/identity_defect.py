"""
Where the energy identity breaks
================================

Along a solution of the first family of Euler-Lagrange equations the
horizontal part of i_xi Phi_L - dE_L vanishes. The vertical part is the
residual of the second family and does not.
"""

import numpy as np

from finsler_kahler import dynamics as dy
from finsler_kahler import finsler as fs
from finsler_kahler import kahler as kh
from finsler_kahler import verify as vf

F = fs.euclidean(2)
m = kh.ModelParams(1.0)
free = dy.lagrangian_standard([1.0, 1.0], 0.0, lambda x: x[0])

p = fs.PhasePoint([0.0, 0.0], [1.0, 0.0])
ydot = dy.el_rhs(free, F, p, m)
print("free particle ydot", ydot)
res = dy.lagrangian_identity_residual(free, F, p, ydot, m)
print("identity residual (horizontal | vertical)", res.matrix)

# same split on a curved metric with a potential
L = vf.sample_lagrangian(2)
for F in (fs.polar(), fs.randers([0.3, -0.2])):
    p = fs.PhasePoint([1.2, 0.4], [0.7, -0.3])
    r = dy.lagrangian_identity_residual(L, F, p, dy.el_rhs(L, F, p, m), m)
    print(F.kind, "residual", np.round(r.matrix, 12))
