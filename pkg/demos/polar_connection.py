"""
The polar plane: connection, lifts and the complex structure
============================================================

"""

import numpy as np

from finsler_kahler import connection as cn
from finsler_kahler import finsler as fs
from finsler_kahler import kahler as kh

F = fs.polar()  # g = diag(1, r^2)
p = fs.PhasePoint([2.0, 0.0], [0.0, 1.0])

print("norm", F.norm(p))
print("metric tensor\n", fs.metric_tensor(F, p).g)
print("spray", cn.spray_coefficients(F, p).G)

# N^i_j = Gamma^i_jk y^k, compare with the Christoffel symbols directly
N = cn.nonlinear_connection(F, p).N
Gamma = cn.levi_civita(lambda x: np.diag([1.0, x[0] ** 2]), p.x)
print("N\n", N)
print("Gamma y\n", Gamma @ p.y)

# homogeneous lift and its almost complex structure
m = kh.ModelParams(1.5)
G = kh.homogeneous_lift(F, p, m)
J = kh.homogeneous_almost_complex(F, p, m)
print("lift\n", G.matrix)
print("J^2 + I, max entry", np.abs(J.matrix @ J.matrix + np.eye(4)).max())
print("hermitian defect", kh.hermitian_defect(F, p, m))

# a Randers metric is not reversible
R = fs.randers([0.4, 0.0])
for y in ([1.0, 0.0], [-1.0, 0.0]):
    print("Randers norm of", y, R.norm(fs.PhasePoint([0.0, 0.0], y)))
