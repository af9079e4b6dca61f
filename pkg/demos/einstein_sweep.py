"""
Deformed Einstein metrics: u, v and the integrability identity
==============================================================

"""

import numpy as np

from finsler_kahler import einstein as es

t = np.round(np.arange(1, 301) * 0.01, 2)
rows = es.sweep([1.0, 2.0, 5.0], [-2.0, -1.0, -0.5, 0.5, 1.0], t)
ok = [r for r in rows if r[6]]
print(len(rows), "grid points,", len(ok), "inside the domain")
print("max integrability defect", max(r[5] for r in ok))

# small energy density: v tends to -3c/(2A)
for c in (-2.0, 1.0):
    print("c =", c, "v(1e-8) =", es.v_function(es.EinsteinParams(2.0, c, 1e-8)), "limit", -3 * c / 4)

# the two printed bounds disagree for positive curvature
for t in (1.0, 2.0, 3.0, 5.0):
    print(t, es.domain_check(es.EinsteinParams(2.0, 1.0, t)).as_dict())
