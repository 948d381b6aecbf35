"""Two pi-mode converters with the second turned by eta.

Prints the end-point projections of the antipodal pair next to their closed
forms, and the phase split at the end of the path.
"""
import math

import numpy as np

from biphoton_holonomy.circuit import Circuit, oracle_projections, transit
from biphoton_holonomy.holonomy import geometric_phase
from biphoton_holonomy.modes import SpherePoint

theta_i = math.pi / 4
for eta in np.linspace(0, math.pi / 2, 5):
    rec = transit(Circuit.two_pi_converters(eta), SpherePoint(theta_i))
    p, o = rec.end_projections, oracle_projections(eta, theta_i)
    phases = geometric_phase(rec.path_a, tol=1e-11)
    print(f"eta={eta:5.3f}  p_aa={p.p_aa.real:+.6f}{p.p_aa.imag:+.6f}j  "
          f"|dp_aa|={abs(p.p_aa - o.p_aa):.1e}  p_ab^2={(p.p_ab ** 2).real:+.6f}  "
          f"tot={phases.total:+.4f} dyn={phases.dynamic:+.4f} geo={phases.geometric:+.4f}")
