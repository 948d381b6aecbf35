"""G_P and G_Phi across entanglement strength for a fixed converter circuit.

G_P vanishes for product states and is extremal for maximal entanglement;
the Schmidt number K labels each row.
"""
import math

import numpy as np

from biphoton_holonomy import EntanglementParams, alpha_from_schmidt, g_phi, g_proj, schmidt_number
from biphoton_holonomy.circuit import Circuit, transit
from biphoton_holonomy.errors import UndefinedPhase
from biphoton_holonomy.modes import SpherePoint

eta, theta_i = math.pi / 6, math.pi / 3
proj = transit(Circuit.two_pi_converters(eta), SpherePoint(theta_i)).end_projections
print(f"eta={eta:.4f} theta_i={theta_i:.4f}")
print(f"{'K':>6} {'alpha':>8} {'beta':>8} {'G_P':>10} {'G_Phi':>10}")
for K in np.linspace(1, 2, 5):
    alpha = alpha_from_schmidt(K)
    for beta in (0.0, math.pi / 2, math.pi):
        prm = EntanglementParams(alpha, beta)
        try:
            gphi = f"{g_phi(prm, proj):10.6f}"
        except UndefinedPhase:
            gphi = f"{'undef':>10}"
        print(f"{schmidt_number(prm):6.3f} {alpha:8.4f} {beta:8.4f} {g_proj(prm, proj):10.6f} {gphi}")
