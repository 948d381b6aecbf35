"""Shape a pump so down-conversion emits a chosen first-order bi-photon state.

Shows the three pump coefficients, the leading spectrum entries and the
recovered first-order block.
"""
import math

import numpy as np

from biphoton_holonomy import EntanglementParams, pump_from_target, spectrum_from_pump, target_from_entanglement
from biphoton_holonomy.pump import first_order_block

prm, theta_i = EntanglementParams(math.pi / 2, 0.0), 0.6 * math.pi / 2
target = target_from_entanglement(prm, theta_i)
pump = pump_from_target(target)
print("pump coefficients:", {ell: complex(np.round(pump[ell], 6)) for ell in (-2, 0, 2)})

spectrum = spectrum_from_pump(pump)
probs = {key: abs(c) ** 2 / spectrum.normalization for key, c in spectrum.entries.items()}
print("largest entries (l1, l2): probability")
for key in sorted(probs, key=probs.get, reverse=True)[:8]:
    print(f"  {key}: {probs[key]:.4f}")

back = first_order_block(spectrum)
print("target  :", np.round(target.as_array(), 6))
print("recovered:", np.round(back.as_array(), 6))
