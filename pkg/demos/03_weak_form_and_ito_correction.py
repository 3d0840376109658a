"""
The weak formulation along a sample path
========================================

We test a stored trajectory against a sine test function. With midpoint
(Stratonovich) sums the residual of the weak identity vanishes as the step
shrinks. With left-point sums, which converge to the Itô integral, a gap
remains, and it matches the Itô correction term.
"""

# %%
import numpy as np

from sllg import (Anisotropy, InitialDatum, ModelParams, NoiseChannel, StepperConfig, TestFunction,
                  WienerPath, build_basis, integrate)
from sllg.diagnostics import ito_correction_pairing, weak_residual, weak_residual_terms

params = ModelParams(
    build_basis(2 * np.pi, 16), 1.0, 0.5, Anisotropy.uniaxial(0.5),
    (NoiseChannel("cosine", (1, 0, 0), 0.5, 1), NoiseChannel("constant", (0, 0.6, 0.8), 0.7)),
    InitialDatum("spherical", azimuth=(0.3, 0.8), polar=(1.2, 0.4)),
)
psi = TestFunction(mode=2, vector=(0, 1, 0))

# %%
# Residual against step size on one refined path
# -----------------------------------------------
for p in WienerPath.generate(64, 2, 2**-6, base_seed=1).hierarchy(3):
    rec = integrate(params, StepperConfig("implicit_midpoint", p.dt, 1.0), p, keep_states=True)
    print(f"dt = 2^{int(np.log2(p.dt))}: residual {weak_residual(rec.states, p, psi, params):.2e}")

# %%
# The left-point control
# ----------------------
left = weak_residual_terms(rec.states, p, psi, params, stratonovich="left")["residual"]
correction = ito_correction_pairing(rec.states, p.dt, psi, params)
print(f"left-point gap {left:.4e}   Itô correction term {correction:.4e}")
