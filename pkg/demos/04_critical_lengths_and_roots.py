"""Lengths where the uncontrolled equation cannot decay, and where its characteristic cubic degenerates.

For alpha^2 + 3 beta delta > 0 there is a two-parameter family of interval
lengths with an eigenvalue on the imaginary axis.  L = pi is one of them for
beta=1, alpha=2, delta=8, and the eigenvalue there is exactly zero, which is
the constant solution used in the controller demo.
"""

import numpy as np

from hls_backstepping import (
    REFERENCE_PARAMS,
    KernelParams,
    critical_length,
    discriminant,
    eigenvalue_on_axis,
    hkl,
    is_critical,
    root_landmarks,
)
from hls_backstepping.spectral import repeated_root_certificate, stationary_residual

p = REFERENCE_PARAMS
print(f"alpha^2 + 3 beta delta = {discriminant(p):g}")
print("\ncritical lengths L(k, l):")
print("      " + "".join(f"{l:>9d}" for l in range(1, 6)))
for k in range(1, 6):
    print(f"k={k:<3d} " + "".join(f"{critical_length(p, k, l):9.4f}" for l in range(1, 6)))

print(f"\nL = pi is critical for (k, l) = {is_critical(p, np.pi)}")
print(f"eigenvalue on the imaginary axis there: {eigenvalue_on_axis(p, 1, 2)}")
print(f"residual of 3 - exp(4ix) - 2 exp(-2ix) in the stationary equation: {stationary_residual(p)}")

# All imaginary-axis eigenvalues lie between the two repeated-root points,
# because the shape factor H(k, l) stays strictly inside (-1, 1).
lm = root_landmarks(p)
s1, s2 = lm.points
ev = [eigenvalue_on_axis(p, k, l).imag for k in range(1, 21) for l in range(1, 21)]
print(f"\nrepeated-root points: s1+ = {s1.imag:.6f}i, s2+ = {s2.imag:.6f}i")
print(f"axis eigenvalues for k, l <= 20 span [{min(ev):.4f}, {max(ev):.4f}]i")
print(f"H(k, l) range for k, l <= 50: "
      f"[{min(hkl(k, l) for k in range(1, 51) for l in range(1, 51)):.4f}, "
      f"{max(hkl(k, l) for k in range(1, 51) for l in range(1, 51)):.4f}]")

# The landmarks in all three regimes are exact: the cubic and its
# derivative vanish at the double root to roundoff.
for q in (p, KernelParams(1.0, 3.0, -3.0, 0.0, 1.0), KernelParams(1.0, 1.0, -2.0, 0.0, 1.0)):
    lm = root_landmarks(q)
    pts = ", ".join(f"{k}={complex(v):.4f}" for k, v in lm.report().items() if k != "regime")
    print(f"regime {lm.report()['regime']}: {pts}; certificate {repeated_root_certificate(q):.1e}")
