"""The frequency-domain wavelet family: orthonormality, the scale
selection rule, and the translation-tail envelope that justifies
truncating the index set.

Run:  python3 demos/demo_wavelets.py
"""

import numpy as np

from disorderlab import evolution as evo
from disorderlab import meyer
from disorderlab.grid import GridSpec

# The mother wavelet lives on the frequency annulus [2pi/3, 8pi/3];
# its dyadic dilates tile every nonzero frequency exactly once.
xi = np.linspace(1.0, 30.0, 400)
tiles = sum(np.abs(meyer.meyer_wavelet_hat(2.0 ** -j * xi)) ** 2
            for j in range(-6, 8))
print(f"partition of unity across scales: max deviation "
      f"{np.max(np.abs(tiles - 1.0)):.2e}")

# Orthonormality holds to quadrature accuracy across scales, translates
# and (in d>1) sign patterns.
indices = [meyer.WaveletIndex((1,), n1, (m,))
           for n1 in (-1, 0, 1) for m in range(-4, 5)]
gram = meyer.gram_matrix(indices)
print(f"gram deviation from identity over {len(indices)} indices: "
      f"{np.max(np.abs(gram - np.eye(len(indices)))):.2e}")

# A band-limited packet only meets finitely many scales: outside that
# window the overlap is exactly zero, no quadrature involved.
grid = GridSpec(1, 40.0, 256, "periodic")
f = evo.make_test_function(grid, [3.0], 1.0)
window = meyer.admissible_scales((1,), f)
print(f"packet band {f.support_interval(0)} meets scales {window}")
outside = meyer.WaveletIndex((1,), max(window) + 1, (0,))
print(f"overlap one scale above the window: "
      f"{meyer.overlap(outside, f, 1.0)} (exact zero)")

# Translates far from the packet contribute little: the overlaps fall
# inside a C/(1+m^2) envelope, which bounds the truncation error of the
# finite index family.
ms = np.array([4, 8, 16, 32, 64, 128])
A = np.array([abs(meyer.overlap(meyer.WaveletIndex((1,), 0, (int(m),)),
                                f, 1.0)) for m in ms])
C = np.max(A * (1.0 + ms.astype(float) ** 2))
for m, a in zip(ms, A):
    print(f"  |<Phi_(0,{m:3d}), e^(iDt) f>| = {a:.3e}   "
          f"envelope C/(1+m^2) = {C / (1 + m ** 2):.3e}")
