"""
A small size/power study
========================

run_asp simulates null and alternative data sets, runs the bootstrap test
on each and turns the two sets of p-values into an achieved size-power
curve. This is a scaled-down version of the change-point study; pass a
pool's ``map`` as ``map_fn`` to spread repetitions over processes.
"""

from concurrent.futures import ProcessPoolExecutor

from tftboot.engine import SchemeConfig
from tftboot.simlab import ProcessSpec, run_asp
from tftboot.spectral import Kernel

h0 = ProcessSpec("ar1", a=-0.5, innovation="centered-exponential")
h1 = ProcessSpec("ar1", a=-0.5, innovation="centered-exponential", change_at=50, shift=0.6)
config = SchemeConfig("WB", Kernel("bpk", 0.2))

if __name__ == "__main__":
    with ProcessPoolExecutor(2) as pool:
        curve = run_asp(h0, h1, "cpt", config, T=100, R=100, B=199, seed=2, map_fn=pool.map)
    for level in (0.01, 0.05, 0.10):
        size, power = curve.at(level)
        print(f"nominal {level:.2f}: size {size:.2f}  size-corrected power {power:.2f}")
