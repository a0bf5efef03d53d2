"""Working points of the fabricated poling periods.

For each period the solver finds the one pump wavelength, signal centre and
temperature at which the group velocities of signal and idler match, their
dispersion cancels and the process is phase matched. Below that pump there
are two group-velocity-matched signals, above it none.

    python3 demos/design_scan.py
"""

import time

from qpmpdc.dispersion import load_model, omega_to_wavelength
from qpmpdc.errors import NoRootInBracket
from qpmpdc.phasematch import WaveguideSpec
from qpmpdc.workingpoint import gv_matched_signals, solve_design_point

model = load_model()
print(f"model {model.name} {model.version}: {model.source}\n")

print(" period   pump nm     T C   signal nm  idler nm   |gv| s/m   |gvd| s^2/m  time")
points = {}
for period in (5.8, 6.0, 6.3):
    t0 = time.perf_counter()
    p = solve_design_point(model, WaveguideSpec(length_mm=40.0, poling_period_um=period))
    points[period] = p
    print(f"{period:6.1f}  {p.pump_nm:8.3f}  {p.temperature_c:7.2f}  {p.signal_nm:9.2f}  {p.idler_nm:8.1f}"
          f"  {abs(p.gv_residual):9.1e}  {abs(p.gvd_residual):10.1e}  {time.perf_counter() - t0:4.1f} s")

# the design pump is where the two GV-matched signals merge; exactly there
# the GV term only touches zero, so a sign-change scan reports no root
p = points[6.0]
print(f"\nGV-matched signals at {p.temperature_c:.2f} C around the 6.0 um design pump:")
for shift in (-2.0, -0.5, -0.05, 0.0, 0.5):
    pump = p.pump_nm + shift
    try:
        roots = gv_matched_signals(model, pump, p.temperature_c)
        text = ", ".join(f"{omega_to_wavelength(ws):.2f}" for ws, _ in roots) + " nm"
    except NoRootInBracket:
        text = "none"
    print(f"  pump {pump:8.3f} nm ({shift:+.2f}): {text}")
