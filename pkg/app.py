import warnings

from stark.acshift.core import classify_regime, gamma_physical, light_shift
from stark.acshift.config import DimensionlessParams
from stark.acshift.errors import AdiabaticRegimeWarning
from stark.acshift.units import rubidium_87_atom, rubidium_87_example


def main():
    atom = rubidium_87_atom()
    print(f"dipole |d| = {atom.dipole_d:.4e} C m")

    # Δ/Ω = 4 sits below the adiabatic ratio; the example keeps it anyway
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AdiabaticRegimeWarning)
        for linewidth in (1e3, 1e6, 1e8):
            p = rubidium_87_example(linewidth=linewidth)
            d = DimensionlessParams.from_physical(p)
            label = classify_regime(d)
            gamma = gamma_physical(5.0 / p.gamma_m, p)
            print(f"lambda = {linewidth:.0e} rad/s: Q = {d.q:.3e}, R = {d.r:.3e}, {label}, "
                  f"Gamma(5/Gamma_M) = {gamma:.4g}")

    print(f"light shift = {light_shift(1e7, 4e7):.4e} rad/s, Gamma_M = {p.gamma_m:.4e} rad/s")


if __name__ == "__main__":
    main()
