"""Build the golden-ratio line quasicrystal and look at its gap structure.

The model set lives on a line: integer pairs (m, n) are kept when their
internal projection lands inside a half-open interval, and the survivors
are pushed to the physical line.  The resulting point set has exactly two
gap lengths whose ratio is the golden ratio, and the frequency of the two
gaps follows the same number.

Run from the repository root:

    python3 demos/fibonacci_patch.py
"""

from fractions import Fraction

from cutproject import (
    GammaBox,
    Scheme,
    Window,
    WindowPiece,
    generate_patch,
    golden_ratio,
)


def main():
    phi = golden_ratio()

    # One physical direction, one internal direction.  The internal row is
    # chosen so the lattice projects densely on both sides.
    scheme = Scheme([(phi, 1)], [(-1, phi)])

    # Acceptance interval: the unit cell of the lattice, projected to the
    # internal line, taken half open so every lattice point has exactly one
    # representative.
    cell = scheme.internal_coords((1, 1))[0]
    u = scheme.internal[0]
    window = Window([WindowPiece([[cell * c for c in u]], [Fraction(0) * c for c in u])])
    windowed = scheme.with_window(window)

    box = GammaBox([(-120, 120), (-120, 120)])
    patch = generate_patch(windowed, box)
    ys = sorted(float(pt.y[0]) for pt in patch.points)
    print(f"accepted {len(ys)} lattice points in a 241 x 241 block")

    gaps = [b - a for a, b in zip(ys, ys[1:])]
    short = min(gaps)
    long_ = max(gaps)
    word = "".join("L" if g > (short + long_) / 2 else "S" for g in gaps)

    print(f"shortest gap {short:.6f}, longest gap {long_:.6f}")
    print(f"gap ratio     {long_ / short:.6f}   (golden ratio {float(phi):.6f})")

    n_long = word.count("L")
    n_short = word.count("S")
    print(f"gap counts    {n_long} long, {n_short} short, "
          f"ratio {n_long / n_short:.6f}")

    # No two consecutive short gaps ever appear; long gaps come alone or in
    # pairs.  Print a slice of the word so the pattern is visible.
    print("word sample  ", word[:72])
    assert "SS" not in word
    assert "LLL" not in word
    print("no SS factor and no LLL factor in the whole word")


if __name__ == "__main__":
    main()
