"""Split the Penrose acceptance window into its ten vertex classes.

The five-grid construction keeps a lattice point of Z^5 when its internal
shadow falls inside a rhombic icosahedron.  Splitting that solid into ten
half-open parallelotopes sorts every accepted vertex into exactly one
class.  Each class is itself a quasiperiodic point set with its own density,
and the ten densities add up to the density of the whole tiling's vertex
set.

Run from the repository root:

    python3 demos/penrose_pieces.py
"""

import math
from collections import Counter

from cutproject import (
    build_penrose,
    decompose_window,
    format_scalar,
    piece_patch,
    sine_scale,
    true_plane_point,
    zonotope_volume,
)


def main():
    pz = build_penrose()
    pack = decompose_window(pz)
    total = zonotope_volume(pz.generators)
    print(f"window volume {format_scalar(total)} "
          f"split into {len(pack.pieces)} half-open pieces\n")

    print("piece  generator subset   grid density   share")
    kappa_sum = None
    for pc in pack.pieces:
        share = float(pc.kappa_grid) / float(pack.kappa_grid_total)
        subset = "".join(str(i) for i in pc.subset)
        print(f"  {pc.index:>2}    {{{subset}}}            "
              f"{float(pc.kappa_grid):.6f}     {share:6.1%}")
        kappa_sum = pc.kappa_grid if kappa_sum is None else kappa_sum + pc.kappa_grid
    print(f"\ndensity total {format_scalar(kappa_sum)} "
          f"= {float(pack.kappa_grid_total):.6f} per unit grid cell")

    # Generate a small patch of one thin and one fat class and compare the
    # observed point counts with the predicted densities.
    radius = 12
    s = float(sine_scale())
    area = math.pi * radius * radius
    print(f"\npatches of physical radius {radius} (disk area {area:.0f}):")
    counts = Counter()
    for pc in (pack.pieces[0], pack.pieces[5]):
        patch = piece_patch(pc, radius)
        kappa_plane = float(pc.kappa_grid) * 5 / (2 * s)
        expect = kappa_plane * area
        counts[pc.index] = len(patch.points)
        print(f"  piece {pc.index}: {len(patch.points):>4} vertices, "
              f"predicted {expect:.0f}")
        sample = patch.points[0]
        x, y = (float(c) for c in true_plane_point(sample.y))
        # tiling coordinates run sqrt(5/2) larger than the ball metric
        dist = math.sqrt(0.4 * (x * x + y * y))
        print(f"           first vertex at ({x:+.3f}, {y:+.3f}), "
              f"distance {dist:.2f} from center")

    ratio = counts[pack.pieces[5].index] / counts[pack.pieces[0].index]
    predicted = float(pack.pieces[5].kappa_grid) / float(pack.pieces[0].kappa_grid)
    print(f"\ncount ratio piece5/piece0: observed {ratio:.3f}, "
          f"predicted {predicted:.3f}")


if __name__ == "__main__":
    main()
