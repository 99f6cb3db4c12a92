"""Build Whitney covers of three domains and print their level statistics.

Run: python3 demos/01_whitney_cover.py
"""

from bvlab.cover import boundary_shadows, level_separation_violations, partition_of_unity, whitney_cover
from bvlab.space import DomainSpec, build_domain

for shape in ("unit-square", "disc", "l-shape"):
    disc = build_domain(DomainSpec(shape, 1 / 64))
    cover = boundary_shadows(whitney_cover(disc), disc)
    pou = partition_of_unity(cover, disc)
    print(f"{shape}: {cover.n_balls} balls, overlap {cover.overlap}, "
          f"separation violations {level_separation_violations(cover)}, "
          f"max r*Lip(phi) {pou.lipschitz_constant:.3f}")
    for level, count, overlap, dropped in cover.report_rows():
        print(f"  level {level:3d}: {count:5d} balls, max overlap {overlap}")
