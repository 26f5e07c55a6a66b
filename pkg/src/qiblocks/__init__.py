"""Combinatorics of blocks of finite reductive groups.

The package is organized bottom-up:

``rootsystem``
    crystallographic root systems of rank <= 8, closed subsystems,
    full-rank subsystem classes, fundamental groups.
``weyl``
    Weyl groups as permutation groups of the roots: stabilizer chains,
    orbits, normalizers, twisted classes, invariant-degree recovery.
``cyclotomic``
    exact cyclotomic-polynomial factorizations and generic orders of
    finite reductive groups.
``torsion``
    torsion points of a maximal torus, their centralizers and the
    classification of quasi-isolated semisimple classes.
``levi``
    twisted Levi subgroups, e-split tests and enumeration, relative
    Weyl groups, torsion-centralizer diagnostics.
``unipotent``
    unipotent character degrees (type A hook formulas, curated
    cuspidal data), e-cuspidality, Jordan-correspondence degrees.
``blocks``
    block-table rows: defect orders, abelian-defect flags, table
    generation and verification against the bundled reference tables.
``reference``
    the bundled, checksummed reference tables.
``cli``
    command-line entry point.
"""

__version__ = "0.1.0"
