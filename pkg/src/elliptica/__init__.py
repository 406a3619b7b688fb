"""Numerical laboratory for the semilinear equation Delta u = W'(u).

Submodules:
    potential   piecewise double-well potentials and their constructions
    radial      radial ODE shooting, heteroclinics, decay and identity checks
    elliptic2d  masked finite-difference solver and barrier machinery
    yamabe      bubble-tower approximate solutions and certificates
    cli         experiment runner (`elliptica run ...`)
"""

from .elliptic2d import (
    DomainGrid,
    Field,
    IterationLog,
    domain_ball_stats,
    dumbbell_subsolution,
    dumbbell_supersolution,
    energy_minimize_ball,
    exterior_solve,
    laplacian_5pt,
    monotone_iteration,
    radial_envelope,
    solve_dumbbell,
)
from .potential import (
    CubicRoots,
    GrowthReport,
    Piece,
    Potential,
    EntireDecayingConstruction,
    build_obstruction_potential,
    build_entire_decaying_potential,
    cahn_hilliard,
    ch_roots,
    check_growth,
    double_well,
    extend_even_double_well,
    pohozaev_combination,
    power_well,
    singular_amplitude,
    truncate_potential,
    validate,
)
from .radial import (
    RadialProfile,
    ShootClass,
    angular_profile,
    decay_exponent,
    heteroclinic,
    integrate_radial,
    limit_classifier,
    pohozaev_residual,
    shoot_batch,
    shoot_entire,
    singular_power_solution,
    superharmonic_lower_bound,
)
from .yamabe import (
    BubbleTower,
    bubble,
    build_tower_potential,
    nonradiality_measure,
    positivity_scan,
    tower_eval,
    yamabe_residual,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
