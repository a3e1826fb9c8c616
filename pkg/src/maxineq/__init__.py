"""Index computations, Reeb spectra and spectral-invariant certificates.

The subpackages cover

* :mod:`maxineq.sympath`: Robbin-Salamon indices of symplectic paths;
* :mod:`maxineq.reeb_domains`: Reeb spectra of ellipsoids, toric domains
  and sphere disks;
* :mod:`maxineq.capacity`: the ratio invariant ``C(U)``;
* :mod:`maxineq.relative_spectrum`: relative spectra and hypothesis checks;
* :mod:`maxineq.diagrams`: radial profiles and deformation diagrams;
* :mod:`maxineq.cover_bounds`: Poisson bracket lower bounds for covers.
"""
from .capacity import (
    RatioReport,
    c_ratio,
    invariant_C_concave,
    invariant_C_ellipsoid,
    invariant_C_table,
    invariant_C_upper_convex,
    ishikawa_c0_ellipsoid,
    ishikawa_c0_sampled,
)
from .cover_bounds import CoverDescription, CoverSet, degree, pb_lower_bound_monotone, pb_lower_bound_rational, superheavy_complement
from .diagrams import (
    Diagram,
    DiagramLine,
    RadialProfile,
    brute_force_max_bound,
    build_contraction_diagram,
    build_killer_diagram,
    build_shrink_diagram,
    portability_bound,
    radial_action,
    radial_orbit_levels,
    radial_rs_index,
    slow_killer_profile,
    track_spectral_invariant,
)
from .errors import MaxIneqError
from .halfint import HalfInt
from .reeb_domains import (
    Ellipsoid,
    ReebOrbitRecord,
    SphereDisk,
    SpectrumTable,
    ToricProfile,
    concave_toric_surrogates,
    convex_toric_surrogates,
    ellipsoid_cz,
    ellipsoid_linearized_path,
    ellipsoid_orbits,
    explicit_table,
    simplex_inclusion_capacity,
)
from .relative_spectrum import (
    AmbientModel,
    Certificate,
    RelativeSpectrum,
    SpectrumWindow,
    check_extendable,
    check_killer_condition,
    check_neg_monotone,
    check_pos_monotone,
    check_rational_lattice,
    check_sphere,
    max_inequality_verdict,
    relative_n_spectrum,
    relative_spectrum_degenerate,
    spec_n_zero,
)
from .sympath import (
    SymmetricGenerator,
    SymplecticPath,
    concatenate,
    conjugate,
    direct_sum,
    find_crossings,
    integrate_path,
    reverse,
    rotation_path,
    rs_index,
    shear_path,
)

__version__ = "0.1.0"
