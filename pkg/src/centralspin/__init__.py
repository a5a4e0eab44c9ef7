"""Simulator and analysis toolkit for periodically kicked homogeneous central-spin models."""

__version__ = "0.1.0"

from .operators import (  # noqa: E402
    ModelParams,
    NumericalError,
    SectorBasis,
    Sigma,
    build_floquet,
    build_h0,
    build_pulse,
    build_sector,
    collective_ops,
)
from .dynamics import (  # noqa: E402
    PhaseGrid,
    StroboscopicSeries,
    evolve,
    initial_state,
    order_parameter,
    phase_sweep,
    spectral_propagator,
)
from .krylov import (  # noqa: E402
    OverlapMap,
    effective_dimension,
    floquet_hamiltonian_krylov,
    fragmentation_census,
    krylov_subspace,
    overlap_map,
)
from .scars import (  # noqa: E402
    clebsch_gordan,
    dicke_bipartition_entropy,
    floquet_eigensystem,
    reduce_central,
    scar_scatter,
)
from .fullbasis import (  # noqa: E402
    DisorderSpec,
    FullBasisModel,
    disorder_order_parameter,
    full_floquet,
    sector_embedding,
)
