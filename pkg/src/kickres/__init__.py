"""Resonant dynamics of coupled kicked rotors and kicked tops.

The package splits into a simulation side (split-operator rotor and
collective-spin engines) and an analytic side (factorized resonant
evolution, wavepacket moment laws, linear-entropy closed forms, detuning
robustness diagnostics).  The two sides are deliberately independent so
each can check the other.
"""

from .errors import (
    KickresError,
    ResourceCapError,
    TruncationError,
    ValidationError,
)
from .potential import (
    FourierTerm,
    PotentialSpec,
    ResonancePlan,
    SymmetryClass,
    accumulated_potential,
    classify,
    cosine_term,
    decompose,
    effective_potential,
    satisfies_resonance_symmetry,
    shifted,
    sine_term,
    split_interaction,
    term_parity,
    term_text,
)
from .rotor_engine import (
    MomentRecord,
    RotorEngine,
    RotorLattice,
    RotorState,
    displacement_stats,
    measure_moments,
)
from .entanglement import (
    BipartitionSpec,
    EntropyRecord,
    entropy_series,
    epsilon_second_moment,
    product_basis_purity,
    schmidt_purity,
)
from .top_engine import (
    FieldTerm,
    TopEngine,
    TopKickStats,
    TopSpec,
    TopState,
    build_spin_ops,
    predict_jz_moments,
    saturation_time,
    top_entropy_series,
    top_params,
    top_purity,
)
from .predictor import (
    EpsilonMoments,
    ProductAngleDensity,
    RegimeReport,
    RobustnessResult,
    ScalingFit,
    SlinEstimate,
    WavepacketParams,
    agreement_time,
    classify_regimes,
    crossover_time,
    deviation_series,
    epsilon_moments,
    predict_moments,
    scaling_fit,
    slin_exact,
    wavepacket_params,
)

__version__ = "0.1.0"

__all__ = [
    "KickresError",
    "ValidationError",
    "TruncationError",
    "ResourceCapError",
    "FourierTerm",
    "PotentialSpec",
    "ResonancePlan",
    "SymmetryClass",
    "accumulated_potential",
    "classify",
    "cosine_term",
    "decompose",
    "effective_potential",
    "satisfies_resonance_symmetry",
    "shifted",
    "sine_term",
    "split_interaction",
    "term_parity",
    "term_text",
    "RotorLattice",
    "RotorState",
    "RotorEngine",
    "MomentRecord",
    "measure_moments",
    "displacement_stats",
    "BipartitionSpec",
    "EntropyRecord",
    "entropy_series",
    "epsilon_second_moment",
    "product_basis_purity",
    "schmidt_purity",
    "FieldTerm",
    "TopEngine",
    "TopKickStats",
    "TopSpec",
    "TopState",
    "build_spin_ops",
    "predict_jz_moments",
    "saturation_time",
    "top_entropy_series",
    "top_params",
    "top_purity",
    "EpsilonMoments",
    "ProductAngleDensity",
    "RegimeReport",
    "RobustnessResult",
    "ScalingFit",
    "SlinEstimate",
    "WavepacketParams",
    "agreement_time",
    "classify_regimes",
    "crossover_time",
    "deviation_series",
    "epsilon_moments",
    "predict_moments",
    "scaling_fit",
    "slin_exact",
    "wavepacket_params",
    "__version__",
]
