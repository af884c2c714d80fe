"""Exact continued-fraction tools for Jarnik sets and BCF digit restrictions."""
from .cf import (
    BCF,
    RCF,
    ConvergentTable,
    DigitStream,
    bcf_convergents,
    bcf_digits,
    rcf_convergents,
    rcf_digits,
)
from .diophantine import GoodHits, MuReport, good_hits, mu_bcf_estimate, mu_rcf_estimate
from .dimension import (
    DimensionBracket,
    HyperbolicSystem,
    SeedSearchResult,
    dim_bounds,
    induce_parabolic,
    pressure_bounds,
    search_seed_words,
)
from .ifs import (
    FundamentalInterval,
    IfsFamily,
    apply_word,
    derivative_range,
    distortion,
    fundamental_interval,
    interval_diameter,
)
from .jarnik import (
    ConstructedStream,
    InsertionSchedule,
    build_stream,
    choose_alpha,
    holder_check,
    minimal_m_sequence,
    not2_positions,
    verify_good,
)
from .numeric import DyadicInterval, MobiusMatrix, QuadraticSurd, floor_exp, mobius_compose, surd
from .transform import bcf_to_rcf, rcf_to_bcf

__version__ = "0.1.0"
