"""Kagome-lattice tilings: height functions, flip chains, exact analysis,
perfect sampling and SVG rendering."""

from kagome.errors import (
    EnumerationCapExceeded,
    KagomeError,
    NotFlippable,
    NotTileable,
    OrderViolation,
)
from kagome.lattice import (
    HexCoord,
    Region,
    TriCoord,
    Vertex,
    incident_cells,
    make_lozenge_region,
    make_nonflat_lozenge,
    make_region,
    make_square_region,
    region_from_cells,
)
from kagome.tiling import (
    FlipInfo,
    TileType,
    Tiling,
    apply_flip,
    available_flips,
    boundary_heights,
    classify_tile,
    find_tiling,
    fish_count,
    flip_at,
    height_field,
    local_extrema,
    pointwise_leq,
    tile_type_counts,
    total_height,
    validate_tiling,
)
from kagome.chain import (
    GENERAL,
    RESTRAINED,
    ChainVariant,
    StepSeed,
    coupled_step,
    fire_interval,
    run,
    seed_at,
    step,
    weighted,
)
from kagome.exact import (
    LedgerResult,
    TilingGraph,
    diameter,
    enumerate_tilings,
    exact_mixing_time,
    exact_stationary,
    max_distinct_heights,
    path_coupling_ledger,
    transition_kernel,
)
from kagome.minimal import (
    contour_peel_minimal,
    greedy_ascent,
    greedy_descent,
    maximal_tiling,
    minimal_tiling,
)
from kagome.cftp import (
    BenchResult,
    CftpRun,
    benchmark_scaling,
    cftp_run,
    cftp_runs,
    cftp_sample,
    cftp_samples,
    forward_coupling_time,
)
from kagome.render import RenderStyle, render, render_prototiles, rendered_area
from kagome.serialize import (
    load_tiling,
    region_from_json,
    region_to_json,
    save_tiling,
    tiling_from_json,
    tiling_to_json,
)
from kagome.verify import VerifyReport, run_verification

__version__ = "0.1.0"

__all__ = [
    "EnumerationCapExceeded",
    "KagomeError",
    "NotFlippable",
    "NotTileable",
    "OrderViolation",
    "HexCoord",
    "Region",
    "TriCoord",
    "Vertex",
    "incident_cells",
    "make_lozenge_region",
    "make_nonflat_lozenge",
    "make_region",
    "make_square_region",
    "region_from_cells",
    "FlipInfo",
    "TileType",
    "Tiling",
    "apply_flip",
    "available_flips",
    "boundary_heights",
    "classify_tile",
    "find_tiling",
    "fish_count",
    "flip_at",
    "height_field",
    "local_extrema",
    "pointwise_leq",
    "tile_type_counts",
    "total_height",
    "validate_tiling",
    "GENERAL",
    "RESTRAINED",
    "ChainVariant",
    "StepSeed",
    "coupled_step",
    "fire_interval",
    "run",
    "seed_at",
    "step",
    "weighted",
    "LedgerResult",
    "TilingGraph",
    "diameter",
    "enumerate_tilings",
    "exact_mixing_time",
    "exact_stationary",
    "max_distinct_heights",
    "path_coupling_ledger",
    "transition_kernel",
    "contour_peel_minimal",
    "greedy_ascent",
    "greedy_descent",
    "maximal_tiling",
    "minimal_tiling",
    "BenchResult",
    "CftpRun",
    "benchmark_scaling",
    "cftp_run",
    "cftp_runs",
    "cftp_sample",
    "cftp_samples",
    "forward_coupling_time",
    "RenderStyle",
    "render",
    "render_prototiles",
    "rendered_area",
    "load_tiling",
    "region_from_json",
    "region_to_json",
    "save_tiling",
    "tiling_from_json",
    "tiling_to_json",
    "VerifyReport",
    "run_verification",
    "__version__",
]
