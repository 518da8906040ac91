"""foamlab: foam RVE generation, frame-FE homogenization, fuzzy beam bending,
and image+label dataset export."""

from .beam import (
    BeamScenario,
    DeflectionGrid,
    SectionStiffness,
    closed_form_homogeneous,
    closed_form_layered,
    fuzzy_sweep,
    paper_scenario,
    ritz_deflection,
    ritz_solution,
    section_stiffnesses,
)
from .dataset import (
    DatasetConfig,
    DatasetManifest,
    build_dataset,
    label_envelope_check,
    load_manifest,
    split_assign,
)
from .framefem import (
    FrameModel,
    SolveResult,
    WallMaterial,
    element_stiffness,
    homogenized_modulus,
    mesh_geometry,
    solve_compression,
    solve_linear,
)
from .fuzzy import FoamConstants, FuzzyTriangular, eval_fuzzy, foam_constants, make_fuzzy
from .rvegen import (
    RveConfig,
    RveGeometry,
    apply_concavity,
    estimate_cell_count,
    generate_rve,
    load_geometry,
    rasterize,
    regular_lattice,
    save_png,
    wall_thickness,
)

__version__ = "0.1.0"
