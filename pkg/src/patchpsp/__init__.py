"""Affine-subspace patch clustering and projection denoising toolkit."""

from .affinity_clustering import (
    AffinityMatrix,
    Clustering,
    CoefMatrix,
    EigensolverError,
    build_affinity,
    elbow_estimate_k,
    kmeans,
    spectral_cluster,
)
from .baselines_metrics import (
    NlmConfig,
    NoiseSpec,
    corrupt,
    estimate_noise_sigma,
    nlm_denoise,
    psnr,
)
from .patch_grid import Image, PatchGrid, PatchMatrix, TilingError, extract_patches, reassemble
from .pgm import PgmError, read_pgm, write_pgm
from .psp_denoiser import (
    AffineSubspace,
    DimPolicy,
    PipelineConfig,
    PipelineResult,
    SubspaceModel,
    closest_subspace,
    denoise_pipeline,
    fit_subspaces,
    psp_denoise_image,
    psp_denoise_patch,
)
from .solvers import (
    CoefVector,
    SolverConfig,
    SolverConvergenceError,
    project_l2_ball,
    project_simplex_cap,
    self_representation,
    solve_bpdn,
    solve_nn_lasso,
    solve_nn_lasso_gridsearch,
    solve_nnc_lasso,
)

__version__ = "0.1.0"

__all__ = [
    "AffineSubspace",
    "AffinityMatrix",
    "Clustering",
    "CoefMatrix",
    "CoefVector",
    "DimPolicy",
    "EigensolverError",
    "Image",
    "NlmConfig",
    "NoiseSpec",
    "PatchGrid",
    "PatchMatrix",
    "PgmError",
    "PipelineConfig",
    "PipelineResult",
    "SolverConfig",
    "SolverConvergenceError",
    "SubspaceModel",
    "TilingError",
    "build_affinity",
    "closest_subspace",
    "corrupt",
    "denoise_pipeline",
    "elbow_estimate_k",
    "estimate_noise_sigma",
    "extract_patches",
    "fit_subspaces",
    "kmeans",
    "nlm_denoise",
    "project_l2_ball",
    "project_simplex_cap",
    "psnr",
    "psp_denoise_image",
    "psp_denoise_patch",
    "read_pgm",
    "reassemble",
    "self_representation",
    "solve_bpdn",
    "solve_nn_lasso",
    "solve_nn_lasso_gridsearch",
    "solve_nnc_lasso",
    "spectral_cluster",
    "write_pgm",
]
