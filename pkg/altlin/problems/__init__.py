"""
Problem instances: lasso, wavelet deblurring, robust PCA and matrix completion
"""

from altlin.problems.completion import CompletionProblem, CompletionSpec, generate_completion
from altlin.problems.deblur import DeblurInstance, DeblurOperator, deblur_handles, random_deblur, synthetic_image
from altlin.problems.lasso import LassoInstance, lasso_handles, random_lasso
from altlin.problems.rng import Lcg64
from altlin.problems.rpca import (
    RelativeErrors,
    RpcaInstance,
    RpcaResult,
    default_mu0,
    random_rpca,
    relative_errors,
    rpca_handles,
    rpca_x_subproblem,
    rpca_y_subproblem,
    run_rpca,
)

__all__ = [
    "CompletionProblem",
    "CompletionSpec",
    "DeblurInstance",
    "DeblurOperator",
    "LassoInstance",
    "Lcg64",
    "RelativeErrors",
    "RpcaInstance",
    "RpcaResult",
    "deblur_handles",
    "default_mu0",
    "generate_completion",
    "lasso_handles",
    "random_deblur",
    "random_lasso",
    "random_rpca",
    "relative_errors",
    "rpca_handles",
    "rpca_x_subproblem",
    "rpca_y_subproblem",
    "run_rpca",
    "synthetic_image",
]
