"""Distance kernel, normalizing constants, intrinsic volumes and priors."""
from .volumes import (IntrinsicVolumes, intrinsic_volumes_l2_ball, intrinsic_volumes_mc,
                      intrinsic_volumes_point, kappa, tube_volume)
from .normalizers import (boundary_area, log_distance_kernel, log_scaled_normalizer,
                          normalizer_quadrature, normalizer_scaled_family, shell_cdf,
                          steiner_normalizer)
from .priors import (Exponential, GammaPrior, HalfCauchy, InvGaussian, Normal, PriorSpec,
                     grad_log_prior, inv_gaussian_kernel, inv_gaussian_param_grad, log_prior,
                     sample_prior)


def log_posterior(model, theta, data=None):
    """log prior - n log m - sum_i dist_i^2 / sigma at natural-scale parameters.

    ``theta`` is a mapping of parameter name to value; ``data`` overrides the
    model's dataset when given.
    """
    return model.log_posterior(theta, data)


__all__ = [n for n in dir() if not n.startswith("_")]
