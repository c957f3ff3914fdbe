"""MCMC kernels, the chain driver, PPP augmentation and predictive sampling."""
from .ess import DegenerateChainWarning, autocovariance, ess, mcse
from .mcmc import (ChainConfig, SamplerError, Target, Trace, barker_step, chain_rng, run_chain,
                   run_chains, rwmh_step)
from .ppp import AugmentedState, PPPDomain, in_shell, ppp_gibbs_step, regenerate, run_ppp_chain
from .predictive import PredictiveDraws, predictive_sample


def acceptance_rate(trace):
    return trace.acceptance_rates()


__all__ = [n for n in dir() if not n.startswith("_")]
