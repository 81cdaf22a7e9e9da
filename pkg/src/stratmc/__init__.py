"""Stratified Monte Carlo sampling and Markov chain simulation."""
from .chain_sim import Ensemble, MarkovModel, estimate_functional, init_ensemble, mc_run, relabel, run, state_selector, step
from .errors import ConfigurationError, PreconditionError
from .kernels import BACKEND
from .rng import SeededStream
from .sampling import (
    PointSet,
    SudokuBijections,
    lhs_sample,
    mc_sample,
    random_bijection,
    smc_sample,
    sudoku_sample,
    verify_property_P,
)

__version__ = "0.1.0"
