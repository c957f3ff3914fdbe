"""Distance-to-set models, their synthetic generators and evaluation helpers."""
from .base import Dataset, ModelSpec, ParamBlock
from .cv import CVResult, cv_harness, fold_indices, rmse
from .disk import DiskModel, generate_disk, sample_ball_exterior
from .generate import GENERATORS, PRESETS, PresetError, generate, resolve
from .io import DataError, load_dataset, read_csv_dataset, save_dataset
from .mixed_effects import SparseMixedEffects, generate_mixed_effects, unit_l1_volumes
from .monotone import MonotoneSmoother, difference_matrix, generate_monotone, kernel_matrix
from .multienv import MultiEnvModel, generate_multienv
from .transfer import TransferModel, generate_transfer, image_volumes, ols, source_posterior


def build_sparse_mixed_effects(data, **kw):
    return SparseMixedEffects(data, **kw)


def build_monotone_smoother(data, **kw):
    return MonotoneSmoother(data, **kw)


def build_multienv_model(data, **kw):
    return MultiEnvModel(data, **kw)


def build_transfer_model(data, **kw):
    return TransferModel(data, **kw)


MODELS = {
    "mixed-effects": SparseMixedEffects,
    "disk": DiskModel,
    "transfer": TransferModel,
    "multienv": MultiEnvModel,
    "monotone": MonotoneSmoother,
}

__all__ = [n for n in dir() if not n.startswith("_")]
