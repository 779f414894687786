"""Dimensional aspect sentiment regression: valence/arousal per aspect."""

from ._core import (
    DimasrError,
    bound,
    ensemble,
    evaluate,
    format_va,
    has_pretrained_backend,
    official_pairs,
    parse_va,
    predict,
    preprocess,
    register_pretrained_backend,
    rmse_va,
    submit,
    train,
    unregister_pretrained_backend,
    write_synthetic_dataset,
)

__all__ = [
    "DimasrError",
    "bound",
    "ensemble",
    "evaluate",
    "format_va",
    "has_pretrained_backend",
    "official_pairs",
    "parse_va",
    "predict",
    "preprocess",
    "register_pretrained_backend",
    "rmse_va",
    "submit",
    "train",
    "unregister_pretrained_backend",
    "write_synthetic_dataset",
]
