"""Alternate classification losses, a from-scratch dense network to train with them,
and a harness that compares losses under otherwise identical training runs."""

from .losses import (
    Family,
    LossSpec,
    Variant,
    catalogue,
    compare_strictness,
    eval_loss,
    export_loss_curve,
    grad_loss,
    multiclass_grad,
    multiclass_loss,
    parametrized_catalogue,
    probe_properties,
)

__version__ = "0.1.0"
