__all__ = [
    'Tensor',
    'Tape',
    'TapeRecord',
    'ParameterStore',
    'Parameter',
    'GROUPS',
    'ops',
    'precision',
    'set_precision',
    'default_dtype',
    'set_finite_checks',
    'check_gradients',
    'GradCheckResult',
    'op_suite',
    'layers'
]


from src.autodiff.tensor import (
    Tensor,
    Tape,
    TapeRecord,
    precision,
    set_precision,
    default_dtype,
    set_finite_checks
)
from src.autodiff.parameters import ParameterStore, Parameter, GROUPS
from src.autodiff import ops, layers
from src.autodiff.gradcheck import check_gradients, GradCheckResult, op_suite
