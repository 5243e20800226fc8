from ._core import (
    InputError,
    NoSolutionError,
    NumericalError,
    __version__,
    check_sequence,
    cli,
    crosstalk_figure,
    evaluate_mapping,
    field_sensitivity,
    magic_field,
    rabi_transfer,
    run_sequence,
    shift_phase_deg,
    solve_zero_response_rabi,
    storage_t2star,
    transition_frequency,
)

__all__ = [
    "InputError",
    "NoSolutionError",
    "NumericalError",
    "__version__",
    "check_sequence",
    "cli",
    "crosstalk_figure",
    "evaluate_mapping",
    "field_sensitivity",
    "magic_field",
    "rabi_transfer",
    "run_sequence",
    "shift_phase_deg",
    "solve_zero_response_rabi",
    "storage_t2star",
    "transition_frequency",
]
