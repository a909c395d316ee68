"""futamix: a self-applicable partial evaluator for a tiny first-order
language, a dialog DSL staged through it, and the three Futamura projections
realized over dialog staging."""

from .lcore import (Atom, Datum, EvalReport, Program, eval_program,
                    lift_program, parse_datum, print_datum, program_to_datum)
from .ddsl import (DialogSpec, dialog_to_datum, datum_to_dialog,
                   enumerate_paths, load_fixture, parse_dialog)
from .dinterp import (Done, Invalid, NeedInput, direct_compile, host_interp,
                      host_interp_step, interp_l0_program,
                      interp_step_l0_program, outcome_from_datum,
                      outcome_to_datum)

__all__ = [
    "Atom", "Datum", "EvalReport", "Program",
    "parse_datum", "print_datum", "lift_program", "program_to_datum",
    "eval_program",
    "DialogSpec", "parse_dialog", "dialog_to_datum", "datum_to_dialog",
    "enumerate_paths", "load_fixture",
    "NeedInput", "Done", "Invalid",
    "host_interp", "host_interp_step", "direct_compile",
    "interp_l0_program", "interp_step_l0_program",
    "outcome_to_datum", "outcome_from_datum",
]
