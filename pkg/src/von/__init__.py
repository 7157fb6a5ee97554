"""Decision procedure, definable sets and imaginaries for the theory VO_n."""
from __future__ import annotations

from .field import QSqrt2Model
from .generic import GenericModel
from .model import ContractViolation, Element, MultiInterval, evaluate, eval_qf
from .parser import ParseError, parse, to_text
from .qe import NotASentence, decide, eliminate

__all__ = [
    "ContractViolation", "Element", "GenericModel", "MultiInterval", "NotASentence",
    "ParseError", "QSqrt2Model", "decide", "eliminate", "eval_qf", "evaluate", "parse",
    "to_text",
]
