"""OCL-subset expressions: parsing, resolution, evaluation and footprints."""

from .ast import unparse
from .evaluator import QUERY, VERIFY, Env, evaluate, values_equal
from .footprint import (EXTENT, AssignFeature, CreateExtent, DeleteFrom, InsertInto,
                        ReadItem, read_footprint, write_footprint)
from .parser import parse_expr
from .resolve import Scope, resolve
