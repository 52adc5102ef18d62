"""
Rough Forms.

Geometric integration of rough differential forms over simplices: Young and
Züst integrals, the dyadic sewing operator, side compensators and correctors.
"""

from src.rough_forms.config import load_config
from src.rough_forms.integrals import young, zust
from src.rough_forms.sew import SewOptions, sew_eval
from src.rough_forms.simplex import Simplex

__version__ = "0.1.0"
