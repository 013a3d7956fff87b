from .polygon import Polygon, regular_ngon
from .kernel import Kernel, RieszKernel, ShiftedKernel, RegularizedRieszKernel, CustomKernel
from .schemas import QuadratureSpec
from .potential import PotentialEvaluator
from .energy import EnergyEvaluator, energy
from .flows import Constraint, FlowFamily, FlowSpec
from .stationarity import StationarityAnalyzer, check_stationarity
from .variation import VariationAnalyzer

__all__ = [
    'Polygon',
    'regular_ngon',
    'Kernel',
    'RieszKernel',
    'ShiftedKernel',
    'RegularizedRieszKernel',
    'CustomKernel',
    'QuadratureSpec',
    'PotentialEvaluator',
    'EnergyEvaluator',
    'energy',
    'Constraint',
    'FlowFamily',
    'FlowSpec',
    'StationarityAnalyzer',
    'check_stationarity',
    'VariationAnalyzer',
]
