from .shape import Point, Shape, StarContour
from .basis import CoefficientVector, ContourMatrix, EigenBasis
from .cluster import ClusterModel
from .instance import CorpusSpec, ExtractedContour, InstanceRecord, SyntheticParams
from .report import CurvePoint, EvalReport
