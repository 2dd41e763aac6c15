"""
Chain of Responsibility Pattern Implementation
Validates command-line requests before any computation:
distribution spec, sampling, closed-form and eigenvalue-cdf preconditions
"""

from abc import ABC, abstractmethod
from typing import Dict, Any, Optional
import json
import logging

from ..errors import DimensionMismatchError, DomainError
from ..models.distributions import KWDist, kw_from_options
from ..numerics.matops import SpdMatrix, read_matrix

logger = logging.getLogger(__name__)

# Commands whose results need the s = 1 closed forms
CLOSED_FORM_COMMANDS = {'pdf', 'eig'}
SAMPLING_COMMANDS = {'sample', 'risk'}


class RequestHandler(ABC):
    """Base handler in the chain of responsibility"""

    def __init__(self):
        self._next_handler: Optional[RequestHandler] = None

    def set_next(self, handler: 'RequestHandler') -> 'RequestHandler':
        """Set the next handler in the chain"""
        self._next_handler = handler
        return handler

    @abstractmethod
    def handle(self, request: Dict[str, Any]) -> Dict[str, Any]:
        """Check the request and pass to next handler"""
        pass

    def _pass_to_next(self, request: Dict[str, Any]) -> Dict[str, Any]:
        """Pass request to the next handler if exists"""
        if self._next_handler:
            return self._next_handler.handle(request)
        return request


class DistributionSpecHandler(RequestHandler):
    """Builds the KW distribution from a JSON spec file or inline options"""

    def handle(self, request: Dict[str, Any]) -> Dict[str, Any]:
        if request.get('needs_dist', True):
            logger.debug("Validation: building distribution spec")
            spec_path = request.get('dist_file')
            if spec_path:
                try:
                    with open(spec_path, 'r', encoding='utf-8') as handle:
                        data = json.load(handle)
                except (OSError, json.JSONDecodeError) as e:
                    raise DomainError(f"cannot read distribution spec {spec_path}: {e}") from e
                request['dist'] = KWDist.from_dict(data)
            else:
                options = request.get('options', {})
                if options.get('nu') is None:
                    raise DomainError("distribution needs --nu (or a --dist JSON file)")
                sigma = read_matrix(options['sigma']) if options.get('sigma') else None
                request['dist'] = kw_from_options(
                    options.get('p'), options['nu'], options['q'], options['theta'], options['s'], sigma
                )
        return self._pass_to_next(request)


class MatrixInputHandler(RequestHandler):
    """Reads and checks the SPD matrix argument (pdf evaluation point, transform argument)"""

    def handle(self, request: Dict[str, Any]) -> Dict[str, Any]:
        matrix_file = request.get('matrix_file')
        if matrix_file:
            logger.debug("Validation: reading matrix %s", matrix_file)
            request['matrix'] = SpdMatrix(read_matrix(matrix_file))
            dist = request.get('dist')
            if dist is not None and request['matrix'].dim != dist.p:
                raise DimensionMismatchError(
                    f"matrix is {request['matrix'].dim}x{request['matrix'].dim}, distribution has p={dist.p}"
                )
        return self._pass_to_next(request)


class SamplingHandler(RequestHandler):
    """Sampling commands need an integer number of degrees of freedom"""

    def handle(self, request: Dict[str, Any]) -> Dict[str, Any]:
        if request.get('command') in SAMPLING_COMMANDS:
            request['dist'].require_sample_count()
            count = request.get('count')
            if count is not None and count < 0:
                raise DomainError(f"count must be >= 0, got {count}")
        return self._pass_to_next(request)


class ClosedFormHandler(RequestHandler):
    """Density and cdf commands need s = 1"""

    def handle(self, request: Dict[str, Any]) -> Dict[str, Any]:
        dist = request.get('dist')
        if request.get('command') in CLOSED_FORM_COMMANDS and dist is not None and dist.params.s != 1.0:
            raise DomainError(f"'{request['command']}' needs s = 1 (got s={dist.params.s})")
        return self._pass_to_next(request)


class EigenPreconditionHandler(RequestHandler):
    """Eigenvalue cdfs need m = (nu-p-1)/2 to be a positive integer"""

    def handle(self, request: Dict[str, Any]) -> Dict[str, Any]:
        if request.get('command') == 'eig':
            request['m'] = request['dist'].require_integer_m()
            grid = request.get('grid') or []
            if not grid or any(not x > 0 for x in grid):
                raise DomainError("eigenvalue grid must be a non-empty list of positive numbers")
        return self._pass_to_next(request)


class EstimatorHandler(RequestHandler):
    """Risk commands need n > p + 2"""

    def handle(self, request: Dict[str, Any]) -> Dict[str, Any]:
        if request.get('command') == 'risk':
            dist = request['dist']
            if not dist.n > dist.p + 2:
                raise DomainError(f"risk needs n > p + 2 (n={dist.n}, p={dist.p})")
        return self._pass_to_next(request)


class ValidationPipeline:
    """Manages the chain of responsibility for request validation"""

    def __init__(self):
        self.spec = DistributionSpecHandler()
        self.matrix = MatrixInputHandler()
        self.sampling = SamplingHandler()
        self.closed_form = ClosedFormHandler()
        self.eigen = EigenPreconditionHandler()
        self.estimator = EstimatorHandler()

        (self.spec.set_next(self.matrix).set_next(self.sampling)
         .set_next(self.closed_form).set_next(self.eigen).set_next(self.estimator))

    def process(self, request: Dict[str, Any]) -> Dict[str, Any]:
        """Validate a request through the entire chain"""
        logger.debug("Validating '%s' request", request.get('command'))
        return self.spec.handle(request)
