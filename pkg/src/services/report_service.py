import json
import logging
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..models.domain_models import (
    Ellipsoid, ReportRow, format_p, significant, validate_p,
)
from ..utils.exceptions import ToricRadiiError
from ..utils.numerics import DEFAULT_NODE_BUDGET
from .ball_packing_service import BallPackingService
from .ech_capacity_service import EchCapacityService
from .hamiltonian_flow_service import HamiltonianFlowService
from .lagrangian_sum_service import LagrangianSumService
from .symplectic_sum_service import SymplecticSumService
from .toric_domain_service import ToricDomainService

logger = logging.getLogger(__name__)

DOMAINS = ('lagrangian', 'symplectic')


class ReportService:
    """Wires the services together from the config dict and assembles outputs"""

    def __init__(self, config: Dict[str, Any]):
        self.config = config
        curve_samples = config.get('CURVE_SAMPLES', 4096)

        self.lagrangian_service = LagrangianSumService(
            abs_tol=config.get('ABS_TOL', 1e-10),
            rel_tol=config.get('REL_TOL', 1e-10),
            node_budget=config.get('NODE_BUDGET', DEFAULT_NODE_BUDGET),
            root_tol=config.get('ROOT_TOL', 1e-13),
            curve_samples=curve_samples,
        )
        self.toric_service = ToricDomainService(
            root_tol=config.get('ROOT_TOL', 1e-13),
            min_weight_ratio=config.get('MIN_WEIGHT_RATIO', 1e-4),
        )
        self.ech_service = EchCapacityService(self.toric_service)
        self.packing_service = BallPackingService(
            toric_service=self.toric_service,
            lagrangian_service=self.lagrangian_service,
            tie_epsilon=config.get('TIE_EPSILON', 1e-9),
            max_moves=config.get('MAX_MOVES', 10_000),
        )
        self.symplectic_service = SymplecticSumService(
            toric_service=self.toric_service,
            ech_service=self.ech_service,
            curve_samples=curve_samples,
            k_max=config.get('K_MAX', 50),
        )
        self.flow_service = HamiltonianFlowService(
            lagrangian_service=self.lagrangian_service,
            axis_guard=config.get('AXIS_GUARD', 1e-3),
            abs_tol=config.get('ABS_TOL', 1e-10),
            rel_tol=config.get('REL_TOL', 1e-10),
        )

        self.digits = config.get('SIGNIFICANT_DIGITS', 12)

    def _round(self, value: float) -> float:
        return significant(float(value), self.digits)

    def radii_rows(self, p_list: Sequence[float], domain: str = 'lagrangian') -> List[ReportRow]:
        """Inner/outer radii, rigidity labels and (c1, c2) for every p"""
        if domain not in DOMAINS:
            raise ToricRadiiError(f"unknown domain {domain!r}")
        rows = []
        for p in p_list:
            p = validate_p(p)
            if domain == 'lagrangian':
                service = self.lagrangian_service
                r_inner, r_outer = service.inner_radius(p), service.outer_radius(p)
                c1, c2 = service.capacities(p)
            else:
                service = self.symplectic_service
                r_inner, r_outer = service.bp_inner_radius(p), service.bp_outer_radius(p)
                c1, c2 = service.bp_capacities(p)
            inner_regime, outer_regime = service.regimes(p)
            rows.append(ReportRow(
                domain=domain, p=p,
                r_inner=self._round(r_inner), r_outer=self._round(r_outer),
                regime=outer_regime, inner_regime=inner_regime,
                c1=self._round(c1), c2=self._round(c2),
            ))
            logger.info(f"{domain} p={p:g}: r={r_inner:.6g}, R={r_outer:.6g}")
        return rows

    def radii(self, p_list: Sequence[float], domain: str = 'lagrangian') -> Dict[str, Any]:
        try:
            rows = self.radii_rows(p_list, domain)
            return {'success': True, 'rows': [row.to_dict() for row in rows]}
        except ToricRadiiError as e:
            logger.error(f"Error computing radii: {e}")
            return {'success': False, 'error': str(e)}

    def curve_points(self, p: float, samples: int, domain: str = 'lagrangian') -> Dict[str, Any]:
        """Boundary samples of Omega_p (or of the B_p moment region) by increasing x"""
        if domain == 'lagrangian':
            boundary = self.lagrangian_service.boundary_curve(p, samples)
        elif domain == 'symplectic':
            boundary = self.symplectic_service.bp_boundary(p, samples)
        else:
            raise ToricRadiiError(f"unknown domain {domain!r}")
        points = np.asarray(boundary.points, dtype=float)
        # vertical edges keep decreasing y
        order = np.lexsort((-points[:, 1], points[:, 0]))
        return {
            'p': format_p(validate_p(p)),
            'points': [[self._round(x), self._round(y)] for x, y in points[order]],
        }

    def curve(self, p: float, samples: int, domain: str = 'lagrangian') -> Dict[str, Any]:
        try:
            return {'success': True, 'curve': self.curve_points(p, samples, domain)}
        except ToricRadiiError as e:
            logger.error(f"Error sampling boundary curve: {e}")
            return {'success': False, 'error': str(e)}

    @staticmethod
    def render(payload: Any, fmt: str) -> str:
        """Serialise a row list or a curve dict as json or csv"""
        if fmt == 'json':
            return json.dumps(payload, indent=2)
        if fmt != 'csv':
            raise ToricRadiiError(f"unsupported format {fmt!r}")
        if isinstance(payload, dict) and 'points' in payload:
            frame = pd.DataFrame(payload['points'], columns=['x', 'y'])
            frame.insert(0, 'p', payload['p'])
        else:
            frame = pd.DataFrame(payload)
        return frame.to_csv(index=False)

    @staticmethod
    def export(text: str, output: Optional[str]) -> None:
        """Write rendered text to a file; OSError propagates to the caller"""
        if output is None:
            print(text)
            return
        with open(output, 'w', encoding='utf-8') as handle:
            handle.write(text)
        logger.info(f"Wrote {len(text)} characters to {output}")

    def pack(self, c: Any, balls: Sequence[Any], max_moves: Optional[int] = None) -> Dict[str, Any]:
        try:
            verdict = self.packing_service.pack_decision(c, balls, max_moves)
            return {'success': True, 'verdict': verdict}
        except ToricRadiiError as e:
            logger.error(f"Error deciding packing: {e}")
            return {'success': False, 'error': str(e)}

    def pack_preset(self, a: Any, b: Any) -> Dict[str, Any]:
        """B_1 into the ellipsoid E(a, b)"""
        try:
            verdict = self.symplectic_service.b1_into_ellipsoid(Ellipsoid(a, b))
            return {'success': True, 'verdict': verdict}
        except ToricRadiiError as e:
            logger.error(f"Error deciding B_1 into E({a}, {b}): {e}")
            return {'success': False, 'error': str(e)}


def parse_scalar(text: str) -> Any:
    """'1/6' and integers stay exact; decimals become floats"""
    token = text.strip()
    if not token:
        raise ValueError("empty number")
    if '.' in token or 'e' in token.lower():
        return float(token)
    return Fraction(token)
