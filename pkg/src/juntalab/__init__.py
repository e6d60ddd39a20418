"""Exact simulation of gap group testing and junta testing, classical and quantum."""

from .boolfn import (BooleanFunction, FourierSpectrum, all_influences, distance_to_k_junta, fourier_transform,
                     influence, relevant_variables, sub_influence)
from .instances import BlockOracle, IntersectionOracle, RelaxedOracle, make_block_oracle, make_relaxed_oracle
from .adversary import GenericSolution, GgtSolution, build_ggt_solution, feasibility_residual
from .qggt import LambdaSpec, QggtConfig, qggt_run, reflect_lambda
from .junta import JuntaVerdict, classify_nonjunta, junta_test

__version__ = "0.1.0"
