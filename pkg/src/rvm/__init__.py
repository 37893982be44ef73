"""Desk-scale solver for the mollified relativistic Vlasov-Maxwell system
with a verification harness for its conservation laws, a-priori bounds, and
the momentum-averaging regularity estimate."""

from . import _kernels
from .phase_space import (DistributionFunction, PhaseGrid, compute_moments,
                          compute_energy_densities, kinetic_norm, lq_norm,
                          momentum_map)
from .mollifier import MollifierKernel, ScaledMollifier, make_kernel, scale
from .maxwell import (FieldState, constraint_residual, field_energy,
                      maxwell_step, solve_initial_fields)
from .vlasov import (ClipTally, ForceField, MomentumSupportBreach, advect_p,
                     advect_x, vlasov_step)
from .regularized import (RunConfig, SimulationState, coupled_step,
                          initialize, modified_energy, preset_config, run,
                          run_sequence)

__version__ = "0.1.0"

kernel_backend = _kernels.backend_name
