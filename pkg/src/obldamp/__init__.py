"""Opposition-based metaheuristics (PSO, GSA, BB-BC) and a seismic shear-frame
simulator for optimal MR damper placement."""
from .core import Algorithm, Bounds, Individual, Population, RunConfig, RunResult, RunStatistics, aggregate_runs, run
from .obl import OblConfig, generation_jump, opposite_point, opposition_init
from .algorithms import BbbcParams, GsaParams, PsoParams
from .building import (BuildingModel, ControlLaw, DamperMode, DamperState, MrDamperParams, StoryParams,
                       assemble_model, control_command, damper_force, load_building)
from .ground_motion import G, GroundMotion, generate_white_noise, parse_record, read_record, scale_to_pga
from .simulation import (PerformanceIndices, ResponseHistory, integrate, objective_value,
                         performance_indices, response_norm)
from .placement import DamperLayout, decode, enumerate_layouts, oracle_optimum
from .case_study import PlacementProblem
from .errors import DegenerateRecordError, InputError, NonFiniteFitnessError, ParseError, SimulationError

__version__ = "0.1.0"
