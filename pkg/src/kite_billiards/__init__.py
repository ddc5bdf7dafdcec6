"""Diophantine minima, relative nets on the circle, and kite billiard beams."""
from .errors import BoundOverflow, BudgetExceeded, DomainError, InsufficientLength, ModelError
from .geometry import (Beam, Kite, PropagationOutcome, Triangle, UnfoldingFrame,
                       detect_periodic, estimate_C, fold_trajectory, kite_from_triangle,
                       kite_intersection_count, net_function_model, propagate_beam,
                       splitting_experiment, theorem2_bound, unfold_ray)
from .nets import (ColoredNet, ConnectedSequence, IntervalNetWitness, commensurate_net_construction,
                   estimate_net_function, first_net_prefix, is_relative_eps_net,
                   monochromatic_subnet)
from .numtheory import (CircleAngle, L_bound, M_of_eps, N_pair, N_single, convergents,
                        nearest_integer_distance, theorem1_inequality_check)

__version__ = "0.1.0"
