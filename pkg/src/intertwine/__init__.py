"""Exact intertwinings between Ehrenfest, Yule, reverse-Yule and Ornstein-Uhlenbeck generators."""

from .polyalg import (
    HermiteMeasure,
    Poly,
    ValueVector,
    X,
    global_min,
    hermite,
    krawtchouk,
    nonneg_on_reals,
    phi,
    phi_tilde,
)
from .generators import FiniteGenerator, binomial_measure, check_eigen, ehrenfest, ou_apply, reverse_yule, yule
from .kernels import (
    FiniteKernel,
    HermiteDensityKernel,
    KernelPolytope,
    kernel_polytope,
    lambda_a,
    lambda_a_reverse,
    lambda_chain,
    lambda_hat,
    lambda_hat_chain,
    lambda_step,
    pushforward,
    verify_finite_intertwining,
    verify_ou_intertwining,
)
from .feasibility import (
    FeasibilityReport,
    check_membership_A,
    check_membership_reverse,
    ehrenfest_ou_witness,
    max_a2,
    restriction_check,
    reverse_witness,
)
from .coupling import (
    JointState,
    Trajectory,
    UniformizedPair,
    absorption_time,
    build_coupling,
    hypo_sample,
    hypo_survival,
    simulate,
    simulate_many,
    step,
)
from .convergence import SeparationCurve, bound_curve, ehrenfest_evolve, ou_evolve, separation, tv_distance

__version__ = "0.1.0"
