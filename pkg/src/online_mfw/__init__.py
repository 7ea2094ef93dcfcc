"""Online measured Frank-Wolfe for non-monotone DR-submodular maximization
over down-closed polytopes."""

from .mfw import (
    BanditMFW,
    MetaMFW,
    MonoMFW,
    Schedule,
    eta_meta,
    eta_mono,
    make_schedule,
    measured_step,
    offline_measured_greedy,
)
from .objectives import QuadraticObjective, RevenueObjective, gen_quadratic, load_graph
from .polytope import DownClosedPolytope, InteriorShrink, box

__version__ = "0.1.0"

__all__ = [
    "BanditMFW",
    "DownClosedPolytope",
    "InteriorShrink",
    "MetaMFW",
    "MonoMFW",
    "QuadraticObjective",
    "RevenueObjective",
    "Schedule",
    "box",
    "eta_meta",
    "eta_mono",
    "gen_quadratic",
    "load_graph",
    "make_schedule",
    "measured_step",
    "offline_measured_greedy",
]
