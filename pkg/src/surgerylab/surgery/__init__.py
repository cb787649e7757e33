"""Glued spaces: epsilon-nets, ports, strings, tunnels and pipe spaces."""
from .glued import Attachments, ConstructionError, GluedSpace, glue
from .model import TunnelModel, sphere_area, tunnel_make
from .net import (EpsilonNet, HypothesisError, PortSet, TunnelRadii, attach_strings,
                  attach_tunnels, build_epsilon_net, choose_tunnel_radii, pair_list,
                  place_ports, rho0_bisection)
from .pipe import PipeParameterError, PipeSpaces, build_pipe_spaces

__all__ = [
    "Attachments", "ConstructionError", "GluedSpace", "glue",
    "TunnelModel", "sphere_area", "tunnel_make",
    "EpsilonNet", "HypothesisError", "PortSet", "TunnelRadii", "attach_strings",
    "attach_tunnels", "build_epsilon_net", "choose_tunnel_radii", "pair_list",
    "place_ports", "rho0_bisection",
    "PipeParameterError", "PipeSpaces", "build_pipe_spaces",
]
