"""Markov loop soups on finite weighted graphs.

Samplers for loop ensembles and the Eulerian networks, occupation fields,
configurations and homology classes they induce, together with the exact
laws those objects follow and the machinery to check one against the other.
"""
from .graph import (
    GraphError,
    WeightedGraph,
    complete_graph,
    cycle_graph,
    det_I_minus_P,
    duality_measure,
    green_function,
    path_graph,
    permanent,
    single_vertex,
    transition_matrix,
    triangle,
    twist_green,
    two_vertex,
)
from .loops import (
    DiscreteLoop,
    LoopEnsemble,
    edge_network,
    loop_length_masses,
    occupation_field,
    sample_ensemble,
    sample_networks,
    wilson_sample,
)
from .networks import pmf_eulerian, pmf_even

__version__ = "0.1.0"
