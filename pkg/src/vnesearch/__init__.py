"""Monte Carlo search for online virtual network embedding."""
from .mdp import Embedding, prune_candidates, reward
from .nepa import RefineConfig, nepa_search, refine
from .network import PhysicalNetwork, SliceRequest, commit_embedding, release_embedding
from .nrpa import Policy, SearchContext, SearchStats, nrpa_search
from .placement import AlgoConfig, main_place
from .scenarios import Scenario, ScenarioConfig, gen_pss, gen_scenario
from .simulator import SimulationReport, run_batch, run_scenario
from .uct import uct_search

__version__ = "0.1.0"
