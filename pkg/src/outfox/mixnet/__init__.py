from outfox.mixnet.network import FAILURE_EVENTS, Mixnet, PartyState, RunLog
from outfox.mixnet.scenario import ScenarioError, ScenarioRunner, load_script, run_scenario
from outfox.mixnet.topology import Party, Role, RouteSpec, Topology, TopologyError, party_id

__all__ = [
    "FAILURE_EVENTS", "Mixnet", "Party", "PartyState", "Role", "RouteSpec", "RunLog", "ScenarioError",
    "ScenarioRunner", "Topology", "TopologyError", "load_script", "party_id", "run_scenario",
]
