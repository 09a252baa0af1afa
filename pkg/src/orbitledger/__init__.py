"""orbitledger: blockchain protocols on a LEO constellation torus, simulated."""

from .topology import (
    Direction,
    GridCoord,
    ServiceAreaSpec,
    ServiceAreaWindow,
    TorusTopology,
    membership_delta,
    neighbors,
    service_area_at,
    torus_distance,
)
from .network import Message, MessageKind, Network
from .ledger import Block, Blockchain, Operation, Replica, StateStore, Transaction, quorum_read
from .contracts import AccountContract, Contract, ContractInvocation, invoke_contract
from .simulation import SimConfig, Simulation
from .scenario import ScenarioConfig, run_scenario, run_sweep

__version__ = "0.1.0"
