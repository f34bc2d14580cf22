from .clock import SimClock, Slot
from .engine import Simulation
from .env import EnvModel
from .roster import Participant, Roster

__all__ = ["SimClock", "Slot", "Simulation", "EnvModel", "Participant", "Roster"]
