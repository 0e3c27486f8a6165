"""Device and link simulation: watch, glasses, chunked transfer, virtual time."""

from hrvcam.sim.clock import VirtualClock, WallClock
from hrvcam.sim.scenario import Episode, FaultWindow, Scenario, ScenarioError, load_scenario
