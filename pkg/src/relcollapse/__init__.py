"""Measurement events in 1+1 Minkowski spacetime: surface states, collapse prescriptions, attribution."""

from .attribution import AttributionRule, attribute_joint, attribute_local, curious_report
from .collapse import FORWARD, HK, Prescription, flat_frame, point_state, surface_state, worldline_trace
from .hilbert import LocalOperator, SpaceDescriptor, StateVector, SubsystemLabel
from .oracle import compare_orders, compare_prescriptions, enumerate_outcomes
from .scenario import Scenario, dump, emit, load, loads, validate
from .spacetime import BackwardCone, Event, Flat, ForwardCone, UnionBackwardCones

__version__ = "0.1.0"

__all__ = [
    "AttributionRule", "attribute_joint", "attribute_local", "curious_report",
    "FORWARD", "HK", "Prescription", "flat_frame", "point_state", "surface_state", "worldline_trace",
    "LocalOperator", "SpaceDescriptor", "StateVector", "SubsystemLabel",
    "compare_orders", "compare_prescriptions", "enumerate_outcomes",
    "Scenario", "dump", "emit", "load", "loads", "validate",
    "BackwardCone", "Event", "Flat", "ForwardCone", "UnionBackwardCones",
]
