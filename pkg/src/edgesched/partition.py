"""Regime classification: admission under W, leftover public volume, and the
four-way split by computation/communication sufficiency."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Regime, ScenarioInstance, ifloor


class AdmissionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RegimeDescriptor:
    regime: Regime
    chi: np.ndarray
    blocked: np.ndarray
    public_demand: np.ndarray  # per-AP flow that must reach a server (or the cloud)
    pu: int
    total_public_capacity: int
    cloud_required: bool

    @property
    def comm_insufficient(self) -> bool:
        return bool(self.blocked.sum() > 0)

    @property
    def required_offload(self) -> int:
        return max(0, self.pu - self.total_public_capacity)

    def to_dict(self) -> dict:
        return {
            "regime": self.regime.value,
            "pu": self.pu,
            "total_public_capacity": self.total_public_capacity,
            "cloud_required": self.cloud_required,
            "chi": self.chi.tolist(),
            "blocked": self.blocked.tolist(),
            "public_demand": self.public_demand.tolist(),
        }


def admit(instance: ScenarioInstance) -> tuple[np.ndarray, np.ndarray]:
    """Admitted (chi) and blocked request counts per AP.

    Private requests take the communication budget first, so an AP whose
    private demand alone exceeds W cannot be handled and is refused.
    """
    W = instance.profile.comm_capacity
    theta = instance.theta
    private = instance.private_demand()
    over = np.flatnonzero(private > W)
    if len(over):
        i = int(over[0])
        raise AdmissionError(
            f"AP {i + 1}: private demand exceeds communication capacity ({private[i]} > {W})")
    chi = np.minimum(theta, W)
    chi.setflags(write=False)
    blocked = theta - chi
    blocked.setflags(write=False)
    return chi, blocked


def admitted_split(instance: ScenarioInstance, chi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(private admitted, public admitted) per AP, private served first."""
    private = np.minimum(instance.private_demand(), chi)
    return private, chi - private


def public_demand(instance: ScenarioInstance, chi: np.ndarray) -> np.ndarray:
    beta = instance.profile.beta
    out = np.empty(instance.n, dtype=np.int64)
    for i in range(instance.n):
        if instance.placement[i] == 1:
            # floor(chi - beta*theta) goes negative only when beta*theta sits
            # strictly between W and W+1
            out[i] = max(0, ifloor(chi[i] - beta * instance.theta[i]))
        else:
            out[i] = chi[i]
    out.setflags(write=False)
    return out


def compute_pu(instance: ScenarioInstance, chi: np.ndarray) -> int:
    return int(public_demand(instance, chi).sum())


def classify(instance: ScenarioInstance) -> RegimeDescriptor:
    chi, blocked = admit(instance)
    demand = public_demand(instance, chi)
    pu = int(demand.sum())
    total_cap = instance.m * instance.profile.public_capacity
    cloud = pu > total_cap
    comm_ok = bool(np.all(instance.theta <= instance.profile.comm_capacity))
    if comm_ok:
        regime = Regime.IKSW if cloud else Regime.SKSW
    else:
        regime = Regime.IKIW if cloud else Regime.SKIW
    return RegimeDescriptor(regime, chi, blocked, demand, pu, total_cap, cloud)
