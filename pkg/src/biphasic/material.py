"""Compressible Neo-Hookean constitutive law and Darcy parameters.

Energy density (MPa):

    Phi = mu/2 (I_C - 3) - mu ln J + lambda/2 (ln J)^2

with I_C = tr(F^T F) and J = det F. The Cauchy stress and the spatial
tangent are the standard closed forms of this model:

    sigma = (mu/J)(b - I) + (lambda/J)(ln J) I,  b = F F^T
    c     = lam' I x I + 2 mu' I_sym,
    lam'  = lambda/J,  mu' = (mu - lambda ln J)/J

Voigt convention: (11, 22, 33, 12, 23, 13) with engineering shear, the
same as in fem.py, so the 6x6 tangent carries mu' (not 2 mu') on the
shear diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InvertedElementError

VOIGT_PAIRS = ((0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (0, 2))


@dataclass(frozen=True)
class NeoHookeParams:
    """Lame constants in MPa (= N/mm^2)."""

    lam: float
    mu: float

    def __post_init__(self):
        if self.mu <= 0.0:
            raise ConfigError(f"mu must be > 0, got {self.mu}")
        if self.lam < 0.0:
            raise ConfigError(f"lambda must be >= 0, got {self.lam}")


@dataclass(frozen=True)
class PermeabilityParams:
    """Constant scalar Darcy permeability, mm^4 N^-1 s^-1."""

    k: float

    def __post_init__(self):
        if self.k <= 0.0:
            raise ConfigError(f"permeability must be > 0, got {self.k}")


@dataclass(frozen=True)
class Kinematics:
    """Deformation gradient with its cached invariants."""

    F: np.ndarray
    J: float = field(init=False)
    I_C: float = field(init=False)

    def __post_init__(self):
        F = np.asarray(self.F, dtype=float)
        if F.shape != (3, 3):
            raise ConfigError(f"F must be 3x3, got shape {F.shape}")
        object.__setattr__(self, "F", F)
        J = float(np.linalg.det(F))
        if J <= 0.0:
            raise InvertedElementError("<kinematics>", None)
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "I_C", float(np.trace(F.T @ F)))

    @classmethod
    def from_F(cls, F) -> "Kinematics":
        return cls(F=np.asarray(F, dtype=float))


@dataclass(frozen=True)
class StressTangent:
    """Cauchy stress (3x3, MPa) and spatial tangent (6x6 Voigt, MPa)."""

    sigma: np.ndarray
    D: np.ndarray


def strain_energy(kin: Kinematics, prm: NeoHookeParams) -> float:
    """Strain energy density, MPa."""
    lnJ = np.log(kin.J)
    return (
        0.5 * prm.mu * (kin.I_C - 3.0)
        - prm.mu * lnJ
        + 0.5 * prm.lam * lnJ * lnJ
    )


def cauchy_stress(kin: Kinematics, prm: NeoHookeParams) -> np.ndarray:
    """Cauchy effective stress, symmetric 3x3 in MPa."""
    F = kin.F
    J = kin.J
    b = F @ F.T
    return (prm.mu / J) * (b - np.eye(3)) + (prm.lam * np.log(J) / J) * np.eye(3)


def spatial_tangent(kin: Kinematics, prm: NeoHookeParams) -> np.ndarray:
    """Spatial elasticity tangent, 6x6 in the documented Voigt convention."""
    J = kin.J
    lam_p = prm.lam / J
    mu_p = (prm.mu - prm.lam * np.log(J)) / J
    D = np.zeros((6, 6))
    D[:3, :3] = lam_p
    D[0, 0] = D[1, 1] = D[2, 2] = lam_p + 2.0 * mu_p
    D[3, 3] = D[4, 4] = D[5, 5] = mu_p
    return D


def stress_and_tangent(kin: Kinematics, prm: NeoHookeParams) -> StressTangent:
    return StressTangent(sigma=cauchy_stress(kin, prm), D=spatial_tangent(kin, prm))


def tensor_to_voigt(t: np.ndarray, strain: bool = False) -> np.ndarray:
    """Symmetric 3x3 -> 6 vector; strain=True doubles the shear entries."""
    v = np.array([t[i, j] for i, j in VOIGT_PAIRS], dtype=float)
    if strain:
        v[3:] *= 2.0
    return v


def voigt_to_tensor(v: np.ndarray, strain: bool = False) -> np.ndarray:
    """Inverse of tensor_to_voigt."""
    t = np.zeros((3, 3))
    for m, (i, j) in enumerate(VOIGT_PAIRS):
        val = v[m] / 2.0 if (strain and m >= 3) else v[m]
        t[i, j] = val
        t[j, i] = val
    return t
