"""Boundary-condition programs, simulation configs, and their file format.

Config files are flat ``key = value`` text with dotted keys mirroring the
--set override syntax, '#' comments allowed. All values carry fixed units
(mm, N, s, MPa), spelled out in the key names where ambiguity is possible.
Unknown or missing required keys are errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError
from .material import NeoHookeParams, PermeabilityParams
from .mesh import Mesh, MeshSpec, generate, read_mesh
from .solver import DofMap, SolutionState

# Quarter-cylinder resolutions matched to the reference meshes by the
# number of elements on the through-thickness reference line (5/7/9/12);
# cross-section subdivisions keep the element count in the same regime.
MESH_PRESETS = {
    1: (6, 18, 5),
    2: (7, 22, 7),
    3: (8, 26, 9),
    4: (10, 32, 12),
}


def preset_mesh_spec(level: int, radius: float = 18.0, height: float = 8.0) -> MeshSpec:
    if level not in MESH_PRESETS:
        raise ConfigError(f"mesh preset level must be in {sorted(MESH_PRESETS)}")
    nr, nc, nz = MESH_PRESETS[level]
    return MeshSpec(
        shape="quarter_cylinder", radius=radius, height=height, subdivisions=(nr, nc, nz)
    )


@dataclass(frozen=True)
class DisplacementBC:
    """One displacement component prescribed on a facet set; value is a
    function of time (s) returning mm."""

    facet_set: str
    component: int
    value: object  # Callable[[float], float]


@dataclass(frozen=True)
class PressureBC:
    facet_set: str
    value: float = 0.0


@dataclass
class BoundaryConditionSet:
    """Dirichlet programs; zero-flux boundaries need no entries (the
    natural boundary integral vanishes)."""

    displacement: list = field(default_factory=list)
    pressure: list = field(default_factory=list)

    def validate(self, mesh: Mesh) -> None:
        for bc in self.displacement:
            if bc.facet_set not in mesh.facet_sets:
                raise ConfigError(f"facet set {bc.facet_set!r} missing from mesh")
            if bc.component not in (0, 1, 2):
                raise ConfigError(f"bad displacement component {bc.component}")
        for bc in self.pressure:
            if bc.facet_set not in mesh.facet_sets:
                raise ConfigError(f"facet set {bc.facet_set!r} missing from mesh")


# 3-point degree-2 rule on the reference triangle, and quadratic triangle
# shape functions in the facet row order (3 corners, then midsides of
# edges (0,1), (1,2), (2,0)).
_TRI_QP = np.array([[1 / 6, 1 / 6], [2 / 3, 1 / 6], [1 / 6, 2 / 3]])
_TRI_W = np.full(3, 1.0 / 6.0)


def _tri6_shapes(xi, eta):
    l0 = 1.0 - xi - eta
    l1, l2 = xi, eta
    N = np.array(
        [
            l0 * (2 * l0 - 1),
            l1 * (2 * l1 - 1),
            l2 * (2 * l2 - 1),
            4 * l0 * l1,
            4 * l1 * l2,
            4 * l2 * l0,
        ]
    )
    dN = np.array(
        [
            [1 - 4 * l0, 1 - 4 * l0],
            [4 * l1 - 1, 0.0],
            [0.0, 4 * l2 - 1],
            [4 * (l0 - l1), -4 * l1],
            [4 * l2, 4 * l1],
            [-4 * l2, 4 * (l0 - l2)],
        ]
    )
    return N, dN


def facet_traction_vector(mesh: Mesh, dofmap: DofMap, facet_set: str, traction) -> np.ndarray:
    """Consistent nodal forces of a constant traction (MPa) on a facet set.

    Integrated over the reference configuration (dead load); returns a
    full-length dof vector with zeros on pressure dofs.
    """
    rows = mesh.facet_sets.get(facet_set)
    if rows is None:
        raise ConfigError(f"facet set {facet_set!r} missing from mesh")
    tr = np.asarray(traction, dtype=float)
    f = np.zeros(dofmap.ndofs)
    pts = mesh.coords[rows]  # (K, 6, 3)
    for (xi, eta), w in zip(_TRI_QP, _TRI_W):
        N, dN = _tri6_shapes(xi, eta)
        tang = np.einsum("kni,nd->kid", pts, dN)  # (K, 3, 2)
        dA = np.linalg.norm(np.cross(tang[:, :, 0], tang[:, :, 1]), axis=1)
        contrib = (w * dA)[:, None, None] * N[None, :, None] * tr[None, None, :]
        np.add.at(f, (3 * rows[:, :, None] + np.arange(3)).ravel(), contrib.ravel())
    return f


@dataclass
class Scenario:
    """Everything the time marcher needs for one simulation."""

    mesh: Mesh
    material: NeoHookeParams
    permeability: PermeabilityParams
    gls_enabled: bool
    dt: float
    bcs: BoundaryConditionSet
    tractions: list = field(default_factory=list)  # (facet_set, 3-vector MPa)
    label: str = ""

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        self.bcs.validate(self.mesh)
        self._dofmap = DofMap.from_mesh(self.mesh)
        self._f_ext = None

    @property
    def dofmap(self) -> DofMap:
        return self._dofmap

    def constraints(self, t: float):
        """Constrained dof ids and values at time t (deduplicated)."""
        dm = self._dofmap
        dofs = []
        vals = []
        for bc in self.bcs.displacement:
            nodes = self.mesh.facet_nodes(bc.facet_set)
            v = float(bc.value(t))
            dofs.append(3 * nodes.astype(np.int64) + bc.component)
            vals.append(np.full(nodes.size, v))
        for bc in self.bcs.pressure:
            corners = np.unique(self.mesh.facet_sets[bc.facet_set][:, :3])
            dofs.append(dm.pdof_of_node[corners])
            vals.append(np.full(corners.size, float(bc.value)))
        dofs = np.concatenate(dofs) if dofs else np.empty(0, dtype=np.int64)
        vals = np.concatenate(vals) if vals else np.empty(0)

        order = np.argsort(dofs, kind="stable")
        dofs, vals = dofs[order], vals[order]
        if dofs.size:
            boundary = np.ones(dofs.size, dtype=bool)
            boundary[1:] = dofs[1:] != dofs[:-1]
            groups = np.nonzero(boundary)[0]
            for g0, g1 in zip(groups, np.append(groups[1:], dofs.size)):
                span = np.ptp(vals[g0:g1])
                if span > 1e-12 * max(1.0, np.abs(vals[g0:g1]).max()):
                    raise ConfigError(
                        f"dof {int(dofs[g0])} constrained to conflicting values"
                    )
            dofs, vals = dofs[groups], vals[groups]
        return dofs, vals

    def external_load(self, t: float, dt: float):
        """Scaled external load vector (tractions are constant in time)."""
        if not self.tractions:
            return None
        if self._f_ext is None:
            f = np.zeros(self._dofmap.ndofs)
            for name, tr in self.tractions:
                f += facet_traction_vector(self.mesh, self._dofmap, name, tr)
            self._f_ext = f
        return self._f_ext

    def initial_state(self, dofmap: DofMap) -> SolutionState:
        return SolutionState.zero(dofmap)


def build_unconfined_compression(
    mesh: Mesh,
    material: NeoHookeParams,
    permeability: PermeabilityParams,
    gls_enabled: bool,
    dt: float,
    rate: float,
    contact: str = "frictionless",
) -> Scenario:
    """Quarter-cylinder unconfined compression: the top surface moves down
    at the given rate (mm/s), top and bottom are drained (p = 0), the
    lateral surface is traction-free and sealed, symmetry planes rollered.
    """
    for name in ("top", "bottom", "lateral", "sym_x", "sym_y"):
        if name not in mesh.facet_sets:
            raise ConfigError(f"unconfined compression needs facet set {name!r}")
    if contact not in ("frictionless", "tied"):
        raise ConfigError(f"contact must be frictionless|tied, got {contact!r}")
    if rate <= 0.0:
        raise ConfigError(f"loading rate must be > 0, got {rate}")

    disp = [
        DisplacementBC("top", 2, lambda t, r=rate: -r * t),
        DisplacementBC("bottom", 2, lambda t: 0.0),
        DisplacementBC("sym_x", 0, lambda t: 0.0),
        DisplacementBC("sym_y", 1, lambda t: 0.0),
    ]
    if contact == "tied":
        for fs in ("top", "bottom"):
            disp.append(DisplacementBC(fs, 0, lambda t: 0.0))
            disp.append(DisplacementBC(fs, 1, lambda t: 0.0))
    bcs = BoundaryConditionSet(
        displacement=disp,
        pressure=[PressureBC("top", 0.0), PressureBC("bottom", 0.0)],
    )
    return Scenario(
        mesh=mesh,
        material=material,
        permeability=permeability,
        gls_enabled=gls_enabled,
        dt=dt,
        bcs=bcs,
        label="unconfined_compression",
    )


def build_terzaghi_column(
    mesh: Mesh,
    material: NeoHookeParams,
    permeability: PermeabilityParams,
    dt: float,
    sigma0: float,
    gls_enabled: bool = False,
) -> Scenario:
    """Consolidation column: constant compressive traction sigma0 (MPa) on
    the drained top (p = 0), sealed rollered sides and sealed bottom.
    Uniaxial-strain kinematics for comparison against the series solution.
    """
    for name in ("top", "bottom", "x0", "x1", "y0", "y1"):
        if name not in mesh.facet_sets:
            raise ConfigError(f"terzaghi column needs box facet set {name!r}")
    if sigma0 < 0.0:
        raise ConfigError(f"sigma0 must be >= 0, got {sigma0}")

    zero = lambda t: 0.0
    bcs = BoundaryConditionSet(
        displacement=[
            DisplacementBC("bottom", 2, zero),
            DisplacementBC("x0", 0, zero),
            DisplacementBC("x1", 0, zero),
            DisplacementBC("y0", 1, zero),
            DisplacementBC("y1", 1, zero),
        ],
        pressure=[PressureBC("top", 0.0)],
    )
    tractions = [("top", np.array([0.0, 0.0, -sigma0]))] if sigma0 > 0.0 else []
    return Scenario(
        mesh=mesh,
        material=material,
        permeability=permeability,
        gls_enabled=gls_enabled,
        dt=dt,
        bcs=bcs,
        tractions=tractions,
        label="terzaghi_column",
    )


# ---------------------------------------------------------------------------
# configuration files

_REQUIRED_KEYS = (
    "material.lambda_mpa",
    "material.mu_mpa",
    "fluid.permeability_mm4_per_Ns",
    "time.dt_s",
    "time.rate_mm_per_s",
    "time.target_strain",
)

_SCHEMA = {
    "mesh.shape": str,
    "mesh.path": str,
    "mesh.radius_mm": float,
    "mesh.height_mm": float,
    "mesh.nr": int,
    "mesh.nc": int,
    "mesh.nz": int,
    "material.lambda_mpa": float,
    "material.mu_mpa": float,
    "fluid.permeability_mm4_per_Ns": float,
    "time.dt_s": float,
    "time.rate_mm_per_s": float,
    "time.target_strain": float,
    "stabilization.gls_enabled": bool,
    "scenario.contact": str,
    "output.dir": str,
    "output.vtk_every": int,
    "output.profile_line": str,
}


@dataclass
class SimulationConfig:
    """Validated, unit-annotated run description (see _SCHEMA for keys)."""

    mesh_shape: str = "quarter_cylinder"
    mesh_path: str = ""
    radius_mm: float = 18.0
    height_mm: float = 8.0
    nr: int = 6
    nc: int = 18
    nz: int = 5
    lambda_mpa: float = 0.2
    mu_mpa: float = 0.5
    permeability: float = 1e-3
    dt_s: float = 6.4
    rate_mm_per_s: float = 2.5e-3
    target_strain: float = 0.01
    gls_enabled: bool = False
    contact: str = "frictionless"
    output_dir: str = "out"
    vtk_every: int = 1
    profile_line: str = "axis"

    def validate(self) -> None:
        if not self.mesh_path and self.mesh_shape != "quarter_cylinder":
            raise ConfigError(
                f"mesh.shape must be quarter_cylinder (or set mesh.path), "
                f"got {self.mesh_shape!r}"
            )
        if self.permeability <= 0.0:
            raise ConfigError(
                f"fluid.permeability_mm4_per_Ns must be > 0, got {self.permeability}"
            )
        if self.dt_s <= 0.0:
            raise ConfigError(f"time.dt_s must be > 0, got {self.dt_s}")
        if self.rate_mm_per_s <= 0.0:
            raise ConfigError(f"time.rate_mm_per_s must be > 0, got {self.rate_mm_per_s}")
        if not (0.0 < self.target_strain < 1.0):
            raise ConfigError(
                f"time.target_strain must be in (0, 1), got {self.target_strain}"
            )
        if self.contact not in ("frictionless", "tied"):
            raise ConfigError(f"scenario.contact must be frictionless|tied")
        if self.vtk_every < 0:
            raise ConfigError(f"output.vtk_every must be >= 0, got {self.vtk_every}")
        # constructing the params validates positivity ranges
        NeoHookeParams(lam=self.lambda_mpa, mu=self.mu_mpa)
        PermeabilityParams(k=self.permeability)

    def to_items(self) -> list:
        items = []
        if self.mesh_path:
            items.append(("mesh.path", self.mesh_path))
        else:
            items.extend(
                [
                    ("mesh.shape", self.mesh_shape),
                    ("mesh.radius_mm", self.radius_mm),
                    ("mesh.height_mm", self.height_mm),
                    ("mesh.nr", self.nr),
                    ("mesh.nc", self.nc),
                    ("mesh.nz", self.nz),
                ]
            )
        items.extend(
            [
                ("material.lambda_mpa", self.lambda_mpa),
                ("material.mu_mpa", self.mu_mpa),
                ("fluid.permeability_mm4_per_Ns", self.permeability),
                ("time.dt_s", self.dt_s),
                ("time.rate_mm_per_s", self.rate_mm_per_s),
                ("time.target_strain", self.target_strain),
                ("stabilization.gls_enabled", self.gls_enabled),
                ("scenario.contact", self.contact),
                ("output.dir", self.output_dir),
                ("output.vtk_every", self.vtk_every),
                ("output.profile_line", self.profile_line),
            ]
        )
        return items


_KEY_TO_FIELD = {
    "mesh.shape": "mesh_shape",
    "mesh.path": "mesh_path",
    "mesh.radius_mm": "radius_mm",
    "mesh.height_mm": "height_mm",
    "mesh.nr": "nr",
    "mesh.nc": "nc",
    "mesh.nz": "nz",
    "material.lambda_mpa": "lambda_mpa",
    "material.mu_mpa": "mu_mpa",
    "fluid.permeability_mm4_per_Ns": "permeability",
    "time.dt_s": "dt_s",
    "time.rate_mm_per_s": "rate_mm_per_s",
    "time.target_strain": "target_strain",
    "stabilization.gls_enabled": "gls_enabled",
    "scenario.contact": "contact",
    "output.dir": "output_dir",
    "output.vtk_every": "vtk_every",
    "output.profile_line": "profile_line",
}


def _coerce(key: str, raw: str):
    typ = _SCHEMA[key]
    if typ is bool:
        if raw.lower() in ("true", "1", "yes", "on"):
            return True
        if raw.lower() in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected true/false, got {raw!r}")
    if typ is int:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected integer, got {raw!r}")
    if typ is float:
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected number, got {raw!r}")
    return raw


def apply_overrides(config: SimulationConfig, overrides) -> SimulationConfig:
    """Apply key=value override strings (the CLI --set flag)."""
    updates = {}
    for ov in overrides:
        if "=" not in ov:
            raise ConfigError(f"override must look like key=value, got {ov!r}")
        key, raw = (s.strip() for s in ov.split("=", 1))
        if key not in _SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        updates[_KEY_TO_FIELD[key]] = _coerce(key, raw)
    cfg = replace(config, **updates)
    cfg.validate()
    return cfg


def load_config(path) -> SimulationConfig:
    """Parse and validate a config file."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {body!r}")
            key, raw = (s.strip() for s in body.split("=", 1))
            if key not in _SCHEMA:
                raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
            if key in values:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            values[key] = _coerce(key, raw)

    missing = [k for k in _REQUIRED_KEYS if k not in values]
    if missing:
        raise ConfigError(f"{path}: missing required key(s): {', '.join(missing)}")
    if "mesh.path" not in values:
        for k in ("mesh.radius_mm", "mesh.height_mm", "mesh.nr", "mesh.nc", "mesh.nz"):
            if k not in values:
                raise ConfigError(f"{path}: missing required key(s): {k}")

    cfg = SimulationConfig(**{_KEY_TO_FIELD[k]: v for k, v in values.items()})
    cfg.validate()
    return cfg


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def save_config(config: SimulationConfig, path) -> None:
    config.validate()
    lines = [f"{k} = {_format_value(v)}" for k, v in config.to_items()]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def build_mesh_from_config(config: SimulationConfig) -> Mesh:
    if config.mesh_path:
        return read_mesh(config.mesh_path)
    spec = MeshSpec(
        shape="quarter_cylinder",
        radius=config.radius_mm,
        height=config.height_mm,
        subdivisions=(config.nr, config.nc, config.nz),
    )
    return generate(spec)


def parse_profile_line(spec: str, config: SimulationConfig):
    """'axis' or 'px,py,pz,dx,dy,dz' -> (point, direction)."""
    if spec.strip() == "axis":
        return np.zeros(3), np.array([0.0, 0.0, 1.0])
    parts = [s for s in spec.replace(",", " ").split() if s]
    if len(parts) != 6:
        raise ConfigError(
            "output.profile_line must be 'axis' or six numbers px,py,pz,dx,dy,dz"
        )
    try:
        vals = [float(s) for s in parts]
    except ValueError:
        raise ConfigError(f"output.profile_line: non-numeric entry in {spec!r}")
    return np.array(vals[:3]), np.array(vals[3:])


def n_steps_from_config(config: SimulationConfig, height: float) -> int:
    """Steps needed to ramp to target_strain; dt must divide the ramp time."""
    t_total = config.target_strain * height / config.rate_mm_per_s
    n = int(round(t_total / config.dt_s))
    if n < 1 or abs(n * config.dt_s - t_total) > 1e-6 * config.dt_s:
        raise ConfigError(
            f"time.dt_s={config.dt_s} does not divide the ramp time {t_total} s "
            f"(target_strain*height/rate); choose a commensurate dt"
        )
    return n


def scenario_from_config(config: SimulationConfig, mesh: Mesh) -> Scenario:
    return build_unconfined_compression(
        mesh=mesh,
        material=NeoHookeParams(lam=config.lambda_mpa, mu=config.mu_mpa),
        permeability=PermeabilityParams(k=config.permeability),
        gls_enabled=config.gls_enabled,
        dt=config.dt_s,
        rate=config.rate_mm_per_s,
        contact=config.contact,
    )
