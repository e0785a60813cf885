"""Data models for logconvex_lab."""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from logconvex_lab.core.errors import (
    InvalidGeometryError,
    InvalidInputError,
    SupercriticalError,
)


# Type alias for progress callbacks: (current, total, message)
ProgressCallback = Callable[[int, int, str], None]

DOMAIN_KINDS = ("interval", "rectangle", "radial_ball")
WEIGHT_FAMILIES = ("zero", "heat_kernel", "quadratic", "radial_poly")


def _as_point(value: Any, name: str) -> Tuple[float, ...]:
    if isinstance(value, Real):
        return (float(value),)
    try:
        point = tuple(float(v) for v in value)
    except TypeError:
        raise InvalidInputError(f"{name} must be a point, got {value!r}") from None
    if not point:
        raise InvalidInputError(f"{name} must not be empty")
    return point


@dataclass(slots=True, frozen=True)
class Box:
    """Axis-aligned box [lower, upper] used as an observation region."""
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "lower", _as_point(self.lower, "box lower corner"))
        object.__setattr__(self, "upper", _as_point(self.upper, "box upper corner"))
        if len(self.lower) != len(self.upper):
            raise InvalidInputError("box corners have different dimensions")
        if any(hi <= lo for lo, hi in zip(self.lower, self.upper)):
            raise InvalidInputError(f"empty box {self.lower}..{self.upper}")

    @property
    def measure(self) -> float:
        return math.prod(hi - lo for lo, hi in zip(self.lower, self.upper))

    def to_dict(self) -> Dict[str, Any]:
        return {"type": "box", "lower": list(self.lower), "upper": list(self.upper)}


@dataclass(slots=True, frozen=True)
class Annulus:
    """Radial shell {r_inner < |x - center| < r_outer}; r_inner = 0 gives a ball."""
    center: Tuple[float, ...]
    r_inner: float
    r_outer: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", _as_point(self.center, "annulus center"))
        if self.r_inner < 0 or self.r_outer <= self.r_inner:
            raise InvalidInputError(
                f"annulus radii must satisfy 0 <= r_inner < r_outer, got "
                f"({self.r_inner}, {self.r_outer})"
            )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": "annulus",
            "center": list(self.center),
            "r_inner": self.r_inner,
            "r_outer": self.r_outer,
        }


Region = Union[str, Box, Annulus, np.ndarray]


def region_from_dict(data: Dict[str, Any]) -> Union[Box, Annulus]:
    """Build a Box or Annulus from its JSON form."""
    kind = data.get("type", "box")
    if kind == "box":
        return Box(lower=data["lower"], upper=data["upper"])
    if kind in ("annulus", "ball"):
        return Annulus(
            center=data.get("center", (0.0,)),
            r_inner=float(data.get("r_inner", 0.0)),
            r_outer=float(data["r_outer"]),
        )
    raise InvalidInputError(f"unknown region type: {kind!r}")


@dataclass(slots=True)
class DomainSpec:
    """Geometry, anchor point, potential and observation region."""
    kind: str
    n: int
    extents: Tuple[float, ...]
    x0: Tuple[float, ...]
    mu: float = 0.0
    omega: Tuple[Union[Box, Annulus], ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in DOMAIN_KINDS:
            raise InvalidInputError(f"unknown domain kind: {self.kind!r}")
        self.extents = _as_point(self.extents, "extents")
        self.x0 = _as_point(self.x0, "x0")
        self.omega = tuple(self.omega)
        if any(e <= 0 for e in self.extents):
            raise InvalidInputError(f"extents must be positive, got {self.extents}")

        if self.kind == "interval":
            self._expect(n=1, axes=1)
        elif self.kind == "rectangle":
            self._expect(n=2, axes=2)
        else:
            if self.n < 3:
                raise InvalidInputError("radial_ball requires n >= 3")
            if len(self.extents) != 1:
                raise InvalidInputError("radial_ball takes a single extent (the radius)")
            if any(c != 0.0 for c in self.x0):
                raise InvalidGeometryError("radial_ball is centred at the origin; x0 must be 0")
            critical = (self.n - 2) ** 2 / 4.0
            if self.mu >= critical:
                raise SupercriticalError(
                    f"mu={self.mu} is not below the critical value {critical} for n={self.n}"
                )
        if self.kind != "radial_ball" and self.mu != 0.0:
            raise InvalidInputError("an inverse-square potential needs a radial_ball domain")
        if self.mu < 0:
            raise InvalidInputError("mu must be nonnegative")

        if self.kind != "radial_ball" and not self.contains(self.x0):
            raise InvalidGeometryError(f"x0={self.x0} is outside the domain")
        for region in self.omega:
            self._check_region(region)

    def _expect(self, n: int, axes: int) -> None:
        if self.n != n or len(self.extents) != axes or len(self.x0) != axes:
            raise InvalidInputError(
                f"{self.kind} needs n={n} with {axes} extent(s) and a {axes}-d anchor"
            )

    def contains(self, point: Sequence[float]) -> bool:
        if self.kind == "radial_ball":
            return math.hypot(*point) <= self.extents[0]
        return all(0.0 <= p <= e for p, e in zip(point, self.extents))

    def _check_region(self, region: Union[Box, Annulus]) -> None:
        if self.kind == "radial_ball":
            if not isinstance(region, Annulus) or any(c != 0.0 for c in region.center):
                raise InvalidGeometryError("radial domains accept origin-centred annuli only")
            if region.r_outer > self.extents[0]:
                raise InvalidGeometryError(f"annulus radius {region.r_outer} exceeds the ball")
            return
        if isinstance(region, Box):
            if len(region.lower) != len(self.extents):
                raise InvalidGeometryError("box dimension does not match the domain")
            inside = all(
                lo >= 0.0 and hi <= e
                for lo, hi, e in zip(region.lower, region.upper, self.extents)
            )
        else:
            if len(region.center) != len(self.extents):
                raise InvalidGeometryError("annulus dimension does not match the domain")
            inside = all(
                c - region.r_outer >= 0.0 and c + region.r_outer <= e
                for c, e in zip(region.center, self.extents)
            )
        if not inside:
            raise InvalidGeometryError(f"observation region {region} leaves the domain")

    @property
    def measure(self) -> float:
        if self.kind == "radial_ball":
            return ball_volume(self.n, self.extents[0])
        return math.prod(self.extents)

    @property
    def critical_mu(self) -> float:
        return (self.n - 2) ** 2 / 4.0

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DomainSpec":
        """Create from the JSON form (keys: kind, n, extents, x0, mu, omega)."""
        if "kind" not in data:
            raise InvalidInputError("domain spec needs a 'kind'")
        kind = data["kind"]
        n = int(data.get("n", {"interval": 1, "rectangle": 2}.get(kind, 3)))
        extents = data.get("extents", math.pi)
        default_x0 = [0.0] * n if kind == "radial_ball" else [e / 2 for e in _as_point(extents, "extents")]
        return cls(
            kind=kind,
            n=n,
            extents=extents,
            x0=data.get("x0", default_x0),
            mu=float(data.get("mu", 0.0)),
            omega=tuple(region_from_dict(r) for r in data.get("omega", [])),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "n": self.n,
            "extents": list(self.extents),
            "x0": list(self.x0),
            "mu": self.mu,
            "omega": [r.to_dict() for r in self.omega],
        }


def sphere_area(n: int) -> float:
    """Surface measure |S^{n-1}| of the unit sphere in R^n."""
    from scipy.special import gamma

    return 2.0 * math.pi ** (n / 2) / float(gamma(n / 2))


def ball_volume(n: int, radius: float) -> float:
    return sphere_area(n) * radius ** n / n


@dataclass(slots=True)
class Grid:
    """Quadrature grid.

    Cartesian grids carry nodes that include the boundary. Radial grids carry
    cell centres (i + 1/2)h, so rho = 0 is never a node.
    """
    kind: str
    axes: Tuple[np.ndarray, ...]
    spacing: Tuple[float, ...]
    weights: np.ndarray
    extents: Tuple[float, ...]
    n: int
    origin_offset: bool = False
    rule: str = "trapezoid"
    omega_weights: Optional[np.ndarray] = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(len(a) for a in self.axes)

    @property
    def is_radial(self) -> bool:
        return self.kind == "radial_ball"

    @property
    def measure(self) -> float:
        return float(self.weights.sum())

    def coordinates(self) -> Tuple[np.ndarray, ...]:
        """Node coordinates broadcast to the grid shape."""
        return tuple(np.meshgrid(*self.axes, indexing="ij"))

    def distance_from(self, x0: Sequence[float]) -> np.ndarray:
        """|x - x0| at every node; radial grids measure from the origin."""
        if self.is_radial:
            return self.axes[0].copy()
        coords = self.coordinates()
        return np.sqrt(sum((c - p) ** 2 for c, p in zip(coords, x0)))


@dataclass(slots=True)
class Field:
    """Samples of a scalar function on a Grid."""
    values: np.ndarray
    grid: Grid

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise InvalidInputError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise InvalidInputError("field contains non-finite samples")

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(values=values, grid=self.grid)


@dataclass(slots=True)
class EigenSystem:
    """Dirichlet eigenpairs, either analytic (sine modes) or sampled (radial)."""
    kind: str
    eigenvalues: np.ndarray
    extents: Tuple[float, ...]
    modes: np.ndarray
    profiles: Optional[np.ndarray] = None
    grid: Optional[Grid] = None
    n: int = 1
    mu: float = 0.0
    normalization: str = "unit L2 norm"
    residual: float = 0.0

    @property
    def count(self) -> int:
        return int(len(self.eigenvalues))

    def summary(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "count": self.count,
            "n": self.n,
            "mu": self.mu,
            "extents": list(self.extents),
            "eigenvalues": self.eigenvalues.tolist(),
            "normalization": self.normalization,
            "residual": self.residual,
        }


@dataclass(slots=True)
class SpectralState:
    """Solution of the heat flow as eigen-coefficients at time t."""
    coefficients: np.ndarray
    system: EigenSystem
    t: float = 0.0

    def __post_init__(self) -> None:
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        if self.coefficients.shape != (self.system.count,):
            raise InvalidInputError(
                f"{self.coefficients.shape[0] if self.coefficients.ndim else 0} coefficients "
                f"for {self.system.count} modes"
            )
        if not np.all(np.isfinite(self.coefficients)):
            raise InvalidInputError("coefficients must be finite")
        if self.t < 0:
            raise InvalidInputError("state time must be >= 0")

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coefficients)


@dataclass(slots=True)
class EvolutionTrace:
    """Norms of an evolving state at increasing sample times."""
    times: List[float] = field(default_factory=list)
    l2: List[float] = field(default_factory=list)
    form: List[float] = field(default_factory=list)
    l2_omega: List[float] = field(default_factory=list)
    l1_omega: List[float] = field(default_factory=list)

    COLUMNS = ("t", "l2", "form", "l2_omega", "l1_omega")

    def rows(self) -> List[Tuple[float, ...]]:
        return list(zip(self.times, self.l2, self.form, self.l2_omega, self.l1_omega))


@dataclass(slots=True)
class WeightSpec:
    """A weight family Phi anchored at x0 on the window Upsilon = T - t + hbar."""
    family: str
    x0: Tuple[float, ...]
    T: float
    hbar: float
    a: float = 0.25
    b: float = 0.25
    c: float = 1.0 / 81.0
    s: float = 4.0 / 3.0
    n: int = 1
    log_term: bool = True

    def __post_init__(self) -> None:
        if self.family not in WEIGHT_FAMILIES:
            raise InvalidInputError(f"unknown weight family: {self.family!r}")
        self.x0 = _as_point(self.x0, "weight anchor")
        if self.hbar <= 0:
            raise InvalidInputError("hbar must be positive")
        if self.T <= 0:
            raise InvalidInputError("T must be positive")
        if self.family == "heat_kernel" and self.n < 1:
            raise InvalidInputError("heat_kernel needs n >= 1")
        if self.family == "radial_poly":
            if min(self.a, self.b, self.c) <= 0:
                raise InvalidInputError("radial_poly needs a, b, c > 0")
            if not 1.0 <= self.s < 2.0:
                raise InvalidInputError("radial_poly needs 1 <= s < 2")

    def upsilon(self, t: float) -> float:
        return self.T - t + self.hbar

    @classmethod
    def from_dict(cls, data: Dict[str, Any], x0: Optional[Sequence[float]] = None) -> "WeightSpec":
        """Create from the JSON form (keys: family, x0, T, hbar, a, b, c, s, n)."""
        kwargs: Dict[str, Any] = {
            "family": data.get("family", "quadratic"),
            "x0": data.get("x0", x0 if x0 is not None else (0.0,)),
            "T": float(data.get("T", 1.0)),
            "hbar": float(data.get("hbar", 0.1)),
        }
        for key in ("a", "b", "c", "s"):
            if key in data:
                kwargs[key] = float(Fraction(str(data[key])))
        if "n" in data:
            kwargs["n"] = int(data["n"])
        if "log_term" in data:
            kwargs["log_term"] = bool(data["log_term"])
        return cls(**kwargs)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "x0": list(self.x0),
            "T": self.T,
            "hbar": self.hbar,
            "a": self.a,
            "b": self.b,
            "c": self.c,
            "s": self.s,
            "n": self.n,
            "log_term": self.log_term,
        }


@dataclass(slots=True)
class WeightStack:
    """Derivative bundle of Phi at one point (x, t)."""
    phi: float
    grad: np.ndarray
    hessian: np.ndarray
    laplacian: float
    bilaplacian: float
    dt: float
    dtt: float
    grad_dt: np.ndarray
    eta: float
    grad_eta: np.ndarray
    dt_eta: float
    upsilon: float


@dataclass(slots=True)
class GridWeightStack:
    """Derivative bundle of a radial weight sampled on a grid.

    Every family is radial about x0, so gradients are stored as the radial
    derivative phi_r together with the unit vector field (x - x0)/|x - x0|.
    """
    r: np.ndarray
    unit: Tuple[np.ndarray, ...]
    phi: np.ndarray
    phi_r: np.ndarray
    phi_rr: np.ndarray
    phi_r_over_r: np.ndarray
    laplacian: np.ndarray
    bilaplacian: np.ndarray
    dt: np.ndarray
    dtt: np.ndarray
    dt_r: np.ndarray
    eta: np.ndarray
    eta_r: np.ndarray
    dt_eta: np.ndarray
    potential: np.ndarray
    singular: np.ndarray
    upsilon: float
    rate: float


@dataclass(slots=True)
class ProfileReport:
    """Radial profile W(rho) = -a rho² + b rho^s - c on sample radii."""
    rho: List[float]
    values: List[float]
    derivative: List[float]
    critical_radius: Optional[float]
    value_at_zero: float
    supremum: float
    nonpositive: bool
    decreasing_beyond_one: bool


@dataclass(slots=True, frozen=True)
class CutoffSpec:
    """Radial cutoff chi: 1 for |x - x0| <= inner, 0 for |x - x0| >= outer."""
    x0: Tuple[float, ...]
    inner: float
    outer: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "x0", _as_point(self.x0, "cutoff anchor"))
        if not 0 < self.inner < self.outer:
            raise InvalidGeometryError(
                f"cutoff radii must satisfy 0 < inner < outer, got ({self.inner}, {self.outer})"
            )

    @classmethod
    def from_geometry(
        cls,
        x0: Sequence[float],
        R: float,
        delta: float,
        R0: Optional[float] = None,
    ) -> "CutoffSpec":
        """Cutoff equal to 1 on |x - x0| <= (1 + 3 delta / 2) R, supported in B(x0, R0).

        R0 defaults to (1 + 2 delta) R.
        """
        if not 0 < delta <= 1:
            raise InvalidInputError("delta must lie in (0, 1]")
        outer = (1 + 2 * delta) * R if R0 is None else R0
        return cls(x0=tuple(x0), inner=(1 + 1.5 * delta) * R, outer=outer)


@dataclass(slots=True)
class FrequencyTrace:
    """Time series of ||f||^2, N, rest term and boundary term."""
    times: List[float] = field(default_factory=list)
    f_norm_sq: List[float] = field(default_factory=list)
    frequency: List[float] = field(default_factory=list)
    rest_term: List[float] = field(default_factory=list)
    boundary_term: List[float] = field(default_factory=list)
    truncated: bool = False
    truncated_at: Optional[float] = None

    COLUMNS = ("t", "f_norm_sq", "N", "rest_term", "boundary_term")

    def rows(self) -> List[Tuple[float, ...]]:
        return list(zip(self.times, self.f_norm_sq, self.frequency, self.rest_term, self.boundary_term))


@dataclass(slots=True)
class DifferentialCheck:
    """A frequency trace with its two differential-inequality verdicts."""
    trace: FrequencyTrace
    energy: "InequalityReport"
    frequency: "InequalityReport"

    @property
    def passed(self) -> bool:
        return self.energy.passed and self.frequency.passed


@dataclass(slots=True)
class CommutatorReport:
    """Both evaluations of <-(S' + [S, A]) f, f> and the (1/Upsilon) comparator."""
    lhs: float
    rhs_formula: float
    comparator: float
    boundary_term: float
    upsilon: float
    rate: float
    excluded_ring: int = 0

    @property
    def identity_residual(self) -> float:
        return self.lhs - self.rhs_formula

    @property
    def sign_margin(self) -> float:
        """lhs - comparator; nonpositive when the commutator condition holds."""
        return self.lhs - self.comparator

    @property
    def relative_identity_residual(self) -> float:
        return abs(self.identity_residual) / max(abs(self.lhs), 1e-300)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lhs": self.lhs,
            "rhs_formula": self.rhs_formula,
            "comparator": self.comparator,
            "boundary_term": self.boundary_term,
            "identity_residual": self.identity_residual,
            "relative_identity_residual": self.relative_identity_residual,
            "sign_margin": self.sign_margin,
            "upsilon": self.upsilon,
            "rate": self.rate,
            "excluded_ring": self.excluded_ring,
        }


@dataclass(slots=True)
class InequalityReport:
    """Sampled lhs <= rhs comparison; passed iff min(slack) >= -tolerance."""
    name: str
    lhs: List[float]
    rhs: List[float]
    slack: List[float]
    tolerance: float
    passed: bool
    log_scale: bool = False
    context: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_sides(
        cls,
        name: str,
        lhs: Sequence[float],
        rhs: Sequence[float],
        tolerance: float,
        context: Optional[Dict[str, Any]] = None,
        log_scale: bool = False,
        slack: Optional[Sequence[float]] = None,
    ) -> "InequalityReport":
        lhs_list = [float(v) for v in lhs]
        rhs_list = [float(v) for v in rhs]
        if slack is None:
            slack_list = [r - l for l, r in zip(lhs_list, rhs_list)]
        else:
            slack_list = [float(v) for v in slack]
        passed = all(s >= -tolerance for s in slack_list)
        return cls(
            name=name,
            lhs=lhs_list,
            rhs=rhs_list,
            slack=slack_list,
            tolerance=tolerance,
            passed=passed,
            log_scale=log_scale,
            context=dict(context or {}),
        )

    @property
    def min_slack(self) -> float:
        return min(self.slack) if self.slack else math.inf

    @property
    def violations(self) -> List[int]:
        return [i for i, s in enumerate(self.slack) if s < -self.tolerance]


Number = Union[int, float, Fraction]


@dataclass(slots=True)
class RadialWeightParams:
    """Parameters of the annulus weight phi = -a rho^2 + b rho^s - c in dimension n."""
    n: int
    a: Number
    b: Number
    c: Number
    s: Number
    mu: Number = 0
    R0: Number = 1

    def __post_init__(self) -> None:
        if self.n < 3:
            raise InvalidInputError("radial weights need n >= 3")
        if min(self.a, self.b, self.c) <= 0:
            raise InvalidInputError("a, b, c must be positive")
        if not 1 <= self.s < 2:
            raise InvalidInputError("s must lie in [1, 2)")
        if self.mu < 0:
            raise InvalidInputError("mu must be nonnegative")
        if self.mu > 0 and self.mu >= Fraction((self.n - 2) ** 2, 4):
            raise SupercriticalError(f"mu={self.mu} is not subcritical for n={self.n}")
        if self.R0 <= 0:
            raise InvalidInputError("R0 must be positive")

    @property
    def exact(self) -> bool:
        return all(
            isinstance(v, (int, Fraction)) for v in (self.a, self.b, self.c, self.s, self.mu)
        )

    def astuple(self) -> Tuple[Number, Number, Number, Number]:
        return (self.a, self.b, self.c, self.s)


# Zeroth-order coefficient keys: (upsilon power, rho power)
CoefficientKey = Tuple[int, Number]


@dataclass(slots=True)
class CoefficientTable:
    """Per-(Upsilon-power, rho-power) coefficients of the radial commutator difference."""
    params: RadialWeightParams
    gradient: Number
    hardy_term: Number
    bracket_gradient: Number
    bracket_radial: Number
    zeroth: Dict[str, Tuple[CoefficientKey, Number]]

    def group(self, upsilon_power: int) -> Dict[Number, Number]:
        """Zeroth-order coefficients of one Upsilon power with equal rho powers merged."""
        merged: Dict[Number, Number] = {}
        for (power_u, power_rho), coefficient in self.zeroth.values():
            if power_u != upsilon_power:
                continue
            key = _merge_key(power_rho, merged)
            merged[key] = merged.get(key, 0) + coefficient
        return dict(sorted(merged.items(), key=lambda kv: float(kv[0])))


def _merge_key(power: Number, existing: Dict[Number, Number]) -> Number:
    if isinstance(power, float):
        for key in existing:
            if abs(float(key) - power) <= 1e-12:
                return key
    return power


@dataclass(slots=True)
class GroupVerdict:
    """Sign verdict of one coefficient group."""
    name: str
    passed: bool
    margin: float
    detail: str = ""


@dataclass(slots=True)
class SignCertificate:
    """Nonpositivity certificate of the radial commutator difference."""
    groups: Dict[str, GroupVerdict]
    worst_margin: float
    trail: List[Dict[str, Any]]
    certified: bool

    @property
    def verdict(self) -> str:
        return "certified" if self.certified else "not-certified"


@dataclass(slots=True)
class SearchResult:
    """Outcome of a deterministic parameter scan."""
    feasible: List[Tuple[float, float, float, float]]
    best: Optional[Tuple[float, float, float, float]]
    best_mu: Optional[float]
    evaluated: int


@dataclass(slots=True)
class ConstantEntry:
    """A named constant kept in log space; value is None when it overflows a float."""
    name: str
    log_value: Optional[float]
    formula: str
    provenance: str
    value: Optional[float] = None

    def __post_init__(self) -> None:
        if self.value is None and self.log_value is not None and self.log_value < 700:
            self.value = math.exp(self.log_value)


@dataclass(slots=True)
class ConstantChain:
    """Ordered collection of named constants."""
    name: str
    entries: Dict[str, ConstantEntry] = field(default_factory=dict)

    def add(
        self,
        name: str,
        value: Optional[float],
        formula: str,
        provenance: str,
        log_value: Optional[float] = None,
    ) -> None:
        if log_value is None and value is not None and value > 0:
            log_value = math.log(value)
        self.entries[name] = ConstantEntry(
            name=name, log_value=log_value, formula=formula, provenance=provenance, value=value
        )

    def __getitem__(self, name: str) -> ConstantEntry:
        return self.entries[name]

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def value(self, name: str) -> float:
        entry = self.entries[name]
        if entry.value is None:
            raise InvalidInputError(f"{name} overflows a float; use log_value")
        return entry.value

    def log(self, name: str) -> float:
        entry = self.entries[name]
        if entry.log_value is None:
            raise InvalidInputError(f"{name} has no logarithm (nonpositive)")
        return entry.log_value


@dataclass(slots=True)
class ObservationReport:
    """One measured one-time observation: lhs = ||u(T)||, observed = ||u(T)||_omega, total = ||u0||."""
    T: float
    lhs: float
    observed: float
    total: float

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ObservationReport":
        return cls(
            T=float(data["T"]),
            lhs=float(data["lhs"]),
            observed=float(data["observed"]),
            total=float(data["total"]),
        )


@dataclass(slots=True)
class FitResult:
    """Constants (c, K, beta) fitted to observation reports."""
    c: float
    K: float
    beta: float
    log_c: float
    max_violation: float
    mean_slack: float
    residuals: List[float]
    feasible: bool
    sweeps: int


@dataclass(slots=True)
class RunConfig:
    """Everything one CLI run needs; defaults are echoed back into reports."""
    domain: Dict[str, Any] = field(default_factory=lambda: {
        "kind": "interval",
        "n": 1,
        "extents": [math.pi],
        "x0": [math.pi / 2],
        "mu": 0.0,
        "omega": [{"type": "box", "lower": [1.0], "upper": [2.0]}],
    })
    weight: Dict[str, Any] = field(default_factory=lambda: {"family": "quadratic"})
    experiment: Dict[str, Any] = field(default_factory=dict)
    window: Dict[str, float] = field(default_factory=lambda: {"T": 1.0, "hbar": 0.1, "ell": 2.0})
    seed: int = 0
    seeds: int = 10
    grid: int = 1024
    modes: int = 64
    tolerance: float = 1e-6
    samples: int = 9
    search: Dict[str, Any] = field(default_factory=dict)
    sweep: Dict[str, Any] = field(default_factory=dict)
    constants: Dict[str, Any] = field(default_factory=dict)
    outputs: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        config = cls()
        known = set(config.to_dict())
        unknown = set(data) - known
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        for key, value in data.items():
            default = getattr(config, key)
            if isinstance(default, dict) and key == "window":
                merged = dict(default)
                merged.update(value)
                value = merged
            setattr(config, key, value)
        if int(config.grid) < 8:
            raise InvalidInputError("grid must have at least 8 cells")
        if int(config.modes) < 1:
            raise InvalidInputError("modes must be >= 1")
        if int(config.seed) < 0:
            raise InvalidInputError("seed must be a nonnegative integer")
        return config

    def to_dict(self) -> Dict[str, Any]:
        return {
            "domain": self.domain,
            "weight": self.weight,
            "experiment": self.experiment,
            "window": self.window,
            "seed": self.seed,
            "seeds": self.seeds,
            "grid": self.grid,
            "modes": self.modes,
            "tolerance": self.tolerance,
            "samples": self.samples,
            "search": self.search,
            "sweep": self.sweep,
            "constants": self.constants,
            "outputs": self.outputs,
        }


@dataclass(slots=True)
class ReportDocument:
    """JSON report written by every CLI run."""
    experiment: str
    config: Dict[str, Any]
    verdict: str
    payload: Dict[str, Any]
    version: str
    elapsed_seconds: float = 0.0

    VERDICTS = ("pass", "fail", "exploratory")

    def __post_init__(self) -> None:
        if self.verdict not in self.VERDICTS:
            raise InvalidInputError(f"verdict must be one of {self.VERDICTS}")

    @property
    def exit_code(self) -> int:
        return 1 if self.verdict == "fail" else 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "experiment": self.experiment,
            "config": self.config,
            "verdict": self.verdict,
            "payload": self.payload,
            "version": self.version,
            "elapsed_seconds": self.elapsed_seconds,
        }


@dataclass(slots=True)
class ExperimentOutcome:
    """What one experiment handler hands back to the CLI: verdict, payload and CSV tables."""
    verdict: str
    payload: Dict[str, Any]
    plots: Dict[str, Any] = field(default_factory=dict)
