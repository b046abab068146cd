"""Bundled example problems with closed-form oracles.

Each constructor returns a descriptor bundling the problem, recommended
charts and weight, an oracle where a closed form exists, default paths for
tracing, and samplers for randomized tests. Behavior tags classify what the
example demonstrates: a solvable problem, an open (multi-sheet) lift, a rank
loss, or a growth-bound violation.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy.optimize import brentq

from .charts import ChartPair, identity_chart, psi_from_scalar_solution, tangent_box_chart
from .errors import DegenerateTube, InvalidParams, UnknownExample
from .problem import Box, ImplicitProblem
from .tracer import CirclePath, PolylinePath, SegmentPath
from .weights import Weight

SOLVABLE = "solvable"
MONODROMY_OPEN = "monodromy-open"
RANK_LOSS_AT_POINT = "rank-loss-at-point"
GROWTH_BOUND_FAILS = "growth-bound-fails"

ROTATE_QUARTER = np.array([[0.0, -1.0], [1.0, 0.0]])


@dataclasses.dataclass
class ExampleDescriptor:
    name: str
    parameters: dict
    problem: ImplicitProblem
    tags: frozenset
    charts: ChartPair = None
    weight: Weight = None
    oracle: object = None             # x -> y (closed form)
    oracle_derivative: object = None  # x -> (n, m) array
    default_path: object = None
    default_y_start: np.ndarray = None
    monodromy_loop: object = None
    expected_gap: float = None
    x_sampler: object = None          # (rng, count) -> (count, m) oracle-valid targets
    sample_box_x: Box = None          # finite window for random in-domain points
    sample_box_y: Box = None
    straight_planning: bool = True
    notes: str = ""

    def __repr__(self):
        return f"ExampleDescriptor({self.name}, tags={sorted(self.tags)})"


def diode_circuit(a1=1.0, a2=1.0, b1=1.0, b2=1.0,
                  v_bounds=(-5.0, 4.0), i_bounds=(-1.99, 110.0)):
    """Two exponential diodes in parallel driven by a current source.

    The defining relation is I = f(V) with
    f(V) = a1 (exp(V/b1) - 1) + a2 (exp(V/b2) - 1), solved for V as a
    function of I. With symmetric parameters the solution has the closed form
    V = b ln(1 + I / (2 a)).
    """
    for label, value in (("a1", a1), ("a2", a2), ("b1", b1), ("b2", b2)):
        if value <= 0.0:
            raise InvalidParams(f"{label} must be positive, got {value}")
    v_lo, v_hi = float(v_bounds[0]), float(v_bounds[1])
    i_lo, i_hi = float(i_bounds[0]), float(i_bounds[1])
    if not (v_lo < 0.0 < v_hi and i_lo < 0.0 < i_hi):
        raise InvalidParams("bounds must be open intervals containing 0")

    def f(v):
        return a1 * np.expm1(v / b1) + a2 * np.expm1(v / b2)

    def f_prime(v):
        return (a1 / b1) * np.exp(v / b1) + (a2 / b2) * np.exp(v / b2)

    # the solvable current window is f(Y) intersected with X; it may be a
    # proper subset of X (currents the diodes cannot realize)
    window_lo = max(i_lo, float(f(v_lo)))
    window_hi = min(i_hi, float(f(v_hi)))
    if not window_lo < 0.0 < window_hi:
        raise InvalidParams("the solvable current window must contain 0; got "
                            f"({window_lo:.4g}, {window_hi:.4g})")

    def residual(x, y):
        return np.array([x[0] - f(y[0])])

    def jac_x(x, y):
        return np.array([[1.0]])

    def jac_y(x, y):
        return np.array([[-f_prime(y[0])]])

    problem = ImplicitProblem(
        1, 1, 1, residual, [0.0], [0.0],
        jac_x_fn=jac_x, jac_y_fn=jac_y,
        domain_x=Box([i_lo], [i_hi]), domain_y=Box([v_lo], [v_hi]),
        name="diode",
        parameters={"a1": a1, "a2": a2, "b1": b1, "b2": b2,
                    "v_bounds": [v_lo, v_hi], "i_bounds": [i_lo, i_hi]})

    # psi lives on the y-projection of the zero set: the voltages whose
    # current lands inside X
    psi_lo = v_lo if f(v_lo) >= i_lo else float(brentq(
        lambda v: f(v) - i_lo, v_lo, v_hi, xtol=1e-14))
    psi_hi = v_hi if f(v_hi) <= i_hi else float(brentq(
        lambda v: f(v) - i_hi, v_lo, v_hi, xtol=1e-14))
    phi = tangent_box_chart([i_lo], [i_hi])
    psi = psi_from_scalar_solution(phi, lambda v: f(v), f_prime=lambda v: f_prime(v),
                                   domain=Box([psi_lo], [psi_hi]))

    oracle = None
    oracle_derivative = None
    if a1 == a2 and b1 == b2:
        def oracle(x):
            return np.array([b1 * np.log1p(x[0] / (2.0 * a1))])

        def oracle_derivative(x):
            return np.array([[b1 / (2.0 * a1 + x[0])]])

    lo = max(i_lo, float(f(v_lo + 0.05 * (v_hi - v_lo))))
    hi = min(i_hi, float(f(v_hi - 0.05 * (v_hi - v_lo))))
    lo, hi = lo + 0.01 * (hi - lo), hi - 0.01 * (hi - lo)

    def x_sampler(rng, count):
        return rng.uniform(lo, hi, size=(count, 1))

    return ExampleDescriptor(
        name="diode",
        parameters=problem.parameters,
        problem=problem,
        tags=frozenset({SOLVABLE}),
        charts=ChartPair(phi, psi),
        weight=Weight.affine(1.0, 1.0),
        oracle=oracle,
        oracle_derivative=oracle_derivative,
        default_path=SegmentPath([0.0], [2.0]),
        default_y_start=np.array([0.0]),
        monodromy_loop=PolylinePath([[0.0], [2.0], [0.0]]),
        expected_gap=0.0,
        x_sampler=x_sampler,
        sample_box_x=Box([lo], [hi]),
        sample_box_y=Box([v_lo], [v_hi]),
        notes="operating-voltage-from-current problem; recommended psi composes "
              "the x-chart with the solved relation, giving growth LHS = 1",
    )


def line_problem(y_interval=(-1.0, 1.0)):
    """F(x, y) = x - y on R x (an open interval, or all of R).

    With matched charts (phi = psi on the interval) the growth bound holds
    with LHS = 1; an unmatched pair (identity on R, tangent-box on the
    interval) makes the LHS blow up toward the interval's ends.
    """
    if y_interval is None:
        domain_y = Box.unbounded(1)
        charts = ChartPair(identity_chart(1), identity_chart(1))
        lo, hi = -10.0, 10.0
    else:
        lo, hi = float(y_interval[0]), float(y_interval[1])
        if not lo < 0.0 < hi:
            raise InvalidParams("y interval must contain 0")
        domain_y = Box([lo], [hi])
        tb = tangent_box_chart([lo], [hi])
        charts = ChartPair(tb, tb)

    def residual(x, y):
        return np.array([x[0] - y[0]])

    problem = ImplicitProblem(
        1, 1, 1, residual, [0.0], [0.0],
        jac_x_fn=lambda x, y: np.array([[1.0]]),
        jac_y_fn=lambda x, y: np.array([[-1.0]]),
        domain_y=domain_y,
        name="line",
        parameters={"y_interval": None if y_interval is None else [lo, hi]})

    inner_lo, inner_hi = lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo)

    def x_sampler(rng, count):
        return rng.uniform(inner_lo, inner_hi, size=(count, 1))

    span = 0.995 * hi if y_interval is not None else 5.0
    return ExampleDescriptor(
        name="line",
        parameters=problem.parameters,
        problem=problem,
        tags=frozenset({SOLVABLE}),
        charts=charts,
        weight=Weight.affine(1.0, 1.0),
        oracle=lambda x: x.copy(),
        oracle_derivative=lambda x: np.array([[1.0]]),
        default_path=SegmentPath([-span], [span]),
        default_y_start=np.array([-span]),
        monodromy_loop=PolylinePath([[0.0], [span], [0.0]]),
        expected_gap=0.0,
        x_sampler=x_sampler,
        sample_box_x=Box([inner_lo], [inner_hi]),
        sample_box_y=Box([lo], [hi]),
    )


def circle_in_x():
    """F(x1, x2, y) = (x1 - cos y, x2 - sin y); the x-projection is a circle.

    The zero set spirals over the unit circle: one x-turn advances y by
    2 pi, so closed loops lift open and no global single-valued solution
    exists.
    """
    def residual(x, y):
        return np.array([x[0] - np.cos(y[0]), x[1] - np.sin(y[0])])

    def jac_x(x, y):
        return np.eye(2)

    def jac_y(x, y):
        return np.array([[np.sin(y[0])], [-np.cos(y[0])]])

    problem = ImplicitProblem(
        2, 1, 2, residual, [1.0, 0.0], [0.0],
        jac_x_fn=jac_x, jac_y_fn=jac_y,
        name="circle-x", parameters={})

    def oracle(x):
        return np.array([np.arctan2(x[1], x[0])])

    def oracle_derivative(x):
        r2 = x[0] ** 2 + x[1] ** 2
        return np.array([[-x[1] / r2, x[0] / r2]])

    def x_sampler(rng, count):
        theta = rng.uniform(-np.pi + 0.1, np.pi - 0.1, size=count)
        return np.column_stack([np.cos(theta), np.sin(theta)])

    return ExampleDescriptor(
        name="circle-x",
        parameters={},
        problem=problem,
        tags=frozenset({MONODROMY_OPEN}),
        oracle=oracle,
        oracle_derivative=oracle_derivative,
        default_path=CirclePath([0.0, 0.0], 1.0, turns=0.25, start_angle=0.0),
        default_y_start=np.array([0.0]),
        monodromy_loop=CirclePath([0.0, 0.0], 1.0, turns=1.0, start_angle=0.0),
        expected_gap=2.0 * np.pi,
        x_sampler=x_sampler,
        sample_box_y=Box([-7.0], [7.0]),
        straight_planning=False,
        notes="x-targets must stay on the unit circle; plan with arcs",
    )


def annulus(delta=0.5, alpha=1.0, eps=1.0):
    """Annulus-sheet counterexample: x = (alpha + y2) (sin(k y1), cos(k y1)).

    With angular rate k = (2 pi / delta) (1 + eps) the map wraps the y-strip
    (0, delta) x (0, 1) more than once around the annulus, so an x-loop at
    fixed radius advances y1 by delta / (1 + eps) instead of closing.
    """
    if not 0.0 < delta <= 0.5:
        raise InvalidParams(f"need 0 < delta <= 1/2, got {delta}")
    if alpha <= 0.0 or eps <= 0.0:
        raise InvalidParams("alpha and eps must be positive")
    k = (2.0 * np.pi / delta) * (1.0 + eps)

    def sheet(y):
        radius = alpha + y[1]
        return np.array([radius * np.sin(k * y[0]), radius * np.cos(k * y[0])])

    def sheet_jac(y):
        radius = alpha + y[1]
        s = np.sin(k * y[0])
        c = np.cos(k * y[0])
        return np.array([[radius * k * c, s], [-radius * k * s, c]])

    def residual(x, y):
        return x - sheet(y)

    y_seed = np.array([delta / 5.0, 0.5])
    x_seed = sheet(y_seed)

    problem = ImplicitProblem(
        2, 2, 2, residual, x_seed, y_seed,
        jac_x_fn=lambda x, y: np.eye(2),
        jac_y_fn=lambda x, y: -sheet_jac(y),
        domain_y=Box([0.0, 0.0], [delta, 1.0]),
        name="annulus",
        parameters={"delta": delta, "alpha": alpha, "eps": eps})

    theta_seed = k * y_seed[0]
    loop = CirclePath([0.0, 0.0], alpha + 0.5, turns=-1.0,
                      start_angle=np.pi / 2.0 - theta_seed)

    def oracle(x):
        radius = float(np.hypot(x[0], x[1]))
        theta = float(np.arctan2(x[0], x[1])) % (2.0 * np.pi)
        return np.array([theta / k, radius - alpha])

    def x_sampler(rng, count):
        theta = rng.uniform(0.05, 2.0 * np.pi - 0.05, size=count)
        radius = rng.uniform(alpha + 0.05, alpha + 0.95, size=count)
        return np.column_stack([radius * np.sin(theta), radius * np.cos(theta)])

    pad_r = alpha + 1.0
    return ExampleDescriptor(
        name="annulus",
        parameters=problem.parameters,
        problem=problem,
        tags=frozenset({MONODROMY_OPEN, GROWTH_BOUND_FAILS}),
        oracle=oracle,
        default_path=loop,
        default_y_start=y_seed.copy(),
        monodromy_loop=loop,
        expected_gap=delta / (1.0 + eps),
        x_sampler=x_sampler,
        sample_box_x=Box([-pad_r, -pad_r], [pad_r, pad_r]),
        sample_box_y=Box([0.02 * delta, 0.02], [0.98 * delta, 0.98]),
        straight_planning=False,
        notes="no chart pair can satisfy the growth bound on this sheet; "
              "the open lift certifies multiple sheets numerically",
    )


def tube_problem(gamma, y1_interval, dgamma=None, name="tube"):
    """Generic tube around a planar curve: x = gamma(y1) + (y2 - 1/2) R gammadot(y1).

    R is the quarter-turn rotation. The curve's tangent must not vanish on
    the interval (sampled check), otherwise the tube degenerates.
    """
    lo, hi = float(y1_interval[0]), float(y1_interval[1])
    if not lo < hi:
        raise InvalidParams("empty y1 interval")

    if dgamma is None:
        def dgamma(t, _h=1e-7):
            step = _h * max(1.0, abs(t))
            return (np.asarray(gamma(t + step)) - np.asarray(gamma(t - step))) / (2.0 * step)

    # odd sample count so the center of a symmetric interval is probed
    grid = np.linspace(lo + 1e-9 * (hi - lo), hi - 1e-9 * (hi - lo), 257)
    speeds = np.array([float(np.linalg.norm(dgamma(t))) for t in grid])
    if speeds.min() <= 1e-12 * max(1.0, speeds.max()):
        raise DegenerateTube(
            f"curve tangent vanishes near y1={grid[int(np.argmin(speeds))]:.6g}")

    def surface(y):
        return (np.asarray(gamma(y[0]), dtype=np.float64)
                + (y[1] - 0.5) * (ROTATE_QUARTER @ np.asarray(dgamma(y[0]), dtype=np.float64)))

    def residual(x, y):
        return x - surface(y)

    y_seed = np.array([(lo + hi) / 2.0, 0.5])
    x_seed = surface(y_seed)
    return ImplicitProblem(
        2, 2, 2, residual, x_seed, y_seed,
        domain_y=Box([lo, 0.0], [hi, 1.0]),
        name=name, parameters={"y1_interval": [lo, hi]})


def constrained_circle():
    """Overdetermined system: y tracks x, with x constrained to the unit circle.

    l = 3 > n = 2: the residual carries the circle constraint, which no choice
    of y can repair, so paths must stay on the circle. A global solution
    exists (y = x) even though the x-projection is not simply connected.
    """
    def residual(x, y):
        return np.array([x[0] - y[0], x[1] - y[1], x[0] ** 2 + x[1] ** 2 - 1.0])

    def jac_x(x, y):
        return np.array([[1.0, 0.0], [0.0, 1.0], [2.0 * x[0], 2.0 * x[1]]])

    def jac_y(x, y):
        return np.array([[-1.0, 0.0], [0.0, -1.0], [0.0, 0.0]])

    problem = ImplicitProblem(
        2, 2, 3, residual, [1.0, 0.0], [1.0, 0.0],
        jac_x_fn=jac_x, jac_y_fn=jac_y,
        name="constrained-circle", parameters={})

    def x_sampler(rng, count):
        theta = rng.uniform(0.0, 2.0 * np.pi, size=count)
        return np.column_stack([np.cos(theta), np.sin(theta)])

    loop = CirclePath([0.0, 0.0], 1.0, turns=1.0, start_angle=0.0)
    return ExampleDescriptor(
        name="constrained-circle",
        parameters={},
        problem=problem,
        tags=frozenset({SOLVABLE}),
        oracle=lambda x: x.copy(),
        oracle_derivative=lambda x: np.eye(2),
        default_path=loop,
        default_y_start=np.array([1.0, 0.0]),
        monodromy_loop=loop,
        expected_gap=0.0,
        x_sampler=x_sampler,
        straight_planning=False,
        notes="solvable although the projections are circles, so no chart pair "
              "exists: the sufficient conditions are not necessary",
    )


def cubic_problem():
    """F(x, y) = y^3 + y - x; globally solvable with a strictly positive y-slope."""
    def residual(x, y):
        return np.array([y[0] ** 3 + y[0] - x[0]])

    problem = ImplicitProblem(
        1, 1, 1, residual, [0.0], [0.0],
        jac_x_fn=lambda x, y: np.array([[-1.0]]),
        jac_y_fn=lambda x, y: np.array([[3.0 * y[0] ** 2 + 1.0]]),
        name="cubic", parameters={})

    def oracle(x):
        # Cardano for the unique real root of y^3 + y = x
        half = x[0] / 2.0
        disc = np.sqrt(half ** 2 + 1.0 / 27.0)
        return np.array([np.cbrt(half + disc) + np.cbrt(half - disc)])

    def oracle_derivative(x):
        y = oracle(x)[0]
        return np.array([[1.0 / (3.0 * y ** 2 + 1.0)]])

    return ExampleDescriptor(
        name="cubic",
        parameters={},
        problem=problem,
        tags=frozenset({SOLVABLE}),
        charts=ChartPair(identity_chart(1), identity_chart(1)),
        oracle=oracle,
        oracle_derivative=oracle_derivative,
        default_path=SegmentPath([0.0], [2.0]),
        default_y_start=np.array([0.0]),
        monodromy_loop=PolylinePath([[0.0], [2.0], [0.0]]),
        expected_gap=0.0,
        x_sampler=lambda rng, count: rng.uniform(-8.0, 8.0, size=(count, 1)),
        sample_box_x=Box([-8.0], [8.0]),
        sample_box_y=Box([-2.0], [2.0]),
    )


def linear_problem(a_matrix=None, b_matrix=None):
    """F(x, y) = A x + B y with invertible B; g(x) = -B^-1 A x exactly."""
    a = np.eye(2) if a_matrix is None else np.asarray(a_matrix, dtype=np.float64)
    b = 2.0 * np.eye(2) if b_matrix is None else np.asarray(b_matrix, dtype=np.float64)
    if a.shape[0] != b.shape[0] or b.shape[0] != b.shape[1]:
        raise InvalidParams("need A (l x m) and square B (l x l)")
    m = a.shape[1]
    n = b.shape[1]
    b_inv = np.linalg.inv(b)
    dg = -b_inv @ a

    problem = ImplicitProblem(
        m, n, b.shape[0], lambda x, y: a @ x + b @ y,
        np.zeros(m), np.zeros(n),
        jac_x_fn=lambda x, y: a.copy(),
        jac_y_fn=lambda x, y: b.copy(),
        name="linear",
        parameters={"a_matrix": a.tolist(), "b_matrix": b.tolist()})

    return ExampleDescriptor(
        name="linear",
        parameters=problem.parameters,
        problem=problem,
        tags=frozenset({SOLVABLE}),
        charts=ChartPair(identity_chart(m), identity_chart(n)),
        oracle=lambda x: dg @ x,
        oracle_derivative=lambda x: dg.copy(),
        default_path=SegmentPath(np.zeros(m), np.ones(m)),
        default_y_start=np.zeros(n),
        monodromy_loop=CirclePath(np.zeros(m), 1.0, turns=1.0) if m >= 2 else None,
        expected_gap=0.0,
        x_sampler=lambda rng, count: rng.uniform(-2.0, 2.0, size=(count, m)),
        sample_box_x=Box(-2.0 * np.ones(m), 2.0 * np.ones(m)),
        sample_box_y=Box(-2.0 * np.ones(n), 2.0 * np.ones(n)),
    )


REGISTRY = {
    "diode": diode_circuit,
    "line": line_problem,
    "circle-x": circle_in_x,
    "annulus": annulus,
    "constrained-circle": constrained_circle,
    "cubic": cubic_problem,
    "linear": linear_problem,
}


def names():
    return sorted(REGISTRY)


def get(name, **params):
    """Build a bundled example by name; raises UnknownExample."""
    try:
        constructor = REGISTRY[name]
    except KeyError:
        raise UnknownExample(
            f"no example named {name!r}; available: {', '.join(names())}") from None
    return constructor(**params)
