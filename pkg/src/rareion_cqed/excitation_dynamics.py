"""Single-excitation dynamics of cascaded lambda-system cavity nodes.

Each node is tracked through three amplitudes projected on <vac, 1|: the
cavity field alpha, the ground-state coherence phi12 and the optical
coherence phi13. With a real classical drive Omega(t) the state
rho = (alpha, phi12, phi13) obeys

    rho' = A rho + Omega(t) B rho + sqrt(2 kappa) (beta_in, 0, 0),

and the travelling output is beta_out = sqrt(2 kappa) alpha - beta_in. The
minus sign on beta_in is the reflection phase that makes the input/output
pair flux-conserving with the +sqrt(2 kappa) drive, so that
d|rho|^2/dt = |beta_in|^2 - |beta_out|^2 when gamma = 0. Cascading node 1
into node 2 (beta_in,2 = beta_out,1) then feeds node 2 through
X = diag(2 kappa, 0, 0).

Emission is shaped by solving the input/output relation for Omega(t): the
second derivative of beta_out is affine in Omega, with coefficient
sqrt(2 kappa) [1 0 0] A B rho = -sqrt(2 kappa) g phi12. Absorption at the
second node uses the time-reversed drive.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .integrator import HalfStepSampler, check_uniform, rk4, rk4_step
from .pulses import GaussianPulse, PulseSpec, TargetPulse, as_target

STEP_RULE = 0.05  # max(kappa, g, max|Omega|) * dt must not exceed this
EPS_DEN = 1e-6  # |phi12| below which the synthesis freezes Omega
NONREAL_TOL = 1e-9

TRAJECTORY_HEADER = (
    "t", "node", "alpha_re", "alpha_im", "phi12_re", "phi12_im",
    "phi13_re", "phi13_im", "omega", "beta_re", "beta_im",
)


class StepSizeError(ValueError):
    def __init__(self, dt, rate):
        self.suggested = STEP_RULE / rate
        super().__init__(
            f"time step {dt:g} too coarse: max(kappa, g, |Omega|) * dt = {rate * dt:.3g} "
            f"> {STEP_RULE}; use dt <= {self.suggested:.6g}"
        )


class SynthesisError(ValueError):
    pass


class OmegaCapError(SynthesisError):
    def __init__(self, times, cap):
        self.times = list(times)
        shown = ", ".join(f"{t:.6g}" for t in self.times[:10])
        more = "" if len(self.times) <= 10 else f" (+{len(self.times) - 10} more)"
        super().__init__(f"|Omega| exceeds cap {cap:g} at t = {shown}{more}")


class NonRealControlError(SynthesisError):
    pass


@dataclass(frozen=True)
class NodeState:
    alpha: complex = 0j
    phi12: complex = 0j
    phi13: complex = 0j

    @classmethod
    def stored(cls) -> "NodeState":
        """Atom in the storage state |2>, cavity empty."""
        return cls(0j, 1 + 0j, 0j)

    @classmethod
    def from_array(cls, v) -> "NodeState":
        return cls(complex(v[0]), complex(v[1]), complex(v[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.phi12, self.phi13], dtype=complex)

    @property
    def norm2(self) -> float:
        return abs(self.alpha) ** 2 + abs(self.phi12) ** 2 + abs(self.phi13) ** 2


@dataclass(frozen=True)
class SystemMatrices:
    A: np.ndarray
    B: np.ndarray
    X: np.ndarray

    def L(self, omega: float) -> np.ndarray:
        return self.A + omega * self.B


def system_matrices(g: float, kappa: float, gamma: float = 0.0) -> SystemMatrices:
    """Drift A, control coupling B and cascade feed X for one node.

    ``gamma`` adds -gamma/2 on the optical-coherence diagonal (amplitude that
    leaks out of the tracked subspace by spontaneous emission).
    """
    A = np.array(
        [[-kappa, 0, -1j * g],
         [0, 0, 0],
         [-1j * g, 0, -gamma / 2]],
        dtype=complex,
    )
    B = np.array([[0, 0, 0], [0, 0, -1j], [0, -1j, 0]], dtype=complex)
    X = np.zeros((3, 3))
    X[0, 0] = 2 * kappa
    return SystemMatrices(A, B, X)


def check_step(dt, g, kappa, omega_max=0.0):
    rate = max(kappa, g, omega_max)
    if rate * dt > STEP_RULE * (1 + 1e-9):
        raise StepSizeError(dt, rate)


def _node_derivative(m: SystemMatrices):
    """Scalar form of rho' = (A + Omega B) rho, read from the matrix entries."""
    A, B = m.A, m.B
    mask_A = np.zeros((3, 3), bool)
    mask_A[[0, 0, 2, 2], [0, 2, 0, 2]] = True
    mask_B = np.zeros((3, 3), bool)
    mask_B[[1, 2], [2, 1]] = True
    if np.any(A[~mask_A]) or np.any(B[~mask_B]):
        raise ValueError("unexpected sparsity in node matrices")
    a00, a02, a20, a22 = complex(A[0, 0]), complex(A[0, 2]), complex(A[2, 0]), complex(A[2, 2])
    b12, b21 = complex(B[1, 2]), complex(B[2, 1])

    def deriv(alpha, p12, p13, om):
        return (a00 * alpha + a02 * p13,
                om * b12 * p13,
                a20 * alpha + a22 * p13 + om * b21 * p12)

    return deriv


@dataclass
class NodeTrajectory:
    t: np.ndarray
    states: np.ndarray  # (n, 3): alpha, phi12, phi13
    omega: np.ndarray
    beta_in: np.ndarray
    beta_out: np.ndarray
    emitted: np.ndarray  # cumulative integral of |beta_out|^2
    absorbed: np.ndarray  # cumulative integral of |beta_in|^2
    lost: np.ndarray  # cumulative spontaneous-emission loss

    @property
    def alpha(self):
        return self.states[:, 0]

    @property
    def phi12(self):
        return self.states[:, 1]

    @property
    def phi13(self):
        return self.states[:, 2]

    @property
    def norm2(self) -> np.ndarray:
        return np.sum(np.abs(self.states) ** 2, axis=1)

    def populations(self) -> dict[str, np.ndarray]:
        return {k: np.abs(getattr(self, k)) ** 2 for k in ("alpha", "phi12", "phi13")}

    @property
    def final(self) -> NodeState:
        return NodeState.from_array(self.states[-1])

    def output_pulse(self) -> PulseSpec:
        return PulseSpec(self.t, self.beta_out)

    def balance_defect(self) -> float:
        """Largest violation of norm + emitted + lost - absorbed = const."""
        total = self.norm2 + self.emitted + self.lost - self.absorbed
        return float(np.max(np.abs(total - total[0])))


def _sampler(x, t, dtype=complex):
    if x is None:
        return HalfStepSampler(np.zeros(2 * len(t) - 1, dtype=dtype), float(t[0]), check_uniform(t))
    if callable(x):
        th = t[0] + 0.5 * check_uniform(t) * np.arange(2 * len(t) - 1)
        try:
            vals = np.asarray(x(th), dtype=dtype)
            if vals.shape != th.shape:
                raise ValueError
        except (TypeError, ValueError):
            vals = np.array([x(s) for s in th], dtype=dtype)
        return HalfStepSampler(vals, float(t[0]), check_uniform(t))
    if np.isscalar(x):
        return HalfStepSampler(np.full(2 * len(t) - 1, x, dtype=dtype), float(t[0]), check_uniform(t))
    x = np.asarray(x, dtype=dtype)
    if x.shape != t.shape:
        raise ValueError("sampled control/input must live on the simulation grid")
    return HalfStepSampler.from_grid(t, x)


def propagate_node(state0, omega, beta_in, g, kappa, gamma=0.0, t=None) -> NodeTrajectory:
    """Integrate one node driven by ``omega`` and the input flux ``beta_in``.

    ``omega`` is real: an array on the grid (cubic-spline interpolated to RK4
    half-steps), a callable of time, or a constant. The grid comes from
    ``beta_in`` (a :class:`PulseSpec`) or from ``t`` when there is no input.
    """
    if isinstance(beta_in, PulseSpec):
        if t is not None and not np.array_equal(np.asarray(t, dtype=float), beta_in.t):
            raise ValueError("beta_in grid and t differ")
        t, b_in = beta_in.t, beta_in.values
    else:
        if t is None:
            raise ValueError("need a time grid when no input pulse is given")
        t = np.asarray(t, dtype=float)
        b_in = None if beta_in is None else beta_in
    if not (g > 0 and kappa > 0):
        raise ValueError("g and kappa must be positive")
    h = check_uniform(t)
    om = _sampler(omega, t, dtype=float)
    bi = _sampler(b_in, t)
    check_step(h, g, kappa, float(np.max(np.abs(om.values))))

    m = system_matrices(g, kappa, gamma)
    A, B = m.A, m.B
    s2k = math.sqrt(2 * kappa)

    deriv = _node_derivative(m)

    def rhs(tt, y):
        a, p12, p13 = y[:3].tolist()
        b = bi(tt)
        da, d12, d13 = deriv(a, p12, p13, om(tt))
        b_out = s2k * a - b
        return np.array(
            [da + s2k * b, d12, d13, abs(b_out) ** 2, abs(b) ** 2, gamma * abs(p13) ** 2],
            dtype=complex,
        )

    rho0 = state0.as_array() if isinstance(state0, NodeState) else np.asarray(state0, dtype=complex)
    y0 = np.concatenate([rho0, np.zeros(3)])
    ys = rk4(rhs, y0, t)
    b_grid = bi.values[0::2]
    states = ys[:, :3]
    return NodeTrajectory(
        t=t,
        states=states,
        omega=np.asarray(om.values[0::2], dtype=float),
        beta_in=np.asarray(b_grid, dtype=complex),
        beta_out=s2k * states[:, 0] - b_grid,
        emitted=ys[:, 3].real,
        absorbed=ys[:, 4].real,
        lost=ys[:, 5].real,
    )


@dataclass
class SynthesisResult:
    t: np.ndarray
    omega: np.ndarray
    trajectory: NodeTrajectory
    target: PulseSpec
    tracking_rate: float
    frozen_at: float | None = None
    tail_truncation: float = 0.0
    flags: list[str] = field(default_factory=list)

    @property
    def step(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def emitted_photon_number(self) -> float:
        return float(self.trajectory.emitted[-1])


def max_emission(state0: NodeState, g, kappa, gamma=0.0) -> float:
    """Upper bound on the photon number a node can emit from ``state0``.

    Excitation stored in phi12 leaves through the cavity with probability at
    most C / (1 + C), C = 2 g^2 / (kappa gamma).
    """
    eff = 1.0 if gamma == 0 else 2 * g * g / (2 * g * g + kappa * gamma)
    return abs(state0.alpha) ** 2 + abs(state0.phi13) ** 2 + eff * abs(state0.phi12) ** 2


def synthesize_omega(target_out, g, kappa, state0=None, gamma=0.0, *,
                     tracking_rate=None, omega_max=None, eps_den=EPS_DEN) -> SynthesisResult:
    """Real drive Omega(t) that makes a node emit ``target_out`` (no input field).

    Omega is co-integrated with the node state: at every RK4 stage it solves
    beta_out'' = ref'' for the current rho, where

        ref'' = target'' + 2 lam (target' - beta_out') + lam^2 (target - beta_out)

    and beta_out, beta_out' are read off the state. With ``tracking_rate``
    lam = 0 this is the bare input/output inversion; the default
    lam = 1 / (rms duration of the target) pulls the residual of a truncated
    pulse (whose first sample is not exactly zero) back onto the target
    instead of letting it grow linearly.

    When |phi12| < ``eps_den`` the drive is frozen at its last value and the
    target flux remaining after that time is reported as ``tail_truncation``.
    """
    target = as_target(target_out)
    t = np.asarray(target.t, dtype=float)
    h = check_uniform(t)
    check_step(h, g, kappa)
    state0 = NodeState.stored() if state0 is None else state0
    available = max_emission(state0, g, kappa, gamma)
    requested = target.sampled().normalization
    if requested > available * (1 + 1e-9):
        raise SynthesisError(
            f"target carries {requested:.6g} photons but at most {available:.6g} can be "
            "emitted from this state (spontaneous loss caps the efficiency at C/(1+C)); "
            "lower the target photon number"
        )
    if tracking_rate is not None:
        lam = float(tracking_rate)
    else:
        tau = target.rms_duration()
        lam = 1 / tau if tau > 0 else 0.0

    m = system_matrices(g, kappa, gamma)
    A, B = m.A, m.B
    row_A = A[0]
    row_A2 = (A @ A)[0]
    row_AB = (A @ B)[0]
    s2k = math.sqrt(2 * kappa)

    th = t[0] + 0.5 * h * np.arange(2 * len(t) - 1)
    tv = HalfStepSampler(np.asarray(target.value(th), dtype=complex), float(t[0]), h)
    td1 = HalfStepSampler(np.asarray(target.d1(th), dtype=complex), float(t[0]), h)
    td2 = HalfStepSampler(np.asarray(target.d2(th), dtype=complex), float(t[0]), h)

    rA, rA2, rAB = row_A.tolist(), row_A2.tolist(), row_AB.tolist()

    def dot(row, rho):
        return row[0] * rho[0] + row[1] * rho[1] + row[2] * rho[2]

    def control(tt, rho):
        rho = rho.tolist() if isinstance(rho, np.ndarray) else rho
        err0 = tv(tt) - s2k * rho[0]
        err1 = td1(tt) - s2k * dot(rA, rho)
        ref2 = td2(tt) + 2 * lam * err1 + lam * lam * err0
        om = (ref2 - s2k * dot(rA2, rho)) / (s2k * dot(rAB, rho))
        if abs(om.imag) > NONREAL_TOL * max(1.0, abs(om)):
            raise NonRealControlError(
                f"target requires a complex drive at t={tt:.6g} (Omega={om:.3g}); "
                "only real Omega is supported"
            )
        return om.real

    frozen = [False, 0.0]

    deriv = _node_derivative(m)

    def rhs(tt, y):
        a, p12, p13 = y[:3].tolist()
        om = frozen[1] if frozen[0] else control(tt, (a, p12, p13))
        da, d12, d13 = deriv(a, p12, p13, om)
        return np.array([da, d12, d13, 2 * kappa * abs(a) ** 2,
                         gamma * abs(p13) ** 2], dtype=complex)

    n = len(t)
    times = t.tolist()
    ys = np.empty((n, 5), dtype=complex)
    omegas = np.empty(n)
    y = np.concatenate([state0.as_array(), np.zeros(2)])
    frozen_at = None
    for i in range(n):
        ys[i] = y
        if not frozen[0] and abs(y[1]) < eps_den:
            frozen[0] = True
            frozen_at = times[i]
        omegas[i] = frozen[1] if frozen[0] else control(times[i], y[:3])
        if not frozen[0]:
            frozen[1] = float(omegas[i])
        if i < n - 1:
            y = rk4_step(rhs, times[i], y, h)

    flags = []
    tail = 0.0
    if frozen_at is not None:
        flags.append("omega_frozen")
        sel = t >= frozen_at
        if sel.sum() >= 2:
            tail = float(np.trapezoid(np.abs(target.value(t[sel])) ** 2, t[sel]))
    if omega_max is not None:
        bad = t[np.abs(omegas) > omega_max]
        if bad.size:
            raise OmegaCapError(bad, omega_max)
    check_step(h, g, kappa, float(np.max(np.abs(omegas))))

    states = ys[:, :3]
    traj = NodeTrajectory(
        t=t,
        states=states,
        omega=omegas,
        beta_in=np.zeros(n, dtype=complex),
        beta_out=s2k * states[:, 0],
        emitted=ys[:, 3].real,
        absorbed=np.zeros(n),
        lost=ys[:, 4].real,
    )
    return SynthesisResult(t, omegas, traj, target.sampled(), lam, frozen_at, tail, flags)


def self_consistency_error(result: SynthesisResult, g, kappa, gamma=0.0) -> float:
    """L2 distance between the target and the replayed output, per unit target norm."""
    replay = propagate_node(result.trajectory.states[0], result.omega, None, g, kappa, gamma, t=result.t)
    err = np.trapezoid(np.abs(replay.beta_out - result.target.values) ** 2, result.t)
    norm = result.target.normalization
    return float(math.sqrt(err / norm)) if norm > 0 else float(math.sqrt(err))


@dataclass
class ThrowCatchResult:
    node1: NodeTrajectory
    node2: NodeTrajectory
    synthesis: SynthesisResult
    delay: float
    gamma: float
    fidelity: float
    residual_flux: float
    residual_node1: float
    spontaneous_loss: float
    conservation_defect: float
    time_reversal_defect: float
    flags: list[str]

    @property
    def step(self) -> float:
        return self.synthesis.step

    def summary(self, parameters=None) -> dict:
        return {
            "fidelity": self.fidelity,
            "residual_flux": self.residual_flux,
            "residual_node1": self.residual_node1,
            "spontaneous_loss": self.spontaneous_loss,
            "conservation_defect": self.conservation_defect,
            "time_reversal_defect": self.time_reversal_defect,
            "emitted_photon_number": self.synthesis.emitted_photon_number,
            "tail_truncation": self.synthesis.tail_truncation,
            "omega_frozen_at": self.synthesis.frozen_at,
            "tracking_rate": self.synthesis.tracking_rate,
            "step": self.step,
            "flags": list(self.flags),
            "parameters": dict(parameters or {}),
        }

    def trajectory_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRAJECTORY_HEADER)
        for label, tr, offset in ((1, self.node1, 0.0), (2, self.node2, self.delay)):
            for i in range(len(tr.t)):
                a, p2, p3 = (complex(x) for x in tr.states[i])
                b = complex(tr.beta_out[i])
                w.writerow([repr(float(tr.t[i] + offset)), label,
                            repr(a.real), repr(a.imag), repr(p2.real), repr(p2.imag),
                            repr(p3.real), repr(p3.imag), repr(float(tr.omega[i])),
                            repr(b.real), repr(b.imag)])
        return buf.getvalue()


def propagate_cascade(t, omega1, omega2, g, kappa, gamma=0.0, state1=None, state2=None):
    """Node 1 output drives node 2 instantly; returns both trajectories.

    ``omega1``/``omega2`` are :class:`HalfStepSampler` instances or anything
    accepted by :func:`propagate_node`.
    """
    t = np.asarray(t, dtype=float)
    h = check_uniform(t)
    om1 = omega1 if isinstance(omega1, HalfStepSampler) else _sampler(omega1, t, float)
    om2 = omega2 if isinstance(omega2, HalfStepSampler) else _sampler(omega2, t, float)
    check_step(h, g, kappa, float(max(np.max(np.abs(om1.values)), np.max(np.abs(om2.values)))))
    m = system_matrices(g, kappa, gamma)
    A, B, X = m.A, m.B, m.X
    s2k = math.sqrt(2 * kappa)

    if np.any(X[1:]) or np.any(X[:, 1:]):
        raise ValueError("cascade feed must act on the cavity amplitude only")
    x00 = float(X[0, 0])
    deriv = _node_derivative(m)

    def rhs(tt, y):
        a1, p12, p13, a2, q12, q13 = y[:6].tolist()
        d1 = deriv(a1, p12, p13, om1(tt))
        d2 = deriv(a2, q12, q13, om2(tt))
        b_out2 = s2k * (a2 - a1)
        return np.array(
            [d1[0], d1[1], d1[2], d2[0] + x00 * a1, d2[1], d2[2],
             2 * kappa * abs(a1) ** 2, abs(b_out2) ** 2,
             gamma * abs(p13) ** 2, gamma * abs(q13) ** 2],
            dtype=complex,
        )

    s1 = NodeState.stored() if state1 is None else state1
    s2 = NodeState() if state2 is None else state2
    y0 = np.concatenate([s1.as_array(), s2.as_array(), np.zeros(4)])
    ys = rk4(rhs, y0, t)
    r1, r2 = ys[:, 0:3], ys[:, 3:6]
    b_mid = s2k * r1[:, 0]
    zeros = np.zeros(len(t))
    n1 = NodeTrajectory(t, r1, np.asarray(om1.values[0::2], float), zeros.astype(complex),
                        b_mid, ys[:, 6].real, zeros, ys[:, 8].real)
    n2 = NodeTrajectory(t, r2, np.asarray(om2.values[0::2], float), b_mid,
                        s2k * r2[:, 0] - b_mid, ys[:, 7].real, ys[:, 6].real, ys[:, 9].real)
    return n1, n2


def run_throw_catch(target_out, g, kappa, delay=0.0, gamma=0.0, *,
                    tracking_rate=None, omega_max=None, symmetry_tol=1e-6) -> ThrowCatchResult:
    """Emit ``target_out`` from node 1 and catch it at node 2.

    Node 2 is driven with Omega_2(t) = Omega_1(T - t), T being the span of
    the pulse window (t_start + t_end). ``delay`` only relabels node-2 times.
    """
    target = as_target(target_out)
    flags = []
    sampled = target.sampled()
    if sampled.asymmetry() > symmetry_tol:
        flags.append("asymmetric_target")
    synth = synthesize_omega(target, g, kappa, gamma=gamma,
                             tracking_rate=tracking_rate, omega_max=omega_max)
    flags += synth.flags
    t = synth.t
    om1 = HalfStepSampler.from_grid(t, synth.omega)
    om2 = om1.reversed(t[0] + t[-1])
    n1, n2 = propagate_cascade(t, om1, om2, g, kappa, gamma)

    norm_total = n1.norm2[-1] + n2.norm2[-1]
    lost = n1.lost[-1] + n2.lost[-1]
    residual_flux = float(n2.emitted[-1])
    defect = float(abs(norm_total + residual_flux + lost - 1.0))
    p1 = np.abs(n1.states) ** 2
    p2 = np.abs(n2.states) ** 2
    tr_defect = float(np.max(np.abs(p1 - p2[::-1])))
    return ThrowCatchResult(
        node1=n1,
        node2=n2,
        synthesis=synth,
        delay=float(delay),
        gamma=float(gamma),
        fidelity=float(abs(n2.states[-1, 1]) ** 2),
        residual_flux=residual_flux,
        residual_node1=float(n1.norm2[-1]),
        spontaneous_loss=float(lost),
        conservation_defect=defect,
        time_reversal_defect=tr_defect,
        flags=flags,
    )


def default_gaussian(kappa, sigma=None, t0=None, dt=None, g=None,
                     photon_number=1.0) -> GaussianPulse:
    """Default target: sigma = 10/kappa, centred 5 sigma into a +/-5 sigma window."""
    sigma = 10 / kappa if sigma is None else sigma
    if dt is None:
        dt = STEP_RULE / max(kappa, g or 0.0)
    return GaussianPulse(sigma, t0=t0, dt=dt, truncation=5.0, amplitude=math.sqrt(photon_number))
