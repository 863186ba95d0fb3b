"""Density-matrix propagation engines for stochastic-unitary-step dephasing.

The model: instead of flowing continuously, the system advances by discrete
unitary kicks U = exp(-i H / gamma) arriving as a Poisson process of mean
frequency gamma.  Averaging over the arrival statistics dephases coherences
between energy eigenstates while leaving eigenbasis populations untouched.

Four mutually checking engines are provided:

* evolve_eigenbasis -- reference engine; first order in 1/gamma, each
  eigenbasis coherence (p,q) is damped by exp(-(Ep-Eq)^2 t / (2 gamma)).
* evolve_poisson    -- exact solution of the kick master equation as a
  Poisson mixture, evaluated in closed form per coherence; poisson_kick_sum
  is its literal truncated-series self-check.
* evolve_ode        -- classical fixed-step 4th-order Runge-Kutta on the
  first-order generator drho/dt = -i[H,rho] - [H,[H,rho]]/(2 gamma).
* evolve_monte_carlo -- seed-deterministic sample average over Poisson
  numbers of kicks.

evolve_unitary is the gamma -> inf limit (same code path as the reference
engine), and closed_form_rho transcribes the published closed-form solution
for the |g,m-1,n-1> initial state so it can be audited against the engines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .model import DerivedCouplings, HamiltonianBlock, Spectrum


@dataclass
class DensityMatrix:
    """4x4 complex density matrix tagged with its basis order."""

    entries: np.ndarray
    basis_order: tuple[str, str, str, str]

    @classmethod
    def pure(cls, vector: np.ndarray, basis_order: tuple[str, str, str, str]) -> "DensityMatrix":
        v = np.asarray(vector, dtype=complex)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ValidationError("cannot build a state from the zero vector")
        v = v / norm
        return cls(np.outer(v, v.conj()), basis_order)

    @classmethod
    def basis_state(cls, index: int, basis_order: tuple[str, str, str, str]) -> "DensityMatrix":
        v = np.zeros(4, dtype=complex)
        v[index] = 1.0
        return cls.pure(v, basis_order)

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def violations(
        self,
        hermitian_tol: float = 1e-12,
        trace_tol: float = 1e-12,
        psd_floor: float = -1e-10,
    ) -> list[str]:
        """Invariant violations, empty when the state is valid."""
        out = []
        rho = self.entries
        herm = np.abs(rho - rho.conj().T).max()
        if herm > hermitian_tol:
            out.append(f"hermiticity violated by {herm:.3e}")
        tr_err = abs(np.trace(rho) - 1.0)
        if tr_err > trace_tol:
            out.append(f"trace deviates from 1 by {tr_err:.3e}")
        min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
        if min_eig < psd_floor:
            out.append(f"minimum eigenvalue {min_eig:.3e} below {psd_floor:.0e}")
        return out

    def require_valid(self, **tols) -> "DensityMatrix":
        problems = self.violations(**tols)
        if problems:
            raise ValidationError("invalid density matrix: " + "; ".join(problems))
        return self


@dataclass
class EvolutionRequest:
    """Inputs common to all engines plus engine-specific controls.

    t         evolution duration (s)
    gamma     kick frequency (1/s); math.inf = decoherence-free
    tail_tol  Poisson tail mass allowed to be truncated in the kick sum
    dt        fixed step for the Runge-Kutta engine (None: 1e-3 / mu)
    n_traj    Monte Carlo trajectory count
    seed      Monte Carlo seed (required there, ignored elsewhere)
    """

    initial: DensityMatrix
    t: float
    gamma: float = math.inf
    tail_tol: float = 1e-12
    dt: float | None = None
    n_traj: int | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.t < 0:
            raise ValidationError(f"t must be nonnegative, got {self.t}")
        if not self.gamma > 0:
            raise ValidationError(f"gamma must be positive (or inf), got {self.gamma}")
        if not 0.0 < self.tail_tol < 1.0:
            raise ValidationError(f"tail_tol must lie in (0, 1), got {self.tail_tol}")
        if self.dt is not None and not self.dt > 0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if self.n_traj is not None and self.n_traj < 1:
            raise ValidationError(f"n_traj must be at least 1, got {self.n_traj}")


def _check_basis(a: tuple[str, ...], b: tuple[str, ...]) -> None:
    if a != b:
        raise ValidationError(f"basis mismatch: {a} vs {b}")


def _finite_gamma(gamma: float) -> float:
    if math.isinf(gamma):
        raise ValidationError("this engine requires finite gamma")
    return gamma


def evolve_eigenbasis(spectrum: Spectrum, req: EvolutionRequest) -> DensityMatrix:
    """Reference engine: dephasing factors applied in the eigenbasis.

    Coherence (p,q) picks up exp(-i(Ep-Eq)t - (Ep-Eq)^2 t / (2 gamma));
    eigenbasis populations are exactly preserved.  gamma = inf reduces to
    unitary evolution.
    """
    _check_basis(spectrum.basis_order, req.initial.basis_order)
    v = spectrum.eigenvectors
    delta = spectrum.eigenvalues[:, None] - spectrum.eigenvalues[None, :]
    rho_eig = v.T @ req.initial.entries @ v
    if math.isinf(req.gamma):
        factor = np.exp(-1j * delta * req.t)
    else:
        factor = np.exp(-1j * delta * req.t - delta * delta * req.t / (2.0 * req.gamma))
    out = v @ (rho_eig * factor) @ v.T
    return DensityMatrix(out, req.initial.basis_order)


def evolve_unitary(spectrum: Spectrum, initial: DensityMatrix, t: float) -> DensityMatrix:
    """Kick-free limit: rho(t) = exp(-iHt) rho(0) exp(iHt) via the spectrum."""
    return evolve_eigenbasis(spectrum, EvolutionRequest(initial=initial, t=t, gamma=math.inf))


def evolve_poisson(block: HamiltonianBlock, spectrum: Spectrum, req: EvolutionRequest) -> DensityMatrix:
    """Exact kick-average: coherence (p,q) scaled by exp(gamma t (e^{-i(Ep-Eq)/gamma} - 1)).

    This is the closed form of the Poisson mixture
    sum_k e^{-gamma t} (gamma t)^k / k!  U^k rho U^{dag k}; poisson_kick_sum
    evaluates that series literally and is used as a self-check in the tests.
    """
    _check_basis(spectrum.basis_order, req.initial.basis_order)
    gamma = _finite_gamma(req.gamma)
    v = spectrum.eigenvectors
    delta = spectrum.eigenvalues[:, None] - spectrum.eigenvalues[None, :]
    rho_eig = v.T @ req.initial.entries @ v
    factor = np.exp(gamma * req.t * (np.exp(-1j * delta / gamma) - 1.0))
    out = v @ (rho_eig * factor) @ v.T
    return DensityMatrix(out, req.initial.basis_order)


def poisson_kick_sum(block: HamiltonianBlock, req: EvolutionRequest) -> DensityMatrix:
    """Literal truncated Poisson mixture over repeated kicks U = exp(-iH/gamma).

    Independent of the spectral machinery: U comes from a dense eigensolve of
    the block, the mixture is accumulated term by term until the remaining
    Poisson tail mass drops below req.tail_tol.  Probabilities are computed
    per term in log space, so large gamma*t does not underflow.
    """
    gamma = _finite_gamma(req.gamma)
    lam = gamma * req.t
    w, q = np.linalg.eigh(block.entries)
    u = (q * np.exp(-1j * w / gamma)) @ q.conj().T
    term = req.initial.entries.astype(complex)
    out = np.zeros((4, 4), dtype=complex)
    covered = 0.0
    k = 0
    k_cap = int(lam + 20.0 * math.sqrt(lam + 1.0)) + 100
    while covered < 1.0 - req.tail_tol:
        if k > k_cap:
            raise NumericalError(
                f"Poisson kick sum truncated at k={k_cap} with tail mass "
                f"{1.0 - covered:.3e} > tail_tol={req.tail_tol:.3e}"
            )
        if lam == 0.0:
            log_p = 0.0 if k == 0 else -math.inf
        else:
            log_p = k * math.log(lam) - lam - math.lgamma(k + 1)
        if log_p > -745.0:
            p = math.exp(log_p)
            out += p * term
            covered += p
        term = u @ term @ u.conj().T
        k += 1
    return DensityMatrix(out, req.initial.basis_order)


def _first_order_superoperator(h: np.ndarray, gamma: float) -> np.ndarray:
    """16x16 matrix of rho -> -i[H,rho] - [H,[H,rho]]/(2 gamma) on vec(rho)."""
    eye = np.eye(4)
    comm = np.kron(h, eye) - np.kron(eye, h.T)
    gen = -1j * comm.astype(complex)
    if not math.isinf(gamma):
        gen = gen - (comm @ comm) / (2.0 * gamma)
    return gen


def _rk4_step_matrix(gen: np.ndarray, dt: float) -> np.ndarray:
    # For a linear generator the classical Runge-Kutta update is exactly the
    # degree-4 Taylor polynomial of the step propagator, so precompute it.
    eye = np.eye(16, dtype=complex)
    hg = dt * gen
    return eye + hg @ (eye + hg @ (eye + hg @ (eye + hg / 4.0) / 3.0) / 2.0)


def default_ode_step(block: HamiltonianBlock) -> float:
    """Default Runge-Kutta step 1e-3 / mu for the given block."""
    mu = math.hypot(0.5 * block.sideband, block.omega)
    if mu == 0.0:
        raise ValidationError("cannot derive a default dt for a zero block; pass dt explicitly")
    return 1e-3 / mu


def evolve_ode(block: HamiltonianBlock, req: EvolutionRequest) -> DensityMatrix:
    """Fixed-step classical 4th-order Runge-Kutta on the first-order generator.

    The final step is shortened to land exactly on t and the result is
    re-Hermitized once at the end.  A positivity breach beyond the integrator
    tolerance (-1e-7) is reported as a numerical failure rather than patched.
    """
    _check_basis(block.basis_order, req.initial.basis_order)
    if req.t == 0.0:
        return DensityMatrix(req.initial.entries.astype(complex), req.initial.basis_order)
    dt = req.dt if req.dt is not None else default_ode_step(block)
    gen = _first_order_superoperator(block.entries, req.gamma)
    n_full = int(req.t / dt)
    remainder = req.t - n_full * dt
    step = _rk4_step_matrix(gen, dt)
    vec = req.initial.entries.astype(complex).reshape(16)
    for _ in range(n_full):
        vec = step @ vec
    if remainder > 1e-15 * req.t:
        vec = _rk4_step_matrix(gen, remainder) @ vec
    rho = vec.reshape(4, 4)
    rho = 0.5 * (rho + rho.conj().T)
    out = DensityMatrix(rho, req.initial.basis_order)
    problems = out.violations(hermitian_tol=1e-12, trace_tol=1e-9, psd_floor=-1e-7)
    if problems:
        raise NumericalError("Runge-Kutta output invalid: " + "; ".join(problems))
    return out


# splitmix64 finalizer constants (Steele, Lea & Flood); the mix of
# (seed, trajectory index) is the per-trajectory sub-seed.
_SM64_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM64_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_SM64_MIX2 = np.uint64(0x94D049BB133111EB)


def _trajectory_uniforms(seed: int, n: int) -> np.ndarray:
    """One uniform in [0,1) per trajectory, a pure function of (seed, index)."""
    idx = np.arange(n, dtype=np.uint64)
    z = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + (idx + np.uint64(1)) * _SM64_GAMMA
    z = (z ^ (z >> np.uint64(30))) * _SM64_MIX1
    z = (z ^ (z >> np.uint64(27))) * _SM64_MIX2
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * 2.0**-53


def _log_poisson_pmf(k: float, lam: float) -> float:
    return k * math.log(lam) - lam - math.lgamma(k + 1.0)


def _poisson_cdf(lam: float, tail_tol: float) -> np.ndarray:
    """Poisson CDF table truncated so the true tail mass is below tail_tol.

    The cut is certified with the geometric bound
    sum_{k > K} pmf(k) <= pmf(K+1) / (1 - lam/(K+2)) for K >= lam, which stays
    rigorous where a floating sum of the pmf would drown in rounding.
    """
    if lam == 0.0:
        return np.array([1.0])
    k_max = int(lam + 12.0 * math.sqrt(lam + 1.0)) + 30
    for _ in range(64):
        ratio = lam / (k_max + 2.0)
        log_next = _log_poisson_pmf(k_max + 1.0, lam)
        bound = math.exp(log_next) / (1.0 - ratio) if log_next > -745.0 else 0.0
        if bound <= tail_tol:
            break
        k_max = int(1.25 * k_max) + 32
    else:
        raise NumericalError(f"cannot certify Poisson tail below tail_tol {tail_tol:.1e}")
    ks = np.arange(k_max + 1, dtype=float)
    log_pmf = ks * math.log(lam) - lam - np.array([math.lgamma(k + 1.0) for k in range(k_max + 1)])
    return np.cumsum(np.where(log_pmf > -745.0, np.exp(log_pmf), 0.0))


@dataclass
class MonteCarloResult:
    rho: DensityMatrix
    stderr: np.ndarray  # per-entry standard error of the sample mean


def evolve_monte_carlo(block: HamiltonianBlock, spectrum: Spectrum, req: EvolutionRequest) -> MonteCarloResult:
    """Average U^N rho U^{dag N} over N ~ Poisson(gamma t), one draw per trajectory.

    Reproducibility contract: trajectory i consumes a single uniform derived
    by the splitmix64 mix of (seed, i) and maps it through the inverse
    Poisson CDF, so every draw is a pure function of (seed, i); the mean and
    the per-entry standard error are accumulated by reductions in fixed
    trajectory order.  Results are therefore bit-identical for a given seed
    regardless of execution parallelism.
    """
    _check_basis(spectrum.basis_order, req.initial.basis_order)
    gamma = _finite_gamma(req.gamma)
    if req.seed is None:
        raise ValidationError("Monte Carlo engine requires a seed")
    if req.n_traj is None or req.n_traj < 1:
        raise ValidationError("Monte Carlo engine requires n_traj >= 1")
    n = req.n_traj
    uniforms = _trajectory_uniforms(req.seed, n)
    cdf = _poisson_cdf(gamma * req.t, req.tail_tol)
    kicks = np.searchsorted(cdf, uniforms, side="right").astype(np.float64)

    v = spectrum.eigenvectors
    delta = spectrum.eigenvalues[:, None] - spectrum.eigenvalues[None, :]
    rho_eig = v.T @ req.initial.entries @ v
    phases = np.exp(-1j * delta[None, :, :] * (kicks[:, None, None] / gamma))
    states = v @ (rho_eig[None, :, :] * phases) @ v.T
    mean = states.mean(axis=0)
    if n > 1:
        var = np.square(np.abs(states - mean[None, :, :])).sum(axis=0) / (n - 1)
        stderr = np.sqrt(var / n)
    else:
        stderr = np.zeros((4, 4))
    return MonteCarloResult(DensityMatrix(mean, req.initial.basis_order), stderr)


def closed_form_rho(
    couplings: DerivedCouplings,
    spectrum: Spectrum,
    t: float,
    gamma: float,
) -> DensityMatrix:
    """Literal transcription of the published closed-form rho(t) for the
    initial state |g, m-1, n-1><g, m-1, n-1|.

    Exists to audit that published expression against the engines, not to
    serve as a reference.  Coefficients use A^2 = (mu + omega)/(4 mu),
    B^2 = (mu - omega)/(4 mu) with nonnegative roots.

    The publication never writes the eigenvectors out, so their sign
    realization is pinned here by requiring the expression to reproduce the
    stated initial state at t = 0; with this package's sign convention that
    amounts to negating the first eigenvector.  Any residual against the
    reference engine is reported by the audit, not corrected.
    """
    a, mu = couplings.a, couplings.mu
    if a <= 0 or mu <= a:
        raise ValidationError("transcription requires a > 0 and omega > 0")
    omega = math.sqrt(mu * mu - a * a)
    cap_a = math.sqrt((mu + omega) / (4.0 * mu))
    cap_b = math.sqrt((mu - omega) / (4.0 * mu))

    v = spectrum.eigenvectors.astype(complex)
    v[:, 0] = -v[:, 0]

    def ket_bra(p: int, q: int) -> np.ndarray:
        return np.outer(v[:, p], v[:, q].conj())

    def damp(freq: float) -> float:
        # decay exponent 2 freq^2 t / gamma of the published expression
        return 0.0 if math.isinf(gamma) else 2.0 * freq * freq * t / gamma

    apb = 0.5 * (cap_a + cap_b) ** 2
    amb = 0.5 * (cap_a - cap_b) ** 2
    cross = 0.5 * (cap_a**2 - cap_b**2)

    rho = apb * (ket_bra(0, 0) + ket_bra(3, 3))
    rho += -apb * (
        np.exp(-damp(mu - a) - 2j * (mu - a) * t) * ket_bra(0, 3)
        + np.exp(-damp(mu - a) + 2j * (mu - a) * t) * ket_bra(3, 0)
    )
    rho += amb * (
        np.exp(-damp(mu + a) + 2j * (mu + a) * t) * ket_bra(1, 2)
        + np.exp(-damp(mu + a) - 2j * (mu + a) * t) * ket_bra(2, 1)
    )
    rho += amb * (ket_bra(1, 1) + ket_bra(2, 2))
    rho += cross * (
        np.exp(-damp(mu) - 2j * mu * t) * (ket_bra(0, 1) - ket_bra(2, 3))
        + np.exp(-damp(mu) + 2j * mu * t) * (ket_bra(1, 0) - ket_bra(3, 2))
        + np.exp(-damp(a) + 2j * a * t) * (ket_bra(0, 2) - ket_bra(1, 3))
        + np.exp(-damp(a) - 2j * a * t) * (ket_bra(2, 0) - ket_bra(3, 1))
    )
    return DensityMatrix(rho, spectrum.basis_order)
