"""
Domain model for autonomous bosonic thermal machines.

A machine is a network of ``d`` bosonic modes with a quadratic,
excitation-number-preserving Hamiltonian encoded by a Hermitian
positive-definite single-particle matrix ``H`` (units with hbar = k_B = 1).
The modes are split into ``N`` disjoint parties, and party ``n`` couples
weakly to its own thermal bath, which may be bosonic (Bose-Einstein energy
distribution, chemical potential allowed) or built from spins (Fermi-Dirac
distribution, zero chemical potential).  Each bath is characterised entirely
by a matrix-valued spectral density ``J(omega)``, Hermitian positive
semidefinite for ``omega >= 0`` and zero for negative frequencies.

Machine files
-------------
Machines can be stored as plain-text key-value documents::

    [system]
    d = 2
    H = 1.0+0j, 0.08+0j, 0.08+0j, 1.3+0j     # row-major, complex "re+imj"
    partition = 1 | 2                          # 1-based mode sets per party
    eta = 0, 0                                 # 1 adds position-like coupling

    [bath.1]
    kind = bosonic                             # or: spin
    beta = 1.5
    mu = -0.2
    spectral = flat                            # flat | ohmic | collective
    coupling = 0.02
    cutoff = 6.0
    tau_b = 0.5

    [bath.2]
    kind = spin
    beta = 0.7
    spectral = ohmic
    coupling = 0.01
    cutoff = 4.0

    [options]
    regime = global                            # global | local
    lamb = on
    freq_cutoff = auto

Collective baths additionally take ``profile = flat|ohmic`` and
``weights = w1, w2, ...`` (complex, one per mode of the party) and produce
the rank-1 density ``J_jk(omega) = profile(omega) * w_j * conj(w_k)``.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "MachineError",
    "ParseError",
    "ValidationError",
    "DomainError",
    "SpectralDensity",
    "NetworkModel",
    "BathModel",
    "Options",
    "MachineSpec",
    "occupation",
    "load_machine",
    "loads_machine",
    "save_machine",
    "dumps_machine",
]

BOSONIC = -1
SPIN = +1

_KINDS = {"bosonic": BOSONIC, "spin": SPIN}
_FAMILIES = ("flat", "ohmic", "collective")


class MachineError(Exception):
    """Base class for machine construction problems."""


class ParseError(MachineError):
    """Machine file could not be parsed."""


class ValidationError(MachineError):
    """A machine invariant is violated; the message names it."""


class DomainError(MachineError):
    """A quantity was requested outside its physical domain."""


def _hermitize_check(M: NDArray, tol_rel: float, what: str) -> NDArray:
    scale = max(np.abs(M).max(), 1e-300)
    if np.abs(M - M.conj().T).max() > tol_rel * scale:
        raise ValidationError(f"{what} is not Hermitian within tolerance {tol_rel:g}")
    return 0.5 * (M + M.conj().T)


@dataclass(frozen=True, eq=False)
class SpectralDensity:
    """Matrix-valued bath spectral density ``J(omega)``.

    Three built-in families, all of the separable form
    ``J(omega) = profile(omega) * M`` with a fixed Hermitian PSD matrix ``M``:

    ``flat``
        ``profile = coupling`` on ``[0, cutoff]``, zero elsewhere; ``M = I``.
    ``ohmic``
        ``profile = coupling * omega * exp(-omega / cutoff)``; ``M = I``.
    ``collective``
        rank-1 ``M = w w^dag`` with the scalar profile taken from
        ``profile_family`` (flat or ohmic).

    The separable structure is what makes dispersive (principal-value)
    integrals cheap: one scalar integral per frequency instead of one per
    matrix entry.
    """

    family: str
    coupling: float
    cutoff: float
    size: int
    profile_family: str = "flat"
    weights: NDArray | None = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValidationError(f"unknown spectral density family {self.family!r}")
        if self.coupling < 0:
            raise ValidationError("spectral density coupling must be >= 0")
        if self.cutoff <= 0:
            raise ValidationError("spectral density cutoff must be > 0")
        if self.size < 1:
            raise ValidationError("spectral density size must be >= 1")
        if self.family == "collective":
            if self.weights is None:
                raise ValidationError("collective spectral density requires weights")
            w = np.asarray(self.weights, dtype=complex).reshape(-1)
            if w.size != self.size:
                raise ValidationError(
                    f"collective weights length {w.size} != party size {self.size}"
                )
            object.__setattr__(self, "weights", w)
            if self.profile_family not in ("flat", "ohmic"):
                raise ValidationError(
                    f"unknown collective profile {self.profile_family!r}"
                )
        elif self.weights is not None:
            raise ValidationError(f"{self.family} spectral density takes no weights")

    @property
    def _profile_kind(self) -> str:
        return self.profile_family if self.family == "collective" else self.family

    def profile(self, omega: float) -> float:
        """Scalar frequency profile; zero for ``omega < 0``."""
        if omega < 0.0:
            return 0.0
        if self._profile_kind == "flat":
            return self.coupling if omega <= self.cutoff else 0.0
        return self.coupling * omega * math.exp(-omega / self.cutoff)

    def base_matrix(self) -> NDArray:
        """The constant Hermitian PSD factor ``M`` in ``J = profile * M``."""
        if self.family == "collective":
            return np.outer(self.weights, self.weights.conj())
        return np.eye(self.size, dtype=complex)

    def matrix(self, omega: float) -> NDArray:
        """Full ``J(omega)``, zero below zero frequency."""
        return self.profile(omega) * self.base_matrix()

    def support_upper(self) -> float:
        """Frequency above which the profile is zero or negligible.

        For the ohmic family the exponential tail is truncated where it has
        decayed by ~``exp(-30)``, which is far below every tolerance used in
        this package.
        """
        if self._profile_kind == "flat":
            return self.cutoff
        return 30.0 * self.cutoff

    @property
    def is_zero(self) -> bool:
        return self.coupling == 0.0 or (
            self.family == "collective" and not np.any(self.weights)
        )


@dataclass(frozen=True, eq=False)
class NetworkModel:
    """The system side: mode count, single-particle matrix, parties, coupling flags.

    Parameters
    ----------
    d:
        Number of bosonic modes (>= 1).
    H:
        d x d complex Hermitian positive-definite matrix (angular frequency
        units).  Positivity is the stability condition for the network.
    partition:
        Disjoint 0-based mode-index tuples, one per party, covering
        ``range(d)``.
    eta:
        Per-mode flag in {0, 1}; 1 selects position-like bath coupling that
        does not conserve excitation number.
    """

    d: int
    H: NDArray
    partition: tuple[tuple[int, ...], ...]
    eta: tuple[int, ...]
    tol_herm: float = 1e-10

    def __post_init__(self):
        if self.d < 1:
            raise ValidationError("mode count d must be >= 1")
        H = np.array(self.H, dtype=complex)
        if H.shape != (self.d, self.d):
            raise ValidationError(f"H has shape {H.shape}, expected ({self.d}, {self.d})")
        H = _hermitize_check(H, self.tol_herm, "H")
        evals = np.linalg.eigvalsh(H)
        if evals.min() <= 0:
            raise ValidationError(
                f"H not positive definite (min eigenvalue {evals.min():.3e})"
            )
        H.setflags(write=False)
        object.__setattr__(self, "H", H)

        parts = tuple(tuple(int(i) for i in p) for p in self.partition)
        seen: set[int] = set()
        for p in parts:
            if not p:
                raise ValidationError("empty party in partition")
            for i in p:
                if not 0 <= i < self.d:
                    raise ValidationError(f"partition index {i} outside 0..{self.d - 1}")
                if i in seen:
                    raise ValidationError(f"partition sets overlap at mode {i}")
                seen.add(i)
        if len(seen) != self.d:
            missing = sorted(set(range(self.d)) - seen)
            raise ValidationError(f"partition does not cover modes {missing}")
        object.__setattr__(self, "partition", parts)

        eta = tuple(int(e) for e in self.eta)
        if len(eta) != self.d or any(e not in (0, 1) for e in eta):
            raise ValidationError("eta must be a length-d tuple of 0/1 flags")
        object.__setattr__(self, "eta", eta)

    @property
    def n_parties(self) -> int:
        return len(self.partition)

    def eigenfrequencies(self) -> NDArray:
        return np.linalg.eigvalsh(self.H)

    def min_frequency(self) -> float:
        return float(self.eigenfrequencies()[0])


@dataclass(frozen=True, eq=False)
class BathModel:
    """A single thermal bath.

    ``xi`` is -1 for bosonic baths (Bose-Einstein occupation, chemical
    potential ``mu`` allowed) and +1 for spin baths (Fermi-Dirac occupation,
    ``mu`` must be 0).  ``J`` carries the matrix-valued spectral density over
    the modes of the party this bath attaches to, and ``tau_b`` is the
    bath-correlation-time estimate used only by validity diagnostics.
    """

    xi: int
    beta: float
    mu: float
    J: SpectralDensity
    tau_b: float = 1.0

    def __post_init__(self):
        if self.xi not in (BOSONIC, SPIN):
            raise ValidationError("bath statistics flag xi must be -1 (bosonic) or +1 (spin)")
        if self.beta < 0:
            raise ValidationError("inverse temperature beta must be >= 0")
        if self.xi == SPIN and self.mu != 0.0:
            raise ValidationError("spin bath requires mu=0")
        if self.tau_b <= 0:
            raise ValidationError("tau_b must be > 0")
        # J(omega) must be Hermitian PSD wherever it is nonzero; the built-in
        # families guarantee this, so a spot check on the base matrix suffices.
        M = self.J.base_matrix()
        _hermitize_check(M, 1e-12, "spectral density base matrix")
        if np.linalg.eigvalsh(M).min() < -1e-12 * max(1.0, np.abs(M).max()):
            raise ValidationError("spectral density base matrix not PSD")

    @property
    def kind(self) -> str:
        return "bosonic" if self.xi == BOSONIC else "spin"


@dataclass(frozen=True)
class Options:
    """Solver options shared across the pipeline."""

    regime: str = "global"
    lamb: bool = True
    freq_cutoff: float | None = None
    tol_deg: float = 1e-8
    tol_psd: float = 1e-9
    pv_epsrel: float = 1e-8

    def __post_init__(self):
        if self.regime not in ("global", "local"):
            raise ValidationError(f"regime must be 'global' or 'local', got {self.regime!r}")
        if self.freq_cutoff is not None and self.freq_cutoff <= 0:
            raise ValidationError("freq_cutoff must be > 0")


@dataclass(frozen=True, eq=False)
class MachineSpec:
    """A validated machine: network + one bath per party + options."""

    network: NetworkModel
    baths: tuple[BathModel, ...]
    options: Options = field(default_factory=Options)

    def __post_init__(self):
        baths = tuple(self.baths)
        object.__setattr__(self, "baths", baths)
        if len(baths) != self.network.n_parties:
            raise ValidationError(
                f"bath count {len(baths)} != party count {self.network.n_parties}"
            )
        wmin = self.network.min_frequency()
        for n, (bath, party) in enumerate(zip(baths, self.network.partition)):
            if bath.J.size != len(party):
                raise ValidationError(
                    f"bath {n + 1} spectral density is {bath.J.size}-mode "
                    f"but party has {len(party)} modes"
                )
            if bath.xi == BOSONIC and bath.mu >= wmin:
                raise ValidationError(
                    f"bath {n + 1}: mu={bath.mu:g} >= min system eigenfrequency "
                    f"{wmin:g}; occupations would diverge"
                )

    @property
    def d(self) -> int:
        return self.network.d

    def with_options(self, **kwargs) -> "MachineSpec":
        return replace(self, options=replace(self.options, **kwargs))

    def lamb_cutoff(self) -> float:
        """Integration cutoff for dispersive integrals.

        Defaults to 10x the largest system eigenfrequency, extended to cover
        the support of every spectral density.
        """
        if self.options.freq_cutoff is not None:
            return self.options.freq_cutoff
        wmax = float(self.network.eigenfrequencies()[-1])
        sup = max((b.J.support_upper() for b in self.baths), default=0.0)
        return max(10.0 * wmax, sup)


def occupation(bath: BathModel, omega: float) -> float:
    """Mean occupation ``p(omega) = 1 / (xi + exp((omega - mu) * beta))``.

    Bose-Einstein for bosonic baths, Fermi-Dirac for spin baths.  Raises
    :class:`DomainError` for a bosonic bath at ``omega <= mu``, where the
    expression turns divergent or negative.
    """
    if bath.xi == BOSONIC and omega <= bath.mu:
        raise DomainError(
            f"bosonic occupation undefined at omega={omega:g} <= mu={bath.mu:g}"
        )
    x = (omega - bath.mu) * bath.beta
    if math.isnan(x):
        # beta = inf with omega = mu can only happen for spin baths (mu = 0)
        x = math.inf if omega > bath.mu else -math.inf
    if x > 700.0:  # exp overflow guard; the occupation is already ~0 or ~1/xi
        return 0.0
    if bath.xi == BOSONIC and x == -math.inf:
        raise DomainError("bosonic occupation diverges")
    denom = bath.xi + math.exp(x)
    if denom == 0.0:
        raise DomainError("occupation diverges (bosonic bath at infinite temperature)")
    return 1.0 / denom


# --- machine file I/O --------------------------------------------------------


def _parse_complex_list(text: str, what: str) -> NDArray:
    items = [t.strip() for t in text.replace("\n", " ").split(",") if t.strip()]
    try:
        return np.array([complex(t) for t in items])
    except ValueError as exc:
        raise ParseError(f"could not parse {what} as complex list: {exc}") from exc


def _parse_int_list(text: str, what: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ParseError(f"could not parse {what} as integer list: {exc}") from exc


def _fmt_complex(z: complex) -> str:
    return f"{z.real!r}{z.imag:+}j".replace("+-", "-")


def _parse_float(section, key: str, default: float | None = None) -> float:
    if key not in section:
        if default is None:
            raise ParseError(f"missing key {key!r} in section [{section.name}]")
        return default
    try:
        return float(section[key])
    except ValueError as exc:
        raise ParseError(f"bad float for {key!r} in [{section.name}]") from exc


def loads_machine(text: str) -> MachineSpec:
    """Parse a machine document from a string.  See the module docstring."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.optionxform = str  # keep key case as written
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ParseError(f"malformed machine file: {exc}") from exc

    if "system" not in cp:
        raise ParseError("missing [system] section")
    sysec = cp["system"]
    try:
        d = int(sysec.get("d", ""))
    except ValueError as exc:
        raise ParseError("missing or bad 'd' in [system]") from exc
    Hflat = _parse_complex_list(sysec.get("H", ""), "H")
    if Hflat.size != d * d:
        raise ParseError(f"H has {Hflat.size} entries, expected d*d = {d * d}")
    H = Hflat.reshape(d, d)

    if "partition" not in sysec:
        raise ParseError("missing 'partition' in [system]")
    parts = []
    for grp in sysec["partition"].split("|"):
        idx = _parse_int_list(grp, "partition")
        parts.append(tuple(i - 1 for i in idx))  # file is 1-based

    eta = _parse_int_list(sysec["eta"], "eta") if "eta" in sysec else [0] * d
    network = NetworkModel(d=d, H=H, partition=tuple(parts), eta=tuple(eta))

    baths = []
    for n in range(1, len(parts) + 1):
        name = f"bath.{n}"
        if name not in cp:
            raise ParseError(f"missing [{name}] section")
        sec = cp[name]
        kind = sec.get("kind", "bosonic").strip().lower()
        if kind not in _KINDS:
            raise ParseError(f"bath kind must be bosonic|spin, got {kind!r}")
        family = sec.get("spectral", "flat").strip().lower()
        size = len(parts[n - 1])
        weights = None
        profile = sec.get("profile", "flat").strip().lower()
        if family == "collective":
            if "weights" not in sec:
                raise ParseError(f"[{name}] collective bath needs 'weights'")
            weights = _parse_complex_list(sec["weights"], "weights")
        J = SpectralDensity(
            family=family,
            coupling=_parse_float(sec, "coupling"),
            cutoff=_parse_float(sec, "cutoff"),
            size=size,
            profile_family=profile,
            weights=weights,
        )
        baths.append(
            BathModel(
                xi=_KINDS[kind],
                beta=_parse_float(sec, "beta"),
                mu=_parse_float(sec, "mu", 0.0),
                J=J,
                tau_b=_parse_float(sec, "tau_b", 1.0),
            )
        )

    opt_kwargs: dict = {}
    if "options" in cp:
        osec = cp["options"]
        if "regime" in osec:
            opt_kwargs["regime"] = osec["regime"].strip().lower()
        if "lamb" in osec:
            val = osec["lamb"].strip().lower()
            if val not in ("on", "off"):
                raise ParseError("options.lamb must be on|off")
            opt_kwargs["lamb"] = val == "on"
        if "freq_cutoff" in osec and osec["freq_cutoff"].strip().lower() != "auto":
            opt_kwargs["freq_cutoff"] = _parse_float(osec, "freq_cutoff")
        for key in ("tol_deg", "tol_psd", "pv_epsrel"):
            if key in osec:
                opt_kwargs[key] = _parse_float(osec, key)

    return MachineSpec(network=network, baths=tuple(baths), options=Options(**opt_kwargs))


def load_machine(path) -> MachineSpec:
    """Load and validate a machine file.

    Raises :class:`ParseError` on malformed input and
    :class:`ValidationError` with the violated invariant named in the
    message.
    """
    with open(path, "r", encoding="utf-8") as fh:
        return loads_machine(fh.read())


def dumps_machine(spec: MachineSpec) -> str:
    """Serialize a machine to the document format accepted by ``loads_machine``."""
    out = io.StringIO()
    net = spec.network
    out.write("[system]\n")
    out.write(f"d = {net.d}\n")
    out.write("H = " + ", ".join(_fmt_complex(z) for z in net.H.reshape(-1)) + "\n")
    out.write(
        "partition = "
        + " | ".join(" ".join(str(i + 1) for i in p) for p in net.partition)
        + "\n"
    )
    out.write("eta = " + ", ".join(str(e) for e in net.eta) + "\n")
    for n, bath in enumerate(spec.baths, start=1):
        out.write(f"\n[bath.{n}]\n")
        out.write(f"kind = {bath.kind}\n")
        out.write(f"beta = {bath.beta!r}\n")
        out.write(f"mu = {bath.mu!r}\n")
        out.write(f"spectral = {bath.J.family}\n")
        out.write(f"coupling = {bath.J.coupling!r}\n")
        out.write(f"cutoff = {bath.J.cutoff!r}\n")
        if bath.J.family == "collective":
            out.write(f"profile = {bath.J.profile_family}\n")
            out.write(
                "weights = " + ", ".join(_fmt_complex(w) for w in bath.J.weights) + "\n"
            )
        out.write(f"tau_b = {bath.tau_b!r}\n")
    opt = spec.options
    out.write("\n[options]\n")
    out.write(f"regime = {opt.regime}\n")
    out.write(f"lamb = {'on' if opt.lamb else 'off'}\n")
    out.write(
        "freq_cutoff = "
        + ("auto" if opt.freq_cutoff is None else repr(opt.freq_cutoff))
        + "\n"
    )
    out.write(f"tol_deg = {opt.tol_deg!r}\n")
    out.write(f"tol_psd = {opt.tol_psd!r}\n")
    out.write(f"pv_epsrel = {opt.pv_epsrel!r}\n")
    return out.getvalue()


def save_machine(spec: MachineSpec, path) -> None:
    """Write ``spec`` so that ``load_machine`` reproduces it bit-for-bit
    up to floating-point round trip."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_machine(spec))
