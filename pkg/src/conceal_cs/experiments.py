"""Seeded experiment sweeps and attack demonstrations with CSV output.

Seeding: one master seed per run.  Each component (matrix stream, signal
source, adversary guesses, ...) gets its own generator from
``numpy.random.SeedSequence([master, crc32(component_name)])``, so results
can be cited by a single number and components do not share streams.
"""

from __future__ import annotations

import csv
import io
import json
import math
import zlib
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import attacks
from .codec import CONCEALED, conceal, default_e_max, encrypt, energy, eos_encrypt, ots_encrypt, strip_conceal
from .errors import ConfigError
from .keystream import Key, RegisterSpec, ShiftRegister, SymbolGenerator, connection_polynomial, lfsr_spec, make_key
from .recovery import amse, build_dictionary, dct_dictionary, decode
from .sensing import LFSR_GAUSSIAN, REFERENCE_GAUSSIAN, build_matrix, measure_period, reference_gaussian
from .signals import ecg_like_block, sparse_dct_block, sparse_dct_signal

SUCCESS_AMSE = 1e-8

MATRIX = "matrix"
TWO_BASIS = "two-basis"
OTS_DCT = "ots-dct"
CONCEALED_TWO_BASIS = "concealed-two-basis"


def component_rng(master: int, name: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(master), zlib.crc32(name.encode())]))


@dataclass
class ExperimentConfig:
    """Sweep description.

    ``kind="matrix"`` compares keystream and reference Gaussian matrices on
    K-sparse DCT signals over ``K_values`` at ``M_values[0]``.
    ``kind="two-basis"`` compares plain one-time sensing with DCT decoding
    against concealed two-basis decoding over ``rho_values`` (M = round(rho*N)).
    """

    kind: str = TWO_BASIS
    N: int = 64
    M_values: list[int] = field(default_factory=lambda: [32])
    rho_values: list[float] = field(default_factory=lambda: [0.3, 0.4, 0.5])
    K_values: list[int] = field(default_factory=lambda: [2, 4, 6, 8])
    L: int = 11
    trials: int = 100
    blocks: int = 100
    e_max_factor: float = 1.2
    schemes: list[str] = field(default_factory=list)
    seed: int = 0
    solver: str = "bp"
    output: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.kind not in (MATRIX, TWO_BASIS):
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 1 or self.blocks < 1:
            raise ConfigError("trials and blocks must be >= 1")
        for M in self.M_pairs():
            if not 1 <= M < self.N:
                raise ConfigError(f"M={M} must satisfy 1 <= M < N={self.N}")
        if self.L < 3 or self.L % 2 == 0:
            raise ConfigError("L must be odd and >= 3")
        if not self.schemes:
            self.schemes = (
                [LFSR_GAUSSIAN, REFERENCE_GAUSSIAN] if self.kind == MATRIX else [OTS_DCT, CONCEALED_TWO_BASIS]
            )

    def M_pairs(self) -> list[int]:
        if self.kind == MATRIX:
            return list(self.M_values)
        return [int(round(r * self.N)) for r in self.rho_values]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields {sorted(unknown)}")
        return cls(**data)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def loads(cls, text: str) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad config JSON: {exc}") from None


EXPERIMENT_COLUMNS = ["kind", "scheme", "param", "value", "trial", "amse", "success", "success_rate"]


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c, "")) for c in columns])
    return buf.getvalue()


def run_experiment(config: ExperimentConfig) -> list[dict]:
    """Per-trial AMSE rows followed by per-(scheme, param) summary rows."""
    if config.kind == MATRIX:
        rows = _matrix_sweep(config)
    else:
        rows = _two_basis_sweep(config)
    summary = []
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault((r["scheme"], r["param"], r["value"]), []).append(r)
    for (scheme, param, value), rs in groups.items():
        summary.append(
            {
                "kind": config.kind,
                "scheme": scheme,
                "param": param,
                "value": value,
                "trial": "mean",
                "amse": float(np.mean([r["amse"] for r in rs])),
                "success": "",
                "success_rate": sum(r["success"] for r in rs) / len(rs),
            }
        )
    return rows + summary


def experiment_csv(config: ExperimentConfig) -> str:
    text = rows_to_csv(run_experiment(config), EXPERIMENT_COLUMNS)
    if config.output:
        Path(config.output).write_text(text)
    return text


def _matrix_sweep(cfg: ExperimentConfig) -> list[dict]:
    N, M = cfg.N, cfg.M_values[0]
    sig_rng = component_rng(cfg.seed, "signal")
    ref_rng = component_rng(cfg.seed, "reference-matrix")
    gen = SymbolGenerator(make_key(cfg.L, rng=component_rng(cfg.seed, "key")))
    D = dct_dictionary(N)
    rows = []
    for K in cfg.K_values:
        for t in range(cfg.trials):
            s = sparse_dct_signal(N, K, sig_rng)
            for scheme in cfg.schemes:
                if scheme == LFSR_GAUSSIAN:
                    phi = build_matrix(gen, M, N)
                elif scheme == REFERENCE_GAUSSIAN:
                    phi = reference_gaussian(M, N, ref_rng)
                else:
                    raise ConfigError(f"scheme {scheme!r} not valid for a matrix sweep")
                x_hat = decode(ots_encrypt(s, phi), phi, D, method=cfg.solver).x_prime_hat
                err = amse([s], [x_hat])
                rows.append(_row(cfg, scheme, "K", K, t, err))
    return rows


def _two_basis_sweep(cfg: ExperimentConfig) -> list[dict]:
    N = cfg.N
    sig_rng = component_rng(cfg.seed, "signal")
    gen = SymbolGenerator(make_key(cfg.L, rng=component_rng(cfg.seed, "key")))
    blocks = [ecg_like_block(N, sig_rng) for _ in range(cfg.blocks)]
    E_max = default_e_max(blocks, cfg.e_max_factor)
    two = build_dictionary(N)
    dct_short = dct_dictionary(N - 1)
    rows = []
    for rho, M in zip(cfg.rho_values, cfg.M_pairs()):
        for t, x in enumerate(blocks):
            for scheme in cfg.schemes:
                if scheme == OTS_DCT:
                    phi = build_matrix(gen, M, N - 1)
                    x_hat = decode(ots_encrypt(x, phi), phi, dct_short, method=cfg.solver).x_prime_hat
                elif scheme == CONCEALED_TWO_BASIS:
                    phi = build_matrix(gen, M, N)
                    ct = encrypt(conceal(x, E_max), phi)
                    x_hat = strip_conceal(decode(ct, phi, two, method=cfg.solver).x_prime_hat)
                else:
                    raise ConfigError(f"scheme {scheme!r} not valid for a two-basis sweep")
                rows.append(_row(cfg, scheme, "rho", rho, t, amse([x], [x_hat])))
    return rows


def _row(cfg, scheme, param, value, trial, err) -> dict:
    return {
        "kind": cfg.kind,
        "scheme": scheme,
        "param": param,
        "value": value,
        "trial": trial,
        "amse": err,
        "success": int(err < SUCCESS_AMSE),
        "success_rate": "",
    }


# --- attack demos -----------------------------------------------------------

ATTACK_COLUMNS = ["trial", "scheme", "statistic", "verdict"]
DEMOS = ("superincreasing", "sequence-count", "period", "bm", "energy-leak", "wrong-key", "eos-compare")


def toy_period_key() -> Key:
    """L=5 key: LFSRs of degree 3, 4, 5, a phase-shifted second degree-3
    LFSR, and a degree-3 NFSR (below the largest LFSR degree)."""
    registers = (
        lfsr_spec(3),
        lfsr_spec(4),
        lfsr_spec(5),
        lfsr_spec(3),
        RegisterSpec(3, (0, 1), "nonlinear", ((1, 2),)),
    )
    return Key(registers, (0b001, 0b0001, 0b00001, 0b110, 0b101))


def run_attack_demo(name: str, trials: int = 10, seed: int = 0, **kw) -> list[dict]:
    try:
        fn = _DEMO_FUNCS[name]
    except KeyError:
        raise ConfigError(f"unknown demo {name!r}; choose from {', '.join(DEMOS)}") from None
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    return fn(trials, seed, **kw)


def _verdict(ok: bool) -> str:
    return "pass" if ok else "fail"


def _demo_superincreasing(trials, seed, M=10, N=32):
    rng = component_rng(seed, "superincreasing")
    x = attacks.make_superincreasing(N)
    rows = []
    for t in range(trials):
        phi = rng.choice([-1.0, 1.0], size=(M, N))
        rec = attacks.recover_binomial_matrix(attacks.measure_exact(phi, x), x)
        rows.append({"trial": t, "scheme": "binomial", "statistic": float(np.mean(rec.entries == phi)),
                     "verdict": _verdict(np.array_equal(rec.entries, phi))})
    return rows


def _demo_sequence_count(trials, seed, L=3, F=4):
    rng = component_rng(seed, "sequence-count")
    alphabet = list(range(-L + 2, L - 1, 2))
    rows = []
    for t in range(trials):
        symbols = [int(s) for s in rng.choice(alphabet, size=F)]
        count = attacks.sequence_count(attacks.SequenceCensus.from_symbols(symbols, L))
        brute = attacks.enumerate_consistent_bitstreams(symbols, L)
        rows.append({"trial": t, "scheme": f"L={L},F={F}", "statistic": count.total,
                     "verdict": _verdict(count.total == brute and count.lower_bound <= count.total)})
    return rows


def _demo_period(trials, seed):
    key = toy_period_key()
    mp = measure_period(key)
    lcm = math.lcm(*(2**r.degree - 1 for r in key.lfsrs))
    return [{"trial": 0, "scheme": "toy-L5", "statistic": mp.period,
             "verdict": _verdict(mp.period % lcm == 0 and mp.period >= lcm)}]


def _demo_bm(trials, seed, degree=16):
    rng = component_rng(seed, "bm")
    spec = lfsr_spec(degree)
    rows = []
    for t in range(trials):
        key_seed = int(rng.integers(1, 2**degree))
        bits = ShiftRegister(spec, key_seed).bits(2 * degree)
        rep = attacks.berlekamp_massey(bits)
        ok = rep.complexity == degree and rep.connection_polynomial == connection_polynomial(spec)
        rows.append({"trial": t, "scheme": f"lfsr-{degree}", "statistic": rep.complexity, "verdict": _verdict(ok)})
    return rows


def _energy_pairs(seed, blocks, N, M, scheme, sigma_a=None):
    rng = component_rng(seed, "energy-leak-signal")
    gen = SymbolGenerator(make_key(rng=component_rng(seed, "energy-leak-key")))
    eos_rng = component_rng(seed, "eos")
    E_max = 1.0
    pairs = []
    for _ in range(blocks):
        x = rng.standard_normal(N - 1)
        x *= np.sqrt(rng.uniform(0.1, 0.9) * E_max / energy(x))
        phi = build_matrix(gen, M, N)
        if scheme == CONCEALED:
            pairs.append((x, encrypt(conceal(x, E_max), phi)))
        elif scheme == "ots":
            xp = np.concatenate(([0.0], x))
            pairs.append((xp, ots_encrypt(xp, phi)))
        else:
            xp = np.concatenate(([0.0], x))
            pairs.append((xp, eos_encrypt(xp, phi, sigma_a, eos_rng)))
    return pairs


def _demo_energy_leak(trials, seed, blocks=200, N=256, M=128):
    rows = []
    for scheme in (CONCEALED, "ots"):
        rep = attacks.energy_leak_probe(_energy_pairs(seed, blocks, N, M, scheme))
        rows.append({"trial": 0, "scheme": scheme, "statistic": rep.correlation, "verdict": rep.verdict})
    return rows


def _demo_eos_compare(trials, seed, blocks=200, N=256, M=128, sigmas=(0.2, 0.4, 1.0, 2.0)):
    rows = []
    for sigma in sigmas:
        rep = attacks.energy_leak_probe(_energy_pairs(seed, blocks, N, M, "eos", sigma))
        rows.append({"trial": 0, "scheme": f"eos-sigma{sigma:g}", "statistic": rep.correlation, "verdict": rep.verdict})
    rep = attacks.energy_leak_probe(_energy_pairs(seed, blocks, N, M, CONCEALED))
    rows.append({"trial": 0, "scheme": CONCEALED, "statistic": rep.correlation, "verdict": rep.verdict})
    return rows


def _demo_wrong_key(trials, seed, N=64, M=32, K=5):
    rng = component_rng(seed, "wrong-key-signal")
    adv = component_rng(seed, "wrong-key-adversary")
    gen = SymbolGenerator(make_key(rng=component_rng(seed, "wrong-key-key")))
    rows = []
    for t in range(trials):
        x = sparse_dct_block(N, K, rng)
        phi = build_matrix(gen, M, N)
        ct = encrypt(conceal(x, 1.2 * energy(x)), phi)
        rep = attacks.wrong_matrix_decode(ct, x, phi, 1, rng=adv)
        rows.append({"trial": t, "scheme": CONCEALED, "statistic": rep.min_ratio,
                     "verdict": _verdict(rep.min_ratio >= 100)})
    return rows


_DEMO_FUNCS = {
    "superincreasing": _demo_superincreasing,
    "sequence-count": _demo_sequence_count,
    "period": _demo_period,
    "bm": _demo_bm,
    "energy-leak": _demo_energy_leak,
    "wrong-key": _demo_wrong_key,
    "eos-compare": _demo_eos_compare,
}


def attack_csv(name: str, trials: int = 10, seed: int = 0, output: str | None = None, **kw) -> str:
    text = rows_to_csv(run_attack_demo(name, trials, seed, **kw), ATTACK_COLUMNS)
    if output:
        Path(output).write_text(text)
    return text
