"""Command line entry point: keygen, encrypt, decrypt, experiment, attack.

Exit codes: 0 success, 2 validation error, 3 runtime or numeric error.
``CONCEAL_CS_CONFIG_DIR`` is searched for experiment config files given by
bare name.
"""

from __future__ import annotations

import argparse
import os
import secrets
import sys
from pathlib import Path

from .codec import CONCEALED, OTS
from .errors import ConcealError, ValidationError
from .experiments import DEMOS, ExperimentConfig, attack_csv, experiment_csv
from .fileio import (
    dumps_key,
    load_key,
    read_ciphertext,
    read_ciphertext_csv,
    write_ciphertext,
    write_ciphertext_csv,
)
from .keystream import DEFAULT_NFSR_DEGREE, make_key
from .pipeline import decrypt_blocks, encrypt_blocks
from .sensing import period_report
from .signals import read_blocks_csv, write_blocks_csv

CONFIG_ENV = "CONCEAL_CS_CONFIG_DIR"
EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 2, 3


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _is_csv(path) -> bool:
    return str(path).lower().endswith(".csv")


def cmd_keygen(args) -> int:
    seed = args.seed if args.seed is not None else secrets.randbits(64)
    key = make_key(args.l, args.degrees, args.nfsr_degree, rng=seed)
    text = dumps_key(key)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    rep = period_report(key, args.m, args.n)
    print(
        f"L={key.L} lfsr_degrees={[r.degree for r in key.lfsrs]} nfsr_degree={key.nfsr.degree}\n"
        f"lcm period bound ~2^{rep.lower_bound_P.bit_length() - 1}, "
        f"matrix repeatability (M={args.m}, N={args.n}) ~2^{rep.log2_repeatability:.1f}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_encrypt(args) -> int:
    key = load_key(args.key)
    blocks = read_blocks_csv(getattr(args, "in"))
    cf = encrypt_blocks(key, blocks, args.m, args.emax, args.scheme)
    if _is_csv(args.out):
        write_ciphertext_csv(cf, args.out)
    else:
        write_ciphertext(cf, args.out)
    return EXIT_OK


def cmd_decrypt(args) -> int:
    key = load_key(args.key)
    src = getattr(args, "in")
    cf = read_ciphertext_csv(src) if _is_csv(src) else read_ciphertext(src)
    write_blocks_csv(decrypt_blocks(key, cf, args.solver), args.out)
    return EXIT_OK


def _resolve_config(name: str) -> Path:
    path = Path(name)
    if path.exists():
        return path
    base = os.environ.get(CONFIG_ENV)
    if base and (Path(base) / name).exists():
        return Path(base) / name
    raise ValidationError(f"config {name!r} not found (searched . and ${CONFIG_ENV})")


def cmd_experiment(args) -> int:
    data = {}
    if args.config:
        data = ExperimentConfig.loads(_resolve_config(args.config).read_text()).to_dict()
    overrides = {
        "kind": args.kind,
        "N": args.n,
        "M_values": None if args.m is None else [args.m],
        "rho_values": args.rho,
        "K_values": args.k,
        "L": args.l,
        "trials": args.trials,
        "blocks": args.blocks,
        "schemes": args.scheme,
        "seed": args.seed,
        "solver": args.solver,
        "output": args.out,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    text = experiment_csv(ExperimentConfig.from_dict(data))
    if not args.out:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_attack(args) -> int:
    text = attack_csv(args.name, args.trials, args.seed, args.out)
    if not args.out:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="conceal-cs", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    k = sub.add_parser("keygen", help="generate a key file")
    k.add_argument("--l", type=int, default=11, help="number of registers (odd, >= 3)")
    k.add_argument("--degrees", type=_int_list, default=None, help="L-1 LFSR degrees, comma separated")
    k.add_argument("--nfsr-degree", type=int, default=DEFAULT_NFSR_DEGREE)
    k.add_argument("--seed", type=int, default=None, help="entropy; random if omitted")
    k.add_argument("--m", type=int, default=64, help="M for the repeatability report")
    k.add_argument("--n", type=int, default=256, help="N for the repeatability report")
    k.add_argument("--out")
    k.set_defaults(func=cmd_keygen)

    e = sub.add_parser("encrypt", help="encrypt a CSV signal file")
    e.add_argument("--key", required=True)
    e.add_argument("--in", required=True, help="CSV, one block per row")
    e.add_argument("--out", required=True, help="ciphertext (.csv for the debug form)")
    e.add_argument("--emax", type=float, default=None, help="public energy cap (default 1.2 x max block energy)")
    e.add_argument("--m", type=int, required=True)
    e.add_argument("--scheme", choices=(CONCEALED, OTS), default=CONCEALED)
    e.set_defaults(func=cmd_encrypt)

    d = sub.add_parser("decrypt", help="decrypt a ciphertext file to CSV")
    d.add_argument("--key", required=True)
    d.add_argument("--in", required=True)
    d.add_argument("--out", required=True)
    d.add_argument("--solver", choices=("bp", "omp", "fista"), default="bp")
    d.set_defaults(func=cmd_decrypt)

    x = sub.add_parser("experiment", help="run a recovery sweep, CSV report")
    x.add_argument("--config", help=f"JSON config path or name inside ${CONFIG_ENV}")
    x.add_argument("--kind", choices=("matrix", "two-basis"))
    x.add_argument("--n", type=int)
    x.add_argument("--m", type=int, help="measurements for the matrix sweep")
    x.add_argument("--rho", type=_float_list, help="measurement ratios for the two-basis sweep")
    x.add_argument("--k", type=_int_list, help="sparsity levels for the matrix sweep")
    x.add_argument("--l", type=int)
    x.add_argument("--trials", type=int)
    x.add_argument("--blocks", type=int)
    x.add_argument("--scheme", action="append")
    x.add_argument("--seed", type=int)
    x.add_argument("--solver", choices=("bp", "omp", "fista"))
    x.add_argument("--out")
    x.set_defaults(func=cmd_experiment)

    a = sub.add_parser("attack", help="run an attack demonstration, CSV report")
    a.add_argument("name", choices=DEMOS)
    a.add_argument("--trials", type=int, default=10)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--out")
    a.set_defaults(func=cmd_attack)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ValidationError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConcealError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
