from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any

import numpy as np

from deep_polar.analysis import min_weight_scl_estimate, weight_distribution
from deep_polar.config import settings
from deep_polar.construction import DeepPolarCode, load_code_config
from deep_polar.encoder import encode
from deep_polar.errors import DeepPolarError, InvalidArgument
from deep_polar.gf2 import BitVector
from deep_polar.models import DECODERS, SimConfig
from deep_polar.simulation import Pipeline, run_bler
from deep_polar.state import CheckpointStore, save_csv, write_csv

log = logging.getLogger("deep_polar.cli")


def _read_json(path: Path) -> dict[str, Any]:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidArgument(f"cannot read {path}: {exc}") from exc


def _load_code(path: str, profile: str | None = None) -> DeepPolarCode:
    raw = _read_json(Path(path))
    raw.setdefault("name", Path(path).stem)
    if profile:
        raw["profile"] = profile
    return load_code_config(raw)


def _read_llrs(path: str) -> np.ndarray:
    try:
        tokens = Path(path).read_text(encoding="utf-8").split()
        return np.array([float(t) for t in tokens])
    except (OSError, ValueError) as exc:
        raise InvalidArgument(f"cannot read LLR file {path}: {exc}") from exc


def _float_list(text: str) -> list[float]:
    return [float(item) for item in text.replace(",", " ").split()]


def cmd_encode(args: argparse.Namespace) -> int:
    code = _load_code(args.code, args.profile)
    message = BitVector.parse(args.msg, code.k)
    codeword = encode(code, message)
    print(codeword.to_hex() if args.hex else codeword.to_string())
    return 0


def cmd_decode(args: argparse.Namespace) -> int:
    code = _load_code(args.code, args.profile)
    pipeline = Pipeline(code, args.decoder, args.list, args.channel, args.min_sum, args.guess_bits)
    pipeline.check()
    result = pipeline.decode(_read_llrs(args.llr))
    print(json.dumps(result.to_dict(), indent=2))
    return 0 if result.success else 2


def cmd_weights(args: argparse.Namespace) -> int:
    code = _load_code(args.code, args.profile)
    spectrum = weight_distribution(code, max_k=args.max_k, workers=args.workers)
    print("weight,count")
    for weight, count in spectrum.rows():
        print(f"{weight},{count}")
    return 0


def cmd_dmin_est(args: argparse.Namespace) -> int:
    code = _load_code(args.code, args.profile)
    print(min_weight_scl_estimate(code, args.list))
    return 0


def cmd_describe(args: argparse.Namespace) -> int:
    code = _load_code(args.code, args.profile)
    print(json.dumps(code.describe(), indent=2))
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    config_path = Path(args.config)
    raw = _read_json(config_path)
    code_ref = raw.get("code")
    if isinstance(code_ref, str) and not Path(code_ref).exists():
        # relative code paths may be given relative to the sim config
        candidate = config_path.parent / code_ref
        if candidate.exists():
            raw["code"] = str(candidate)
    overrides = {
        "channel": args.channel,
        "seed": args.seed,
        "decoder": args.decoder,
        "list_size": args.list,
        "snr_kind": args.snr_kind,
        "max_trials": args.max_trials,
    }
    raw.update({key: value for key, value in overrides.items() if value is not None})
    if args.ebn0:
        raw["points"] = _float_list(args.ebn0)
    if args.eps:
        raw["channel"] = "bec"
        raw["points"] = _float_list(args.eps)
    if args.min_sum:
        raw["min_sum"] = True
    raw.setdefault("name", config_path.stem)
    config = SimConfig.from_dict(raw)

    checkpoint = CheckpointStore(settings.results_dir / "checkpoints.json")
    if not args.resume:
        checkpoint.clear(config.key())
    result = run_bler(config, threads=args.threads, progress=args.progress, checkpoint=checkpoint)
    if args.out:
        save_csv(result.points, Path(args.out))
        log.info("Saved %d point(s) to %s", len(result.points), args.out)
    else:
        write_csv(result.points, sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deep-polar", description="Deep polar codes: encode, decode, analyse, simulate")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def code_command(name: str, help_text: str) -> argparse.ArgumentParser:
        command = sub.add_parser(name, help=help_text)
        command.add_argument("--code", required=True, help="code config JSON")
        command.add_argument("--profile", help="override the profile: bec:EPS | dega:SNR_DB | seq:PATH")
        return command

    p = code_command("encode", "encode one message")
    p.add_argument("--msg", required=True, help="message as hex (MSB first) or a 0/1 string")
    p.add_argument("--hex", action="store_true", help="print the codeword as hex")
    p.set_defaults(handler=cmd_encode)

    p = code_command("decode", "decode one LLR vector")
    p.add_argument("--llr", required=True, help="file with one LLR per line, positions 1..N")
    p.add_argument("--decoder", choices=DECODERS, default="scl-bpc")
    p.add_argument("--list", type=int, default=8, help="list size S")
    p.add_argument("--channel", choices=("awgn", "bec"), default="awgn", help="selects ML-AWGN or ML-BEC")
    p.add_argument("--guess-bits", type=int, default=0, help="parallel-SCL guesses on single-layer codes")
    p.add_argument("--min-sum", action="store_true", help="min-sum check-node update")
    p.set_defaults(handler=cmd_decode)

    p = code_command("weights", "exact weight distribution as CSV")
    p.add_argument("--max-k", type=int, default=settings.max_enum_k)
    p.add_argument("--workers", type=int, default=settings.threads)
    p.set_defaults(handler=cmd_weights)

    p = code_command("dmin-est", "list-decoder estimate of the minimum distance")
    p.add_argument("--list", type=int, required=True, help="list size S")
    p.set_defaults(handler=cmd_dmin_est)

    p = code_command("describe", "sets, N, K, rate and encoding cost")
    p.set_defaults(handler=cmd_describe)

    p = sub.add_parser("simulate", help="Monte Carlo BLER/BER sweep")
    p.add_argument("--config", required=True, help="simulation config JSON")
    p.add_argument("--out", help="CSV output path (stdout when omitted)")
    p.add_argument("--threads", type=int, help="worker processes")
    p.add_argument("--channel", choices=("awgn", "bec"))
    p.add_argument("--ebn0", help="comma-separated SNR points in dB")
    p.add_argument("--eps", help="comma-separated erasure probabilities")
    p.add_argument("--snr-kind", choices=("ebn0", "esn0"))
    p.add_argument("--seed", type=int)
    p.add_argument("--decoder", choices=DECODERS)
    p.add_argument("--list", type=int, help="list size S")
    p.add_argument("--max-trials", type=int)
    p.add_argument("--min-sum", action="store_true")
    p.add_argument("--progress", action="store_true", help="per-batch status on stderr")
    p.add_argument("--resume", action="store_true", help="skip points finished by an earlier run")
    p.set_defaults(handler=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else getattr(logging, settings.log_level, logging.INFO),
        format="%(asctime)s %(levelname)s %(message)s",
        datefmt="%H:%M:%S",
    )
    try:
        settings.validate()
        return args.handler(args)
    except (DeepPolarError, ValueError) as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
