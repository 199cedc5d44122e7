"""Command-line entry point.

Subcommands:
  augment    run the configured augmentation over a manifest
  verify     recompute a finished run and check outputs bit-for-bit
  attn-skew  eigenvalue-skewness report for one or two attention dumps
  features   log-mel feature extraction only

Exit codes: 0 success, 1 partial/data errors, 2 configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import tempfile
from pathlib import Path

from . import __version__
from .attention import eq2_score, read_attention, relative_drop
from .config import MODES, OUTPUT_KINDS, SPECAUGMENT_CHOICES, build_run_config
from .errors import ConfigError, MismatchFoundError, PmctError
from .pipeline import run_batch, verify_run

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--manifest", help="JSON-lines utterance manifest")
    parser.add_argument("--rir-list", dest="rir_list", help="RIR pool list (id<TAB>path)")
    parser.add_argument("--noise-list", dest="noise_list", help="noise pool list (id<TAB>path)")
    parser.add_argument("--root", help="base directory for relative paths")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int, help="global seed (env PMCT_SEED is the fallback)")
    parser.add_argument("--epoch", type=int, help="epoch index for seed derivation")
    parser.add_argument("--mode", choices=MODES, help="augmentation mode")
    parser.add_argument("--pi", help="clean-patch probability in [0,1], or 'rand'")
    parser.add_argument("--patch-len", dest="patch_len", type=float, help="patch length, seconds")
    parser.add_argument("--p-reverb", dest="p_reverb", type=float, help="reverb probability")
    parser.add_argument("--p-noise", dest="p_noise", type=float, help="noise probability")
    parser.add_argument("--snr-lo", dest="snr_lo", type=float, help="SNR range low, dB")
    parser.add_argument("--snr-hi", dest="snr_hi", type=float, help="SNR range high, dB")
    parser.add_argument("--specaugment", choices=SPECAUGMENT_CHOICES,
                        help="feature masking level")
    parser.add_argument("--output-kind", dest="output_kind", choices=OUTPUT_KINDS,
                        help="what to write per utterance")
    parser.add_argument("--workers", type=int, help="parallel workers over utterances")
    parser.add_argument("--fail-fast", dest="fail_fast", action="store_const", const="true",
                        help="abort on the first per-utterance error")


def _config_from_args(args: argparse.Namespace):
    keys = ("manifest", "rir_list", "noise_list", "root", "out", "seed", "epoch", "mode",
            "pi", "patch_len", "p_reverb", "p_noise", "snr_lo", "snr_hi", "specaugment",
            "output_kind", "workers", "fail_fast")
    flags = {key: getattr(args, key, None) for key in keys}
    return build_run_config(flags, config_path=args.config)


def _cmd_augment(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args).validate()
    summary = run_batch(cfg, task="augment")
    for entry_id, error in summary.errors:
        print(f"error: {entry_id}: {error}", file=sys.stderr)
    print(summary.line())
    return EXIT_PARTIAL if summary.failed else EXIT_OK


def _cmd_features(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args).validate(require_pools=False)
    summary = run_batch(cfg, task="features")
    for entry_id, error in summary.errors:
        print(f"error: {entry_id}: {error}", file=sys.stderr)
    print(summary.line())
    return EXIT_PARTIAL if summary.failed else EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args).validate()
    with tempfile.TemporaryDirectory(prefix="pmct-verify-") as scratch:
        try:
            report = verify_run(cfg, scratch)
        except MismatchFoundError as exc:
            print(f"FAIL: {exc}", file=sys.stderr)
            return EXIT_PARTIAL
    print(f"PASS: {report.checked} utterance(s) verified, "
          f"max SNR error {report.max_snr_error_db:.3e} dB")
    return EXIT_OK


def _load_model_dir(path: str):
    files = sorted(p for p in Path(path).iterdir() if p.is_file())
    if not files:
        raise ConfigError(f"no attention files in {path}")
    return [read_attention(p) for p in files]


def _cmd_attn_skew(args: argparse.Namespace) -> int:
    if len(args.model_dirs) > 2:
        raise ConfigError("attn-skew takes one or two model directories")
    reports = []
    for model_dir in args.model_dirs:
        report = eq2_score(_load_model_dir(model_dir))
        reports.append(report)
        mean = "undefined" if report.dataset_mean is None else f"{report.dataset_mean:.6f}"
        print(f"{model_dir}: S = {mean} over {len(report.per_utterance)} utterance(s)"
              + (f", {len(report.excluded)} excluded" if report.excluded else ""))

    payload = {"models": {d: r.to_dict() for d, r in zip(args.model_dirs, reports)}}
    if len(reports) == 2:
        s_m, s_p = reports[0].dataset_mean, reports[1].dataset_mean
        if s_m is None or s_p is None or s_m == 0.0:
            print("relative drop: undefined")
            payload["relative_drop"] = None
        else:
            drop = relative_drop(s_m, s_p)
            print(f"relative drop (S_m - S_p)/S_m = {drop:.6f}")
            payload["relative_drop"] = drop
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pmct",
        description="Deterministic patched multi-condition augmentation for robust ASR data",
    )
    parser.add_argument("--version", action="version", version=f"pmct {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_augment = sub.add_parser("augment", help="augment a manifest of utterances")
    _add_run_flags(p_augment)
    p_augment.set_defaults(func=_cmd_augment)

    p_features = sub.add_parser("features", help="extract log-mel features only")
    _add_run_flags(p_features)
    p_features.set_defaults(func=_cmd_features)

    p_verify = sub.add_parser("verify", help="recompute and check a finished run")
    _add_run_flags(p_verify)
    p_verify.set_defaults(func=_cmd_verify)

    p_skew = sub.add_parser("attn-skew", help="attention eigenvalue-skewness report")
    p_skew.add_argument("model_dirs", nargs="+", metavar="MODEL_DIR",
                        help="one or two directories of attention tensor files")
    p_skew.add_argument("--json", help="also write the report as JSON to this path")
    p_skew.set_defaults(func=_cmd_attn_skew)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PmctError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
