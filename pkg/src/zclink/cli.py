"""Batch front-end: config loading, seeded campaign execution, CSV and SVG
emission, and a run manifest with content digests.

Flags override environment variables (prefix ZCLINK_), which override the
config file.  The CSV files are deterministic given config and seed; the
manifest carries timestamps and is not.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, refdata, svgplot
from .channel import ChannelParams
from .sim import SimConfig, estimate_psd, run_ber, run_gamma_sweep
from .zccode import GrayCoder, ZcAlphabet, ZcCodebook, crossing_count, encode_pattern

logger = logging.getLogger(__name__)

ENV_PREFIX = "ZCLINK_"


class ConfigError(Exception):
    pass


# section -> key -> parser
_SCHEMA = {
    "run": {"seed": int},
    "system": {
        "n_symbols": int,
        "m_tx": int,
        "m_rx": int,
        "symbol_duration": float,
        "rolloff_tx": float,
        "rolloff_rx": float,
        "signaling_ratio": float,
        "e0": float,
        "solver_tol": float,
        "pilot": int,
    },
    "channel": {
        "n_users": int,
        "n_tx_antennas": int,
        "cell_radius_m": float,
        "distance_m": float,
        "shadow_sigma_db": float,
        "path_loss_exponent": float,
    },
    "gamma": {
        "wtxt_grid": lambda s: tuple(float(v) for v in s.split(",")),
        "n_sequences": int,
        "schemes": lambda s: tuple(v.strip() for v in s.split(",")),
    },
    "ber": {
        "snr_db_list": lambda s: tuple(float(v) for v in s.split(",")),
        "schemes": lambda s: tuple(v.strip() for v in s.split(",")),
        "max_bits": int,
        "error_budget": int,
        "max_trials": int,
    },
    "psd": {
        "blocks": int,
        "oversampling": int,
        "scheme": str,
    },
}


def _key_line(text: str, key: str) -> int | None:
    for i, line in enumerate(text.splitlines(), start=1):
        if line.strip().lower().startswith(key.lower()):
            return i
    return None


def parse_config(path: Path) -> dict:
    """Strict INI-style parse: unknown sections or keys are hard errors."""
    import configparser

    text = path.read_text()
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    out: dict = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{path}: unknown section [{section}]")
        out[section] = {}
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                line = _key_line(text, key)
                where = f"{path}:{line}" if line else str(path)
                raise ConfigError(f"{where}: unknown key {key!r} in section [{section}]")
            try:
                out[section][key] = _SCHEMA[section][key](raw)
            except ValueError as exc:
                line = _key_line(text, key)
                where = f"{path}:{line}" if line else str(path)
                raise ConfigError(f"{where}: bad value for {key!r}: {exc}") from exc
    return out


def _env(name: str) -> str | None:
    return os.environ.get(ENV_PREFIX + name)


def build_sim_config(cfg: dict, args, scheme: str) -> SimConfig:
    run = cfg.get("run", {})
    system = cfg.get("system", {})
    chan = cfg.get("channel", {})
    ber = cfg.get("ber", {})
    gamma = cfg.get("gamma", {})
    psd = cfg.get("psd", {})

    seed = args.seed if args.seed is not None else run.get("seed")
    if seed is None:
        raise ConfigError("a seed is required (config [run] seed or --seed)")

    snr_list = ber.get("snr_db_list", (0.0, 2.0, 4.0, 6.0, 8.0))
    if args.snr_list is not None:
        snr_list = tuple(float(v) for v in args.snr_list.split(","))
    if not snr_list:
        raise ConfigError("the SNR list must not be empty")

    wtxt_grid = gamma.get("wtxt_grid", tuple(refdata.GAMMA_WTXT_GRID))
    if not wtxt_grid:
        raise ConfigError("the bandwidth grid must not be empty")

    channel = ChannelParams(
        n_users=chan.get("n_users", 5),
        n_tx_antennas=chan.get("n_tx_antennas", 50),
        cell_radius_m=chan.get("cell_radius_m", 1000.0),
        distance_m=chan.get("distance_m", 300.0),
        shadow_sigma_db=chan.get("shadow_sigma_db", 8.0),
        path_loss_exponent=chan.get("path_loss_exponent", 3.0),
    )
    return SimConfig(
        seed=int(seed),
        scheme=scheme,
        n_symbols=system.get("n_symbols", 50),
        m_tx=system.get("m_tx", 2),
        m_rx=system.get("m_rx", 2),
        symbol_duration=system.get("symbol_duration", 1.0),
        rolloff_tx=system.get("rolloff_tx", 0.22),
        rolloff_rx=system.get("rolloff_rx", 0.22),
        signaling_ratio=system.get("signaling_ratio", 1.0),
        e0=system.get("e0", 1.0),
        channel=channel,
        snr_db_list=tuple(snr_list),
        max_bits=ber.get("max_bits", 200_000),
        error_budget=ber.get("error_budget", 200),
        max_trials=args.trials if args.trials is not None else ber.get("max_trials"),
        solver_tol=system.get("solver_tol", 1e-6),
        pilot=system.get("pilot", 1),
        wtxt_grid=tuple(wtxt_grid),
        n_sequences=gamma.get("n_sequences", 16),
        psd_blocks=psd.get("blocks", 24),
        psd_oversampling=psd.get("oversampling", 16),
    )


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class Manifest:
    """Run manifest listing every output file with a content digest."""

    def __init__(self, out_dir: Path, seed: int, config_text: str):
        self.path = out_dir / "run_manifest.json"
        self.data = {
            "tool_version": __version__,
            "seed": seed,
            "config_sha256": hashlib.sha256(config_text.encode()).hexdigest(),
            "started_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "finished_utc": None,
            "complete": False,
            "outputs": [],
        }

    def add(self, path: Path) -> None:
        self.data["outputs"].append(
            {"name": path.name, "sha256": _sha256(path), "bytes": path.stat().st_size}
        )

    def finish(self, complete: bool) -> None:
        self.data["complete"] = complete
        self.data["finished_utc"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
        self.path.write_text(json.dumps(self.data, indent=2) + "\n")


def cmd_gamma(cfg: dict, args, out_dir: Path, manifest: Manifest) -> None:
    schemes = cfg.get("gamma", {}).get("schemes", ("zc", "fm"))
    if args.scheme is not None:
        schemes = (args.scheme,)
    rows = []
    curves = []
    for scheme in schemes:
        sim_cfg = build_sim_config(cfg, args, scheme)
        records = run_gamma_sweep(sim_cfg)
        rows.extend([r.wtx_t, r.scheme, r.gamma_mean, r.n_sequences] for r in records)
        curves.append((scheme, [r.wtx_t for r in records], [r.gamma_mean for r in records]))
    csv_path = out_dir / "gamma.csv"
    _write_csv(csv_path, ["wtx_t", "scheme", "gamma_mean", "n_sequences"], rows)
    manifest.add(csv_path)
    svg_path = out_dir / "gamma.svg"
    svg_path.write_text(
        svgplot.line_chart(
            curves,
            x_label="bandwidth x symbol interval",
            y_label="margin",
            title="margin vs bandwidth",
            log_x=True,
            log_y=True,
        )
    )
    manifest.add(svg_path)


def cmd_ber(cfg: dict, args, out_dir: Path, manifest: Manifest) -> None:
    schemes = cfg.get("ber", {}).get("schemes", ("zc", "fm", "qpsk"))
    if args.scheme is not None:
        schemes = (args.scheme,)
    rows = []
    curves = []
    for scheme in schemes:
        sim_cfg = build_sim_config(cfg, args, scheme)
        records = run_ber(sim_cfg)
        rows.extend(
            [r.snr_db, r.scheme, r.m_rx, r.m_tx, r.bits_sent, r.bit_errors, r.ber, r.solver_erasures]
            for r in records
        )
        curves.append((scheme, [r.snr_db for r in records], [r.ber for r in records]))
    csv_path = out_dir / "ber.csv"
    _write_csv(
        csv_path,
        ["snr_db", "scheme", "m_rx", "m_tx", "bits_sent", "bit_errors", "ber", "erasures"],
        rows,
    )
    manifest.add(csv_path)
    svg_path = out_dir / "ber.svg"
    svg_path.write_text(
        svgplot.line_chart(
            curves, x_label="SNR [dB]", y_label="BER", title="BER vs SNR", log_y=True
        )
    )
    manifest.add(svg_path)


def cmd_psd(cfg: dict, args, out_dir: Path, manifest: Manifest) -> None:
    scheme = args.scheme or cfg.get("psd", {}).get("scheme", "zc")
    sim_cfg = build_sim_config(cfg, args, scheme)
    freqs, psd_db = estimate_psd(sim_cfg)
    csv_path = out_dir / "psd.csv"
    _write_csv(
        csv_path,
        ["freq_x_symbol_interval", "psd_db"],
        [[float(f), float(p)] for f, p in zip(freqs, psd_db)],
    )
    manifest.add(csv_path)
    svg_path = out_dir / "psd.svg"
    svg_path.write_text(
        svgplot.line_chart(
            [(scheme, list(map(float, freqs)), list(map(float, psd_db)))],
            x_label="frequency x symbol interval",
            y_label="PSD [dB]",
            title="transmit power spectral density",
        )
    )
    manifest.add(svg_path)


def cmd_encode(args) -> int:
    bits_str = args.bits.strip()
    if not bits_str or any(c not in "01" for c in bits_str):
        print("error: bits must be a non-empty string of 0s and 1s", file=sys.stderr)
        return 2
    coder = GrayCoder(args.m_rx)
    if len(bits_str) % coder.block_bits != 0:
        print(
            f"error: bit count {len(bits_str)} is not a multiple of the "
            f"{coder.block_bits}-bit block size for m_rx={args.m_rx}",
            file=sys.stderr,
        )
        return 2
    bits = np.array([int(c) for c in bits_str])
    codebook = ZcCodebook(ZcAlphabet(args.m_rx), pilot=args.pb)
    pattern = encode_pattern(coder.bits_to_symbols(bits), codebook)
    print(" ".join(str(int(v)) for v in pattern))
    flips = np.flatnonzero(pattern[1:] != pattern[:-1]) + 1
    print(f"zero-crossings: {crossing_count(pattern)} at sample gaps {list(map(int, flips))}")
    print(f"bits per symbol: {coder.bits_per_symbol} (conversion loss {coder.conversion_loss:.4f})")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="zclink",
        description="Link-level simulator for the 1-bit quantized MIMO downlink "
        "with zero-crossing precoding",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_campaign(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, default=None, help="INI config file")
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--snr-list", dest="snr_list", default=None, help="comma-separated dB values")
        p.add_argument("--trials", type=int, default=None, help="cap on channel trials per point")
        p.add_argument("--scheme", choices=("zc", "fm", "qpsk"), default=None)
        p.add_argument("-v", "--verbose", action="store_true")
        return p

    add_campaign("gamma", "margin-vs-bandwidth sweep")
    add_campaign("ber", "Monte Carlo BER vs SNR")
    add_campaign("psd", "transmit power spectral density")

    enc = sub.add_parser("encode", help="print the sign pattern for a bit string")
    enc.add_argument("bits", help="bit string, length divisible by the Gray block size")
    enc.add_argument("--m-rx", dest="m_rx", type=int, default=2)
    enc.add_argument("--pb", type=int, default=1, choices=(1, -1))
    enc.add_argument("-v", "--verbose", action="store_true")

    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    if args.command == "encode":
        return cmd_encode(args)

    # environment overrides mirror the flags
    if args.config is None and _env("CONFIG"):
        args.config = Path(_env("CONFIG"))
    if args.out is None:
        args.out = Path(_env("OUT") or ".")
    if args.seed is None and _env("SEED"):
        args.seed = int(_env("SEED"))
    if args.snr_list is None and _env("SNR_LIST"):
        args.snr_list = _env("SNR_LIST")
    if args.trials is None and _env("TRIALS"):
        args.trials = int(_env("TRIALS"))
    if args.scheme is None and _env("SCHEME"):
        args.scheme = _env("SCHEME")

    try:
        cfg = parse_config(args.config) if args.config else {}
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2

    out_dir = args.out
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"cannot create output directory: {exc}", file=sys.stderr)
        return 2

    config_text = args.config.read_text() if args.config else ""
    try:
        seed_probe = build_sim_config(cfg, args, "zc").seed
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    manifest = Manifest(out_dir, seed_probe, config_text)
    try:
        if args.command == "gamma":
            cmd_gamma(cfg, args, out_dir, manifest)
        elif args.command == "ber":
            cmd_ber(cfg, args, out_dir, manifest)
        elif args.command == "psd":
            cmd_psd(cfg, args, out_dir, manifest)
        manifest.finish(complete=True)
        return 0
    except ConfigError as exc:
        manifest.finish(complete=False)
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # partial results stay on disk, manifest flags it
        manifest.finish(complete=False)
        logger.exception("campaign failed: %s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
