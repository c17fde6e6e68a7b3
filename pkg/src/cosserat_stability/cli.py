"""
Command-line front end.

    cosserat-stability check MATERIAL [--verbose-symbols]
    cosserat-stability sweep [--beta-range LO HI] [--gamma-range LO HI]
    cosserat-stability dispersion MATERIAL --direction X Y [Z]
    cosserat-stability discontinuity MATERIAL --normal X Y [Z] [--reduced]
    cosserat-stability presets [--export NAME]

MATERIAL is a JSON/YAML material file or ``preset:NAME``. Exit codes: 0 when
every requested condition holds, 1 when one fails, 2 on input errors.
"""
from abc import abstractmethod
import argparse
import logging
from pathlib import Path
import sys
from typing import Optional

import numpy as np

from cosserat_stability import __version__
from cosserat_stability.antiplane import (
    antiplane_conditions,
    classify,
    discontinuity_normals,
    sh_dispersion_table,
)
from cosserat_stability.acoustic import dispersion_table
from cosserat_stability.config import AnalysisSettings, resolve_settings
from cosserat_stability.discontinuity import (
    EllipticityNotLostError,
    assemble_full_system,
    reduced_system_at_loss,
)
from cosserat_stability.material_io import (
    MaterialFile,
    MaterialFileError,
    load_material,
)
from cosserat_stability.presets import (
    PRESETS,
    export_preset,
    get_preset,
    list_presets,
)
from cosserat_stability.regime_map import (
    DEFAULT_BETA_RANGE,
    DEFAULT_GAMMA_RANGE,
    DEFAULT_RESOLUTION,
    regime_map,
    write_csv,
    write_svg,
)
from cosserat_stability.stability import ConsistencyError, full_report
from cosserat_stability.symbol import (
    ellipticity_via_symbols,
    symbol_diagnostics,
)
from cosserat_stability.utils import atomic_write, dump_json, sanitise_name

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2

PRESET_PREFIX = "preset:"


def resolve_material(spec: str) -> MaterialFile:
    if spec.startswith(PRESET_PREFIX):
        return get_preset(spec[len(PRESET_PREFIX) :]).material()
    return load_material(spec)


def _emit(text: str, out: Optional[str]):
    if out is None:
        sys.stdout.write(text)
    else:
        atomic_write(out, text)
        logger.info("Wrote %s", out)


def _direction(values, antiplane: bool, name: str) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if antiplane and v.shape == (2,):
        v = np.append(v, 0.0)
    if v.shape != (3,):
        raise ValueError(f"--{name} needs 3 components (2 for antiplane)")
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError(f"--{name} must be non-zero")
    return v / norm


class Command:
    # Shorthand name used to register the command
    _name: str = None
    help: str = ""

    def __init__(self, subparsers, parents=()):
        self.parser = subparsers.add_parser(
            self._name,
            help=self.help,
            description=self.help,
            parents=list(parents),
        )
        self.parser.set_defaults(command=self._name)
        self.add_arguments(self.parser)

    @abstractmethod
    def add_arguments(self, parser: argparse.ArgumentParser):
        raise NotImplementedError

    @abstractmethod
    def run(self, args: argparse.Namespace, settings: AnalysisSettings) -> int:
        raise NotImplementedError


class CheckCommand(Command):
    _name = "check"
    help = "Evaluate the material-stability conditions of a material."

    def add_arguments(self, parser):
        parser.add_argument("material")
        parser.add_argument(
            "--conditions",
            nargs="+",
            default=None,
            help="Conditions deciding the exit code (default: all).",
        )
        parser.add_argument(
            "--verbose-symbols",
            action="store_true",
            help="Include per-direction symbol diagnostics.",
        )

    def run(self, args, settings):
        material = resolve_material(args.material)
        if material.is_antiplane:
            verdicts, report = self._antiplane(material)
        else:
            verdicts, report = self._full(material, settings, args)
        requested = args.conditions or list(verdicts)
        unknown = sorted(set(requested) - set(verdicts))
        if unknown:
            raise ValueError(f"Unknown conditions {unknown}")
        report["requested"] = requested
        report["holds"] = all(verdicts[c] for c in requested)
        if args.json or args.out:
            _emit(dump_json(report), args.out)
        if not args.json:
            rows = [
                f"| {name} | {verdicts[name]} |" for name in verdicts
            ]
            print(
                "\n".join(
                    [f"{material.name}", "", "| condition | verdict |",
                     "|---|---|"] + rows
                )
            )
        return EXIT_OK if report["holds"] else EXIT_FAILED

    def _antiplane(self, material):
        conditions = antiplane_conditions(material.antiplane).as_dict()
        regime = classify(material.antiplane.beta, material.antiplane.gamma)
        report = {
            "material": material.name,
            "kind": "antiplane",
            "moduli": material.antiplane.as_dict(),
            "conditions": conditions,
            "regime": {
                "beta": regime.beta,
                "gamma": regime.gamma,
                "label": regime.label,
                "roots": regime.roots,
                "normals": regime.normals,
            },
        }
        return conditions, report

    def _full(self, material, settings, args):
        report = full_report(material.C, material.B, settings)
        out = {"material": material.name, "kind": "3d", **report.as_dict()}
        if args.verbose_symbols:
            symbols = ellipticity_via_symbols(material.C, material.B, settings)
            witness = np.atleast_2d(symbols.witness)
            diagnostics = symbol_diagnostics(material.C, material.B, witness)
            out["symbols"] = {
                "verdict": symbols.verdict,
                "routes": symbols.routes,
                "margin": symbols.margin,
                "boundary": symbols.boundary,
                "diagnostics": diagnostics.to_dict(orient="records"),
            }
        return report.verdicts, out


class SweepCommand(Command):
    _name = "sweep"
    help = "Antiplane regime map over the (beta, gamma) plane."

    def add_arguments(self, parser):
        parser.add_argument(
            "--beta-range",
            nargs=2,
            type=float,
            default=DEFAULT_BETA_RANGE,
            metavar=("LO", "HI"),
        )
        parser.add_argument(
            "--gamma-range",
            nargs=2,
            type=float,
            default=DEFAULT_GAMMA_RANGE,
            metavar=("LO", "HI"),
        )
        parser.add_argument(
            "--resolution", type=int, default=DEFAULT_RESOLUTION
        )

    def run(self, args, settings):
        rmap = regime_map(args.beta_range, args.gamma_range, args.resolution)
        stem = Path(args.out or "regime_map")
        csv_path = write_csv(rmap, stem.with_suffix(".csv"))
        svg_path = write_svg(rmap, stem.with_suffix(".svg"))
        summary = {
            "csv": csv_path,
            "svg": svg_path,
            "shape": rmap.shape,
            "regions": rmap.connected_regions(),
        }
        if args.json:
            sys.stdout.write(dump_json(summary))
        else:
            print(f"Wrote {csv_path} and {svg_path}")
            for regime, count in summary["regions"].items():
                print(f"  {regime}: {count} connected region(s)")
        return EXIT_OK


class DispersionCommand(Command):
    _name = "dispersion"
    help = "Plane-wave dispersion curves along one direction (CSV)."

    def add_arguments(self, parser):
        parser.add_argument("material")
        parser.add_argument(
            "--direction", nargs="+", type=float, required=True
        )
        parser.add_argument(
            "--k-range",
            nargs=3,
            type=float,
            default=(0.0, 5.0, 11),
            metavar=("START", "STOP", "NUM"),
        )
        parser.add_argument(
            "--branch",
            type=int,
            default=None,
            help="Only this branch (0 = highest omega^2).",
        )

    def run(self, args, settings):
        material = resolve_material(args.material)
        rho = material.require_density()
        start, stop, num = args.k_range
        ks = np.linspace(start, stop, int(num))
        n = _direction(args.direction, material.is_antiplane, "direction")
        if material.is_antiplane:
            if n[2] != 0:
                raise ValueError("Antiplane directions must be in-plane")
            table = sh_dispersion_table(material.antiplane, rho, n[:2], ks)
        else:
            if args.branch is not None and not 0 <= args.branch < 3:
                raise ValueError("--branch must be 0, 1 or 2")
            table = dispersion_table(
                material.C, material.B, rho, n, ks, branch=args.branch
            )
        _emit(table.to_csv(index=False, float_format="%.15g"), args.out)
        return EXIT_OK


class DiscontinuityCommand(Command):
    _name = "discontinuity"
    help = "Discontinuity system across a plane with normal n."

    def add_arguments(self, parser):
        parser.add_argument("material")
        parser.add_argument(
            "--normal",
            nargs="+",
            type=float,
            default=None,
            help="Surface normal (antiplane default: first admissible one).",
        )
        parser.add_argument(
            "--kappa-t",
            nargs=3,
            type=float,
            default=(0.0, 0.0, 0.0),
            help="Tangential wavevector of the jump mode.",
        )
        parser.add_argument(
            "--reduced",
            action="store_true",
            help="Require the reduced system (fails if still elliptic).",
        )

    def run(self, args, settings):
        material = resolve_material(args.material)
        if args.normal is None:
            if not material.is_antiplane:
                raise ValueError("--normal is required for 3D materials")
            normals = discontinuity_normals(material.antiplane)
            if not normals:
                raise ValueError(
                    "No admissible discontinuity normal: the material is "
                    "elliptic; pass --normal"
                )
            n = _direction(normals[0], True, "normal")
        else:
            n = _direction(args.normal, material.is_antiplane, "normal")
        kappa_t = np.asarray(args.kappa_t, dtype=float)

        system = assemble_full_system(material.C, material.B, n, kappa_t)
        out = {"material": material.name, "full": system.as_dict()}
        status = EXIT_OK
        try:
            reduced = reduced_system_at_loss(
                material.C, material.B, n, kappa_t, settings
            )
            out["reduced"] = reduced.as_dict()
        except EllipticityNotLostError as e:
            out["reduced"] = None
            out["lambda2"] = e.lambda2
            if args.reduced:
                logger.error("%s", e)
                status = EXIT_FAILED
        _emit(dump_json(out), args.out)
        return status


class PresetsCommand(Command):
    _name = "presets"
    help = "List the built-in materials or export one."

    def add_arguments(self, parser):
        parser.add_argument(
            "--export", default=None, choices=sorted(PRESETS)
        )

    def run(self, args, settings):
        if args.export:
            path = args.out or f"{sanitise_name(args.export)}.json"
            export_preset(args.export, path)
            print(f"Wrote {path}")
            return EXIT_OK
        table = list_presets()
        if args.json:
            sys.stdout.write(dump_json(table.to_dict(orient="records")))
        else:
            print(table.to_markdown(index=False))
        return EXIT_OK


COMMANDS = (
    CheckCommand,
    SweepCommand,
    DispersionCommand,
    DiscontinuityCommand,
    PresetsCommand,
)


class CommandLine:
    def __init__(self):
        self.parser = argparse.ArgumentParser(
            prog="cosserat-stability",
            description="Material stability of couple-stress solids.",
        )
        self.parser.add_argument(
            "--version", action="version", version=__version__
        )
        # Options shared by every subcommand
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument(
            "-v",
            "--verbose",
            action="count",
            default=0,
            help="-v for info, -vv for debug logging.",
        )
        common.add_argument("--sweep-density", type=int, default=None)
        common.add_argument("--tolerance", type=float, default=None)
        common.add_argument("--json", action="store_true")
        common.add_argument("--out", default=None)
        common.add_argument(
            "--config",
            action="store_true",
            help="Store --sweep-density/--tolerance as user defaults.",
        )
        subparsers = self.parser.add_subparsers(dest="command")
        # Dictionary of all registered commands
        self.commands = {}
        for command in COMMANDS:
            self.register_command(command(subparsers, parents=[common]))

    def register_command(self, command: Command):
        self.commands[command._name] = command

    def __call__(self, argv=None) -> int:
        try:
            args = self.parser.parse_args(argv)
        except SystemExit as e:
            # argparse exits with 2 on usage errors, 0 on --help/--version
            return int(e.code or 0)
        logging.basicConfig(
            level=[logging.WARNING, logging.INFO, logging.DEBUG][
                min(getattr(args, "verbose", 0), 2)
            ],
            format="%(levelname)s %(name)s: %(message)s",
            stream=sys.stderr,
        )
        if args.command is None:
            self.parser.print_help()
            return EXIT_INPUT
        try:
            settings = resolve_settings(
                sweep_density=args.sweep_density, tolerance=args.tolerance
            )
            if args.config:
                settings.save()
            return self.commands[args.command].run(args, settings)
        except MaterialFileError as e:
            logger.error("Material file error: %s", e)
            return EXIT_INPUT
        except ConsistencyError as e:
            logger.error("%s", e)
            return EXIT_FAILED
        except (ValueError, OSError) as e:
            logger.error("%s", e)
            return EXIT_INPUT


def main(argv=None) -> int:
    return CommandLine()(argv)


if __name__ == "__main__":
    sys.exit(main())
