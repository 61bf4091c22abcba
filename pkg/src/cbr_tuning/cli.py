"""
Command-line interface: ``cbr <command> [flags] <inputs...>``.

Commands
--------
fit-fano    Fano fit of a reflectance spectrum
lifetime    IRF-deconvolved lifetime fit, optional Purcell factor
g2          g²(0) of a pulsed coincidence histogram
michelson   Coherence times and Voigt linewidth from visibilities
etch        Etch-series statistics and tuning model
simulate    One FDTD observable for one geometry
sweep       Etch sweep heatmaps and mode table
synth       Seeded synthetic inputs for every analysis command

Exit codes: 0 success, 2 input error, 3 computation error, 4 internal
error. Failures print one JSON line ``{"code", "message", "context"}`` on
stderr.
"""

import argparse
import json
import logging
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from . import __version__
from .coherence import (
    fit_coherence,
    simulate_fringe_scan,
    simulate_visibility_trace,
    visibility_model,
    visibility_trace_from_scans,
)
from .config import RunConfig, load_config
from .constants import BULK_TAU_X_PS, COLLECTION_NA, ETCH_STEP_NM, ETCH_SWEEP_STEPS, G2_WINDOW_NS, HC_EV_NM, REP_PERIOD_NS
from .correlation import g2_zero, simulate_coincidences
from .data import (
    SpectrumFormat,
    load_coincidence_histogram,
    load_decay_histogram,
    load_etch_series,
    load_fringe_scan,
    load_irf,
    load_spectrum,
    load_visibility_trace,
    save_spectrum,
)
from .decay import DecayKind, DecayModel, Irf, convolve_model_with_irf, fit_lifetime, lifetime_report, purcell_factor, simulate_histogram
from .etch import build_tuning_model, predict_cycles_to_target, simulate_etch_series
from .exceptions import CbrError, DataError, ParseError, ValidationError
from .fdtd import (
    Layout,
    build_geometry,
    compute_extraction_efficiency,
    compute_purcell_spectrum,
    compute_reflectance_spectrum,
    etch_sweep,
    heatmap_long,
)
from .lineshapes import FanoParams, fano_report, fano_value, fit_fano
from .plotting import plot_decay, plot_etch, plot_fano, plot_g2, plot_heatmap, plot_spectrum, plot_visibility
from .reports import OutputDirectory, command_report, spectrum_frame
from .spectra import AxisKind, Spectrum

logger = logging.getLogger("cbr_tuning")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_COMPUTE = 3
EXIT_INTERNAL = 4

INPUT_ERRORS = (ParseError, ValidationError, DataError, FileNotFoundError, PermissionError)
MODEL_NAMES = {"x": DecayKind.SINGLE_EXP, "xx": DecayKind.BI_EXP}
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


# ===================== COMMANDS =====================


def cmd_fit_fano(args: argparse.Namespace, run: RunConfig, out: OutputDirectory) -> Dict[str, Any]:
    fmt = SpectrumFormat(axis_kind=AxisKind.parse(args.axis) if args.axis else None, delimiter=args.delimiter)
    spectrum = load_spectrum(args.spectrum, fmt)
    window = run.get("fano.window")
    params, result = fit_fano(spectrum, None if window is None else tuple(window))
    report = fano_report(params, result)
    energy = spectrum.to_energy()
    out.write_csv(
        "fano_fit.csv",
        pd.DataFrame({"energy_eV": energy.axis, "intensity": energy.intensity, "fit": fano_value(energy.axis, params)}),
    )
    plot_fano(out.path("fano_fit.svg"), spectrum, params, result.metadata.get("window"))
    return report


def cmd_lifetime(args: argparse.Namespace, run: RunConfig, out: OutputDirectory) -> Dict[str, Any]:
    hist = load_decay_histogram(args.histogram, run.get("lifetime.bin_width_ps"))
    irf = load_irf(args.irf)
    name = str(run.get("lifetime.model", "x"))
    kind = MODEL_NAMES[name] if name in MODEL_NAMES else DecayKind.parse(name)
    model, result = fit_lifetime(hist, irf, kind)
    report = lifetime_report(model, result)
    tau_ref = run.get("lifetime.tau_ref")
    if tau_ref is not None:
        n = kind.n_components
        tau = model.taus[0]
        tau_err = report["tau_err_ps"] if n == 1 else report["tau_err_ps"][0]
        f_p, f_err = purcell_factor(float(tau_ref), tau, float(run.get("lifetime.tau_ref_err", 0.0)), tau_err)
        report["purcell_factor"] = f_p
        report["purcell_factor_err"] = f_err
        report["tau_ref_ps"] = float(tau_ref)
    out.write_csv(
        "lifetime_fit.csv",
        pd.DataFrame(
            {
                "time_ps": hist.bin_centers,
                "counts": hist.counts,
                "fit": convolve_model_with_irf(model, irf, hist.bin_centers),
            }
        ),
    )
    plot_decay(out.path("lifetime_fit.svg"), hist, irf, model)
    return report


def cmd_g2(args: argparse.Namespace, run: RunConfig, out: OutputDirectory) -> Dict[str, Any]:
    hist = load_coincidence_histogram(args.histogram, run.get("g2.rep_period_ns"))
    result = g2_zero(
        hist,
        window=float(run.get("g2.window_ns", G2_WINDOW_NS)),
        align=bool(run.get("g2.align", True)),
        diagnostics=bool(run.get("g2.diagnostics", False)),
    )
    if result.envelope is not None:
        out.write_csv("g2_envelope.csv", result.envelope)
    plot_g2(out.path("g2.svg"), hist, result)
    report = result.as_dict()
    report.pop("envelope", None)
    return report


def cmd_michelson(args: argparse.Namespace, run: RunConfig, out: OutputDirectory) -> Dict[str, Any]:
    wavelength = run.get("michelson.wavelength_nm")
    if args.fringes:
        if wavelength is None:
            raise ValidationError("--fringes needs the emission wavelength (--wavelength)")
        scans = [load_fringe_scan(path) for path in args.inputs]
        trace = visibility_trace_from_scans(scans, float(wavelength))
    else:
        if len(args.inputs) != 1:
            raise ValidationError("a visibility trace is one file; pass --fringes for piezo scans")
        trace = load_visibility_trace(args.inputs[0])
    tau = run.get("michelson.tau_ps")
    result, fit = fit_coherence(trace, None if tau is None else float(tau))
    out.write_csv(
        "visibility.csv",
        pd.DataFrame(
            {
                "delay_ps": trace.delays,
                "visibility": trace.visibilities,
                "err": trace.uncertainties,
                "fit": visibility_model(trace.delays, result.t_G, result.t_L),
            }
        ),
    )
    plot_visibility(out.path("visibility.svg"), trace, result)
    report = result.as_dict()
    report["fit"] = fit.as_dict()
    return report


def cmd_etch(args: argparse.Namespace, run: RunConfig, out: OutputDirectory) -> Dict[str, Any]:
    series = load_etch_series(args.series)
    column = str(run.get("etch.column", "RT")).upper()
    sensitivity = run.get("etch.sensitivity")
    model = build_tuning_model(
        series,
        None if sensitivity is None else float(sensitivity),
        float(run.get("etch.sensitivity_err", 0.0)),
        run.get("etch.exclude_cycles", ()),
        column,
    )
    report: Dict[str, Any] = {"model": model.as_dict(), "devices": len(series.devices), "records": len(series)}
    target = run.get("etch.target_eV")
    value = f"Ec_{column}_eV"
    latest = series.frame.dropna(subset=[value]).groupby("device_id", sort=True).last()
    if target is not None:
        plans = []
        for device, row in latest.iterrows():
            plan = predict_cycles_to_target(float(row[value]), float(target), model.shift_per_cycle)
            plans.append({"device_id": device, "E_now_eV": float(row[value]), **plan._asdict()})
        report["plans"] = plans
        out.write_csv("etch_plan.csv", pd.DataFrame(plans))
    plot_etch(out.path("etch.svg"), series, model, value)
    return report


def _simulation_inputs(args: argparse.Namespace, run: RunConfig):
    geometry = run.geometry()
    if args.etch_depth:
        geometry = build_geometry(geometry, float(args.etch_depth))
    return geometry, run.simulation()


def cmd_simulate(args: argparse.Namespace, run: RunConfig, out: OutputDirectory) -> Dict[str, Any]:
    geometry, config = _simulation_inputs(args, run)
    layout = Layout.parse(args.layout)
    na = float(run.get("sweep.na", COLLECTION_NA))
    if args.observable == "purcell":
        result = compute_purcell_spectrum(geometry, config, layout=layout)
        label = "Purcell factor"
    elif args.observable == "reflectance":
        result = compute_reflectance_spectrum(geometry, config, na=na, layout=layout)
        label = "Relative reflectance"
    else:
        result = compute_extraction_efficiency(geometry, config, na=na)
        label = "Extraction efficiency"
    peak_energy, peak_value = result.peak()
    out.write_csv(f"simulate_{args.observable}.csv", spectrum_frame(result.spectrum, args.observable))
    plot_spectrum(out.path(f"simulate_{args.observable}.svg"), result.spectrum, label)
    return {
        "observable": args.observable,
        "layout": layout.value,
        "run_id": result.run_id,
        "reference_id": result.reference_id,
        "peak_eV": peak_energy,
        "peak_nm": HC_EV_NM / peak_energy,
        "peak_value": peak_value,
        "mean_value": float(np.mean(result.values)),
    }


def cmd_sweep(args: argparse.Namespace, run: RunConfig, out: OutputDirectory) -> Dict[str, Any]:
    geometry, config = _simulation_inputs(args, run)
    extraction = bool(run.get("sweep.extraction", False))
    sweep = etch_sweep(
        geometry,
        config,
        steps=int(run.get("sweep.steps", ETCH_SWEEP_STEPS)),
        step_nm=float(run.get("sweep.step_nm", ETCH_STEP_NM)),
        jobs=run.jobs,
        extraction=extraction,
        na=float(run.get("sweep.na", COLLECTION_NA)),
    )
    out.write_csv("sweep.csv", sweep.table)
    maps = {"purcell": sweep.purcell, "reflectance": sweep.reflectance}
    if sweep.extraction is not None:
        maps["extraction"] = sweep.extraction
    for name, frame in maps.items():
        out.write_csv(f"sweep_{name}.csv", heatmap_long(frame, name))
        plot_heatmap(out.path(f"sweep_{name}.svg"), frame, name)
    return sweep.as_dict()


def cmd_synth(args: argparse.Namespace, run: RunConfig, out: OutputDirectory) -> Dict[str, Any]:
    rng = np.random.default_rng(run.seed)
    kinds = ["fano", "decay", "g2", "michelson", "etch"] if args.kind == "all" else [args.kind]
    written: Dict[str, List[str]] = {}
    for kind in kinds:
        written[kind] = SYNTHESIZERS[kind](args, rng, out)
    return {"files": written}


def _synth_fano(args, rng, out: OutputDirectory) -> List[str]:
    params = FanoParams(A=0.25, B=0.75, q=-0.3, E_c=1.548, gamma_c=0.0102)
    energy = np.linspace(1.50, 1.60, 401)
    intensity = fano_value(energy, params) * (1.0 + 0.01 * rng.standard_normal(energy.size))
    spectrum = Spectrum(energy, np.clip(intensity, 0.0, None), AxisKind.ENERGY, "synthetic Fano dip")
    return [save_spectrum(out.path("fano_spectrum.csv"), spectrum)]


def _synth_decay(args, rng, out: OutputDirectory) -> List[str]:
    centers = 4.0 * np.arange(500)
    irf = Irf.gaussian(100.0, centers, center=200.0)
    if args.model == "xx":
        model = DecayModel.bi(1.0, BULK_TAU_X_PS, 1.0, 120.0, t0=200.0, background=2.0)
    else:
        model = DecayModel.single(1.0, args.tau, t0=200.0, background=2.0)
    hist = simulate_histogram(model, irf, centers, rng, total_counts=1e5)
    irf_counts = np.round(irf.weights * 1e5)
    header = {"bin_width_ps": 4}
    return [
        out.write_table("decay.csv", pd.DataFrame({"time_ps": centers, "counts": hist.counts.astype(int)}), header),
        out.write_table("irf.csv", pd.DataFrame({"time_ps": centers, "counts": irf_counts.astype(int)}), header),
    ]


def _synth_g2(args, rng, out: OutputDirectory) -> List[str]:
    hist = simulate_coincidences(0.030, 20000.0, rng=rng)
    frame = pd.DataFrame({"delay_ns": hist.delays, "counts": hist.counts.astype(int)})
    return [out.write_table("g2.csv", frame, {"rep_period_ns": REP_PERIOD_NS})]


def _synth_michelson(args, rng, out: OutputDirectory) -> List[str]:
    wavelength = 784.0
    files = []
    for index, delay in enumerate(np.linspace(0.0, 300.0, 11)):
        scan = simulate_fringe_scan(float(visibility_model(delay, 80.0, 150.0)), wavelength, delay, rng=rng)
        frame = pd.DataFrame({"position_nm": scan.positions, "intensity": scan.intensities})
        files.append(out.write_table(f"fringe_{index:02d}.csv", frame, {"stage_delay_ps": delay}))
    trace = simulate_visibility_trace(80.0, 150.0, np.linspace(0.0, 400.0, 21), noise=0.02, rng=rng)
    frame = pd.DataFrame({"delay_ps": trace.delays, "visibility": trace.visibilities, "err": trace.uncertainties})
    files.append(out.write_table("visibility.csv", frame, {"wavelength_nm": wavelength}))
    return files


def _synth_etch(args, rng, out: OutputDirectory) -> List[str]:
    series = simulate_etch_series(rng=rng)
    frame = series.frame[["device_id", "design", "cycle", "Ec_RT_eV", "Ec_LT_eV", "Q", "flag"]]
    return [out.write_csv("etch_series.csv", frame)]


SYNTHESIZERS: Dict[str, Callable[..., List[str]]] = {
    "fano": _synth_fano,
    "decay": _synth_decay,
    "g2": _synth_g2,
    "michelson": _synth_michelson,
    "etch": _synth_etch,
}


# ===================== PARSER =====================


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed recorded in every report (default: 0)")
    common.add_argument("--output-dir", default=".", help="directory for every artifact (default: .)")
    common.add_argument("--jobs", type=int, default=1, help="parallel sweep members (default: 1)")
    common.add_argument("--config", default=None, help="JSON configuration document")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="cbr", description="Circular Bragg resonator etch-tuning toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, metavar="<command>")

    p = commands.add_parser("fit-fano", parents=[common], help="fit a Fano lineshape to a reflectance spectrum")
    p.add_argument("spectrum")
    p.add_argument("--window", nargs=2, type=float, metavar=("LO_EV", "HI_EV"), dest="fano.window")
    p.add_argument("--axis", choices=["wavelength", "energy"], default=None)
    p.add_argument("--delimiter", default=",")
    p.set_defaults(handler=cmd_fit_fano)

    p = commands.add_parser("lifetime", parents=[common], help="IRF-deconvolved lifetime fit")
    p.add_argument("histogram")
    p.add_argument("irf")
    p.add_argument("--model", choices=sorted(MODEL_NAMES), dest="lifetime.model")
    p.add_argument("--tau-ref", type=float, dest="lifetime.tau_ref", help="reference lifetime (ps) for F_P")
    p.add_argument("--tau-ref-err", type=float, dest="lifetime.tau_ref_err")
    p.add_argument("--bin-width", type=float, dest="lifetime.bin_width_ps")
    p.set_defaults(handler=cmd_lifetime)

    p = commands.add_parser("g2", parents=[common], help="g2(0) of a pulsed coincidence histogram")
    p.add_argument("histogram")
    p.add_argument("--window", type=float, dest="g2.window_ns")
    p.add_argument("--rep-period", type=float, dest="g2.rep_period_ns")
    p.add_argument("--no-align", action="store_const", const=False, dest="g2.align")
    p.add_argument("--diagnostics", action="store_const", const=True, dest="g2.diagnostics")
    p.set_defaults(handler=cmd_g2)

    p = commands.add_parser("michelson", parents=[common], help="coherence times from visibilities")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--fringes", action="store_true", help="inputs are piezo scans, one per stage delay")
    p.add_argument("--wavelength", type=float, dest="michelson.wavelength_nm")
    p.add_argument("--tau", type=float, dest="michelson.tau_ps", help="radiative lifetime (ps)")
    p.set_defaults(handler=cmd_michelson)

    p = commands.add_parser("etch", parents=[common], help="etch-series statistics")
    p.add_argument("series")
    p.add_argument("--exclude-cycles", type=int, nargs="*", dest="etch.exclude_cycles")
    p.add_argument("--column", choices=["RT", "LT"], dest="etch.column")
    p.add_argument("--sensitivity", type=float, dest="etch.sensitivity", help="simulated nm shift per nm removed")
    p.add_argument("--sensitivity-err", type=float, dest="etch.sensitivity_err")
    p.add_argument("--target", type=float, dest="etch.target_eV", help="target mode energy (eV)")
    p.set_defaults(handler=cmd_etch)

    for name, handler, text in (
        ("simulate", cmd_simulate, "simulate one observable"),
        ("sweep", cmd_sweep, "etch sweep of the resonator"),
    ):
        p = commands.add_parser(name, parents=[common], help=text)
        p.add_argument("--etch-depth", type=float, default=0.0, help="material removed from the base geometry (nm)")
        p.add_argument("--resolution", type=int, dest="simulation.grid_resolution")
        p.add_argument("--runtime", type=float, dest="simulation.runtime")
        p.add_argument("--rings", type=int, dest="geometry.n_rings")
        p.add_argument("--na", type=float, dest="sweep.na")
        p.set_defaults(handler=handler)
        if name == "simulate":
            p.add_argument("--observable", choices=["purcell", "reflectance", "extraction"], default="purcell")
            p.add_argument("--layout", choices=[layout.value for layout in Layout], default=Layout.CBR.value)
        else:
            p.add_argument("--steps", type=int, dest="sweep.steps")
            p.add_argument("--step-nm", type=float, dest="sweep.step_nm")
            p.add_argument("--extraction", action="store_const", const=True, dest="sweep.extraction")

    p = commands.add_parser("synth", parents=[common], help="write seeded synthetic inputs")
    p.add_argument("kind", choices=["all", *SYNTHESIZERS])
    p.add_argument("--tau", type=float, default=53.0, help="single-exponential lifetime (ps)")
    p.add_argument("--model", choices=sorted(MODEL_NAMES), default="x")
    p.set_defaults(handler=cmd_synth)
    return parser


# ===================== ENTRY POINT =====================


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.handlers[:] = [handler]
    logger.setLevel(level)
    logger.propagate = False


def _error_line(code: int, error: BaseException, command: Optional[str]) -> str:
    context: Dict[str, Any] = {"command": command, "error": type(error).__name__}
    for attribute in ("line", "index"):
        value = getattr(error, attribute, None)
        if value is not None:
            context[attribute] = value
    completed = getattr(error, "completed", None)
    if completed:
        context["completed"] = completed
    message = str(error).strip().splitlines()[0] if str(error).strip() else type(error).__name__
    return json.dumps({"code": code, "message": message, "context": context}, sort_keys=True, default=str)


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {key: value for key, value in vars(args).items() if "." in key}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args)
    command = args.command
    try:
        run = RunConfig(
            command=command,
            inputs=tuple(str(v) for k, v in vars(args).items() if k in ("spectrum", "histogram", "irf", "series")),
            output_dir=args.output_dir,
            seed=args.seed,
            jobs=max(1, int(args.jobs)),
            document=load_config(args.config),
            overrides=_overrides(args),
        )
        out = OutputDirectory(run.output_dir)
        results = args.handler(args, run, out)
        report = command_report(command, run.seed, run.effective(), results)
        out.write_json(f"{command.replace('-', '_')}_report.json", report)
        logger.info("Successfully processed %s: %s", command, out)
        return EXIT_OK
    except INPUT_ERRORS as e:
        sys.stderr.write(_error_line(EXIT_INPUT, e, command) + "\n")
        return EXIT_INPUT
    except CbrError as e:
        sys.stderr.write(_error_line(EXIT_COMPUTE, e, command) + "\n")
        return EXIT_COMPUTE
    except Exception as e:  # noqa: BLE001
        logger.debug("Internal error", exc_info=True)
        sys.stderr.write(_error_line(EXIT_INTERNAL, e, command) + "\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
