"""Command-line front end.

Every subcommand reads an optional JSON config (``--config``), falls back to
built-in defaults for anything omitted, and writes plot-ready CSV or a JSON
document to ``--out`` (stdout when omitted).  Tabular commands given
``--format csv`` and an ``--out`` path also write their scalar summary next
to it as ``<out>.summary.json``.

Sweep axes are written either as ``{"min", "max", "points", "scale"}`` with
``scale`` in ``linear``/``log`` or as ``{"values": [...]}``.  Complex numbers
are ``[re, im]`` pairs and voltage ratios are ``{"magnitude", "phase"}``.

Exit codes: 0 ok, 1 usage, 2 config error, 3 domain error, 4 I/O error.
Errors are reported on stderr as a one-line JSON object.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, fields, replace
from pathlib import Path

import numpy as np

from . import codec, power, refclock, stim, tissue
from .errors import CodecError, DomainError, ValidationError
from .vco import formulas, harmonic
from .vco import sensitivity as isfmod
from .vco import device as nmfmod
from .vco import tline

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_DOMAIN, EXIT_IO = 0, 1, 2, 3, 4

# Which subcommand exercises each model operation.
OPERATION_MAP = {
    "tissue.impedance": "load-z",
    "tissue.step_voltage_response": "stim-sim",
    "stim.synthesize": "stim-sim",
    "stim.net_charge": "stim-sim",
    "stim.simulate_balance": "stim-sim",
    "stim.inl_dnl": "stim-sim",
    "power.alpha": "pump-sweep",
    "power.steady_state_vout": "pump-sweep",
    "power.efficiency": "pump-sweep",
    "power.optimum_iout": "pump-sweep",
    "power.simulate_feedback": "pump-sim",
    "power.high_side_bias": "pump-sim",
    "refclock.i_ref": "refclock-sweep",
    "refclock.calibrate": "refclock-sweep",
    "refclock.osc_frequency": "refclock-sweep",
    "refclock.osc_transient_oracle": "refclock-sweep",
    "codec.pack": "codec-encode",
    "codec.serialize": "codec-encode",
    "codec.modulate": "codec-encode",
    "codec.unpack": "codec-decode",
    "codec.deserialize": "codec-decode",
    "codec.demodulate": "codec-decode",
    "sensitivity.isf": "isf-sweep",
    "sensitivity.sweep_isf": "isf-sweep",
    "sensitivity.gamma_eff": "isf-sweep",
    "device.nmf": "isf-sweep",
    "tline.rv_from_tline": "tline-opt",
    "tline.optimal_length": "tline-opt",
    "harmonic.harmonic_current": "tline-opt",
    "harmonic.harmonic_power": "tline-opt",
    "formulas.fom": "radar-calc",
    "formulas.flicker_psd": "radar-calc",
    "formulas.mos_flicker_psd": "radar-calc",
    "formulas.k_vco": "radar-calc",
    "formulas.pll_bandwidth": "radar-calc",
    "formulas.capture_range": "radar-calc",
    "formulas.range_resolution": "radar-calc",
    "formulas.max_unambiguous_range": "radar-calc",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- config helpers


def _read_config(path):
    if path is None:
        return {}
    text = Path(path).read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError("config", f"malformed JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ValidationError("config", "top level must be a JSON object")
    return cfg


def _section(cfg, key, allowed, default=None):
    """Sub-object ``cfg[key]`` with unknown keys rejected."""
    d = cfg.get(key, default if default is not None else {})
    if d is None:
        return None
    if not isinstance(d, dict):
        raise ValidationError(key, "must be a JSON object")
    unknown = set(d) - set(allowed)
    if unknown:
        raise ValidationError(f"{key}.{sorted(unknown)[0]}", "unknown key")
    return d


def _check_keys(cfg, allowed, where="config"):
    unknown = set(cfg) - set(allowed)
    if unknown:
        raise ValidationError(f"{where}.{sorted(unknown)[0]}", "unknown key")


def _build(cls, d, where):
    """Instantiate a dataclass from a dict, reporting bad keys as config errors."""
    names = {f.name for f in fields(cls)}
    unknown = set(d) - names
    if unknown:
        raise ValidationError(f"{where}.{sorted(unknown)[0]}", "unknown key")
    try:
        return cls(**d)
    except TypeError as exc:
        raise ValidationError(where, str(exc)) from None


def _number(d, key, default, where):
    v = d.get(key, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(f"{where}.{key}", f"must be a number, got {v!r}")
    return float(v)


def _complex(v, where):
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    raise ValidationError(where, f"complex values are [re, im] pairs, got {v!r}")


def _ratio(v, where):
    if isinstance(v, dict):
        _check_keys(v, {"magnitude", "phase"}, where)
        try:
            return tline.VoltageRatio(float(v["magnitude"]), float(v.get("phase", 0.0)))
        except KeyError:
            raise ValidationError(f"{where}.magnitude", "missing") from None
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return tline.VoltageRatio.from_complex(complex(v))
    raise ValidationError(where, "voltage ratios are {magnitude, phase} objects")


def _axis(spec, where):
    """Grid from an axis definition."""
    if not isinstance(spec, dict):
        raise ValidationError(where, "axis must be a JSON object")
    if "values" in spec:
        _check_keys(spec, {"values"}, where)
        vals = spec["values"]
        if not isinstance(vals, list) or not vals:
            raise ValidationError(f"{where}.values", "must be a non-empty list")
        try:
            return np.asarray(vals, dtype=float)
        except (TypeError, ValueError):
            raise ValidationError(f"{where}.values", "must be numbers") from None
    _check_keys(spec, {"min", "max", "points", "scale"}, where)
    lo = _number(spec, "min", None, where)
    hi = _number(spec, "max", None, where)
    pts = spec.get("points")
    if isinstance(pts, bool) or not isinstance(pts, int) or pts < 2:
        raise ValidationError(f"{where}.points", "sweeps need an integer >= 2")
    scale = spec.get("scale", "linear")
    if scale == "linear":
        return np.linspace(lo, hi, pts)
    if scale == "log":
        if not (lo > 0 and hi > 0):
            raise ValidationError(where, "log axes need positive bounds")
        return np.geomspace(lo, hi, pts)
    raise ValidationError(f"{where}.scale", f"must be linear or log, got {scale!r}")


@contextmanager
def _executor(threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            yield ex
    else:
        yield None


# ---------------------------------------------------------------- output


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if math.isfinite(f) else None
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def _dumps(obj):
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


class Table:
    """Column-oriented CSV payload."""

    def __init__(self, columns, rows):
        self.columns = list(columns)
        self.rows = rows

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([x if isinstance(x, str) else _fmt(x) for x in row])
        return buf.getvalue()

    def to_json(self):
        return {"columns": self.columns, "rows": [list(r) for r in self.rows]}

    @classmethod
    def from_columns(cls, **cols):
        names = list(cols)
        arrays = [np.asarray(cols[n]) for n in names]
        return cls(names, list(zip(*arrays)))

    @classmethod
    def matrix(cls, row_name, row_values, col_name, col_values, data):
        header = [f"{row_name}\\{col_name}"] + [_fmt(c) for c in col_values]
        rows = [[r] + list(data[i]) for i, r in enumerate(row_values)]
        return cls(header, rows)


def _write_text(path, text):
    if path is None:
        sys.stdout.write(text)
        return
    Path(path).write_text(text)


def _emit(args, table=None, summary=None):
    if args.format == "json":
        doc = {"command": args.command}
        if summary is not None:
            doc["summary"] = summary
        if table is not None:
            doc["table"] = table.to_json()
        _write_text(args.out, _dumps(doc))
        return
    if table is None:
        rows = sorted(_flatten(summary or {}).items())
        table = Table(["key", "value"], rows)
        summary = None
    _write_text(args.out, table.to_csv())
    if summary is not None and args.out is not None:
        Path(str(args.out) + ".summary.json").write_text(_dumps(summary))


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            for i, x in enumerate(v):
                if isinstance(x, dict):
                    out.update(_flatten(x, f"{key}.{i}."))
                else:
                    out[f"{key}.{i}"] = x
        else:
            out[key] = v
    return out


# ---------------------------------------------------------------- subcommands

DEFAULT_LOAD = {"kind": "series_rc", "resistance": 3e3, "capacitance": 100e-9}


def cmd_load_z(args, cfg):
    _check_keys(cfg, {"load", "frequency"})
    load = tissue.load_from_dict(cfg.get("load", DEFAULT_LOAD))
    f = _axis(cfg.get("frequency", {"min": 10.0, "max": 1e5, "points": 41, "scale": "log"}), "frequency")
    z = np.atleast_1d(tissue.impedance(load, f))
    table = Table.from_columns(
        frequency_hz=f,
        z_real_ohm=z.real,
        z_imag_ohm=z.imag,
        z_mag_ohm=np.abs(z),
        z_phase_deg=np.degrees(np.angle(z)),
    )
    _emit(args, table, {"load": tissue.load_to_dict(load)})


def _dac_from(cfg):
    d = cfg.get("dac")
    if d is None:
        return stim.DacModel()
    if not isinstance(d, dict):
        raise ValidationError("dac", "must be a JSON object")
    _check_keys(d, {"inl_injection", "dnl"}, "dac")
    if "dnl" in d:
        return stim.DacModel.from_dnl(d["dnl"])
    return stim.DacModel(tuple(d.get("inl_injection", (0.0,) * 256)))


def cmd_stim_sim(args, cfg):
    _check_keys(cfg, {"program", "pulse", "dt", "dac", "load", "short_resistance"})
    dac = _dac_from(cfg)
    if "pulse" in cfg:
        if "program" in cfg:
            raise ValidationError("pulse", "give either program or pulse, not both")
        pulse = _build(stim.BiphasicPulse, _section(cfg, "pulse", [f.name for f in fields(stim.BiphasicPulse)]), "pulse")
        dt = _number(cfg, "dt", 1e-6, "config")
        if not dt > 0:
            raise ValidationError("dt", "must be positive")
        current = stim.biphasic_samples(pulse, dt)
        time = np.arange(current.size) * dt
        balance = pulse.balance_duration
    else:
        program = stim.program_from_dict(cfg.get("program", {}))
        time, current = stim.synthesize(program, dac)
        dt = 1.0 / program.sample_rate
        balance = program.balance_duration
    load = tissue.load_from_dict(cfg.get("load", DEFAULT_LOAD))
    short = _number(cfg, "short_resistance", 0.0, "config")
    volts = tissue.step_voltage_response(load, current, dt)
    residual = float(volts[-1] - tissue.series_resistance(load) * current[-1]) if current.size else 0.0
    inl, dnl = stim.inl_dnl(dac)
    summary = {
        "samples": int(current.size),
        "dt_s": dt,
        "net_charge_c": stim.net_charge(current, dt),
        "peak_voltage_v": float(np.max(np.abs(volts))) if volts.size else 0.0,
        "residual_before_balance_v": residual,
        "residual_after_balance_v": stim.simulate_balance(load, residual, short, balance),
        "balance_duration_s": balance,
        "dac_max_abs_inl_lsb": float(np.max(np.abs(inl))),
        "dac_max_abs_dnl_lsb": float(np.max(np.abs(dnl))),
        "dac_monotonic": stim.is_monotonic(dac),
    }
    table = Table.from_columns(time_s=time, current_a=current, voltage_v=volts)
    _emit(args, table, summary)


_STAGE_KEYS = [f.name for f in fields(power.ChargePumpStage)]


def cmd_pump_sweep(args, cfg):
    _check_keys(cfg, {"stage", "n_stages", "I_out", "sweep"})
    base = _section(cfg, "stage", _STAGE_KEYS)
    n = cfg.get("n_stages", 1)
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ValidationError("n_stages", "must be a positive integer")
    I = _axis(cfg.get("I_out", {"min": 10e-6, "max": 5e-3, "points": 200, "scale": "log"}), "I_out")
    if np.any(I < 0):
        raise ValidationError("I_out", "currents must be non-negative")
    sweep = _section(cfg, "sweep", {"param", "values"}, {"param": "C_p_eq", "values": [100e-15, 500e-15, 1e-12]})
    param = sweep.get("param")
    if param not in _STAGE_KEYS and param != "n_stages":
        raise ValidationError("sweep.param", f"must be a stage field or n_stages, got {param!r}")
    values = sweep.get("values")
    if not isinstance(values, list) or not values:
        raise ValidationError("sweep.values", "must be a non-empty list")

    cols = {"I_out_a": I}
    sets = []
    for v in values:
        kw, nn = dict(base), n
        if param == "n_stages":
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ValidationError("sweep.values", "n_stages values must be positive integers")
            nn = v
        else:
            kw[param] = v
        stage = _build(power.ChargePumpStage, kw, "stage")
        label = f"{param}={v!r}"
        v_out = power.steady_state_vout(stage, I, nn)
        eta = np.array([_safe_eta(stage, i, nn) for i in I])
        cols[f"v_out_v[{label}]"] = v_out
        cols[f"eta[{label}]"] = eta
        record = {
            "param": param,
            "value": v,
            "n_stages": nn,
            "alpha": power.alpha(stage),
            "open_circuit_v": power.open_circuit_voltage(stage, nn),
            "overload_current_a": power.overload_current(stage, nn),
        }
        try:
            i_opt = power.optimum_iout(stage, nn)
            record["optimum_iout_a"] = i_opt
            record["peak_eta"] = power.efficiency(stage, i_opt, nn)
        except DomainError as exc:
            record["optimum_error"] = str(exc)
        sets.append(record)
    table = Table(list(cols), list(zip(*cols.values())))
    _emit(args, table, {"sets": sets})


def _safe_eta(stage, i, n):
    if not i > 0:
        return math.nan
    try:
        return power.efficiency(stage, float(i), n)
    except DomainError:
        return math.nan


def cmd_pump_sim(args, cfg):
    _check_keys(cfg, {"stage", "pump", "loop", "I_load", "duration", "v_initial", "high_side_bias", "every"})
    stage = _build(power.ChargePumpStage, _section(cfg, "stage", _STAGE_KEYS), "stage")
    pump_kw = _section(cfg, "pump", {"n_stages", "C_load"})
    pump = _build(power.MultiStagePump, {"stage": stage, **pump_kw}, "pump")
    loop_cfg = _section(cfg, "loop", [f.name for f in fields(power.FeedbackLoop)])
    loop = None if loop_cfg is None else _build(power.FeedbackLoop, loop_cfg, "loop")
    I_load = _number(cfg, "I_load", 1e-3, "config")
    duration = _number(cfg, "duration", 1e-3, "config")
    v0 = _number(cfg, "v_initial", 0.0, "config")
    every = cfg.get("every", 1)
    if isinstance(every, bool) or not isinstance(every, int) or every < 1:
        raise ValidationError("every", "decimation must be a positive integer")
    bias = _build(power.HighSideBias, _section(cfg, "high_side_bias", [f.name for f in fields(power.HighSideBias)]), "high_side_bias")

    trace = power.simulate_feedback(pump, loop, I_load, duration, v0)
    settled = trace.settled(0.5)
    summary = {
        "I_load_a": I_load,
        "steady_state_vout_v": power.steady_state_vout(stage, I_load, pump.n_stages),
        "settled_min_v": float(settled.v_out.min()),
        "settled_max_v": float(settled.v_out.max()),
        "settled_mean_v": float(settled.v_out.mean()),
        "clock_duty": float(settled.clock_enabled.mean()),
        "high_side_bias_v": power.high_side_bias(bias),
    }
    if loop is not None:
        summary["regulation_point_v"] = power.regulation_point(loop)
    sl = slice(None, None, every)
    table = Table.from_columns(
        time_s=trace.time[sl], v_out_v=trace.v_out[sl], clock_enabled=trace.clock_enabled[sl]
    )
    _emit(args, table, summary)


def cmd_refclock_sweep(args, cfg):
    _check_keys(cfg, {"bandgap", "calibrate", "compensate", "temperature", "oscillator", "oracle_cycles"})
    model = _build(refclock.BandgapModel, _section(cfg, "bandgap", [f.name for f in fields(refclock.BandgapModel)]), "bandgap")
    if cfg.get("compensate", False):
        model = replace(model, tc_resistor=refclock.compensating_tc(model))
    cal = _section(cfg, "calibrate", {"target", "T_cal"}, {"target": 5e-6, "T_cal": 36.0})
    if cal is not None:
        model = refclock.calibrate(model, _number(cal, "target", 5e-6, "calibrate"), _number(cal, "T_cal", 36.0, "calibrate"))
    T = _axis(cfg.get("temperature", {"min": -20.0, "max": 65.0, "points": 86}), "temperature")
    osc = _build(refclock.RelaxOsc, _section(cfg, "oscillator", [f.name for f in fields(refclock.RelaxOsc)]), "oscillator")
    n_cyc = cfg.get("oracle_cycles", 10)
    if isinstance(n_cyc, bool) or not isinstance(n_cyc, int):
        raise ValidationError("oracle_cycles", "must be an integer")
    i = refclock.i_ref(model, T)
    summary = {
        "bandgap": asdict(model),
        "i_ref_at_T0_a": refclock.i_ref(model, model.T0),
        "stationary_points_c": refclock.stationary_points(model),
        "osc_frequency_hz": refclock.osc_frequency(osc),
        "divided_frequency_hz": refclock.divided_frequency(osc),
        "oracle_frequency_hz": refclock.osc_transient_oracle(osc, n_cyc),
        "frequency_flags": refclock.frequency_plan_flags(osc),
    }
    table = Table.from_columns(T_c=T, i_ref_a=np.atleast_1d(i), di_ref_dT_a_per_c=refclock.di_ref_dT(model, T))
    _emit(args, table, summary)


_BASEBAND_KEYS = {"carrier_frequency", "samples_per_cycle", "cycles_per_bit", "amplitude", "phase"}


def _frame_config(cfg):
    d = _section(cfg, "frame", {"start_sync", "end_sync"})
    return _build(codec.FrameConfig, d, "frame")


def cmd_codec_encode(args, cfg):
    _check_keys(cfg, {"program", "frame", "baseband"})
    program = stim.program_from_dict(cfg.get("program", {}))
    bits = codec.serialize(codec.pack(program), _frame_config(cfg))
    if args.encoding == "hex":
        _write_text(args.out, codec.bits_to_hex(bits) + "\n")
    elif args.encoding == "bin":
        data = codec.bits_to_bytes(bits)
        if args.out is None:
            sys.stdout.buffer.write(data)
        else:
            Path(args.out).write_bytes(data)
    else:
        bb = _section(cfg, "baseband", _BASEBAND_KEYS)
        try:
            sig = codec.modulate(bits, **bb)
        except TypeError as exc:
            raise ValidationError("baseband", str(exc)) from None
        _write_text(args.out, Table.from_columns(sample=sig.samples).to_csv())


def _read_baseband(path):
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or lines[0].strip() != "sample":
        raise CodecError("baseband file needs a 'sample' header")
    try:
        return np.array([float(x) for x in lines[1:] if x.strip()])
    except ValueError as exc:
        raise CodecError(f"bad baseband sample: {exc}") from None


def cmd_codec_decode(args, cfg):
    _check_keys(cfg, {"frame", "baseband", "full_scale_current", "hunt"})
    if args.input is None:
        raise UsageError("codec-decode needs --input")
    frame = _frame_config(cfg)
    if args.encoding == "hex":
        bits = codec.hex_to_bits(Path(args.input).read_text())
    elif args.encoding == "bin":
        bits = codec.bytes_to_bits(Path(args.input).read_bytes())
    else:
        bb = dict(_section(cfg, "baseband", _BASEBAND_KEYS))
        bb.pop("amplitude", None)
        bb.pop("phase", None)
        samples = _read_baseband(args.input)
        bits = codec.demodulate(codec.BasebandSignal(samples, **bb))
    image = codec.deserialize(bits, frame, hunt=bool(cfg.get("hunt", False)))
    fs = _number(cfg, "full_scale_current", stim.DEFAULT_FULL_SCALE, "config")
    program = codec.unpack(image, fs)
    _write_text(args.out, stim.program_to_json(program))


def _waveform(d, where):
    if d is None:
        return isfmod.HarmonicWaveform.two_tone(0.7, math.pi)
    if not isinstance(d, dict):
        raise ValidationError(where, "must be a JSON object")
    if "components" in d:
        _check_keys(d, {"components", "f0"}, where)
        comps = d["components"]
        if not isinstance(comps, list) or not all(isinstance(c, list) and len(c) == 2 for c in comps):
            raise ValidationError(f"{where}.components", "must be a list of [A_n, phi_n] pairs")
        return isfmod.HarmonicWaveform(tuple(tuple(c) for c in comps), d.get("f0", 40e9))
    _check_keys(d, {"A2", "phi2", "f0"}, where)
    return isfmod.HarmonicWaveform.two_tone(
        _number(d, "A2", 0.7, where), _number(d, "phi2", math.pi, where), f0=_number(d, "f0", 40e9, where)
    )


def _samples(cfg):
    s = cfg.get("samples", isfmod.DEFAULT_SAMPLES)
    if isinstance(s, bool) or not isinstance(s, int):
        raise ValidationError("samples", "must be an integer")
    return s


def _device(cfg):
    return _build(nmfmod.DeviceModel, _section(cfg, "device", [f.name for f in fields(nmfmod.DeviceModel)]), "device")


def _drive(cfg):
    return _build(nmfmod.DriveCondition, _section(cfg, "drive", [f.name for f in fields(nmfmod.DriveCondition)]), "drive")


PROPOSED_RATIO = {"magnitude": 3.0, "phase": math.pi / 4}


def cmd_isf_sweep(args, cfg):
    mode = cfg.get("mode", "isf")
    if mode == "isf":
        _check_keys(cfg, {"mode", "A2", "phi2", "samples", "map"})
        A2 = _axis(cfg.get("A2", {"min": 0.0, "max": 1.0, "points": 101}), "A2")
        phi2 = _axis(cfg.get("phi2", {"min": 0.0, "max": 2 * math.pi, "points": 101}), "phi2")
        name = cfg.get("map", "gamma_rms")
        if name not in ("gamma_0", "gamma_1", "gamma_2", "gamma_rms"):
            raise ValidationError("map", f"unknown map {name!r}")
        with _executor(args.threads) as ex:
            sw = isfmod.sweep_isf(A2, phi2, _samples(cfg), executor=ex)
        a, p, v = sw.argmin("gamma_rms")
        summary = {
            "argmin_gamma_rms": {"A2": a, "phi2": p, "value": v},
            "singular_points": int(sw.singular.sum()),
            "map": name,
        }
        if args.format == "json":
            summary["maps"] = {k: getattr(sw, k) for k in ("gamma_0", "gamma_1", "gamma_2", "gamma_rms")}
            summary["A2"], summary["phi2"] = A2, phi2
            _emit(args, None, summary)
            return
        _emit(args, Table.matrix("A2", A2, "phi2", phi2, getattr(sw, name)), summary)
    elif mode == "nmf":
        _check_keys(cfg, {"mode", "magnitude", "phase", "device", "waveform", "R_v2", "drive", "samples"})
        mags = _axis(cfg.get("magnitude", {"min": 0.0, "max": 3.0, "points": 61}), "magnitude")
        phases = _axis(cfg.get("phase", {"min": 0.0, "max": math.pi, "points": 129}), "phase")
        r_v2 = _ratio(cfg.get("R_v2", 1.0), "R_v2")
        with _executor(args.threads) as ex:
            sw = nmfmod.sweep_nmf(
                mags, phases, _device(cfg), _waveform(cfg.get("waveform"), "waveform"), r_v2, _drive(cfg),
                _samples(cfg), executor=ex,
            )
        m, p, v = sw.argmin()
        summary = {"argmin_alpha_rms": {"magnitude": m, "phase": p, "value": v}}
        if args.format == "json":
            summary.update(magnitude=mags, phase=phases, alpha_rms=sw.alpha_rms)
            _emit(args, None, summary)
            return
        _emit(args, Table.matrix("magnitude", mags, "phase", phases, sw.alpha_rms), summary)
    elif mode == "profile":
        _check_keys(cfg, {"mode", "waveform", "R_v1", "R_v2", "device", "drive", "samples", "n_harmonics", "modulated"})
        w = _waveform(cfg.get("waveform"), "waveform")
        samples = _samples(cfg)
        n_h = cfg.get("n_harmonics", isfmod.DEFAULT_HARMONICS)
        if isinstance(n_h, bool) or not isinstance(n_h, int) or n_h < 1:
            raise ValidationError("n_harmonics", "must be a positive integer")
        g = isfmod.isf(w, samples)
        alpha = None
        if cfg.get("modulated", True):
            v_gs, v_ds = nmfmod.drive_waveforms(
                w, _ratio(cfg.get("R_v1", PROPOSED_RATIO), "R_v1"), _ratio(cfg.get("R_v2", PROPOSED_RATIO), "R_v2"),
                _drive(cfg), samples,
            )
            alpha = nmfmod.nmf(_device(cfg), v_gs, v_ds)
        prof = isfmod.isf_profile(g, alpha, n_h)
        ge, dc, r = isfmod.gamma_eff(prof)
        summary = {
            "gamma_dc": prof.gamma_dc,
            "gamma_rms": prof.gamma_rms,
            "nmf_rms": prof.nmf_rms,
            "gamma_eff_dc": dc,
            "gamma_eff_rms": r,
            "gamma_n": prof.coefficients("gamma"),
            "zeta_m": prof.coefficients("nmf"),
            "gamma_eff_n": prof.coefficients("gamma_eff"),
        }
        table = Table.from_columns(theta_rad=prof.theta, gamma=prof.gamma, alpha=prof.nmf, gamma_eff=ge)
        _emit(args, table, summary)
    else:
        raise ValidationError("mode", f"must be isf, nmf or profile, got {mode!r}")


def _tline_from(cfg):
    d = dict(_section(cfg, "tline", {"Z_0", "effective_permittivity", "length", "reflection", "gate_impedance", "f0"}))
    if "gate_impedance" in d:
        if "reflection" in d:
            raise ValidationError("tline.gate_impedance", "give reflection or gate_impedance, not both")
        z = _complex(d.pop("gate_impedance"), "tline.gate_impedance")
        d["reflection"] = tline.reflection_from_impedance(z, d.get("Z_0", 50.0))
    elif "reflection" in d:
        r = d["reflection"]
        if isinstance(r, list) and r and isinstance(r[0], list):
            d["reflection"] = tuple(_complex(x, "tline.reflection") for x in r)
        else:
            d["reflection"] = _complex(r, "tline.reflection")
    return _build(tline.TLineFeedback, d, "tline")


def cmd_tline_opt(args, cfg):
    _check_keys(cfg, {"tline", "harmonic", "length", "harmonic_power"})
    t = _tline_from(cfg)
    n = cfg.get("harmonic", 1)
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ValidationError("harmonic", "must be a positive integer")
    lam = tline.wavelength(t.f0, t.effective_permittivity, n)
    l_axis = _axis(cfg.get("length", {"min": 0.0, "max": lam / 2, "points": 501}), "length")
    if np.any(l_axis < 0):
        raise ValidationError("length", "lengths must be non-negative")
    ratios = [tline.rv_from_tline(t, n, float(l)) for l in l_axis]
    l_opt = tline.optimal_length(t, n)
    r_opt = tline.rv_from_tline(t, n, l_opt)
    k = int(np.argmax([r.magnitude for r in ratios]))
    summary = {
        "harmonic": n,
        "reflection": t.reflection_at(n),
        "wavelength_m": lam,
        "optimal_length_m": l_opt,
        "rv_magnitude": r_opt.magnitude,
        "rv_phase_rad": r_opt.phase,
        "sweep_argmax_length_m": float(l_axis[k]),
        "sweep_max_magnitude": ratios[k].magnitude,
    }
    hp = _section(cfg, "harmonic_power", {"coefficients", "V1", "V2", "R_v1", "R_v2", "form"}, {})
    if hp:
        coeffs = _section(hp, "coefficients", {"G21_a", "G22_t", "M_12", "N_12"})
        c = harmonic.HarmonicPowerCoefficients(
            **{k: _complex(v, f"harmonic_power.coefficients.{k}") for k, v in coeffs.items()}
        )
        V1 = _complex(hp.get("V1", 1.0), "harmonic_power.V1")
        V2 = _complex(hp.get("V2", 0.0), "harmonic_power.V2")
        r1 = r_opt if hp.get("R_v1", "tline") == "tline" else _ratio(hp["R_v1"], "harmonic_power.R_v1")
        r2 = _ratio(hp.get("R_v2", 1.0), "harmonic_power.R_v2")
        form = hp.get("form", "printed")
        if form not in ("printed", "current"):
            raise ValidationError("harmonic_power.form", f"must be printed or current, got {form!r}")
        summary["harmonic_current_a"] = complex(harmonic.harmonic_current(c, V1, V2, r1.value, r2.value))
        summary["harmonic_power_w"] = harmonic.harmonic_power(c, V1, V2, r1.value, r2.value, form)
    table = Table.from_columns(
        length_m=l_axis,
        rv_magnitude=[r.magnitude for r in ratios],
        rv_phase_rad=[r.phase for r in ratios],
    )
    _emit(args, table, summary)


TABLE_I_ROWS = [
    {"label": "vdd_0.5V", "pn_dbchz": -99.2, "f0": 79e9, "offset": 1e6, "p_dc_mw": 3.95},
    {"label": "vdd_1.0V", "pn_dbchz": -109.8, "f0": 79e9, "offset": 1e6, "p_dc_mw": 102.7},
]


def cmd_radar_calc(args, cfg):
    allowed = {"bandwidth", "T_chirp", "fom", "k_vco", "pll", "capture_range", "flicker", "mos_flicker"}
    _check_keys(cfg, allowed)
    out = {
        "range_resolution_m": formulas.range_resolution(_number(cfg, "bandwidth", 4e9, "config")),
        "max_unambiguous_range_m": formulas.max_unambiguous_range(_number(cfg, "T_chirp", 1e-6, "config")),
    }
    rows = cfg.get("fom", TABLE_I_ROWS)
    if not isinstance(rows, list):
        raise ValidationError("fom", "must be a list of rows")
    out["fom"] = []
    for i, r in enumerate(rows):
        where = f"fom.{i}"
        if not isinstance(r, dict):
            raise ValidationError(where, "must be a JSON object")
        _check_keys(r, {"label", "pn_dbchz", "f0", "offset", "p_dc_mw"}, where)
        value = formulas.fom(*(_number(r, k, None, where) for k in ("pn_dbchz", "f0", "offset", "p_dc_mw")))
        out["fom"].append({"label": r.get("label", str(i)), "fom_dbchz": value})
    kv = _section(cfg, "k_vco", {"delta_f", "delta_v"}, {"delta_f": 5.69e9, "delta_v": 1.0})
    k_vco = formulas.k_vco(_number(kv, "delta_f", None, "k_vco"), _number(kv, "delta_v", None, "k_vco"))
    out["k_vco_hz_per_v"] = k_vco
    pll = _section(cfg, "pll", {"K_PD", "K_VCO", "K_F", "N", "L"}, {"K_PD": 1.0, "K_F": 1.0, "N": 1.0, "L": 1.0})
    out["pll_bandwidth_hz"] = formulas.pll_bandwidth(
        *(_number(pll, k, k_vco if k == "K_VCO" else None, "pll") for k in ("K_PD", "K_VCO", "K_F", "N", "L"))
    )
    cr = _section(cfg, "capture_range", {"K_VCO", "V_Cmax"}, {"V_Cmax": 1.0})
    out["capture_range_rad_s"] = formulas.capture_range(
        _number(cr, "K_VCO", k_vco, "capture_range"), _number(cr, "V_Cmax", None, "capture_range")
    )
    fl = _section(cfg, "flicker", {"K", "alpha_exp", "f"}, {"K": 1.0, "alpha_exp": 1.0, "f": 1e3})
    out["flicker_psd"] = float(formulas.flicker_psd(*(_number(fl, k, None, "flicker") for k in ("K", "alpha_exp", "f"))))
    dev = nmfmod.DeviceModel()
    mf = _section(cfg, "mos_flicker", {"K_F", "W", "L", "C_ox", "f"},
                  {"K_F": dev.K_F, "W": dev.W, "L": dev.L, "C_ox": dev.C_ox, "f": 1e3})
    out["mos_flicker_psd_v2_per_hz"] = float(
        formulas.mos_flicker_psd(*(_number(mf, k, None, "mos_flicker") for k in ("K_F", "W", "L", "C_ox", "f")))
    )
    _emit(args, None, out)


COMMANDS = {
    "load-z": (cmd_load_z, "tissue load impedance over frequency"),
    "stim-sim": (cmd_stim_sim, "synthesize a burst, drive the load, report charge and balance"),
    "pump-sweep": (cmd_pump_sweep, "charge-pump V_out and efficiency versus load current"),
    "pump-sim": (cmd_pump_sim, "cycle-level regulated pump transient"),
    "refclock-sweep": (cmd_refclock_sweep, "bandgap current versus temperature and clock frequencies"),
    "codec-encode": (cmd_codec_encode, "program JSON to framed bitstream or baseband"),
    "codec-decode": (cmd_codec_decode, "bitstream or baseband back to program JSON"),
    "isf-sweep": (cmd_isf_sweep, "ISF/NMF grid sweeps and single-point profiles"),
    "tline-opt": (cmd_tline_opt, "feedback-line voltage ratio and optimum length"),
    "radar-calc": (cmd_radar_calc, "FMCW, FoM, PLL and flicker formulas"),
}


def build_parser():
    p = _Parser(prog="stimvco", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", metavar="SUBCOMMAND", parser_class=_Parser)
    for name, (_, helptext) in COMMANDS.items():
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--out", help="output path (stdout when omitted)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
        sp.add_argument("--seed", type=int, default=None, help="reserved; all operations are deterministic")
        if name.startswith("codec-"):
            sp.add_argument("--encoding", choices=("hex", "bin", "baseband"), default="hex")
        if name == "codec-decode":
            sp.add_argument("--input", help="bitstream or baseband file to decode")
    return p


def _fail(code, kind, message, **extra):
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code, **extra}, sort_keys=True) + "\n")
    return code


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        cfg = _read_config(args.config)
        COMMANDS[args.command][0](args, cfg)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "usage", str(exc))
    except ValidationError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc), field=exc.field)
    except (DomainError, CodecError) as exc:
        extra = {"offset": exc.offset} if hasattr(exc, "offset") else {}
        return _fail(EXIT_DOMAIN, "domain", str(exc), type=type(exc).__name__, **extra)
    except OSError as exc:
        return _fail(EXIT_IO, "io", str(exc))
    except (TypeError, ValueError) as exc:
        # malformed values deep inside a config (wrong JSON types and the like)
        return _fail(EXIT_CONFIG, "config", str(exc))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
