"""Configuration-driven scenes: reproducible pipelines with manifests.

A scene is one self-contained computation (field cuts, an SLM round
trip, a filling-factor sweep, a transport Monte Carlo run, ...) described
by a small JSON config in which every physical quantity carries an
explicit unit suffix ("600 um", "1 mK", "20 ms").  Running a scene writes
deterministic data files (CSV / PGM / JSON, never timestamps) plus a
manifest listing each output with its SHA-256 hash, the fully resolved
config, and any numerical warnings raised along the way.  Plots are
emitted as gnuplot scripts next to the data, never as images.

Bundled presets cover the standard scenarios; ``preset_config`` turns a
preset name into a ready-to-run SceneConfig and ``compare_against_reference``
checks a manifest's metrics against the shipped reference table.
"""

from __future__ import annotations

import hashlib
import json
import os
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .constants import CS_MASS, K_B
from .grids import write_line_csv
from .units import UnitError, parse_quantity

__all__ = [
    "SceneError",
    "SceneConfig",
    "run_scene",
    "list_presets",
    "preset_config",
    "compare_against_reference",
    "load_reference_table",
    "default_out_dir",
]


class SceneError(ValueError):
    """Invalid scene configuration; the message names the offending field."""


def default_out_dir() -> str:
    """Output directory default, overridable via LGTWEEZER_OUT."""
    return os.environ.get("LGTWEEZER_OUT", "lgtweezer-out")


# --------------------------------------------------------------------------
# config schema
#
# Each scene kind declares its parameters as name -> (type, default);
# a default of None marks the parameter required.  Quantities are given
# as strings with unit suffixes and resolve to SI floats.

_MODES_SIGMA = [[0, 1.0], [2, 1.0], [4, 1.0]]
_MODES_P0 = [[0, 1.0]]

_SCHEMAS = {
    "paraxial-field": {
        "waist": ("length", "1 um"),
        "wavelength": ("length", "1 um"),
        "modes": ("mode-list", _MODES_SIGMA),
        "compare_gaussian": ("bool", True),
        "x_extent": ("length", "3 um"),
        "z_extent": ("length", "8 um"),
        "nx": ("int", 2401),
        "nz": ("int", 3201),
        "depth": ("temperature", "1 mK"),
        "mass": ("mass", "2.20694650e-25 kg"),
        "reflectivity": ("float", -0.8),
        "fringe_z_max": ("length", "6 um"),
    },
    "reflection-fringes": {
        "waist": ("length", "1 um"),
        "wavelength": ("length", "1 um"),
        "modes": ("mode-list", _MODES_SIGMA),
        "compare_gaussian": ("bool", True),
        "reflectivity": ("float", -0.8),
        "z_max": ("length", "8 um"),
        "nz": ("int", 16001),
        "probe_z": ("length", "3 um"),
    },
    "slm-verify": {
        "waist": ("length", "0.8 mm"),
        "wavelength": ("length", "1 um"),
        "modes": ("mode-list", _MODES_SIGMA),
        "slm_pixels": ("int", 512),
        "pixel_pitch": ("length", "8 um"),
        "grating_period": ("length", "64 um"),
        "source_waist": ("length", "20 mm"),
        "focal_length": ("length", "10 mm"),
        "aperture_radius": ("length", "2 mm"),
        "window_radius": ("length", "12 um"),
        "window_points": ("int", 41),
    },
    "debye-field": {
        "na": ("float", 0.7),
        "focal_length": ("length", "3 mm"),
        "filling_factor": ("float", 0.35),
        "wavelength": ("length", "1 um"),
        "modes": ("mode-list", _MODES_SIGMA),
        "compare_gaussian": ("bool", True),
        "x_extent": ("length", "4 um"),
        "z_extent": ("length", "14 um"),
        "nx": ("int", 1601),
        "nz": ("int", 2801),
        "depth": ("temperature", "1 mK"),
        "mass": ("mass", "2.20694650e-25 kg"),
        "waist_e2_filling_factors": ("float-list", [0.35, 0.45]),
    },
    "ellipticity": {
        "na": ("float", 0.7),
        "focal_length": ("length", "3 mm"),
        "filling_factor": ("float", 0.35),
        "wavelength": ("length", "1 um"),
        "modes": ("mode-list", _MODES_SIGMA),
        "compare_gaussian": ("bool", True),
        "x_extent": ("length", "1.5 um"),
        "nx": ("int", 601),
        "lobe_threshold": ("float", 0.05),
    },
    "f0-sweep": {
        "na": ("float", 0.7),
        "focal_length": ("length", "3 mm"),
        "wavelength": ("length", "1 um"),
        "modes": ("mode-list", _MODES_SIGMA),
        "compare_gaussian": ("bool", True),
        "f0_values": ("float-list", [0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]),
        "x_extent": ("length", "4 um"),
        "z_extent": ("length", "14 um"),
        "nx": ("int", 1601),
        "nz": ("int", 2801),
        "depth": ("temperature", "1 mK"),
        "mass": ("mass", "2.20694650e-25 kg"),
        "find_saddle_window": ("bool", False),
        "saddle_f0_min": ("float", 0.85),
        "saddle_f0_max": ("float", 1.45),
        "saddle_f0_step": ("float", 0.01),
    },
    "optimal-f0": {
        "na": ("float", 0.7),
        "wavelength": ("length", "1 um"),
        "focal_length": ("length", "3 mm"),
        "p_max": ("int", 8),
        "f0_min": ("float", 0.1),
        "f0_max": ("float", 1.2),
        "f0_points": ("int", 111),
        "modes": ("mode-list", _MODES_SIGMA),
        "gradient_check_f0": ("float-list", [0.35, 0.6, 1.0]),
        "gradient_window": ("length", "0.8 um"),
    },
    "transport-1d": {
        "waist": ("length", "1 um"),
        "wavelength": ("length", "1 um"),
        "modes": ("mode-list", _MODES_SIGMA),
        "reflectivity": ("float", -0.8),
        "depth": ("temperature", "1 mK"),
        "mass": ("mass", "2.20694650e-25 kg"),
        "n_atoms": ("int", 200),
        "temperature": ("temperature", "100 uK"),
        "z_start": ("length", "600 um"),
        "a_accel": ("acceleration", "1 m/s^2"),
        "t_accel": ("time", "20 ms"),
        "t_const": ("time", "10 ms"),
        "a_decel": ("acceleration", "-1 m/s^2"),
        "t_decel": ("time", "20 ms"),
        "t_hold": ("time", "2 ms"),
        "gravity": ("acceleration", "0 m/s^2"),
        "z_table_max": ("length", "650 um"),
        "histogram_z_max": ("length", "20 um"),
        "write_profile": ("bool", False),
        "trajectory_atoms": ("int", 0),
    },
}
# the 3D scene shares the 1D parameter set
_SCHEMAS["transport-3d"] = dict(_SCHEMAS["transport-1d"])

_DIMENSIONS = {"length", "time", "temperature", "acceleration", "mass"}

# base SI suffix per dimension, used to write resolved configs back out
_SI_SUFFIX = {
    "length": "m",
    "time": "s",
    "temperature": "K",
    "acceleration": "m/s^2",
    "mass": "kg",
}


def _serializable_params(kind: str, params: dict) -> dict:
    """Resolved params as a config dict that parses back identically."""
    out = {}
    for name, value in params.items():
        typ = _SCHEMAS[kind][name][0]
        if typ in _DIMENSIONS:
            out[name] = f"{value!r} {_SI_SUFFIX[typ]}"
        else:
            out[name] = value
    return out


def _resolve_value(name: str, typ: str, raw):
    where = f"params.{name}"
    if typ in _DIMENSIONS:
        try:
            return parse_quantity(raw, typ)
        except UnitError as exc:
            raise SceneError(f"{where}: {exc}") from exc
    if typ == "float":
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise SceneError(f"{where}: expected a bare number, got {raw!r}")
        return float(raw)
    if typ == "int":
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise SceneError(f"{where}: expected an integer, got {raw!r}")
        return int(raw)
    if typ == "bool":
        if not isinstance(raw, bool):
            raise SceneError(f"{where}: expected true/false, got {raw!r}")
        return raw
    if typ == "float-list":
        if not isinstance(raw, list) or not raw:
            raise SceneError(f"{where}: expected a nonempty list of numbers")
        out = []
        for i, v in enumerate(raw):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise SceneError(f"{where}[{i}]: expected a number, got {v!r}")
            out.append(float(v))
        return out
    if typ == "mode-list":
        if not isinstance(raw, list) or not raw:
            raise SceneError(f"{where}: expected a nonempty list of [p, coeff]")
        out = []
        for i, item in enumerate(raw):
            if (
                not isinstance(item, list)
                or len(item) != 2
                or isinstance(item[0], bool)
                or not isinstance(item[0], int)
                or isinstance(item[1], bool)
                or not isinstance(item[1], (int, float))
            ):
                raise SceneError(
                    f"{where}[{i}]: expected [radial index, real coefficient]"
                )
            out.append([int(item[0]), float(item[1])])
        return out
    raise SceneError(f"{where}: unknown schema type {typ!r}")  # pragma: no cover


def _resolve_params(kind: str, raw: dict) -> dict:
    if kind not in _SCHEMAS:
        raise SceneError(
            f"kind: unknown scene kind {kind!r} (expected one of "
            f"{', '.join(sorted(_SCHEMAS))})"
        )
    if not isinstance(raw, dict):
        raise SceneError("params: expected an object")
    schema = _SCHEMAS[kind]
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise SceneError(f"params.{unknown[0]}: not a parameter of {kind!r}")
    resolved = {}
    for name, (typ, default) in schema.items():
        if name in raw:
            resolved[name] = _resolve_value(name, typ, raw[name])
        elif default is None:
            raise SceneError(f"params.{name}: required parameter missing")
        else:
            resolved[name] = _resolve_value(name, typ, default)
    return resolved


@dataclass(frozen=True)
class SceneConfig:
    """A validated scene: kind, resolved SI parameters, seed, output dir."""

    kind: str
    params: dict
    seed: int
    out_dir: str
    threads: int = 0
    scene_id: str = ""

    def __post_init__(self):
        if self.kind not in _SCHEMAS:
            raise SceneError(f"kind: unknown scene kind {self.kind!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise SceneError("seed: expected an integer")
        if self.threads < 0:
            raise SceneError("threads: must be >= 0 (0 = leave unchanged)")
        if not self.scene_id:
            object.__setattr__(self, "scene_id", self.kind)

    @classmethod
    def from_file(cls, path, out_dir=None, seed=None, threads=None):
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
        except OSError as exc:
            raise SceneError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise SceneError(f"{path}: not valid JSON ({exc})") from exc
        return cls.from_dict(raw, out_dir=out_dir, seed=seed, threads=threads)

    @classmethod
    def from_dict(cls, raw: dict, out_dir=None, seed=None, threads=None):
        if not isinstance(raw, dict):
            raise SceneError("config root: expected an object")
        unknown = sorted(
            set(raw) - {"kind", "params", "seed", "out_dir", "threads", "scene_id"}
        )
        if unknown:
            raise SceneError(f"{unknown[0]}: unknown top-level config field")
        if "kind" not in raw:
            raise SceneError("kind: required field missing")
        kind = raw["kind"]
        if not isinstance(kind, str):
            raise SceneError("kind: expected a string")
        params = _resolve_params(kind, raw.get("params", {}))
        cfg_seed = seed if seed is not None else raw.get("seed", 0)
        if not isinstance(cfg_seed, int) or isinstance(cfg_seed, bool):
            raise SceneError("seed: expected an integer")
        cfg_out = out_dir if out_dir is not None else raw.get("out_dir", None)
        if cfg_out is None:
            cfg_out = default_out_dir()
        cfg_threads = threads if threads is not None else raw.get("threads", 0)
        if not isinstance(cfg_threads, int) or isinstance(cfg_threads, bool):
            raise SceneError("threads: expected an integer")
        return cls(
            kind=kind,
            params=params,
            seed=cfg_seed,
            out_dir=str(cfg_out),
            threads=cfg_threads,
            scene_id=raw.get("scene_id", ""),
        )


# --------------------------------------------------------------------------
# shared helpers


def _superposition(params, waist_key="waist"):
    from .paraxial import LGSuperposition

    terms = tuple((p, c) for p, c in params["modes"])
    return LGSuperposition(terms, params[waist_key], params["wavelength"])


def _gaussian_like(params, waist_key="waist"):
    from .paraxial import gaussian

    return gaussian(params[waist_key], params["wavelength"])


def _gnuplot(path: Path, title: str, lines: list[str]):
    text = "\n".join(
        [
            "set datafile separator ','",
            f"set title '{title}'",
            "set key outside",
            *lines,
            "pause -1",
            "",
        ]
    )
    path.write_text(text)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _u_cut(intensity, depth_j):
    i = np.asarray(intensity, dtype=float)
    return -depth_j * i / i.max()


def _waist_e2(q, intensity):
    """1/e^2 intensity radius of the central peak (nearest crossing)."""
    q = np.asarray(q, dtype=float)
    i = np.asarray(intensity, dtype=float)
    c = int(np.argmax(i))
    level = i[c] / np.e**2
    for j in range(c, i.size - 1):
        if i[j + 1] < level <= i[j]:
            return float(
                q[j] - q[c] + (i[j] - level) * (q[j + 1] - q[j]) / (i[j] - i[j + 1])
            )
    raise SceneError("1/e^2 level not crossed inside the sampled window")


# --------------------------------------------------------------------------
# scene implementations (each returns (output file names, metrics))


def _run_paraxial_field(cfg: SceneConfig, out: Path):
    from .metrics import (
        fwhm_1d,
        harmonic_frequency_1d,
        schrodinger_1d_levels,
    )
    from .paraxial import (
        ReflectorModel,
        onaxis_envelope,
        reflected_onaxis_intensity,
        superposition_field,
    )

    p = cfg.params
    spec = _superposition(p)
    depth_j = K_B * p["depth"]
    mass = p["mass"]
    xs = np.linspace(-p["x_extent"], p["x_extent"], p["nx"])
    zs = np.linspace(-p["z_extent"], p["z_extent"], p["nz"])
    ix_s = np.abs(superposition_field(spec, xs, 0.0, 0.0)) ** 2
    iz_s = np.abs(onaxis_envelope(spec, zs)) ** 2
    cols_x = {"x_m": xs, "i_sigma": ix_s / ix_s.max()}
    cols_z = {"z_m": zs, "i_sigma": iz_s / iz_s.max()}

    metrics = {}
    metrics["dx_sigma_m"] = fwhm_1d(xs, ix_s)
    metrics["dz_sigma_m"] = fwhm_1d(zs, iz_s)
    metrics["v_sigma_m3"] = metrics["dx_sigma_m"] ** 2 * metrics["dz_sigma_m"]

    # narrow fit windows (5% of the FWHM) keep the quartic terms of the
    # broad axial profiles from biasing the curvature estimate
    u_x = _u_cut(ix_s, depth_j)
    u_z = _u_cut(iz_s, depth_j)
    wx = harmonic_frequency_1d(xs, u_x, mass, 0.05 * metrics["dx_sigma_m"])
    wz = harmonic_frequency_1d(zs, u_z, mass, 0.05 * metrics["dz_sigma_m"])
    metrics["omega_x_sigma"] = wx
    metrics["omega_z_sigma"] = wz

    # quantum cross-check: level spacing of the sampled x potential
    qm = np.abs(xs) <= 0.6e-6
    levels = schrodinger_1d_levels(xs[qm], u_x[qm], mass, n_levels=2)
    from .constants import HBAR

    metrics["schrodinger_omega_x"] = float((levels[1] - levels[0]) / HBAR)

    if p["compare_gaussian"]:
        g = _gaussian_like(p)
        ix_0 = np.abs(superposition_field(g, xs, 0.0, 0.0)) ** 2
        iz_0 = np.abs(onaxis_envelope(g, zs)) ** 2
        cols_x["i_gauss"] = ix_0 / ix_0.max()
        cols_z["i_gauss"] = iz_0 / iz_0.max()
        metrics["dx_0_m"] = fwhm_1d(xs, ix_0)
        metrics["dz_0_m"] = fwhm_1d(zs, iz_0)
        metrics["v_0_m3"] = metrics["dx_0_m"] ** 2 * metrics["dz_0_m"]
        metrics["volume_ratio"] = metrics["v_0_m3"] / metrics["v_sigma_m3"]
        w0x = harmonic_frequency_1d(xs, _u_cut(ix_0, depth_j), mass, 0.05 * metrics["dx_0_m"])
        w0z = harmonic_frequency_1d(zs, _u_cut(iz_0, depth_j), mass, 0.05 * metrics["dz_0_m"])
        metrics["omega_x_ratio"] = wx / w0x
        metrics["omega_z_ratio"] = wz / w0z

    write_line_csv(out / "xcut.csv", cols_x)
    write_line_csv(out / "zcut.csv", cols_z)
    outputs = ["xcut.csv", "zcut.csv"]

    if p["reflectivity"] != 0.0:
        refl = ReflectorModel(p["reflectivity"])
        zf = np.linspace(0.0, p["fringe_z_max"], 8001)
        fr = {"z_m": zf, "i_sigma": reflected_onaxis_intensity(spec, refl, zf)}
        if p["compare_gaussian"]:
            fr["i_gauss"] = reflected_onaxis_intensity(
                _gaussian_like(p), refl, zf
            )
        write_line_csv(out / "fringes.csv", fr)
        outputs.append("fringes.csv")

    _gnuplot(
        out / "plot.gp",
        "paraxial focal cuts",
        [
            "plot 'xcut.csv' using 1:2 with lines title 'sigma x', \\",
            "     'zcut.csv' using 1:2 with lines title 'sigma z'",
        ],
    )
    outputs.append("plot.gp")
    return outputs, metrics


def _run_reflection_fringes(cfg: SceneConfig, out: Path):
    from .paraxial import ReflectorModel, reflected_onaxis_intensity

    p = cfg.params
    spec = _superposition(p)
    refl = ReflectorModel(p["reflectivity"])
    zs = np.linspace(0.0, p["z_max"], p["nz"])
    i_s = reflected_onaxis_intensity(spec, refl, zs)
    cols = {"z_m": zs, "i_sigma": i_s}
    metrics = {}

    def fringe_stats(i):
        di = np.diff(i)
        imax = np.flatnonzero((di[:-1] > 0) & (di[1:] <= 0)) + 1
        imin = np.flatnonzero((di[:-1] < 0) & (di[1:] >= 0)) + 1
        return zs[imax], zs[imin], i

    def visibility_at(i, probe):
        # fringe modulation amplitude (peak minus adjacent troughs) on the
        # free-space-peak-normalized curve: comparable across beams because
        # the normalization is shared, unlike the local Michelson contrast
        # which saturates near 1 wherever the two envelopes are balanced
        zmax, zmin, _ = fringe_stats(i)
        if zmax.size == 0 or zmin.size == 0:
            return 0.0
        jc = int(np.argmin(np.abs(zmax - probe)))
        z_pk = zmax[jc]
        i_pk = float(np.interp(z_pk, zs, i))
        below = zmin[zmin < z_pk]
        above = zmin[zmin > z_pk]
        troughs = []
        if below.size:
            troughs.append(float(np.interp(below[-1], zs, i)))
        if above.size:
            troughs.append(float(np.interp(above[0], zs, i)))
        i_tr = float(np.mean(troughs))
        return 0.5 * (i_pk - i_tr)

    zmax_s, _, _ = fringe_stats(i_s)
    if zmax_s.size >= 2:
        spacing = float(np.mean(np.diff(zmax_s[: min(6, zmax_s.size)])))
        metrics["fringe_spacing_m"] = spacing
        metrics["spacing_over_half_lambda"] = spacing / (p["wavelength"] / 2.0)
    metrics["visibility_sigma"] = visibility_at(i_s, p["probe_z"])

    if p["compare_gaussian"]:
        i_0 = reflected_onaxis_intensity(_gaussian_like(p), refl, zs)
        cols["i_gauss"] = i_0
        metrics["visibility_0"] = visibility_at(i_0, p["probe_z"])
        if metrics["visibility_0"] > 0:
            metrics["visibility_ratio"] = (
                metrics["visibility_sigma"] / metrics["visibility_0"]
            )

    write_line_csv(out / "fringes.csv", cols)
    _gnuplot(
        out / "plot.gp",
        "standing-wave fringes",
        ["plot 'fringes.csv' using 1:2 with lines title 'sigma'"],
    )
    return ["fringes.csv", "plot.gp"], metrics


def _run_slm_verify(cfg: SceneConfig, out: Path):
    from .paraxial import onaxis_envelope
    from .slm import (
        LensSetup,
        PhaseMask,
        SourceBeam,
        encode_mask,
        extract_first_order,
        fresnel_kirchhoff_focus,
        modulate,
        save_mask_pgm,
        slm_axes,
        target_from_superposition,
    )

    p = cfg.params
    spec = _superposition(p)
    n = p["slm_pixels"]
    pitch = p["pixel_pitch"]
    x, y = slm_axes((n, n), pitch)
    amp, phase = target_from_superposition(spec, x, y)
    mask = encode_mask(amp, phase, p["grating_period"], pitch)
    save_mask_pgm(mask, out / "mask.pgm", wavelength=p["wavelength"])

    source = SourceBeam(p["source_waist"], p["wavelength"])
    lens = LensSetup(p["focal_length"], p["aperture_radius"])
    field_in = modulate(mask, source)

    # focal-plane window around the first diffraction order
    xc = p["wavelength"] * p["focal_length"] / p["grating_period"]
    half = p["window_radius"]
    m = p["window_points"]
    ox = xc + np.linspace(-half, half, m)
    oy = np.linspace(-half, half, m)
    gx, gy = np.meshgrid(ox, oy, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel(), np.zeros(gx.size)])
    focal = fresnel_kirchhoff_focus(
        field_in, lens, p["wavelength"], pts, pitch
    ).reshape(m, m)
    win, wx, wy = extract_first_order(
        focal, ox, oy, p["wavelength"], p["focal_length"], p["grating_period"], half
    )

    # ideal comparison: the target complex field itself (same source
    # envelope, no grating) propagated through the same lens on-axis
    ideal_in = amp * np.exp(1j * phase) * source.field(*np.meshgrid(x, y, indexing="ij"))
    pts0 = np.column_stack([gx.ravel() - xc, gy.ravel(), np.zeros(gx.size)])
    ideal = fresnel_kirchhoff_focus(
        ideal_in, lens, p["wavelength"], pts0, pitch
    ).reshape(m, m)

    i_win = np.abs(win) ** 2
    i_ideal = np.abs(ideal) ** 2
    cc = float(
        np.sum(i_win * i_ideal)
        / np.sqrt(np.sum(i_win**2) * np.sum(i_ideal**2))
    )

    # analytic identity: three modes at one third of the power each add
    # coherently on axis to three times the single-mode peak intensity
    from .paraxial import LGSuperposition

    terms = tuple((pp, c / np.sqrt(len(spec.terms))) for pp, c in spec.terms)
    eq = LGSuperposition(terms, spec.w0, spec.wavelength)
    single = LGSuperposition((spec.terms[0],), spec.w0, spec.wavelength)
    ratio = (
        np.abs(onaxis_envelope(eq, 0.0)) ** 2
        / np.abs(onaxis_envelope(single, 0.0)) ** 2
    )
    metrics = {
        "cross_correlation": cc,
        "peak_third_power_dev": float(abs(ratio / len(spec.terms) - 1.0)),
    }

    wxg, wyg = np.meshgrid(wx, wy, indexing="ij")
    write_line_csv(
        out / "first_order.csv",
        {
            "x_m": wxg.ravel(),
            "y_m": wyg.ravel(),
            "i_first_order": (i_win / i_win.max()).ravel(),
            "i_ideal": (i_ideal / i_ideal.max()).ravel(),
        },
    )
    _gnuplot(
        out / "plot.gp",
        "first diffraction order vs ideal focus",
        [
            "set view map",
            "splot 'first_order.csv' using 1:2:3 with points pointtype 5 "
            "palette title 'first order'",
        ],
    )
    return ["mask.pgm", "mask.pgm.json", "first_order.csv", "plot.gp"], metrics


def _run_debye_field(cfg: SceneConfig, out: Path):
    from .debye import FocusingSetup, debye_field
    from .metrics import _line_cuts, fwhm_1d, harmonic_frequency_1d
    from .paraxial import LGSuperposition

    p = cfg.params
    depth_j = K_B * p["depth"]
    mass = p["mass"]

    def spec_for(modes, f0):
        terms = tuple((pp, c) for pp, c in modes)
        return LGSuperposition(
            terms, f0 * p["focal_length"] * p["na"], p["wavelength"]
        )

    def setup_for(f0):
        return FocusingSetup(p["na"], p["focal_length"], f0, p["wavelength"])

    f0 = p["filling_factor"]
    spec = spec_for(p["modes"], f0)
    setup = setup_for(f0)
    xs, ix, iy, zs, iz = _line_cuts(
        spec, setup, p["x_extent"], p["z_extent"], p["nx"], p["nz"]
    )
    metrics = {}
    dx = fwhm_1d(xs, ix)
    dy = fwhm_1d(xs, iy)
    dz = fwhm_1d(zs, iz)
    metrics["dx_sigma_m"] = dx
    metrics["dy_sigma_m"] = dy
    metrics["dz_sigma_m"] = dz
    metrics["v_sigma_m3"] = dx * dy * dz
    metrics["omega_x_sigma"] = harmonic_frequency_1d(
        xs, _u_cut(iy, depth_j), mass, 0.1 * dy
    )
    metrics["omega_z_sigma"] = harmonic_frequency_1d(
        zs, _u_cut(iz, depth_j), mass, 0.1 * dz
    )
    cols_x = {
        "x_m": xs,
        "i_sigma_x": ix / ix.max(),
        "i_sigma_y": iy / iy.max(),
    }
    cols_z = {"z_m": zs, "i_sigma": iz / iz.max()}

    if p["compare_gaussian"]:
        g = spec_for(_MODES_P0, f0)
        gx_, gix, giy, gzs, giz = _line_cuts(
            g, setup, p["x_extent"], p["z_extent"], p["nx"], p["nz"]
        )
        d0x = fwhm_1d(gx_, gix)
        d0y = fwhm_1d(gx_, giy)
        d0z = fwhm_1d(gzs, giz)
        metrics["dx_0_m"] = d0x
        metrics["dy_0_m"] = d0y
        metrics["dz_0_m"] = d0z
        metrics["v_0_m3"] = d0x * d0y * d0z
        metrics["volume_ratio"] = metrics["v_0_m3"] / metrics["v_sigma_m3"]
        cols_x["i_gauss_x"] = gix / gix.max()
        cols_x["i_gauss_y"] = giy / giy.max()
        cols_z["i_gauss"] = giz / giz.max()

    # 1/e^2 transverse radius of the fundamental mode per filling factor
    for we_f0 in p["waist_e2_filling_factors"]:
        g = spec_for(_MODES_P0, we_f0)
        s = setup_for(we_f0)
        qs = np.linspace(0.0, p["x_extent"], p["nx"] // 2 + 1)
        ex, ey, ez = debye_field(g, s, qs, np.pi / 2, 0.0)
        i_cut = np.abs(ex) ** 2 + np.abs(ey) ** 2 + np.abs(ez) ** 2
        metrics[f"we2_p0_{we_f0:g}_m"] = _waist_e2(qs, i_cut)

    write_line_csv(out / "xcut.csv", cols_x)
    write_line_csv(out / "zcut.csv", cols_z)
    _gnuplot(
        out / "plot.gp",
        "vector focal cuts",
        [
            "plot 'xcut.csv' using 1:2 with lines title 'sigma x', \\",
            "     'xcut.csv' using 1:3 with lines title 'sigma y', \\",
            "     'zcut.csv' using 1:2 with lines title 'sigma z'",
        ],
    )
    return ["xcut.csv", "zcut.csv", "plot.gp"], metrics


def _run_ellipticity(cfg: SceneConfig, out: Path):
    from .debye import FocusingSetup, ellipticity_map, render_focal_grid
    from .paraxial import LGSuperposition

    p = cfg.params
    setup = FocusingSetup(
        p["na"], p["focal_length"], p["filling_factor"], p["wavelength"]
    )

    def spec_for(modes):
        terms = tuple((pp, c) for pp, c in modes)
        return LGSuperposition(
            terms,
            p["filling_factor"] * p["focal_length"] * p["na"],
            p["wavelength"],
        )

    nx = p["nx"]
    ext = p["x_extent"]
    dx = 2.0 * ext / (nx - 1)

    def cy_profile(modes):
        grid = render_focal_grid(
            spec_for(modes), setup, (-ext, 0.0, 0.0), (dx, 1.0, 1.0), (nx, 1, 1)
        )
        cy = ellipticity_map(grid).cy[:, 0, 0]
        inten = grid.intensity()[:, 0, 0]
        return cy, inten / inten.max()

    xs = np.linspace(-ext, ext, nx)

    def max_gradient(cy, inten):
        grad = np.gradient(cy, xs)
        # confine the measurement to the contiguous central lobe; the
        # normalized polarization is noise-dominated at intensity nulls
        c = int(np.argmax(inten))
        lo = c
        while lo > 0 and inten[lo - 1] >= p["lobe_threshold"]:
            lo -= 1
        hi = c
        while hi < nx - 1 and inten[hi + 1] >= p["lobe_threshold"]:
            hi += 1
        window = grad[lo : hi + 1]
        return float(np.nanmax(np.abs(window)))

    cy_s, i_s = cy_profile(p["modes"])
    metrics = {"max_dcy_dx_sigma": max_gradient(cy_s, i_s)}
    cols = {"x_m": xs, "cy_sigma": cy_s, "i_sigma": i_s}
    if p["compare_gaussian"]:
        cy_0, i_0 = cy_profile(_MODES_P0)
        metrics["max_dcy_dx_0"] = max_gradient(cy_0, i_0)
        cols["cy_gauss"] = cy_0
        cols["i_gauss"] = i_0

    write_line_csv(out / "cy_x.csv", cols)
    _gnuplot(
        out / "plot.gp",
        "focal-plane ellipticity",
        ["plot 'cy_x.csv' using 1:2 with lines title 'C_y sigma'"],
    )
    return ["cy_x.csv", "plot.gp"], metrics


def _axial_curvature(modes, f0, p):
    """Normalized on-axis intensity curvature of the focused field at z=0."""
    from .debye import FocusingSetup, debye_field
    from .paraxial import LGSuperposition

    terms = tuple((pp, c) for pp, c in modes)
    spec = LGSuperposition(
        terms, f0 * p["focal_length"] * p["na"], p["wavelength"]
    )
    setup = FocusingSetup(p["na"], p["focal_length"], f0, p["wavelength"])
    h = 5e-9
    zq = np.array([-2.0, -1.0, 0.0, 1.0, 2.0]) * h
    ex, ey, ez = debye_field(spec, setup, 0.0, 0.0, zq)
    iz = np.abs(ex) ** 2 + np.abs(ey) ** 2 + np.abs(ez) ** 2
    iz = iz / iz[2]
    stencil = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12.0 * h * h)
    return float(stencil @ iz)


def _run_f0_sweep(cfg: SceneConfig, out: Path):
    from .metrics import sweep_filling_factor

    p = cfg.params
    depth_j = K_B * p["depth"]
    terms = tuple((pp, c) for pp, c in p["modes"])
    common = dict(
        na=p["na"],
        focal_length=p["focal_length"],
        wavelength=p["wavelength"],
        f0_values=p["f0_values"],
        u0=depth_j,
        mass=p["mass"],
        x_extent=p["x_extent"],
        z_extent=p["z_extent"],
        nx=p["nx"],
        nz=p["nz"],
    )
    rows_s = sweep_filling_factor(terms, **common)
    cols = {
        "f0": [r["f0"] for r in rows_s],
        "dx_sigma_m": [r["dx"] for r in rows_s],
        "dy_sigma_m": [r["dy"] for r in rows_s],
        "dz_sigma_m": [r["dz"] for r in rows_s],
        "v_sigma_m3": [r["volume"] for r in rows_s],
        "omega_x_sigma": [r["omega_x"] for r in rows_s],
        "omega_z_sigma": [r["omega_z"] for r in rows_s],
        "u_curv_sigma": [r["axial_curvature"] for r in rows_s],
    }
    metrics = {}
    if p["compare_gaussian"]:
        rows_0 = sweep_filling_factor((( 0, 1.0),), **common)
        cols["v_0_m3"] = [r["volume"] for r in rows_0]
        cols["omega_x_0"] = [r["omega_x"] for r in rows_0]
        cols["omega_z_0"] = [r["omega_z"] for r in rows_0]
    write_line_csv(out / "sweep.csv", cols)
    outputs = ["sweep.csv"]

    if p["find_saddle_window"]:
        f0s = np.arange(
            p["saddle_f0_min"], p["saddle_f0_max"] + 1e-12, p["saddle_f0_step"]
        )
        # potential curvature carries the opposite sign of the intensity
        # curvature for a red-detuned trap
        ucurv = np.array(
            [-depth_j * _axial_curvature(p["modes"], f0, p) for f0 in f0s]
        )
        write_line_csv(out / "saddle.csv", {"f0": f0s, "u_curv_sigma": ucurv})
        outputs.append("saddle.csv")
        neg = ucurv < 0
        edges = []
        for j in range(1, f0s.size):
            if neg[j] != neg[j - 1]:
                a, b = ucurv[j - 1], ucurv[j]
                edges.append(float(f0s[j - 1] + (0.0 - a) * (f0s[j] - f0s[j - 1]) / (b - a)))
        if len(edges) >= 2 and neg[np.searchsorted(f0s, edges[0]) ]:
            metrics["saddle_lo"] = edges[0]
            metrics["saddle_hi"] = edges[1]
        for probe in (0.9, 1.1, 1.35):
            metrics[f"u_curv_{probe:g}"] = float(
                -depth_j * _axial_curvature(p["modes"], probe, p)
            )

    _gnuplot(
        out / "plot.gp",
        "filling-factor sweep",
        ["plot 'sweep.csv' using 1:5 with linespoints title 'V sigma'"],
    )
    outputs.append("plot.gp")
    return outputs, metrics


def _run_optimal_f0(cfg: SceneConfig, out: Path):
    from .debye import FocusingSetup, onaxis_phase_gradient, pupil_amplitude
    from .metrics import gouy_gradient_paraxial, max_phase_gradient, optimal_filling
    from .paraxial import LGSuperposition

    p = cfg.params
    na = p["na"]
    lam = p["wavelength"]
    bound = max_phase_gradient(na, lam)
    f0s = np.linspace(p["f0_min"], p["f0_max"], p["f0_points"])
    cols = {"f0": f0s}
    for pp in range(p["p_max"] + 1):
        cols[f"grad_p{pp}"] = [
            gouy_gradient_paraxial(pp, f0, na, lam) for f0 in f0s
        ]
    cols["bound"] = np.full(f0s.size, bound)
    write_line_csv(out / "phase_gradient.csv", cols)

    p_top = max(pp for pp, _ in p["modes"])
    f0_opt = optimal_filling(na, p_top)
    # the optimal filling factor is defined by the waist gradient of the
    # highest mode meeting the aperture bound exactly
    identity_dev = abs(
        gouy_gradient_paraxial(p_top, f0_opt, na, lam) / bound - 1.0
    )

    # the aperture bound constrains the phase gradient at the waist of the
    # configured beam; near on-axis nulls of a sign-changing pupil (e.g. a
    # single clipped p = 2 mode) the unwrapped phase can superoscillate
    # past any spectral bound, so the margin is taken for the configured
    # superposition at z = 0 where its amplitude is appreciable
    margin = 0.0
    for f0 in p["gradient_check_f0"]:
        terms = tuple((pp, c) for pp, c in p["modes"])
        spec = LGSuperposition(terms, f0 * p["focal_length"] * na, lam)
        setup = FocusingSetup(na, p["focal_length"], f0, lam)
        zg, grad = onaxis_phase_gradient(spec, setup, p["gradient_window"])
        margin = max(
            margin, float(abs(grad[int(np.argmin(np.abs(zg)))]) / bound)
        )

    # pupil amplitude profiles at the first checked filling factor
    f0_show = p["gradient_check_f0"][0]
    setup = FocusingSetup(na, p["focal_length"], f0_show, lam)
    thetas = np.linspace(0.0, setup.theta_max, 401)
    prof = {"pupil_r_m": p["focal_length"] * np.sin(thetas)}
    for label, modes in (("p0", _MODES_P0), ("sigma", p["modes"])):
        terms = tuple((pp, c) for pp, c in modes)
        spec = LGSuperposition(terms, f0_show * p["focal_length"] * na, lam)
        prof[f"amp_{label}"] = np.real(pupil_amplitude(spec, setup, thetas))
    write_line_csv(out / "pupil_fields.csv", prof)

    metrics = {
        "f0_opt": float(f0_opt),
        "identity_dev": float(identity_dev),
        "gradient_margin": margin,
        "phase_gradient_bound": float(bound),
    }
    _gnuplot(
        out / "plot.gp",
        "waist phase gradients vs filling factor",
        [
            "plot 'phase_gradient.csv' using 1:2 with lines title 'p=0', \\",
            "     'phase_gradient.csv' using 1:'bound' with lines title 'bound'",
        ],
    )
    return ["phase_gradient.csv", "pupil_fields.csv", "plot.gp"], metrics


def _run_transport(cfg: SceneConfig, out: Path, mode: str):
    from .paraxial import ReflectorModel
    from .transport import (
        FringeModel,
        MotionProfile,
        delivery_histogram,
        find_fringe_traps,
        focus_position,
        integrate,
        sample_ensemble,
    )

    p = cfg.params
    spec = _superposition(p)
    model = FringeModel(
        spec,
        ReflectorModel(p["reflectivity"]),
        K_B * p["depth"],
        p["mass"],
        p["z_table_max"],
    )
    profile = MotionProfile(
        p["z_start"], p["a_accel"], p["t_accel"], p["t_const"],
        p["a_decel"], p["t_decel"],
    )
    ens = sample_ensemble(
        p["n_atoms"], p["temperature"], model, profile, cfg.seed
    )
    record = [] if p["trajectory_atoms"] > 0 else None
    integrate(
        ens, model, profile, mode=mode, t_hold=p["t_hold"],
        gravity=p["gravity"], record=record,
    )
    hist = delivery_histogram(ens, model, mode, z_max=p["histogram_z_max"])

    write_line_csv(
        out / "delivery.csv",
        {"z_i_m": hist.trap_centers, "probability": hist.probabilities},
    )
    hist_json = {
        "lost": hist.lost,
        "n_atoms": p["n_atoms"],
        "probabilities": list(hist.probabilities),
        "trap_centers_m": list(hist.trap_centers),
    }
    (out / "histogram.json").write_text(
        json.dumps(hist_json, indent=2, sort_keys=True) + "\n"
    )

    zline = np.linspace(0.0, p["histogram_z_max"], 4001)
    write_line_csv(
        out / "potential_final.csv",
        {
            "z_m": zline,
            "u_over_kb_K": model.potential_axial(zline, 0.0) / K_B,
        },
    )
    outputs = ["delivery.csv", "histogram.json", "potential_final.csv"]

    if p["write_profile"]:
        ts = np.linspace(0.0, profile.duration + p["t_hold"], 1001)
        write_line_csv(
            out / "profile.csv", {"t_s": ts, "z_focus_m": focus_position(profile, ts)}
        )
        outputs.append("profile.csv")

    if record is not None:
        m = min(p["trajectory_atoms"], ens.n)
        cols = {"t_s": [fr[0] for fr in record]}
        for i in range(m):
            cols[f"z_atom{i}_m"] = [fr[1][i, 2] for fr in record]
            if mode == "full-3d":
                cols[f"x_atom{i}_m"] = [fr[1][i, 0] for fr in record]
        write_line_csv(out / "trajectories.csv", cols)
        outputs.append("trajectories.csv")

    centers = find_fringe_traps(model, p["histogram_z_max"])
    metrics = {
        "lost": float(hist.lost),
        "n_atoms": float(p["n_atoms"]),
    }
    for j in range(min(3, hist.probabilities.size)):
        metrics[f"p_z{j + 1}"] = float(hist.probabilities[j])
    if centers.size >= 2:
        metrics["fringe_spacing_m"] = float(np.mean(np.diff(centers[:4])))
    metrics["zf_start_m"] = float(focus_position(profile, 0.0))
    metrics["zf_end_m"] = float(focus_position(profile, profile.duration))

    _gnuplot(
        out / "plot.gp",
        "delivery histogram",
        ["plot 'delivery.csv' using 1:2 with impulses title 'P(z_i)'"],
    )
    outputs.append("plot.gp")
    return outputs, metrics


_RUNNERS = {
    "paraxial-field": _run_paraxial_field,
    "reflection-fringes": _run_reflection_fringes,
    "slm-verify": _run_slm_verify,
    "debye-field": _run_debye_field,
    "ellipticity": _run_ellipticity,
    "f0-sweep": _run_f0_sweep,
    "optimal-f0": _run_optimal_f0,
    "transport-1d": lambda cfg, out: _run_transport(cfg, out, "axial-1d"),
    "transport-3d": lambda cfg, out: _run_transport(cfg, out, "full-3d"),
}


def run_scene(config: SceneConfig) -> dict:
    """Execute a scene and write its outputs plus ``manifest.json``.

    Returns the manifest dict.  Numerical warnings raised during the run
    are captured into the manifest instead of being printed.
    """
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if config.threads > 0:
        from .backend import set_num_threads

        set_num_threads(config.threads)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        outputs, metrics = _RUNNERS[config.kind](config, out)

    from .backend import active_backend

    manifest = {
        "scene_id": config.scene_id,
        "kind": config.kind,
        "seed": config.seed,
        "backend": active_backend(),
        "config": {
            "kind": config.kind,
            "params": _serializable_params(config.kind, config.params),
            "seed": config.seed,
            "scene_id": config.scene_id,
        },
        "metrics": {k: metrics[k] for k in sorted(metrics)},
        "outputs": [
            {"name": name, "sha256": _sha256(out / name)} for name in outputs
        ],
        "warnings": sorted(str(w.message) for w in caught),
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    return manifest


# --------------------------------------------------------------------------
# presets

_PRESETS = {
    "fig1": {
        "kind": "paraxial-field",
        "description": "Paraxial focal cuts, volumes and fringes (w0 = 1 um)",
        "params": {},
    },
    "fig2": {
        "kind": "slm-verify",
        "description": "SLM mask encoding and scalar focal verification",
        "params": {},
    },
    "fig3": {
        "kind": "debye-field",
        "description": "Vector focal cuts at NA = 0.7, F0 = 0.35",
        "params": {},
    },
    "fig4": {
        "kind": "f0-sweep",
        "description": "Trap properties vs filling factor with saddle window",
        "params": {
            "f0_values": [0.3, 0.45, 0.6, 0.75, 0.9, 1.05, 1.2, 1.35, 1.5],
            "find_saddle_window": True,
        },
    },
    "fig5a": {
        "kind": "ellipticity",
        "description": "Focal-plane polarization ellipticity gradients",
        "params": {},
    },
    "fig6": {
        "kind": "optimal-f0",
        "description": "Waist phase gradients, aperture bound, optimal F0",
        "params": {},
    },
    "fig7": {
        "kind": "f0-sweep",
        "description": "Focal volumes vs filling factor for both inputs",
        "params": {
            "f0_values": [0.3, 0.4, 0.5, 0.6, 0.8, 1.0, 1.5, 2.0, 3.0],
            "x_extent": "3 um",
            "nx": 1201,
        },
    },
    "fig9b": {
        "kind": "reflection-fringes",
        "description": "Standing-wave fringe suppression near the surface",
        "params": {},
    },
    "fig11-r08-1d": {
        "kind": "transport-1d",
        "description": "1D delivery Monte Carlo, superposition, r = -0.8",
        "params": {},
    },
    "fig11-r03-1d": {
        "kind": "transport-1d",
        "description": "1D delivery Monte Carlo, superposition, r = -0.3",
        "params": {"reflectivity": -0.3},
    },
    "fig11-e0-1d": {
        "kind": "transport-1d",
        "description": "1D delivery Monte Carlo, fundamental mode, r = -0.8",
        "params": {"modes": _MODES_P0},
    },
    "fig11-r08-3d": {
        "kind": "transport-3d",
        "description": "Full-3D delivery Monte Carlo, superposition, r = -0.8",
        "params": {"n_atoms": 200},
    },
    "sm-s3": {
        "kind": "f0-sweep",
        "description": "Volume reduction window 0.3 < F0 < 0.9",
        "params": {"f0_values": [0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]},
    },
    "sm-s5": {
        "kind": "transport-1d",
        "description": "Motion profile of the moving focus (few-atom run)",
        "params": {"n_atoms": 8, "write_profile": True, "trajectory_atoms": 4},
    },
}

_DEFAULT_PRESET_SEED = 12345


def list_presets() -> dict:
    """Preset name -> one-line description."""
    return {name: _PRESETS[name]["description"] for name in sorted(_PRESETS)}


def preset_config(
    name: str, out_dir=None, seed=None, threads=None
) -> SceneConfig:
    if name not in _PRESETS:
        raise SceneError(
            f"unknown preset {name!r} (available: {', '.join(sorted(_PRESETS))})"
        )
    entry = _PRESETS[name]
    raw = {
        "kind": entry["kind"],
        "params": entry["params"],
        "seed": _DEFAULT_PRESET_SEED,
        "scene_id": name,
    }
    if out_dir is None:
        out_dir = str(Path(default_out_dir()) / name)
    return SceneConfig.from_dict(
        raw, out_dir=out_dir, seed=seed, threads=threads
    )


# --------------------------------------------------------------------------
# reference comparison


def load_reference_table(path=None) -> dict:
    """Reference metric table; the bundled one when ``path`` is None."""
    if path is None:
        text = (
            resources.files("lgtweezer") / "data" / "reference_values.json"
        ).read_text()
    else:
        text = Path(path).read_text()
    return json.loads(text)


def compare_against_reference(manifest_path, reference_path=None):
    """Check a manifest against a reference table.

    Returns (rows, passed).  Each row is a dict with the metric name,
    measured and expected values, the tolerance specification, and a
    boolean verdict; hash rows verify that the listed outputs still match
    their recorded digests.  Metrics present in the reference but missing
    from the manifest raise SceneError.
    """
    manifest_path = Path(manifest_path)
    manifest = json.loads(manifest_path.read_text())
    table = load_reference_table(reference_path)
    scene_id = manifest.get("scene_id", "")
    entries = table.get(scene_id, {})
    rows = []

    for name, spec in sorted(entries.items()):
        if name not in manifest.get("metrics", {}):
            raise SceneError(
                f"reference metric {scene_id}/{name} missing from manifest"
            )
        measured = float(manifest["metrics"][name])
        expected = float(spec.get("expected", float("nan")))
        if "tol_rel" in spec:
            ok = abs(measured - expected) <= spec["tol_rel"] * abs(expected)
            tol = f"rel {spec['tol_rel']:g}"
        elif "tol_abs" in spec:
            ok = abs(measured - expected) <= spec["tol_abs"]
            tol = f"abs {spec['tol_abs']:g}"
        elif "max" in spec:
            expected = float(spec["max"])
            ok = measured <= expected
            tol = "max"
        elif "min" in spec:
            expected = float(spec["min"])
            ok = measured >= expected
            tol = "min"
        else:
            raise SceneError(
                f"reference entry {scene_id}/{name} lacks a tolerance"
            )
        rows.append(
            {
                "metric": name,
                "measured": measured,
                "expected": expected,
                "tolerance": tol,
                "pass": bool(ok),
            }
        )

    base = manifest_path.parent
    for entry in manifest.get("outputs", []):
        target = base / entry["name"]
        ok = target.is_file() and _sha256(target) == entry["sha256"]
        rows.append(
            {
                "metric": f"sha256:{entry['name']}",
                "measured": "match" if ok else "mismatch",
                "expected": "match",
                "tolerance": "hash",
                "pass": bool(ok),
            }
        )

    return rows, all(r["pass"] for r in rows)
