"""Command-line interface: config parsing, experiment presets, and the
forward / reconstruct / sweep / export-sinogram / validate / gen-mesh
subcommands.

Config files are flat INI-style text.  Repeated ``shape`` keys accumulate, so
piecewise phantoms are listed one primitive per line; ``configparser`` cannot
express that, hence the small custom parser.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .errors import ConfigError, MeshError, NumericsError, RadSourceError
from .forward import (ballistic_measurement, read_measurement, solve_forward,
                      write_measurement)
from .mesh import BoundaryCurve, Triangulation, generate_mesh, read_mesh, write_mesh
from .phantoms import HenyeyGreenstein, Medium, Phantom, TableKernel, shepp_logan_entries
from .recon import ReconParams, reconstruct, sweep_M, write_report

log = logging.getLogger(__name__)

_SHAPE_ARITY = {"disc": 3, "rect": 4, "ellipse": 5, "gauss": 3}


def parse_config_text(text):
    """Parse flat INI-style text into {section: [(key, value), ...]}.

    Repeated keys are kept in order; values are raw strings.
    """
    sections = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            sections.setdefault(current, [])
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if current is None:
            raise ConfigError(f"line {lineno}: key outside any [section]")
        key, value = line.split("=", 1)
        sections[current].append((key.strip(), value.strip()))
    return sections


def serialize_config(sections):
    out = []
    for name, pairs in sections.items():
        out.append(f"[{name}]")
        for key, value in pairs:
            out.append(f"{key} = {value}")
        out.append("")
    return "\n".join(out)


def _get(pairs, key, default=None, required=False):
    vals = [v for k, v in pairs if k == key]
    if not vals:
        if required:
            raise ConfigError(f"missing required key {key!r}")
        return default
    if len(vals) > 1:
        raise ConfigError(f"key {key!r} given {len(vals)} times; expected once")
    return vals[0]


def _get_all(pairs, key):
    return [v for k, v in pairs if k == key]


def _parse_shape(spec):
    parts = spec.split()
    kind = parts[0]
    if kind not in _SHAPE_ARITY:
        raise ConfigError(f"unknown shape kind {kind!r} in {spec!r}")
    arity = _SHAPE_ARITY[kind]
    if len(parts) != arity + 2:
        raise ConfigError(f"shape {kind!r} needs {arity} parameters plus a value, "
                          f"got {spec!r}")
    try:
        nums = [float(p) for p in parts[1:]]
    except ValueError as e:
        raise ConfigError(f"bad number in shape line {spec!r}: {e}") from None
    return (kind, tuple(nums[:-1]), nums[-1], kind == "gauss")


def _parse_phantom(pairs, shape_key, bg_key):
    entries = []
    for spec in _get_all(pairs, shape_key):
        if spec == "shepp-logan":
            entries.extend(shepp_logan_entries())
        elif spec.startswith("shepp-logan "):
            entries.extend(shepp_logan_entries(float(spec.split()[1])))
        else:
            entries.append(_parse_shape(spec))
    bg = float(_get(pairs, bg_key, "0"))
    return Phantom.build(entries, background=bg)


def _parse_curve(spec):
    parts = spec.split()
    try:
        if parts[0] == "circle" and len(parts) == 2:
            return BoundaryCurve("circle", radius=float(parts[1]))
        if parts[0] == "ellipse" and len(parts) == 3:
            return BoundaryCurve("ellipse", a=float(parts[1]), b=float(parts[2]))
    except (ValueError, MeshError) as e:
        raise ConfigError(f"bad curve spec {spec!r}: {e}") from None
    raise ConfigError(f"bad curve spec {spec!r} (want 'circle r' or 'ellipse a b')")


def _parse_kernel(spec):
    parts = spec.split()
    try:
        if parts[0] == "hg" and len(parts) == 2:
            return HenyeyGreenstein(float(parts[1]))
        if parts[0] == "hg-truncated" and len(parts) == 3:
            return HenyeyGreenstein(float(parts[1])).truncated(int(parts[2]))
        if parts[0] == "table" and len(parts) >= 2:
            return TableKernel([float(p) for p in parts[1:]])
    except (ValueError, NumericsError) as e:
        raise ConfigError(f"bad kernel spec {spec!r}: {e}") from None
    raise ConfigError(f"bad kernel spec {spec!r}")


@dataclass
class RunConfig:
    """Validated run configuration for all subcommands."""

    curve: BoundaryCurve
    medium: Medium
    source: Phantom
    fwd_edge: float | None
    fwd_mesh_path: str | None
    N_dir: int
    N: int
    K: int
    fwd_tol: float
    fwd_method: str                  # "transport" or "ballistic"
    recon_edge: float | None
    recon_mesh_path: str | None
    params: ReconParams
    M_range: tuple | None
    out_dir: str
    seed: int
    sections: dict = field(repr=False, default_factory=dict)

    @staticmethod
    def from_text(text):
        sec = parse_config_text(text)
        for required in ("domain", "medium", "source", "forward", "recon"):
            if required not in sec:
                raise ConfigError(f"missing [{required}] section")
        try:
            curve = _parse_curve(_get(sec["domain"], "curve", required=True))
            med_pairs = sec["medium"]
            mua = _parse_phantom(med_pairs, "mua_shape", "mua_background")
            mus = _parse_phantom(med_pairs, "mus_shape", "mus_background")
            kernel = _parse_kernel(_get(med_pairs, "kernel", "hg 0"))
            medium = Medium(curve=curve, mua=mua, mus=mus, kernel=kernel)
            source = _parse_phantom(sec["source"], "shape", "background")

            fwd = sec["forward"]
            fwd_edge = _get(fwd, "edge_length")
            fwd_edge = float(fwd_edge) if fwd_edge else None
            fwd_mesh_path = _get(fwd, "mesh") or None
            N_dir = int(_get(fwd, "N_dir", "360"))
            N = int(_get(fwd, "N", "360"))
            K = int(_get(fwd, "K", "1024"))
            fwd_tol = float(_get(fwd, "tol", "1e-7"))
            fwd_method = _get(fwd, "method", "transport")
            if fwd_method not in ("transport", "ballistic"):
                raise ConfigError(f"unknown forward method {fwd_method!r}")

            rec = sec["recon"]
            recon_edge = _get(rec, "edge_length")
            recon_edge = float(recon_edge) if recon_edge else None
            recon_mesh_path = _get(rec, "mesh") or None
            M = int(_get(rec, "M", "6"))
            S = int(_get(rec, "S", "128"))
            params = ReconParams(
                M=M, S=S,
                quad_points=int(_get(rec, "quad_points", "100")),
                hilbert_grid=int(_get(rec, "hilbert_grid", "100")),
                dw_rule=_get(rec, "dw_rule", "characteristic"),
                solver_tol=float(_get(rec, "solver_tol", "1e-10")),
            )
            M_range = None
            mr = _get(rec, "M_range")
            if mr:
                lo, hi = mr.split(":")
                M_range = (int(lo), int(hi))
            out_dir = _get(sec.get("output", []), "dir", ".")
            seed = int(_get(sec.get("run", []), "seed", "0"))
        except NumericsError as e:
            raise ConfigError(str(e)) from e
        except (ValueError, IndexError) as e:
            raise ConfigError(f"bad config value: {e}") from None

        cfg = RunConfig(curve=curve, medium=medium, source=source,
                        fwd_edge=fwd_edge, fwd_mesh_path=fwd_mesh_path,
                        N_dir=N_dir, N=N, K=K, fwd_tol=fwd_tol,
                        fwd_method=fwd_method, recon_edge=recon_edge,
                        recon_mesh_path=recon_mesh_path, params=params,
                        M_range=M_range, out_dir=out_dir, seed=seed,
                        sections=sec)
        cfg.validate()
        return cfg

    def validate(self):
        if self.fwd_edge is None and self.fwd_mesh_path is None:
            raise ConfigError("forward section needs edge_length or mesh")
        if self.recon_edge is None and self.recon_mesh_path is None:
            raise ConfigError("recon section needs edge_length or mesh")
        # distinct discretizations for data generation and inversion
        same_edge = (self.fwd_edge is not None and self.fwd_edge == self.recon_edge)
        same_path = (self.fwd_mesh_path is not None
                     and self.fwd_mesh_path == self.recon_mesh_path)
        if same_edge or same_path:
            raise ConfigError("forward and reconstruction meshes must differ")
        if self.N < 2 * self.params.S + 2:
            raise ConfigError(f"N={self.N} too small for S={self.params.S} "
                              f"(need N >= 2S+2)")

    def forward_mesh(self):
        if self.fwd_mesh_path:
            return read_mesh(self.fwd_mesh_path, curve=self.curve)
        return generate_mesh(self.curve, self.fwd_edge)

    def recon_mesh(self):
        if self.recon_mesh_path:
            return read_mesh(self.recon_mesh_path, curve=self.curve)
        return generate_mesh(self.curve, self.recon_edge)


_EXP1_SOURCE = """\
[source]
shape = rect -0.25 0.5 -0.15 0.15 2
shape = disc -0.25 0.4330127018922193 0.2 1
"""

_EXP1_MEDIUM = """\
[medium]
mua_background = 0.1
mua_shape = disc 0.5 0 0.3 2
mua_shape = disc -0.25 0.4330127018922193 0.2 1
mus_background = 5
kernel = hg 0.5
"""

PRESETS = {
    "exp1": f"""\
[domain]
curve = circle 1

{_EXP1_MEDIUM}
{_EXP1_SOURCE}
[forward]
edge_length = 0.0011
N_dir = 360
N = 360
K = 1024
tol = 1e-7

[recon]
edge_length = 0.02
M = 6
S = 128
""",
    "exp1-desk": f"""\
[domain]
curve = circle 1

{_EXP1_MEDIUM}
{_EXP1_SOURCE}
[forward]
edge_length = 0.0144
N_dir = 180
N = 360
K = 1024
tol = 1e-7

[recon]
edge_length = 0.0322
M = 6
S = 128
M_range = 1:10
""",
    "exp2": """\
[domain]
curve = ellipse 0.69 0.92

[medium]
mua_background = 0
mua_shape = shepp-logan
mus_background = 5
kernel = hg 0.5

[source]
shape = rect -0.25 0.5 -0.15 0.15 2
shape = disc -0.25 0.4330127018922193 0.2 1

[forward]
edge_length = 0.0011
N_dir = 360
N = 360
K = 3000
tol = 1e-7

[recon]
edge_length = 0.02
M = 8
S = 128
""",
    "exp2-desk": """\
[domain]
curve = ellipse 0.69 0.92

[medium]
mua_background = 0
mua_shape = shepp-logan
mus_background = 5
kernel = hg 0.5

[source]
shape = rect -0.25 0.5 -0.15 0.15 2
shape = disc -0.25 0.4330127018922193 0.2 1

[forward]
edge_length = 0.013
N_dir = 180
N = 360
K = 3000
tol = 1e-7

[recon]
edge_length = 0.03
M = 8
S = 128
M_range = 1:10
""",
}


def load_config(path_or_preset):
    if path_or_preset in PRESETS:
        return RunConfig.from_text(PRESETS[path_or_preset])
    if not os.path.exists(path_or_preset):
        raise FileNotFoundError(f"config file not found: {path_or_preset}")
    with open(path_or_preset) as f:
        return RunConfig.from_text(f.read())


def _atomic_write(path, writer):
    """Write via a temp file and rename, so outputs are never truncated."""
    tmp = f"{path}.tmp"
    try:
        writer(tmp)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def cmd_forward(cfg: RunConfig, out_path):
    mesh = cfg.forward_mesh()
    log.info("forward mesh: %d triangles", mesh.n_triangles)
    if cfg.fwd_method == "ballistic":
        meas = ballistic_measurement(cfg.medium, cfg.source, K=cfg.K, N=cfg.N)
    else:
        _, meas = solve_forward(mesh, cfg.medium, cfg.source, N_dir=cfg.N_dir,
                                tol=cfg.fwd_tol, K=cfg.K, N_out=cfg.N)
    _atomic_write(out_path, lambda p: write_measurement(p, meas))
    return meas


def _load_data(cfg, data_path):
    if not os.path.exists(data_path):
        raise FileNotFoundError(f"data file not found: {data_path}")
    meas = read_measurement(data_path)
    if meas.curve != cfg.curve:
        raise ConfigError(f"data domain {meas.curve.describe()} does not match "
                          f"configured domain {cfg.curve.describe()}")
    return meas


def cmd_reconstruct(cfg: RunConfig, data_path, out_prefix, M=None):
    meas = _load_data(cfg, data_path)
    mesh = cfg.recon_mesh()
    params = cfg.params if M is None else ReconParams(
        M=M, S=cfg.params.S, quad_points=cfg.params.quad_points,
        hilbert_grid=cfg.params.hilbert_grid, dw_rule=cfg.params.dw_rule,
        solver_tol=cfg.params.solver_tol)
    report = reconstruct(meas, mesh, cfg.medium, params)
    _write_report_files(out_prefix, mesh, report)
    return report


def _write_report_files(out_prefix, mesh, report):
    csv_path = f"{out_prefix}.csv"
    sum_path = f"{out_prefix}.summary"
    tmp_c, tmp_s = csv_path + ".tmp", sum_path + ".tmp"
    try:
        write_report(tmp_c, tmp_s, mesh, report)
        os.replace(tmp_c, csv_path)
        os.replace(tmp_s, sum_path)
    finally:
        for t in (tmp_c, tmp_s):
            if os.path.exists(t):
                os.remove(t)


def cmd_sweep(cfg: RunConfig, data_path, M_range, out_prefix):
    meas = _load_data(cfg, data_path)
    mesh = cfg.recon_mesh()
    table, selected, reports = sweep_M(meas, mesh, cfg.medium, cfg.params, M_range)
    def write_table(p):
        with open(p, "w") as f:
            f.write("M,E_imag\n")
            for M, e in table:
                f.write(f"{M},{e:.17g}\n")
    _atomic_write(f"{out_prefix}.sweep.csv", write_table)
    _write_report_files(out_prefix, mesh, reports[selected])
    return table, selected


def export_sinogram(data_path, out_path):
    """Projection-coordinate CSV of all outflow samples.

    Rows are ``arg(xi_perp), zeta . xi_perp, intensity`` where xi_perp is the
    CCW rotation of the flight direction; only outgoing samples are written.
    """
    if not os.path.exists(data_path):
        raise FileNotFoundError(f"data file not found: {data_path}")
    meas = read_measurement(data_path)
    th = meas.thetas
    perp = np.stack([-np.sin(th), np.cos(th)], axis=1)       # (N, 2)
    arg_perp = np.mod(th + 0.5 * np.pi, 2.0 * np.pi)
    offs = meas.zeta @ perp.T                                # (K, N)
    out = meas.outgoing_mask()
    def write(p):
        with open(p, "w") as f:
            f.write("arg_perp,offset,intensity\n")
            for k in range(meas.K):
                for n in np.nonzero(out[k])[0]:
                    f.write(f"{arg_perp[n]:.17g},{offs[k,n]:.17g},"
                            f"{meas.values[k,n]:.17g}\n")
    _atomic_write(out_path, write)
    return int(out.sum())


def cmd_gen_mesh(cfg: RunConfig, section, out_path):
    if section == "forward":
        if cfg.fwd_edge is None:
            raise ConfigError("forward section has no edge_length")
        mesh = generate_mesh(cfg.curve, cfg.fwd_edge)
    elif section == "recon":
        if cfg.recon_edge is None:
            raise ConfigError("recon section has no edge_length")
        mesh = generate_mesh(cfg.curve, cfg.recon_edge)
    else:
        raise ConfigError(f"unknown mesh section {section!r}")
    _atomic_write(out_path, lambda p: write_mesh(p, mesh))
    return mesh


def cmd_validate():
    """Built-in oracle suite; returns (rows, all_passed)."""
    from .rayxforms import (divergent_beam, factor_modes, h_samples, hilbert_pv,
                            radon_profile)
    from .aanalytic import ModeStack, cauchy_interior_stack

    rows = []

    def check(name, value, thresh, invert=False):
        ok = (value > thresh) if invert else (value < thresh)
        rows.append((name, value, thresh, ok))

    curve = BoundaryCurve("circle", radius=1.0)
    unit = Medium(curve=curve, mua=1.0, mus=0.0)

    # chord closed form: ray from the origin has length 1 in any direction
    v = divergent_beam(unit, (0.0, 0.0), (math.cos(0.7), math.sin(0.7)))
    check("chord_integral", abs(v - 1.0), 1e-6)
    prof = radon_profile(unit, (1.0, 0.0))
    check("radon_profile", float(np.max(np.abs(prof.values - 2.0 * np.sqrt(
        np.maximum(1.0 - prof.t**2, 0.0))))), 5e-3)

    # PV Hilbert transform vs epsilon-extrapolated brute force
    n = 1000
    t = -1.0 + (np.arange(n) + 0.5) * (2.0 / n)
    fvals = (1.0 - t * t) ** 2
    s0 = 0.3
    def brute(eps):
        acc = 0.0
        for lo, hi in ((-1.0, s0 - eps), (s0 + eps, 1.0)):
            u = np.linspace(lo, hi, 100001)
            g = (1.0 - u * u) ** 2 / (s0 - u)
            acc += trapezoid(g, u)
        return acc / math.pi
    # the symmetric-exclusion integral approaches the PV linearly in eps;
    # one Richardson step removes that term
    ref = 2.0 * brute(5e-3) - brute(1e-2)
    check("hilbert_pv", abs(hilbert_pv(fvals, -1.0, 1.0, s0) - ref), 1e-4)

    # alpha (*) beta = delta for a smooth medium
    gauss = Medium(curve=curve,
                   mua=Phantom.build([("gauss", (0.0, 0.0, 0.3), 1.0)]), mus=0.0)
    sites = np.array([[0.3, -0.2], [0.0, 0.0], [-0.4, 0.1]])
    S, N = 64, 256
    th = 2.0 * np.pi * np.arange(N) / N
    hv = h_samples(gauss, sites, th)
    al = factor_modes(gauss, sites, "-", S, N, h_values=hv)
    be = factor_modes(gauss, sites, "+", S, N, h_values=hv)
    conv = np.array([
        np.sum(al.modes[: s + 1] * be.modes[s::-1], axis=0) for s in range(S // 2)
    ])
    conv[0] -= 1.0
    check("alpha_conv_beta", float(np.abs(conv).max()), 1e-5)
    check("neg_modes_exp_h", al.max_negative_mode(S // 2), 1e-3)

    # the imaginary part of h carries the sign that kills negative modes;
    # flipping it must break the check above
    hv_bad = h_samples(gauss, sites, th, _imag_sign=-1.0)
    al_bad = factor_modes(gauss, sites, "-", S, N, h_values=hv_bad)
    check("neg_modes_sign_mutation", al_bad.max_negative_mode(S // 2),
          1e-2, invert=True)

    # Cauchy formula on a constant stack
    K = 512
    w = 2.0 * np.pi * np.arange(K) / K
    zeta = np.exp(1j * w)
    dzeta = 1j * zeta
    dw = np.full(K, 2.0 * np.pi / K)
    c0 = 0.7 - 0.2j
    Jb = ModeStack(0, np.tile(np.array([c0]), (8, K)))
    vals = cauchy_interior_stack(Jb, zeta, dzeta, dw,
                                 np.array([0.1 + 0.2j, -0.3 - 0.1j]), 0, 4)
    check("cauchy_constant", float(np.abs(vals - c0).max()), 1e-3)

    # conservation in a purely scattering medium
    from .mesh import generate_mesh as gm
    mesh = gm(curve, 0.04)
    med = Medium(curve=curve, mua=0.0, mus=1.0, kernel=HenyeyGreenstein(0.3))
    q = Phantom.build([("disc", (0.0, 0.0, 0.4), 1.0)])
    _, meas = solve_forward(mesh, med, q, N_dir=90, tol=1e-8, K=512)
    outflow = _total_outflow(meas)
    emitted = 2.0 * np.pi * q.integral_hint()
    check("conservation", abs(outflow - emitted) / emitted, 0.02)

    return rows, all(ok for *_, ok in rows)


def _total_outflow(meas):
    """Integral of I (nu . xi) over the boundary x directions."""
    nu = meas.normals()
    xis = np.stack([np.cos(meas.thetas), np.sin(meas.thetas)], axis=1)
    cosines = nu @ xis.T
    arc = np.abs(meas.dzeta) * (2.0 * np.pi / meas.K)
    dth = 2.0 * np.pi / meas.N
    return float(np.sum(meas.values * np.maximum(cosines, 0.0) * arc[:, None]) * dth)


def build_parser():
    p = argparse.ArgumentParser(prog="radsource",
                                description="Radiative source reconstruction "
                                            "from boundary outflow data")
    p.add_argument("--threads", type=int, default=None,
                   help="cap worker threads for the transport sweeps")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        sp = sub.add_parser(name, **kw)
        return sp

    sp = add("forward", help="generate synthetic boundary data")
    sp.add_argument("--config", required=True, help="config path or preset name")
    sp.add_argument("--out", required=True)

    sp = add("reconstruct", help="reconstruct the source from a data file")
    sp.add_argument("--config", required=True)
    sp.add_argument("--data", required=True)
    sp.add_argument("--mesh", default=None, help="reconstruction mesh file")
    sp.add_argument("--M", type=int, default=None)
    sp.add_argument("--out", required=True, help="output prefix (.csv/.summary)")

    sp = add("sweep", help="reconstruct over a range of truncation orders")
    sp.add_argument("--config", required=True)
    sp.add_argument("--data", required=True)
    sp.add_argument("--M-range", default=None, help="a:b inclusive")
    sp.add_argument("--out", required=True)

    sp = add("export-sinogram", help="projection-coordinate CSV of a data file")
    sp.add_argument("--data", required=True)
    sp.add_argument("--out", required=True)

    add("validate", help="run the built-in oracle suite")

    sp = add("gen-mesh", help="write the configured mesh to a file")
    sp.add_argument("--config", required=True)
    sp.add_argument("--section", choices=("forward", "recon"), default="recon")
    sp.add_argument("--out", required=True)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads is not None:
        os.environ["NUMBA_NUM_THREADS"] = str(args.threads)
    try:
        if args.command == "forward":
            cfg = load_config(args.config)
            meas = cmd_forward(cfg, args.out)
            print(f"wrote {args.out}: K={meas.K} N={meas.N}")
        elif args.command == "reconstruct":
            cfg = load_config(args.config)
            if args.mesh:
                cfg.recon_mesh_path = args.mesh
            report = cmd_reconstruct(cfg, args.data, args.out, M=args.M)
            print(f"wrote {args.out}.csv / .summary: M={report.params.M} "
                  f"E_imag={report.e_imag:.6g}")
        elif args.command == "sweep":
            cfg = load_config(args.config)
            if args.M_range:
                lo, hi = args.M_range.split(":")
                rng = range(int(lo), int(hi) + 1)
            elif cfg.M_range:
                rng = range(cfg.M_range[0], cfg.M_range[1] + 1)
            else:
                raise ConfigError("sweep needs --M-range or M_range in config")
            table, selected = cmd_sweep(cfg, args.data, rng, args.out)
            for M, e in table:
                print(f"M={M}  E_imag={e:.8g}")
            print(f"selected M={selected}; wrote {args.out}.csv / .summary")
        elif args.command == "export-sinogram":
            n = export_sinogram(args.data, args.out)
            print(f"wrote {args.out}: {n} outflow samples")
        elif args.command == "validate":
            rows, ok = cmd_validate()
            for name, value, thresh, passed in rows:
                rel = ">" if name.endswith("mutation") else "<"
                print(f"{name:28s} {value:12.4e} {rel} {thresh:8.1e}  "
                      f"{'PASS' if passed else 'FAIL'}")
            if not ok:
                raise NumericsError("validation suite failed")
            print("all checks passed")
        elif args.command == "gen-mesh":
            cfg = load_config(args.config)
            mesh = cmd_gen_mesh(cfg, args.section, args.out)
            print(f"wrote {args.out}: {mesh.n_vertices} vertices, "
                  f"{mesh.n_triangles} triangles")
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (OSError, FileNotFoundError) as e:
        print(f"io error: {e}", file=sys.stderr)
        return 4
    except ValueError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except RadSourceError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
