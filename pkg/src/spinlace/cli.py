"""Experiment command line: wires a config file to the library.

Tasks
-----
verify     eigenoperator residuals, cell delta matrix, conserved charges
search     constrained eigenoperator search around one interior node
evolve     thermal correlators for a list of observables
respond    kicked evolution against linear response
spectrum   finite-time transform and peak report of a correlator
full-fig3  evolve + spectrum chain for the three standard observables

The config is a JSON document (schema below); every run writes the produced
files plus ``manifest.json`` echoing the resolved config and the SHA-256 of
each output.  File contents are deterministic for a fixed config and seed;
the wall-clock timestamp goes to ``manifest_time.txt`` so reruns stay
byte-identical everywhere else.

Config schema (version 1)::

    {
      "schema_version": 1,
      "seed": 0,
      "model": {
        "plaquettes": 4,
        "node_field": 3.14159,          # or "node_fields": [..R+1 values..]
        "double_field": 3.14159,        # or "double_fields": [..R values..]
        "couplings": [1.0, 2.0, 0.5],   # or list of R triples
        "disorder_seed": 7,             # optional: random rung fields/couplings
        "defects": [
          {"target": ["node_field", 2], "replacement": "0.5 0 ...pauli text..."},
          {"target": 4, "replacement": "..."}          # single-site target
        ]
      },
      "task": "verify",
      "params": { ...task specific, see README... }
    }

Observables are selected by lattice role, never by raw site index:

    {"role": "node_sigma", "node": 3, "axis": "x"}
    {"role": "rung_spin",  "rung": 3, "axis": "x"}
    {"role": "symmetry",   "node": 3}
    {"role": "charge",     "node": 3}
    {"role": "pauli",      "text": "1 0 IXI...\\n..."}   # escape hatch
"""
from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import lattice, spectral, symmetries
from .dynamics import ThermalSpec, TimeSeries, correlation, kicked_evolution
from .paulis import CapacityError, PauliSum, from_text, to_text
from .spectral import default_omega_grid, finite_time_ft, linear_response, peak_report

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CHECK_FAILED = 3
EXIT_CAPACITY = 4


class ConfigError(ValueError):
    """Invalid experiment config; the message names the offending field."""


def _require(mapping, key, kind, where):
    if key not in mapping:
        raise ConfigError(f"{where}: missing required field {key!r}")
    value = mapping[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"{where}.{key}: expected a number, got {value!r}")
        return float(value)
    if not isinstance(value, kind):
        raise ConfigError(f"{where}.{key}: expected {kind.__name__}, got {value!r}")
    return value


def _field_array(model, scalar_key, array_key, count, default, where):
    if array_key in model:
        values = model[array_key]
        if not isinstance(values, list) or len(values) != count:
            raise ConfigError(f"{where}.{array_key}: expected a list of {count} numbers")
        return tuple(float(v) for v in values)
    scalar = model.get(scalar_key, default)
    if not isinstance(scalar, (int, float)) or isinstance(scalar, bool):
        raise ConfigError(f"{where}.{scalar_key}: expected a number, got {scalar!r}")
    return (float(scalar),) * count


def resolve_model(model: dict) -> lattice.SpinLaceSpec:
    where = "model"
    if not isinstance(model, dict):
        raise ConfigError("model: expected an object")
    r = _require(model, "plaquettes", int, where)
    if r < 2:
        raise ConfigError(f"{where}.plaquettes: need at least 2, got {r}")

    if "disorder_seed" in model:
        spec = lattice.SpinLaceSpec.disordered(
            r,
            node_field=float(model.get("node_field", np.pi)),
            seed=int(model["disorder_seed"]),
        )
    else:
        node_fields = _field_array(model, "node_field", "node_fields", r + 1, np.pi, where)
        double_fields = _field_array(
            model, "double_field", "double_fields", r, node_fields[0], where
        )
        couplings = model.get("couplings", [1.0, 2.0, 0.5])
        if not isinstance(couplings, list) or not couplings:
            raise ConfigError(f"{where}.couplings: expected a triple or list of triples")
        if isinstance(couplings[0], (int, float)):
            if len(couplings) != 3:
                raise ConfigError(f"{where}.couplings: a flat coupling needs 3 entries")
            triples = (tuple(float(c) for c in couplings),) * r
        else:
            if len(couplings) != r or any(len(t) != 3 for t in couplings):
                raise ConfigError(f"{where}.couplings: expected {r} triples")
            triples = tuple(tuple(float(c) for c in t) for t in couplings)
        spec = lattice.SpinLaceSpec(
            plaquettes=r,
            node_fields=node_fields,
            double_fields=double_fields,
            couplings=triples,
        )

    defects = []
    for k, entry in enumerate(model.get("defects", [])):
        where_d = f"{where}.defects[{k}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"{where_d}: expected an object")
        target = entry.get("target")
        if isinstance(target, list) and len(target) == 2:
            target = (str(target[0]), int(target[1]))
        elif not isinstance(target, int):
            raise ConfigError(f"{where_d}.target: expected [kind, index] or a site")
        text = _require(entry, "replacement", str, where_d)
        try:
            replacement = from_text(text, nsites=spec.nsites)
        except ValueError as exc:
            raise ConfigError(f"{where_d}.replacement: {exc}") from exc
        defects.append(lattice.Defect(target=target, replacement=replacement))
    if defects:
        spec = lattice.SpinLaceSpec(
            plaquettes=spec.plaquettes,
            node_fields=spec.node_fields,
            double_fields=spec.double_fields,
            couplings=spec.couplings,
            defects=tuple(defects),
        )
    return spec


def resolve_observable(selector, site_map: lattice.SiteMap, registry, where: str) -> tuple[str, PauliSum]:
    """Selector -> (slug, operator)."""
    if not isinstance(selector, dict) or "role" not in selector:
        raise ConfigError(f"{where}: expected an object with a 'role' field")
    role = selector["role"]
    try:
        if role == "node_sigma":
            node = int(selector["node"])
            axis = str(selector.get("axis", "x"))
            op = PauliSum.single(site_map.node(node), axis, site_map.nsites)
            return f"node{node}_sigma_{axis}", op
        if role == "rung_spin":
            rung = int(selector["rung"])
            axis = str(selector.get("axis", "x"))
            return f"rung{rung}_total_{axis}", lattice.total_spin(rung, axis, site_map)
        if role == "symmetry":
            node = int(selector["node"])
            return f"symmetry_node{node}", lattice.dynamical_symmetry_op(node, site_map)
        if role == "charge":
            node = int(selector["node"])
            return f"charge_node{node}", lattice.symmetry_charge(node, site_map)
        if role == "pauli":
            text = _require(selector, "text", str, where)
            return "custom_pauli", from_text(text, nsites=site_map.nsites)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}.role: unknown role {role!r}")


def config_hash(resolved: dict) -> str:
    canonical = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


class _Runner:
    def __init__(self, config: dict, out_dir: Path, seed: int):
        self.config = config
        self.out = out_dir
        self.seed = seed
        self.spec = resolve_model(config.get("model", {}))
        self.h, self.registry, self.site_map = lattice.build(self.spec)
        self.params = config.get("params", {})
        resolved = {
            "schema_version": SCHEMA_VERSION,
            "task": config["task"],
            "seed": seed,
            "params": self.params,
            "model": {
                "plaquettes": self.spec.plaquettes,
                "node_fields": list(self.spec.node_fields),
                "double_fields": list(self.spec.double_fields),
                "couplings": [list(t) for t in self.spec.couplings],
                "defects": [
                    {
                        "target": list(d.target) if isinstance(d.target, tuple) else d.target,
                        "replacement": to_text(d.replacement),
                    }
                    for d in self.spec.defects
                ],
            },
        }
        self.resolved = resolved
        self.hash = config_hash(resolved)
        self.outputs: dict[str, str] = {}

    # -- plumbing ---------------------------------------------------------

    def write(self, name: str, content: str) -> None:
        path = self.out / name
        path.write_text(content)
        self.outputs[name] = hashlib.sha256(content.encode()).hexdigest()

    def write_series(self, name: str, series: TimeSeries) -> None:
        series.meta["config_hash"] = self.hash
        self.write(name, series.to_csv())

    def finish(self) -> None:
        manifest = {
            "schema_version": SCHEMA_VERSION,
            "config_hash": self.hash,
            "resolved_config": self.resolved,
            "outputs": self.outputs,
        }
        (self.out / "manifest.json").write_text(
            json.dumps(manifest, sort_keys=True, indent=2) + "\n"
        )
        (self.out / "manifest_time.txt").write_text(
            datetime.datetime.now(datetime.timezone.utc).isoformat() + "\n"
        )

    def thermal(self) -> ThermalSpec:
        return ThermalSpec(beta=float(self.params.get("beta", 0.0)))

    def time_grid(self) -> np.ndarray:
        t_max = float(self.params.get("t_max", 20.0))
        dt = float(self.params.get("dt", 0.05))
        if dt <= 0 or t_max <= 0:
            raise ConfigError("params: t_max and dt must be positive")
        return np.arange(0.0, t_max + dt / 2, dt)

    # -- tasks --------------------------------------------------------------

    def run(self) -> int:
        task = self.config["task"]
        handler = {
            "verify": self.task_verify,
            "search": self.task_search,
            "evolve": self.task_evolve,
            "respond": self.task_respond,
            "spectrum": self.task_spectrum,
            "full-fig3": self.task_full_fig3,
        }.get(task)
        if handler is None:
            raise ConfigError(f"task: unknown task {task!r}")
        status = handler()
        self.finish()
        return status

    def task_verify(self) -> int:
        tol = float(self.params.get("tolerance", 1e-12))
        nodes = self.site_map.interior_nodes()
        syms = [lattice.dynamical_symmetry_op(p, self.site_map) for p in nodes]

        lines = ["node,omega,predicted_abs_omega,residual"]
        worst = 0.0
        for p, a in zip(nodes, syms):
            res = symmetries.verify_eigenoperator(self.h, a)
            predicted = 2.0 * self.spec.node_fields[p - 1]
            worst = max(worst, res.residual, abs(abs(res.omega) - predicted))
            lines.append(f"{p},{res.omega:.17g},{predicted:.17g},{res.residual:.17g}")
        self.write("eigenoperator_residuals.csv", self._with_header("\n".join(lines) + "\n"))

        delta = symmetries.check_delta_structure(self.registry, syms, nodes)
        rows = ["# rows/cols ordered by interior node"]
        rows.append(",".join(str(p) for p in nodes))
        for i in range(len(nodes)):
            rows.append(",".join(f"{delta[i, j]:.17g}" for j in range(len(nodes))))
        self.write("delta_matrix.csv", self._with_header("\n".join(rows) + "\n"))
        worst = max(worst, float(delta.max()))

        lines = ["node,residual"]
        for p in nodes:
            charge = lattice.symmetry_charge(p, self.site_map)
            r = symmetries.verify_conserved(self.h, charge)
            worst = max(worst, r)
            lines.append(f"{p},{r:.17g}")
        self.write("conserved_residuals.csv", self._with_header("\n".join(lines) + "\n"))

        print(f"verify: worst residual {worst:.3e} against tolerance {tol:g}")
        return EXIT_OK if worst < tol else EXIT_CHECK_FAILED

    def task_search(self) -> int:
        node = int(self.params.get("node", self.site_map.interior_nodes()[0]))
        tol = float(self.params.get("tolerance", 1e-9))
        if node not in self.site_map.interior_nodes():
            raise ConfigError(f"params.node: {node} is not an interior node")
        h_local = lattice.local_hamiltonian(node, self.registry, self.site_map)
        a = lattice.dynamical_symmetry_op(node, self.site_map)
        generators = [
            lattice.total_spin(r, axis, self.site_map)
            for r in (node - 1, node)
            for axis in "xyz"
        ]
        results = symmetries.eigenoperator_search(
            h_local,
            a.support(),
            symmetries.CommutantConstraint(generators),
            tol=tol,
        )
        lines = ["index,omega,residual,support,terms"]
        for k, res in enumerate(results):
            support = " ".join(str(s) for s in res.operator.support())
            lines.append(
                f"{k},{res.omega:.17g},{res.residual:.17g},{support},{res.operator.n_terms()}"
            )
            self.write(f"eigenoperator_{k:02d}.txt", self._with_header(to_text(res.operator)))
        self.write("eigenpairs.csv", self._with_header("\n".join(lines) + "\n"))
        print(f"search: {len(results)} verified eigenpairs around node {node}")
        return EXIT_OK

    def task_evolve(self) -> int:
        selectors = self.params.get("observables")
        if not isinstance(selectors, list) or not selectors:
            raise ConfigError("params.observables: expected a non-empty list")
        probe_slug, probe = resolve_observable(
            self.params.get("probe", {"role": "node_sigma", "node": 2, "axis": "x"}),
            self.site_map,
            self.registry,
            "params.probe",
        )
        times = self.time_grid()
        mode = self.params.get("mode", "exact_trace")
        for k, selector in enumerate(selectors):
            slug, op = resolve_observable(
                selector, self.site_map, self.registry, f"params.observables[{k}]"
            )
            series = correlation(
                self.h,
                op,
                probe,
                times,
                self.thermal(),
                mode=mode,
                n_samples=int(self.params.get("n_samples", 50)),
                seed=self.seed,
                label=f"{slug}(t) * {probe_slug}",
            )
            self.write_series(f"series_{slug}.csv", series)
        print(f"evolve: wrote {len(selectors)} correlators against {probe_slug}")
        return EXIT_OK

    def task_respond(self) -> int:
        slug, op = resolve_observable(
            self.params.get("observable", {"role": "charge", "node": 2}),
            self.site_map,
            self.registry,
            "params.observable",
        )
        kick_slug, kick = resolve_observable(
            self.params.get("kick", {"role": "node_sigma", "node": 2, "axis": "x"}),
            self.site_map,
            self.registry,
            "params.kick",
        )
        times = self.time_grid()
        thermal = self.thermal()
        lr = linear_response(
            self.h, op, kick, times, thermal, label=f"linear response {slug} to {kick_slug}"
        )
        self.write_series("linear_response.csv", lr)
        eps_list = self.params.get("eps", [1e-2, 1e-3])
        if not isinstance(eps_list, list):
            eps_list = [float(eps_list)]
        for eps in eps_list:
            kicked = kicked_evolution(
                self.h,
                kick,
                float(eps),
                op,
                times,
                thermal,
                label=f"kick response {slug} to {kick_slug}, eps={eps:g}",
            )
            self.write_series(f"kicked_eps{eps:g}.csv", kicked)
        print(f"respond: linear response plus {len(eps_list)} kicked series")
        return EXIT_OK

    def task_spectrum(self) -> int:
        series_file = self.params.get("series")
        if series_file:
            text = Path(series_file).read_text()
            series = TimeSeries.from_csv(text)
        else:
            slug, op = resolve_observable(
                self.params.get("observable", {"role": "node_sigma", "node": 2, "axis": "x"}),
                self.site_map,
                self.registry,
                "params.observable",
            )
            probe_slug, probe = resolve_observable(
                self.params.get("probe", {"role": "node_sigma", "node": 2, "axis": "x"}),
                self.site_map,
                self.registry,
                "params.probe",
            )
            series = correlation(
                self.h,
                op,
                probe,
                self.time_grid(),
                self.thermal(),
                label=f"{slug}(t) * {probe_slug}",
            )
        predicted = float(
            self.params.get("predicted_omega", 2.0 * self.spec.node_fields[0])
        )
        window = float(series.times[-1] - series.times[0])
        grid = default_omega_grid(window, float(self.params.get("omega_max", 2 * predicted)))
        spec = finite_time_ft(series, grid)
        spec.meta["config_hash"] = self.hash
        self.write("spectrum.csv", spec.to_csv())
        report = peak_report(spec, predicted)
        self.write("peaks.txt", f"# config_hash={self.hash}\n" + report.to_text())
        print(f"spectrum: {len(report.peaks)} flagged peaks, matched={report.matched}")
        return EXIT_OK

    def task_full_fig3(self) -> int:
        """Persistent-oscillation demonstration: three correlators against a
        node sigma^x probe, spectra and peak reports for the first and last."""
        node = int(self.params.get("node", (self.site_map.plaquettes + 2) // 2))
        if node not in self.site_map.interior_nodes():
            raise ConfigError(f"params.node: {node} is not an interior node")
        times = self.time_grid()
        thermal = self.thermal()
        probe = PauliSum.single(self.site_map.node(node), "x", self.site_map.nsites)
        observables = [
            (f"node{node}_sigma_x", PauliSum.single(self.site_map.node(node), "x", self.site_map.nsites)),
            (f"symmetry_node{node}", lattice.dynamical_symmetry_op(node, self.site_map)),
            (f"rung{node}_total_x", lattice.total_spin(node, "x", self.site_map)),
        ]
        all_series = {}
        for slug, op in observables:
            series = correlation(
                self.h, op, probe, times, thermal,
                label=f"{slug}(t) * node{node}_sigma_x",
            )
            all_series[slug] = series
            self.write_series(f"series_{slug}.csv", series)

        predicted = 2.0 * self.spec.node_fields[node - 1]
        window = float(times[-1] - times[0])
        grid = default_omega_grid(window, 2 * predicted)
        for slug in (observables[0][0], observables[2][0]):
            spec = finite_time_ft(all_series[slug], grid)
            spec.meta["config_hash"] = self.hash
            self.write(f"spectrum_{slug}.csv", spec.to_csv())
            report = peak_report(spec, predicted)
            self.write(f"peaks_{slug}.txt", f"# config_hash={self.hash}\n" + report.to_text())
            print(f"full-fig3: {slug} matched={report.matched}")
        return EXIT_OK

    def _with_header(self, body: str) -> str:
        return f"# config_hash={self.hash}\n{body}"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="spinlace",
        description="Spin-lace dynamical-symmetry experiments from a JSON config.",
    )
    parser.add_argument("--config", required=True, help="path to the JSON config file")
    parser.add_argument("--out", default="out", help="output directory (created)")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--task", default=None, help="override the config task")
    parser.add_argument("--threads", type=int, default=None, help="cap BLAS worker threads")
    args = parser.parse_args(argv)

    try:
        raw = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        config = json.loads(raw)
    except json.JSONDecodeError as exc:
        print(f"error: config line {exc.lineno}: {exc.msg}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        version = config.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ConfigError(
                f"schema_version: expected {SCHEMA_VERSION}, got {version!r}"
            )
        if args.task:
            config["task"] = args.task
        if "task" not in config:
            raise ConfigError("task: missing")
        seed = args.seed if args.seed is not None else int(config.get("seed", 0))

        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)

        if args.threads is not None:
            import threadpoolctl

            threadpoolctl.threadpool_limits(limits=args.threads)

        runner = _Runner(config, out_dir, seed)
        return runner.run()
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityError as exc:
        print(f"error: capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY


if __name__ == "__main__":
    sys.exit(main())
