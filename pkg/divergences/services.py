"""Services behind the management commands.

Commands parse options and print; everything they do with files, models and
divergences goes through the classes here, which validate inputs with the
DRF serializers and translate failures into ``DivergenceError`` subclasses.
"""
import csv
import io
import json
import logging
import math
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from django.conf import settings
from scipy.stats import spearmanr

from .datasets import SampleDataset, read_samples, write_samples
from .engine import (
    PRESETS, ABParams, DivergenceRequest, DivergenceResult, Scope, ab_divergence, divergence_grid,
    mean_divergence_grid, named_divergence, order_inversions,
)
from .exceptions import DataError, StructureError
from .graphs import ChordalGraph, Variable, VariableTable
from .networks import DecomposableModel, chow_liu_structure, fit_parameters, log_likelihood
from .oracle import joint_table, oracle_divergence
from .serializers import (
    DivergenceRequestSerializer, DivergenceResultSerializer, GridRowSerializer, ModelFileSerializer,
    ReportSummarySerializer, StructureFileSerializer,
)
from .simulation import simulate_readout_experiment

logger = logging.getLogger(__name__)

GridRows = List[Tuple[Tuple[int, ...], float]]

LEARNERS = ('chow-liu',)


def _describe_errors(errors) -> str:
    if isinstance(errors, dict):
        return '; '.join(f"{key}: {_describe_errors(value)}" for key, value in errors.items())
    if isinstance(errors, list):
        return ', '.join(_describe_errors(e) for e in errors if e)
    return str(errors)


def validated(serializer_class, data, error=StructureError, what='input'):
    """Bind ``data`` to a serializer, raising ``error`` when it does not validate"""
    serializer = serializer_class(data=data)
    if not serializer.is_valid():
        raise error(f"invalid {what}: {_describe_errors(serializer.errors)}")
    return serializer


def split_labels(value: Optional[str]) -> List[str]:
    """'a, b,c' -> ['a', 'b', 'c']"""
    if not value:
        return []
    return [part.strip() for part in value.replace(';', ',').split(',') if part.strip()]


def resolve_variables(variables: VariableTable, labels: Iterable[str]) -> Tuple[int, ...]:
    """Map variable names (or bare ids) to ids"""
    ids = []
    for label in labels:
        try:
            ids.append(variables.id_of(label))
        except StructureError:
            if label.isdigit() and int(label) in variables:
                ids.append(int(label))
            else:
                raise
    return tuple(ids)


def resolve_threads(requested: Optional[int] = None) -> int:
    """DIVKIT_THREADS wins when set, then the --threads option, then the machine"""
    if settings.DIVKIT_THREADS > 0:
        return settings.DIVKIT_THREADS
    if requested:
        return max(1, requested)
    return os.cpu_count() or 1


def _read_json(path) -> Any:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding='utf-8'))
    except OSError as exc:
        raise StructureError(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise StructureError(f"{path} is not UTF-8 text: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise StructureError(f"{path} is not valid JSON: {exc}") from exc


def _write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding='utf-8')


def format_float(value: float) -> str:
    """17 significant digits, enough to read back the same binary64 value"""
    return f"{value:.17g}"


def dump_json(payload) -> str:
    return json.dumps(payload, indent=2, allow_nan=False) + '\n'


class ModelFileService:
    """Service for reading and writing model and structure files"""

    def load_model(self, path) -> DecomposableModel:
        serializer = validated(ModelFileSerializer, _read_json(path), what=f"model file {path}")
        model = serializer.save()
        logger.debug("loaded model %s: %d variables, %d cliques", path, len(model.variables), len(model.cliques))
        return model

    def save_model(self, model: DecomposableModel, path) -> None:
        _write_text(path, dump_json(ModelFileSerializer(model).data))

    def load_structure(self, path) -> Tuple[VariableTable, nx.Graph]:
        serializer = validated(StructureFileSerializer, _read_json(path), what=f"structure file {path}")
        return serializer.save()

    def save_structure(self, variables: VariableTable, graph: nx.Graph, path) -> None:
        _write_text(path, dump_json(StructureFileSerializer((variables, graph)).data))


class ModelFittingService:
    """Service for fitting decomposable models to sample files"""

    def learn_structure(self, data: SampleDataset, method: str, pseudocount: float = 0.0) -> ChordalGraph:
        """Structure learned from ``data``; ``pseudocount`` smooths the pairwise counts"""
        if method not in LEARNERS:
            raise StructureError(f"unknown structure learner {method!r}; choose from {', '.join(LEARNERS)}")
        structure = chow_liu_structure(data, pseudocount)
        logger.debug("learned %s structure with %d edges", method, structure.graph.number_of_edges())
        return structure

    def fit(self, data: SampleDataset, structure: Optional[ChordalGraph] = None,
            learn: Optional[str] = None, pseudocount: Optional[float] = None) -> DecomposableModel:
        """
        Fit a model to data on a given or learned structure

        Args:
            data: Complete samples
            structure: Chordal structure over the sample variables
            learn: Structure learner used when no structure is given
            pseudocount: Dirichlet pseudocount; settings.DIVKIT_DEFAULT_PSEUDOCOUNT if None

        Returns:
            The fitted DecomposableModel
        """
        if pseudocount is None:
            pseudocount = settings.DIVKIT_DEFAULT_PSEUDOCOUNT
        if structure is None:
            if learn is None:
                raise StructureError("give a structure or a structure learner")
            structure = self.learn_structure(data, learn, pseudocount)
        return fit_parameters(structure, data, pseudocount)

    def fit_files(self, data_path, structure_path=None, learn: Optional[str] = None,
                  pseudocount: Optional[float] = None) -> Tuple[DecomposableModel, SampleDataset]:
        structure = None
        variables = None
        if structure_path is not None:
            variables, graph = ModelFileService().load_structure(structure_path)
            structure = ChordalGraph.from_graph(graph)
        data = read_samples(data_path, variables)
        return self.fit(data, structure, learn, pseudocount), data

    def summary(self, model: DecomposableModel, data: SampleDataset) -> Dict[str, Any]:
        return {
            'variables': len(model.variables),
            'cliques': len(model.cliques),
            'treewidth': model.graph.treewidth,
            'log_likelihood': log_likelihood(model, data),
        }


class DivergenceService:
    """Service for divergences, grids and oracle values between model files"""

    def __init__(self, heuristic: str = 'min-fill'):
        self.heuristic = heuristic

    def build_request(self, variables: VariableTable, options: Dict[str, Any]) -> Tuple[DivergenceRequest, Optional[str]]:
        """
        Validate command options into a request

        Args:
            variables: Variable table the scope names refer to
            options: alpha, beta, preset, marginal, target and given (comma lists)

        Returns:
            The request and the preset name, if one was chosen
        """
        data = {
            'alpha': options.get('alpha'),
            'beta': options.get('beta'),
            'preset': options.get('preset'),
            'marginal': split_labels(options.get('marginal')),
            'target': split_labels(options.get('target')),
            'given': split_labels(options.get('given')),
        }
        attrs = validated(DivergenceRequestSerializer, data, what='divergence options').validated_data

        preset = attrs['preset']
        params = ABParams.preset(preset) if preset else ABParams(attrs['alpha'], attrs['beta'])
        if attrs['marginal']:
            scope = Scope.marginal(resolve_variables(variables, attrs['marginal']))
        elif attrs['target']:
            scope = Scope.conditional(
                resolve_variables(variables, attrs['target']),
                resolve_variables(variables, attrs['given']),
            )
        else:
            scope = Scope.joint()
        return DivergenceRequest(params, scope), preset

    def divergence(self, P: DecomposableModel, Q: DecomposableModel, options: Dict[str, Any]) -> DivergenceResult:
        request, preset = self.build_request(P.variables, options)
        if preset:
            return named_divergence(P, Q, preset, request.scope, self.heuristic)
        return ab_divergence(P, Q, request, self.heuristic)

    def oracle(self, P: DecomposableModel, Q: DecomposableModel, options: Dict[str, Any],
               max_cells: Optional[int] = None) -> float:
        """Brute-force value of the same request, refused beyond ``max_cells`` joint cells"""
        if max_cells is None:
            max_cells = settings.DIVKIT_ORACLE_MAX_CELLS
        if not P.variables.same_domain(Q.variables):
            raise StructureError("the two models are over different variable tables")
        request, preset = self.build_request(P.variables, options)
        value = oracle_divergence(joint_table(P, max_cells), joint_table(Q, max_cells), request)
        if preset == 'hellinger':
            value = math.sqrt(max(0.0, value / 4.0))
        return value

    def render_result(self, result: DivergenceResult, variables: VariableTable, fmt: str = 'json') -> str:
        labels = {v: variables.label(v) for v in variables.ids}
        payload = DivergenceResultSerializer(result, context={'labels': labels}).data
        if fmt == 'json':
            return dump_json(payload)
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(['value', 'alpha', 'beta', 'branch', 'scope'])
        writer.writerow([format_float(result.value), format_float(result.params.alpha),
                         format_float(result.params.beta), result.params.branch,
                         json.dumps(payload['scope'], sort_keys=True)])
        return buffer.getvalue()

    def read_tuples(self, path, variables: VariableTable) -> List[Tuple[int, ...]]:
        """One tuple of variable names per line, comma or semicolon separated; '#' starts a comment"""
        path = Path(path)
        try:
            lines = path.read_text(encoding='utf-8').splitlines()
        except OSError as exc:
            raise StructureError(f"cannot read {path}: {exc}") from exc
        except UnicodeDecodeError as exc:
            raise StructureError(f"{path} is not UTF-8 text: {exc}") from exc
        tuples = []
        for line in lines:
            line = line.split('#', 1)[0]
            labels = split_labels(line)
            if labels:
                tuples.append(resolve_variables(variables, labels))
        return tuples

    def grid(self, pairs: Sequence[Tuple[DecomposableModel, DecomposableModel]], order: int, preset: str,
             tuples=None, threads: Optional[int] = None) -> GridRows:
        threads = resolve_threads(threads)
        for P, Q in pairs:
            if not P.variables.same_domain(Q.variables) or not P.variables.same_domain(pairs[0][0].variables):
                raise StructureError("grid models are over different variable tables")
        logger.info("order-%d %s grid over %d model pair(s) with %d thread(s)", order, preset, len(pairs), threads)
        if len(pairs) == 1:
            P, Q = pairs[0]
            return divergence_grid(P, Q, order, preset, tuples, threads)
        return mean_divergence_grid(pairs, order, preset, tuples, threads)

    def render_grid(self, rows: GridRows, variables: VariableTable, fmt: str = 'csv') -> str:
        named = [([variables.label(v) for v in t], value) for t, value in rows]
        if fmt == 'json':
            return dump_json(GridRowSerializer([{'tuple': t, 'value': v} for t, v in named], many=True).data)
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(['tuple', 'value'])
        for t, value in named:
            writer.writerow([';'.join(t), format_float(value)])
        return buffer.getvalue()


def _common_domain(ideal: SampleDataset, observed: SampleDataset) -> Tuple[SampleDataset, SampleDataset]:
    """Both datasets over one variable table: ideal's column order, the larger inferred cardinality"""
    labels = [ideal.variables.label(v) for v in ideal.variables.ids]
    other = [observed.variables.label(v) for v in observed.variables.ids]
    if sorted(labels) != sorted(other):
        raise DataError(f"ideal columns {labels} and observed columns {other} differ")
    order = [other.index(label) for label in labels]
    rows = observed.rows[:, order]
    cards = [max(ideal.variables.cardinality(v), observed.variables.cardinality(observed.variables.ids[j]))
             for v, j in zip(ideal.variables.ids, order)]
    variables = VariableTable(tuple(
        Variable(v, card, ideal.variables.variables[i].name)
        for i, (v, card) in enumerate(zip(ideal.variables.ids, cards))
    ))
    return SampleDataset(variables, ideal.rows), SampleDataset(variables, rows)


class ErrorAnalysisService:
    """
    Service comparing an ideal and an observed sample file

    Fits one model per file, writes a marginal divergence grid per order and
    a JSON summary ranking the tuples that drifted most.
    """

    def __init__(self, threads: Optional[int] = None):
        self.threads = resolve_threads(threads)
        self.fitting = ModelFittingService()
        self.divergences = DivergenceService()

    def _structures(self, ideal: SampleDataset, observed: SampleDataset, structure_path, learn, separate,
                    pseudocount: float = 0.0):
        if structure_path is not None:
            _, graph = ModelFileService().load_structure(structure_path)
            structure = ChordalGraph.from_graph(graph)
            return structure, structure, 'file'
        if learn is None:
            raise StructureError("give --structure or --learn")
        if separate:
            return (self.fitting.learn_structure(ideal, learn, pseudocount),
                    self.fitting.learn_structure(observed, learn, pseudocount),
                    f"separate {learn}")
        shared = self.fitting.learn_structure(ideal.concatenate(observed), learn, pseudocount)
        return shared, shared, f"shared {learn}"

    def _truth_correlation(self, truth_path, variables: VariableTable, order_one: GridRows) -> Optional[float]:
        truth = _read_json(truth_path)
        noise = truth.get('noise') if isinstance(truth, dict) else None
        if not isinstance(noise, dict):
            raise DataError(f"{truth_path} has no 'noise' object")
        try:
            injected = [float(noise[variables.label(t[0])]) for t, _ in order_one]
        except KeyError as exc:
            raise DataError(f"{truth_path} has no noise level for variable {exc}") from exc
        correlation = spearmanr([value for _, value in order_one], injected)[0]
        return None if np.isnan(correlation) else float(correlation)

    def report(self, ideal_path, observed_path, out_dir, structure_path=None, learn: Optional[str] = None,
               pseudocount: Optional[float] = None, orders: Sequence[int] = (1, 2), preset: str = 'hellinger',
               truth_path=None, separate_structures: bool = False) -> Dict[str, Any]:
        """
        Fit both sample files and write grids and a summary into ``out_dir``

        Returns:
            The summary payload, as written to summary.json
        """
        if pseudocount is None:
            pseudocount = settings.DIVKIT_DEFAULT_PSEUDOCOUNT
        if structure_path is not None:
            variables, _ = ModelFileService().load_structure(structure_path)
            ideal = read_samples(ideal_path, variables)
            observed = read_samples(observed_path, variables)
        else:
            ideal, observed = _common_domain(read_samples(ideal_path), read_samples(observed_path))
        if preset not in PRESETS:
            raise StructureError(f"unknown divergence preset {preset!r}")

        p_structure, q_structure, how = self._structures(ideal, observed, structure_path, learn,
                                                         separate_structures, pseudocount)
        P = self.fitting.fit(ideal, p_structure, pseudocount=pseudocount)
        Q = self.fitting.fit(observed, q_structure, pseudocount=pseudocount)
        variables = P.variables

        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        top_k = settings.DIVKIT_REPORT_TOP_K
        grids: Dict[int, GridRows] = {}
        summaries = []
        for order in sorted(set(orders)):
            rows = divergence_grid(P, Q, order, preset, threads=self.threads)
            grids[order] = rows
            grid_file = f"grid_order{order}.csv"
            _write_text(out_dir / grid_file, self.divergences.render_grid(rows, variables, 'csv'))
            ranked = sorted(rows, key=lambda row: (-row[1], row[0]))[:top_k]
            values = np.array([value for _, value in rows])
            summaries.append({
                'order': order,
                'tuples': len(rows),
                'mean': float(values.mean()),
                'max': float(values.max()),
                'top': [
                    {'rank': rank, 'tuple': [variables.label(v) for v in t], 'value': value}
                    for rank, (t, value) in enumerate(ranked, start=1)
                ],
                'grid_file': grid_file,
            })
            logger.info("order %d: %d tuples, max %s %.6g", order, len(rows), preset, values.max())

        summary: Dict[str, Any] = {
            'preset': preset,
            'pseudocount': pseudocount,
            'structure': how,
            'treewidth': {'ideal': P.graph.treewidth, 'observed': Q.graph.treewidth},
            'orders': summaries,
        }
        if 2 in grids:
            summary['inversions'] = {
                str(order): len(order_inversions(rows, grids[2])) for order, rows in grids.items() if order >= 3
            }
        if truth_path is not None:
            order_one = grids.get(1) or divergence_grid(P, Q, 1, preset, threads=self.threads)
            summary['noise_spearman'] = self._truth_correlation(truth_path, variables, order_one)

        payload = ReportSummarySerializer(summary).data
        _write_text(out_dir / 'summary.json', dump_json(payload))
        return payload


class SimulationService:
    """Service writing a synthetic ideal/observed readout experiment to disk"""

    def simulate(self, out_dir, variables: int = 10, rows: int = 100_000, seed: int = 0,
                 noise_levels: Optional[Sequence[float]] = None) -> Dict[str, Path]:
        experiment = simulate_readout_experiment(variables, rows, seed, noise_levels)
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = {name: out_dir / f"{name}.csv" for name in ('ideal', 'observed')}
        write_samples(experiment.ideal, paths['ideal'])
        write_samples(experiment.observed, paths['observed'])
        labels = [experiment.model.variables.label(v) for v in experiment.model.variables.ids]
        truth = {
            'seed': seed,
            'rows': rows,
            'noise': {label: float(eps) for label, eps in zip(labels, experiment.noise)},
            'model': ModelFileSerializer(experiment.model).data,
        }
        paths['truth'] = out_dir / 'truth.json'
        _write_text(paths['truth'], dump_json(truth))
        return paths
