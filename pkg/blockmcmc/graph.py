"""Hierarchical models as directed acyclic graphs.

A model is declared as a JSON document::

    {"nodes": [
        {"name": "mu", "kind": "parameter", "family": "normal",
         "params": {"mean": 0, "sd": 10}},
        {"name": "y", "kind": "data", "family": "normal",
         "params": {"mean": "mu", "sd": 1}, "value": 1.3}
    ]}

Parameter values are literals or references to other nodes, either the whole
node (``"g"``) or one element of a vector node (``"g[3]"``). Deterministic
nodes (``"op"``: affine, exp, expit, expcov) take their arguments from
``inputs`` and ``params`` the same way.

Every scalar component of a stochastic parameter node is a theta slot; vector
parameters occupy consecutive slots named ``node[k]``.
"""
import copy
import hashlib
import json
import logging
import math
import re
from dataclasses import dataclass

import networkx as nx
import numpy as np
from scipy.special import expit

from blockmcmc.distributions import FAMILIES, NEG_INF, mvnorm_logpdf_chol
from blockmcmc.exceptions import (
    ArityMismatch,
    CycleError,
    InvalidModel,
    InvalidParameter,
    LengthMismatch,
    ModelError,
    UnknownReference,
)
from blockmcmc.linalg import regularized_cholesky

logger = logging.getLogger(__name__)

NAME = re.compile(r'^[A-Za-z_][A-Za-z0-9_.]*$')
REFERENCE = re.compile(r'^(?P<name>[A-Za-z_][A-Za-z0-9_.]*)(?:\[(?P<element>\d+)\])?$')
KINDS = ('parameter', 'data', 'deterministic')
OPS = ('affine', 'exp', 'expit', 'expcov')


@dataclass(frozen=True)
class NodeId:
    name: str
    index: int

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Reference:
    name: str
    element: int = None

    @classmethod
    def parse(cls, text):
        match = REFERENCE.match(text)
        if match is None:
            raise InvalidModel(f'Malformed reference: {text!r}')
        element = match.group('element')
        return cls(match.group('name'), None if element is None else int(element))

    def __str__(self):
        return self.name if self.element is None else f'{self.name}[{self.element}]'


def _parse_value(value):
    """Turn strings into references, recursively through lists."""
    if isinstance(value, str):
        return Reference.parse(value)
    if isinstance(value, (list, tuple)):
        return [_parse_value(item) for item in value]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidModel(f'Unsupported parameter value: {value!r}')
    return float(value)


def _references(value):
    if isinstance(value, Reference):
        yield value
    elif isinstance(value, list):
        for item in value:
            yield from _references(item)


def _contains_reference(value):
    return next(_references(value), None) is not None


@dataclass(frozen=True)
class UpdateScope:
    """What a sampler touches when it moves a set of theta slots.

    ``nodes`` lists the owning stochastic nodes first, then every dependent
    once, each group in topological order. ``deterministic`` lists the
    intermediates that go stale when the slots move. ``key`` indexes theta:
    an int for one slot, a slice for consecutive slots, else ``index``.
    ``factor_nodes`` are the MVN nodes whose cached covariance factor can
    change with the move.
    """
    slots: tuple
    index: np.ndarray
    nodes: tuple
    deterministic: tuple
    owner_count: int
    key: object = None
    factor_nodes: tuple = ()


class Node:
    kind = None

    def __init__(self, graph, node_id, spec):
        self.graph = graph
        self.id = node_id
        self.spec = spec

    @property
    def name(self):
        return self.id.name

    def __repr__(self):
        return f'<{type(self).__name__} {self.name}>'


class StochasticNode(Node):
    def __init__(self, graph, node_id, spec, family, params):
        super().__init__(graph, node_id, spec)
        self.family = family
        self.params = params
        self.logprob = None
        self.evaluations = 0
        self._getters = ()
        self._chol_source = None
        self._chol = None
        self.dynamic_factor = False

    def bind(self):
        if self.family.multivariate:
            self._getters = (
                self.graph.compile_vector(self.params['mean']),
                self.graph.compile(self.params['cov']),
            )
            self.dynamic_factor = isinstance(self.params['cov'], Reference)
        else:
            self._getters = tuple(self.graph.compile(self.params[p]) for p in self.family.params)

    def resolved_params(self):
        return {p: getter() for p, getter in zip(self.family.params, self._getters)}

    def calculate(self):
        """Evaluate the log density of the current value and cache it."""
        self.evaluations += 1
        if self.family.multivariate:
            logprob = self._mvnorm_logprob()
        else:
            logprob = self.family.logpdf(self.value, *[getter() for getter in self._getters])
        logprob = float(logprob)
        if math.isnan(logprob):
            logprob = NEG_INF
        self.logprob = logprob
        return logprob

    def current_logprob(self):
        if self.logprob is None:
            return self.calculate()
        return self.logprob

    def _mvnorm_logprob(self):
        mean_getter, cov_getter = self._getters
        cov = cov_getter()
        # The factor is reused until the covariance object itself changes.
        if cov is not self._chol_source:
            self._chol, regularized = regularized_cholesky(cov)
            self._chol_source = cov
            if regularized:
                logger.debug('Covariance of %s needed diagonal loading', self.name)
        if self._chol is None:
            return NEG_INF
        return mvnorm_logpdf_chol(self.value, mean_getter(), self._chol)

    def save(self):
        return self.logprob, self._chol_source, self._chol

    def restore(self, state):
        self.logprob, self._chol_source, self._chol = state

    def save_factor(self):
        return self._chol_source, self._chol

    def restore_factor(self, state):
        self._chol_source, self._chol = state


class ParameterNode(StochasticNode):
    kind = 'parameter'

    def __init__(self, graph, node_id, spec, family, params, size):
        super().__init__(graph, node_id, spec, family, params)
        self.size = size
        self.offset = None

    @property
    def value(self):
        if self.family.multivariate:
            return self.graph.theta[self.offset:self.offset + self.size]
        return self.graph.theta[self.offset]

    @property
    def slot_names(self):
        if self.family.multivariate:
            return [f'{self.name}[{k}]' for k in range(self.size)]
        return [self.name]


class DataNode(StochasticNode):
    kind = 'data'

    def __init__(self, graph, node_id, spec, family, params, value):
        super().__init__(graph, node_id, spec, family, params)
        self.value = value


class DeterministicNode(Node):
    kind = 'deterministic'

    def __init__(self, graph, node_id, spec, op, inputs, params):
        super().__init__(graph, node_id, spec)
        self.op = op
        self.inputs = inputs
        self.params = params
        self.stale = True
        self._value = None
        self._compute = None

    @property
    def value(self):
        if self.stale:
            self._value = self._compute()
            self.stale = False
        return self._value

    def save(self):
        return self._value, self.stale

    def restore(self, state):
        self._value, self.stale = state

    def bind(self):
        graph = self.graph
        inputs = [graph.compile(ref) for ref in self.inputs]
        if self.op == 'affine':
            offset = graph.compile(self.params['offset'])
            coefficients = [graph.compile(c) for c in self.params['coefficients']]
            terms = list(zip(coefficients, inputs))

            def compute():
                total = offset()
                for coefficient, x in terms:
                    total = total + coefficient() * x()
                return total
        elif self.op == 'exp':
            (x,) = inputs

            def compute():
                with np.errstate(over='ignore'):
                    return np.exp(x())
        elif self.op == 'expit':
            (x,) = inputs

            def compute():
                return expit(x())
        else:
            compute = self._bind_expcov()
        self._compute = compute

    def _bind_expcov(self):
        graph = self.graph
        distances = np.asarray(self.params['distances'], dtype=float)
        if distances.ndim != 2 or distances.shape[0] != distances.shape[1]:
            raise InvalidParameter(f'{self.name}: distances must be a square matrix')
        if not np.allclose(distances, distances.T) or np.any(distances < 0):
            raise InvalidParameter(f'{self.name}: distances must be symmetric and nonnegative')
        range_getter = graph.compile(self.params['range'])
        if 'scale' in self.params:
            scale_getter = graph.compile(self.params['scale'])
        else:
            sd_getter = graph.compile(self.params['sd'])

            def scale_getter():
                return sd_getter() ** 2

        name = self.name

        def compute():
            scale = scale_getter()
            length = range_getter()
            if not scale > 0 or not length > 0:
                raise InvalidParameter(f'{name}: scale and range must be positive')
            return scale * np.exp(-distances / length)

        return compute


class ModelGraph:
    """A validated model: nodes, dependency DAG, theta layout and density evaluation."""

    def __init__(self, description):
        if not isinstance(description, dict) or not isinstance(description.get('nodes'), list):
            raise InvalidModel('Model description must be an object with a "nodes" list')
        self.description = copy.deepcopy(description)
        self.name = description.get('name', 'model')
        self.nodes = []
        self._by_name = {}
        self._dependents = {}
        self._scopes = {}
        self._parse_nodes(description['nodes'])
        self.dag = self._build_dag()
        self.topo_order = [
            self._by_name[name]
            for name in nx.lexicographical_topological_sort(self.dag, key=lambda n: self._by_name[n].id.index)
        ]
        self._topo_position = {node.name: k for k, node in enumerate(self.topo_order)}
        self._stochastic = tuple(node for node in self.topo_order if node.kind != 'deterministic')
        self._layout_theta()
        for node in self.nodes:
            node.bind()
        self._initialize()
        # One full pass validates parameter domains and element references.
        self.total_log_density()
        self.reset_evaluation_counts()

    # Construction

    def _parse_nodes(self, entries):
        for index, entry in enumerate(entries):
            if not isinstance(entry, dict):
                raise InvalidModel(f'Node #{index} is not an object')
            name = entry.get('name')
            if not isinstance(name, str) or not NAME.match(name):
                raise InvalidModel(f'Node #{index} has an invalid name: {name!r}')
            if name in self._by_name:
                raise InvalidModel(f'Duplicate node name: {name}')
            kind = entry.get('kind')
            if kind not in KINDS:
                raise InvalidModel(f'{name}: kind must be one of {", ".join(KINDS)}')
            node_id = NodeId(name, index)
            if kind == 'deterministic':
                node = self._parse_deterministic(node_id, entry)
            else:
                node = self._parse_stochastic(node_id, kind, entry)
            self.nodes.append(node)
            self._by_name[name] = node

    def _parse_stochastic(self, node_id, kind, entry):
        name = node_id.name
        if 'op' in entry:
            raise InvalidModel(f'{name}: stochastic nodes take a "family", not an "op"')
        family = FAMILIES.get(entry.get('family'))
        if family is None:
            raise InvalidModel(f'{name}: unknown family {entry.get("family")!r}')
        raw = entry.get('params') or {}
        if set(raw) != set(family.params):
            raise ArityMismatch(
                f'{name}: {family.name} takes parameters {", ".join(family.params)}, got {", ".join(sorted(raw)) or "none"}'
            )
        params = {key: _parse_value(value) for key, value in raw.items()}
        if family.multivariate:
            self._check_literal_covariance(name, params['cov'])
        if kind == 'parameter':
            if family.discrete:
                raise InvalidModel(f'{name}: discrete parameters are not sampled')
            size = self._mvnorm_size(name, entry, params) if family.multivariate else 1
            return ParameterNode(self, node_id, entry, family, params, size)
        if 'value' not in entry:
            raise InvalidModel(f'{name}: data nodes need a value')
        value = entry['value']
        if family.multivariate:
            self._mvnorm_size(name, entry, params)
            value = np.asarray(value, dtype=float)
        elif isinstance(value, (list, dict)) or isinstance(value, bool):
            raise InvalidModel(f'{name}: univariate data takes a single number')
        else:
            value = float(value)
        return DataNode(self, node_id, entry, family, params, value)

    def _parse_deterministic(self, node_id, entry):
        name = node_id.name
        op = entry.get('op')
        if op not in OPS:
            raise InvalidModel(f'{name}: op must be one of {", ".join(OPS)}')
        if 'family' in entry or 'value' in entry:
            raise InvalidModel(f'{name}: deterministic nodes take neither a family nor a value')
        inputs = [Reference.parse(ref) if isinstance(ref, str) else None for ref in entry.get('inputs') or []]
        if None in inputs:
            raise InvalidModel(f'{name}: inputs must be node references')
        raw = entry.get('params') or {}
        if op == 'affine':
            if set(raw) != {'coefficients', 'offset'}:
                raise ArityMismatch(f'{name}: affine takes parameters coefficients, offset')
            if not isinstance(raw['coefficients'], list) or len(raw['coefficients']) != len(inputs):
                raise ArityMismatch(f'{name}: affine needs one coefficient per input')
        elif op in ('exp', 'expit'):
            if raw or len(inputs) != 1:
                raise ArityMismatch(f'{name}: {op} takes exactly one input and no parameters')
        else:
            keys = set(raw)
            if inputs or keys not in ({'scale', 'range', 'distances'}, {'sd', 'range', 'distances'}):
                raise ArityMismatch(f'{name}: expcov takes parameters (scale or sd), range, distances')
        params = {key: _parse_value(value) for key, value in raw.items()}
        if op == 'expcov' and _contains_reference(params['distances']):
            raise InvalidModel(f'{name}: the distance matrix must be literal')
        return DeterministicNode(self, node_id, entry, op, inputs, params)

    def _check_literal_covariance(self, name, cov):
        if isinstance(cov, Reference):
            return
        if _contains_reference(cov):
            raise InvalidModel(f'{name}: a covariance is either a literal matrix or a node reference')
        matrix = np.asarray(cov, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise InvalidParameter(f'{name}: covariance must be a square matrix')
        if not np.allclose(matrix, matrix.T):
            raise InvalidParameter(f'{name}: covariance must be symmetric')
        factor, _ = regularized_cholesky(matrix)
        if factor is None:
            raise InvalidParameter(f'{name}: covariance is not positive definite')

    def _mvnorm_size(self, name, entry, params):
        cov, mean = params['cov'], params['mean']
        source = None
        if isinstance(cov, Reference):
            source = next((e for e in self.description['nodes'] if e.get('name') == cov.name), None)
        if not isinstance(cov, Reference):
            size = len(cov)
        elif source is not None and source.get('op') == 'expcov':
            size = len(source.get('params', {}).get('distances', []))
        elif isinstance(mean, list):
            size = len(mean)
        elif isinstance(entry.get('value'), list):
            size = len(entry['value'])
        else:
            raise InvalidModel(f'{name}: cannot infer the dimension; give a value or a literal mean vector')
        if isinstance(mean, list) and len(mean) != size:
            raise LengthMismatch(f'{name}: mean has {len(mean)} entries, covariance is {size}x{size}')
        if 'value' in entry and np.size(entry['value']) != size:
            raise LengthMismatch(f'{name}: value has {np.size(entry["value"])} entries, expected {size}')
        return size

    def _node_references(self, node):
        refs = list(_references(list(node.params.values())))
        if node.kind == 'deterministic':
            refs.extend(node.inputs)
        return refs

    def _build_dag(self):
        dag = nx.DiGraph()
        for node in self.nodes:
            dag.add_node(node.name)
        for node in self.nodes:
            for ref in self._node_references(node):
                if ref.name not in self._by_name:
                    raise UnknownReference(f'{node.name} refers to unknown node {ref.name!r}')
                if dag.has_edge(ref.name, node.name):
                    dag.edges[ref.name, node.name]['elements'].add(ref.element)
                else:
                    dag.add_edge(ref.name, node.name, elements={ref.element})
        if not nx.is_directed_acyclic_graph(dag):
            cycle = nx.find_cycle(dag)
            path = ' -> '.join([edge[0] for edge in cycle] + [cycle[-1][1]])
            raise CycleError(f'Model graph has a cycle: {path}')
        return dag

    def _layout_theta(self):
        self.parameters = [node for node in self.nodes if node.kind == 'parameter']
        self.slot_names = []
        self._slot_owner = []
        offset = 0
        for node in self.parameters:
            node.offset = offset
            self.slot_names.extend(node.slot_names)
            for k in range(node.size):
                self._slot_owner.append((node, k if node.family.multivariate else None))
            offset += node.size
        self.theta = np.zeros(offset)

    def compile(self, value):
        """Return a zero-argument callable producing ``value`` in the current state."""
        if isinstance(value, Reference):
            return self._reference_getter(value)
        if isinstance(value, list):
            if _contains_reference(value):
                raise InvalidModel(f'Vector of references is only allowed as a mean: {value!r}')
            constant = np.asarray(value, dtype=float)
        else:
            constant = value
        return lambda: constant

    def compile_vector(self, value):
        if isinstance(value, list) and _contains_reference(value):
            getters = [self.compile(item) for item in value]
            return lambda: np.array([getter() for getter in getters], dtype=float)
        return self.compile(value)

    def _reference_getter(self, ref):
        target = self._by_name[ref.name]
        element = ref.element
        if isinstance(target, ParameterNode):
            theta = self.theta
            start = target.offset
            if not target.family.multivariate:
                if element not in (None, 0):
                    raise UnknownReference(f'{ref}: {target.name} is a scalar')
                return lambda: theta[start]
            if element is None:
                stop = start + target.size
                return lambda: theta[start:stop]
            if element >= target.size:
                raise UnknownReference(f'{ref}: index out of range')
            slot = start + element
            return lambda: theta[slot]
        if isinstance(target, DataNode):
            if element is None:
                constant = target.value
            else:
                values = np.atleast_1d(target.value)
                if element >= len(values):
                    raise UnknownReference(f'{ref}: index out of range')
                constant = float(values[element])
            return lambda: constant
        if element is None:
            return lambda: target.value

        def getter():
            try:
                return target.value[element]
            except (IndexError, TypeError):
                raise UnknownReference(f'{ref}: index out of range') from None

        return getter

    def _initialize(self):
        for node in self.topo_order:
            if node.kind != 'parameter':
                continue
            if 'value' in node.spec:
                value = node.spec['value']
            else:
                value = node.family.initial(node.resolved_params())
            if node.family.multivariate:
                value = np.broadcast_to(np.asarray(value, dtype=float), (node.size,))
                self.theta[node.offset:node.offset + node.size] = value
            else:
                if isinstance(value, (list, tuple, dict)):
                    raise InvalidModel(f'{node.name}: initial value must be a number')
                self.theta[node.offset] = float(value)
        self._initial_theta = self.theta.copy()
        self.invalidate()

    # Queries

    @property
    def d(self):
        return len(self.slot_names)

    def node(self, name):
        if isinstance(name, NodeId):
            name = name.name
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownReference(f'Unknown node {name!r}') from None

    def node_ids(self):
        return [node.id for node in self.nodes]

    @property
    def stochastic_nodes(self):
        return self._stochastic

    def slot_index(self, name):
        try:
            return self.slot_names.index(name)
        except ValueError:
            raise UnknownReference(f'Unknown theta slot {name!r}') from None

    def _downstream(self, sources):
        """Stochastic and deterministic nodes reached from ``(node, element)`` sources.

        Element references only filter the first hop; a deterministic node that
        changes is treated as changing as a whole.
        """
        stochastic, deterministic = set(), set()
        frontier = []
        for name, element in sources:
            for child in self.dag.successors(name):
                elements = self.dag.edges[name, child]['elements']
                if element is None or None in elements or element in elements:
                    frontier.append(child)
        while frontier:
            name = frontier.pop()
            if self._by_name[name].kind == 'deterministic':
                if name not in deterministic:
                    deterministic.add(name)
                    frontier.extend(self.dag.successors(name))
            else:
                stochastic.add(name)
        return stochastic, deterministic

    def dependents(self, name):
        """Stochastic nodes whose density changes with ``name``, seen through deterministic nodes."""
        node = self.node(name)
        if node.kind != 'parameter':
            raise ModelError(f'{node.name} is not a stochastic parameter')
        if node.name not in self._dependents:
            self._dependents[node.name] = frozenset(self._downstream([(node.name, None)])[0])
        return self._dependents[node.name]

    def slot_dependents(self, slot):
        node, element = self._slot_owner[slot]
        return frozenset(self._downstream([(node.name, element)])[0])

    def update_scope(self, slots):
        slots = tuple(slots)
        scope = self._scopes.get(slots)
        if scope is None:
            key = tuple(sorted(int(s) for s in slots))
            scope = self._scopes.get(key) or self._build_scope(key)
            self._scopes[key] = self._scopes[slots] = scope
        return scope

    def _build_scope(self, slots):
        if not slots or slots[0] < 0 or slots[-1] >= self.d:
            raise LengthMismatch(f'Theta slots out of range: {slots}')
        owners = {}
        sources = []
        for slot in slots:
            node, element = self._slot_owner[slot]
            owners[node.name] = node
            sources.append((node.name, element))
        stochastic, deterministic = self._downstream(sources)
        position = self._topo_position
        owner_nodes = sorted(owners.values(), key=lambda n: position[n.name])
        dependents = sorted((self._by_name[n] for n in stochastic if n not in owners), key=lambda n: position[n.name])
        nodes = tuple(owner_nodes + dependents)
        index = np.array(slots, dtype=int)
        if len(slots) == 1:
            key = slots[0]
        elif slots[-1] - slots[0] == len(slots) - 1:
            key = slice(slots[0], slots[-1] + 1)
        else:
            key = index
        return UpdateScope(
            slots=slots,
            index=index,
            nodes=nodes,
            deterministic=tuple(sorted((self._by_name[n] for n in deterministic), key=lambda n: position[n.name])),
            owner_count=len(owner_nodes),
            key=key,
            factor_nodes=tuple(node for node in nodes if node.dynamic_factor),
        )

    # State

    def get_theta(self):
        return self.theta.copy()

    def set_theta(self, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (self.d,):
            raise LengthMismatch(f'Expected {self.d} theta values, got {values.size}')
        self.theta[:] = values
        self.invalidate()

    def reset(self):
        """Return to the initial values declared (or defaulted) in the model."""
        self.set_theta(self._initial_theta)

    @property
    def initial_theta(self):
        return self._initial_theta.copy()

    def invalidate(self):
        for node in self.nodes:
            if node.kind == 'deterministic':
                node.stale = True
            else:
                node.logprob = None

    # Densities

    def log_density(self, nodes):
        """Sum of the log densities of ``nodes`` given their parents; may be -inf."""
        total = 0.0
        for name in nodes:
            node = name if isinstance(name, StochasticNode) else self.node(name)
            if node.kind == 'deterministic':
                raise ModelError(f'{node.name} is deterministic and has no density')
            total += node.calculate()
        return total

    def total_log_density(self):
        return self.log_density(self._stochastic)

    def evaluation_counts(self):
        return {node.name: node.evaluations for node in self.stochastic_nodes}

    def reset_evaluation_counts(self):
        for node in self.stochastic_nodes:
            node.evaluations = 0

    # Serialization

    def to_json(self, indent=None):
        return json.dumps(self.description, indent=indent)

    @property
    def digest(self):
        canonical = json.dumps(self.description, sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def build_graph(description):
    """Validate a model description and return its ModelGraph."""
    graph = ModelGraph(description)
    logger.debug('Built model %s: %d nodes, d=%d', graph.name, len(graph.nodes), graph.d)
    return graph


def load_graph(path):
    try:
        with open(path, encoding='utf-8') as handle:
            description = json.load(handle)
    except json.JSONDecodeError as exc:
        raise InvalidModel(f'{path}: not valid JSON ({exc})') from exc
    except OSError as exc:
        raise InvalidModel(f'Cannot read model file {path}: {exc.strerror or exc}') from exc
    return build_graph(description)
