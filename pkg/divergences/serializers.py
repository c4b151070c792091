from rest_framework import serializers

from .engine import PRESETS
from .factors import Factor
from .graphs import ChordalGraph, Variable, VariableTable, graph_from_cliques

FORMAT_VERSION = 1


class VariableSerializer(serializers.Serializer):
    """Serializer for one entry of a variable table"""

    id = serializers.IntegerField(min_value=0)
    cardinality = serializers.IntegerField(min_value=2)
    name = serializers.CharField(required=False, allow_blank=True, allow_null=True, default=None)


def _variable_table(entries) -> VariableTable:
    ids = [entry['id'] for entry in entries]
    if sorted(ids) != list(range(len(ids))):
        raise serializers.ValidationError({'variables': 'variable ids must be unique and dense (0..n-1)'})
    names = [entry.get('name') for entry in entries if entry.get('name')]
    if len(set(names)) != len(names):
        raise serializers.ValidationError({'variables': 'variable names must be unique'})
    return VariableTable(tuple(
        Variable(entry['id'], entry['cardinality'], entry.get('name') or None) for entry in entries
    ))


def _variable_entries(variables: VariableTable) -> list[dict]:
    entries = []
    for v in variables:
        entry = {'id': v.id, 'cardinality': v.cardinality}
        if v.name:
            entry['name'] = v.name
        entries.append(entry)
    return entries


class CliqueTableSerializer(serializers.Serializer):
    """Serializer for one clique probability table"""

    variables = serializers.ListField(child=serializers.IntegerField(min_value=0))
    values = serializers.ListField(child=serializers.FloatField(min_value=0.0))


class ModelFileSerializer(serializers.Serializer):
    """Serializer for decomposable model files

    Reading validates and builds a DecomposableModel through ``save()``;
    writing renders a model canonically (sorted ids, tables in clique order).
    """

    format_version = serializers.IntegerField(min_value=1, max_value=FORMAT_VERSION)
    variables = VariableSerializer(many=True)
    cliques = serializers.ListField(
        child=serializers.ListField(child=serializers.IntegerField(min_value=0), allow_empty=False)
    )
    tables = CliqueTableSerializer(many=True)

    def validate(self, attrs):
        variables = _variable_table(attrs['variables'])
        if len(attrs['cliques']) != len(attrs['tables']):
            raise serializers.ValidationError('there must be exactly one table per clique')
        for clique, table in zip(attrs['cliques'], attrs['tables']):
            if sorted(clique) != sorted(table['variables']):
                raise serializers.ValidationError(
                    f"table variables {table['variables']} do not match clique {clique}"
                )
            if len(set(clique)) != len(clique) or not set(clique).issubset(variables.ids):
                raise serializers.ValidationError(f"clique {clique} names unknown or repeated variables")
            expected = variables.size(clique)
            if len(table['values']) != expected:
                raise serializers.ValidationError(
                    f"table over {table['variables']} needs {expected} values, got {len(table['values'])}"
                )
        attrs['variable_table'] = variables
        return attrs

    def create(self, validated_data):
        from .networks import DecomposableModel

        variables = validated_data['variable_table']
        graph = ChordalGraph.from_graph(graph_from_cliques(variables.ids, validated_data['cliques']))
        tables = {}
        for table in validated_data['tables']:
            order = table['variables']
            f = Factor(order, variables.cardinalities(order), table['values'])
            tables[f.scope] = f
        return DecomposableModel.from_tables(variables, graph, tables)

    def to_representation(self, instance):
        return {
            'format_version': FORMAT_VERSION,
            'variables': _variable_entries(instance.variables),
            'cliques': [list(c) for c in instance.cliques],
            'tables': [
                {'variables': list(cpt.scope), 'values': cpt.flat.tolist()} for cpt in instance.cpts
            ],
        }


class StructureFileSerializer(serializers.Serializer):
    """Serializer for graph structure files: a variable table plus an edge list"""

    format_version = serializers.IntegerField(min_value=1, max_value=FORMAT_VERSION)
    variables = VariableSerializer(many=True)
    edges = serializers.ListField(
        child=serializers.ListField(child=serializers.IntegerField(min_value=0), min_length=2, max_length=2),
        allow_empty=True,
    )

    def validate(self, attrs):
        variables = _variable_table(attrs['variables'])
        for a, b in attrs['edges']:
            if a == b:
                raise serializers.ValidationError(f"self-loop on variable {a}")
            if a not in variables or b not in variables:
                raise serializers.ValidationError(f"edge ({a}, {b}) names an unknown variable")
        attrs['variable_table'] = variables
        return attrs

    def create(self, validated_data):
        variables = validated_data['variable_table']
        return variables, graph_from_cliques(variables.ids, validated_data['edges'])

    def to_representation(self, instance):
        variables, graph = instance
        return {
            'format_version': FORMAT_VERSION,
            'variables': _variable_entries(variables),
            'edges': sorted([sorted(e) for e in graph.edges]),
        }


class DivergenceRequestSerializer(serializers.Serializer):
    """Serializer for the divergence parameters and scope given on the command line"""

    alpha = serializers.FloatField(required=False, allow_null=True, default=None)
    beta = serializers.FloatField(required=False, allow_null=True, default=None)
    preset = serializers.ChoiceField(choices=sorted(PRESETS), required=False, allow_null=True, default=None)
    marginal = serializers.ListField(child=serializers.CharField(), required=False, default=list)
    target = serializers.ListField(child=serializers.CharField(), required=False, default=list)
    given = serializers.ListField(child=serializers.CharField(), required=False, default=list)

    def validate(self, attrs):
        explicit = attrs['alpha'] is not None or attrs['beta'] is not None
        if attrs['preset'] and explicit:
            raise serializers.ValidationError('use either --preset or --alpha/--beta, not both')
        if not attrs['preset'] and (attrs['alpha'] is None or attrs['beta'] is None):
            raise serializers.ValidationError('give both --alpha and --beta, or a --preset')
        if attrs['marginal'] and (attrs['target'] or attrs['given']):
            raise serializers.ValidationError('--marginal excludes --target/--given')
        if attrs['given'] and not attrs['target']:
            raise serializers.ValidationError('--given needs a --target')
        return attrs


class DiagnosticsSerializer(serializers.Serializer):
    treewidths = serializers.ListField(child=serializers.IntegerField())
    cells = serializers.IntegerField()
    max_table_cells = serializers.IntegerField()
    millis = serializers.FloatField()


class DivergenceResultSerializer(serializers.Serializer):
    """Serializer for a computed divergence"""

    value = serializers.FloatField()
    alpha = serializers.FloatField(source='params.alpha')
    beta = serializers.FloatField(source='params.beta')
    branch = serializers.CharField(source='params.branch')
    preset = serializers.CharField(allow_null=True)
    scope = serializers.SerializerMethodField()
    diagnostics = DiagnosticsSerializer()

    def get_scope(self, obj):
        labels = self.context.get('labels', {})
        scope = obj.scope.describe()
        for key in ('variables', 'target', 'given'):
            if key in scope:
                scope[key] = [labels.get(v, v) for v in scope[key]]
        return scope


class GridRowSerializer(serializers.Serializer):
    """Serializer for one (variable tuple, value) row of a divergence grid"""

    tuple = serializers.ListField(child=serializers.CharField())
    value = serializers.FloatField()


class RankedTupleSerializer(GridRowSerializer):
    rank = serializers.IntegerField(min_value=1)


class OrderSummarySerializer(serializers.Serializer):
    order = serializers.IntegerField(min_value=1)
    tuples = serializers.IntegerField()
    mean = serializers.FloatField()
    max = serializers.FloatField()
    top = RankedTupleSerializer(many=True)
    grid_file = serializers.CharField()


class ReportSummarySerializer(serializers.Serializer):
    """Serializer for the JSON summary written by the report command"""

    preset = serializers.CharField()
    pseudocount = serializers.FloatField()
    structure = serializers.CharField()
    treewidth = serializers.DictField(child=serializers.IntegerField())
    orders = OrderSummarySerializer(many=True)
    inversions = serializers.DictField(child=serializers.IntegerField(), required=False)
    noise_spearman = serializers.FloatField(required=False, allow_null=True)
