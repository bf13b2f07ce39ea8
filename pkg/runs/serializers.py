from rest_framework import serializers

from .models import RunManifest


class RunManifestSerializer(serializers.ModelSerializer):
    """Serializer for run manifests, also embedded in every JSON output."""

    stem = serializers.ReadOnlyField()

    class Meta:
        model = RunManifest
        fields = ['id', 'command', 'parameters', 'seed', 'version', 'digest', 'stem',
                  'output_paths', 'wall_clock', 'status', 'created_at']
        read_only_fields = fields
