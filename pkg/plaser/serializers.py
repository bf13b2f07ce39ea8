from rest_framework import serializers


def positive(value):
    if not value > 0:
        raise serializers.ValidationError("Must be positive.")


class ModelConfigSerializer(serializers.Serializer):
    """Validates a flat key = value model configuration."""

    radius = serializers.FloatField(validators=[positive])
    temperature = serializers.FloatField(validators=[positive])
    mass = serializers.FloatField(validators=[positive])
    sigma = serializers.FloatField(validators=[positive])
    n0 = serializers.FloatField(validators=[positive])
    t0 = serializers.FloatField(default=0.0)
    dimension = serializers.ChoiceField(choices=[1, 3], default=1)
    seed = serializers.IntegerField(min_value=0, required=False, allow_null=True, default=None)
    symmetrize = serializers.BooleanField(default=True)

    def to_internal_value(self, data):
        unknown = sorted(set(data) - set(self.fields))
        try:
            values = super().to_internal_value(data)
        except serializers.ValidationError as exc:
            errors = dict(exc.detail)
        else:
            errors = {}
        errors.update({key: ["Unknown configuration key."] for key in unknown})
        if errors:
            raise serializers.ValidationError(errors)
        return values

