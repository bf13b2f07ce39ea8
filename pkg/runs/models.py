from django.db import models


class RunManifest(models.Model):
    """
    Provenance of one command invocation.

    Every file a run writes shares the stem ``<command>-<digest12>``, so the
    manifest is found from any output and vice versa.
    """

    STATUS_CHOICES = [
        ('ok', 'Completed'),
        ('failed', 'Failed'),
    ]

    command = models.CharField(max_length=32)
    parameters = models.JSONField(default=dict)
    seed = models.BigIntegerField(null=True, blank=True)
    version = models.CharField(max_length=32)
    digest = models.CharField(max_length=64, db_index=True)
    output_paths = models.JSONField(default=list)
    wall_clock = models.FloatField(default=0.0)
    status = models.CharField(max_length=10, choices=STATUS_CHOICES, default='ok')
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        db_table = 'run_manifests'
        ordering = ['-created_at']

    def __str__(self):
        return f"{self.stem} ({self.status})"

    @property
    def stem(self):
        return f"{self.command}-{self.digest[:12]}"
