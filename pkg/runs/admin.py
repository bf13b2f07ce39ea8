from django.contrib import admin

from .models import RunManifest


@admin.register(RunManifest)
class RunManifestAdmin(admin.ModelAdmin):
    list_display = ['id', 'command', 'digest', 'seed', 'status', 'wall_clock', 'created_at']
    list_filter = ['command', 'status', 'created_at']
    search_fields = ['digest', 'command']
    readonly_fields = ['created_at']
