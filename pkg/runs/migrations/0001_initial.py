# Generated by Django 4.2.7 on 2026-10-18 09:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='RunManifest',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(max_length=32)),
                ('parameters', models.JSONField(default=dict)),
                ('seed', models.BigIntegerField(blank=True, null=True)),
                ('version', models.CharField(max_length=32)),
                ('digest', models.CharField(db_index=True, max_length=64)),
                ('output_paths', models.JSONField(default=list)),
                ('wall_clock', models.FloatField(default=0.0)),
                ('status', models.CharField(choices=[('ok', 'Completed'), ('failed', 'Failed')], default='ok', max_length=10)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'db_table': 'run_manifests',
                'ordering': ['-created_at'],
            },
        ),
    ]
