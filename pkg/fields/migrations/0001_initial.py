# Generated by Django 5.2.5 on 2026-10-18 09:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('name', models.CharField(max_length=50)),
                ('config', models.JSONField()),
                ('master_seed', models.BigIntegerField()),
                ('workers', models.PositiveIntegerField(default=1)),
                ('passed', models.BooleanField(default=False)),
                ('partial', models.BooleanField(default=False)),
                ('output_dir', models.CharField(max_length=500)),
                ('wall_clock', models.FloatField(default=0.0)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'ordering': ['-created_at'],
            },
        ),
    ]
