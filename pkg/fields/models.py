import logging

from django.db import DatabaseError, models

logger = logging.getLogger(__name__)


class ExperimentRun(models.Model):
    name = models.CharField(max_length=50)
    config = models.JSONField()
    master_seed = models.BigIntegerField()
    workers = models.PositiveIntegerField(default=1)
    passed = models.BooleanField(default=False)
    partial = models.BooleanField(default=False)
    output_dir = models.CharField(max_length=500)
    wall_clock = models.FloatField(default=0.0)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at']

    def __str__(self):
        status = 'passed' if self.passed else 'failed'
        return f'{self.name} (seed {self.master_seed}, {status})'

    @classmethod
    def record(cls, result, output_dir):
        """Store a finished result; the run itself never fails because of the database."""
        try:
            return cls.objects.create(
                name=result.config.name,
                config=result.config.to_dict(),
                master_seed=result.config.master_seed,
                workers=result.config.workers,
                passed=result.passed,
                partial=result.partial,
                output_dir=str(output_dir),
                wall_clock=result.wall_clock,
            )
        except DatabaseError as e:
            logger.warning('Could not record %s run: %s', result.config.name, e)
            return None
