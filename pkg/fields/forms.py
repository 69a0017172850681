from django import forms

from .field_sampler import LAW_DIRICHLET, LAW_IID, LAW_INFINITE

EXPERIMENTS = ['gumbel', 'lln', 'bounds', 'markov_check', 'green', 'sample', 'oracle']
SAMPLED_LAWS = [LAW_DIRICHLET, LAW_INFINITE, LAW_IID]


class ExperimentConfigForm(forms.Form):
    """Validates the JSON form of an experiment config; lists arrive as JSON values."""

    name = forms.ChoiceField(choices=[(name, name) for name in EXPERIMENTS])
    d = forms.IntegerField(min_value=3)
    sides = forms.JSONField()
    window_sides = forms.JSONField(required=False)
    laws = forms.JSONField()
    z_grid = forms.JSONField()
    check_z = forms.JSONField(required=False)
    delta = forms.FloatField()
    epsilon = forms.FloatField()
    replicates = forms.IntegerField(min_value=1)
    master_seed = forms.IntegerField(min_value=0)
    workers = forms.IntegerField(min_value=1)
    output_dir = forms.CharField()
    quad_tol = forms.FloatField()
    tolerances = forms.JSONField(required=False)
    n_grid = forms.JSONField()
    instance_side = forms.IntegerField(min_value=2)
    lambdas = forms.JSONField()
    control_sites = forms.IntegerField(min_value=1)
    check_side = forms.IntegerField(min_value=2)
    ball_radius = forms.IntegerField(min_value=0)
    hitting_radius = forms.IntegerField(min_value=1, required=False)

    def _int_list(self, name, minimum):
        values = self.cleaned_data.get(name) or []
        if not isinstance(values, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in values):
            raise forms.ValidationError('Expected a list of integers.')
        if any(v < minimum for v in values):
            raise forms.ValidationError(f'Every entry must be at least {minimum}.')
        return values

    def _float_list(self, name):
        values = self.cleaned_data.get(name) or []
        if not isinstance(values, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
            raise forms.ValidationError('Expected a list of numbers.')
        return [float(v) for v in values]

    def clean_sides(self):
        return self._int_list('sides', 1)

    def clean_window_sides(self):
        return self._int_list('window_sides', 1)

    def clean_laws(self):
        laws = self.cleaned_data.get('laws')
        if not isinstance(laws, list) or any(law not in SAMPLED_LAWS for law in laws):
            raise forms.ValidationError(f'Laws must be chosen from {", ".join(SAMPLED_LAWS)}.')
        return laws

    def clean_z_grid(self):
        return self._float_list('z_grid')

    def clean_check_z(self):
        return self._float_list('check_z')

    def clean_delta(self):
        delta = self.cleaned_data.get('delta')
        if not 0 < delta < 0.5:
            raise forms.ValidationError('delta must lie strictly between 0 and 1/2.')
        return delta

    def clean_epsilon(self):
        epsilon = self.cleaned_data.get('epsilon')
        if epsilon <= 0:
            raise forms.ValidationError('epsilon must be positive.')
        return epsilon

    def clean_quad_tol(self):
        quad_tol = self.cleaned_data.get('quad_tol')
        if quad_tol <= 0:
            raise forms.ValidationError('quad_tol must be positive.')
        return quad_tol

    def clean_tolerances(self):
        tolerances = self.cleaned_data.get('tolerances') or {}
        if not isinstance(tolerances, dict):
            raise forms.ValidationError('Expected an object of named tolerances.')
        for key, value in tolerances.items():
            if not isinstance(value, (int, float)) or value <= 0:
                raise forms.ValidationError(f'Tolerance {key} must be a positive number.')
        return {key: float(value) for key, value in tolerances.items()}

    def clean_n_grid(self):
        values = self._float_list('n_grid')
        if any(v < 16 for v in values):
            raise forms.ValidationError('Every N in the grid must be at least 16.')
        return values

    def clean_lambdas(self):
        values = self._float_list('lambdas')
        if any(v <= 0 for v in values):
            raise forms.ValidationError('Every lambda must be positive.')
        return values
