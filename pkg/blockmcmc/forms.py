import json

from django import forms

from blockmcmc.bench import SUITES
from blockmcmc.conf import autoblock_setting

PLAN_CHOICES = ('all-scalar', 'all-blocked')


class RunForm(forms.Form):
    plan = forms.CharField(
        label='Plan',
        help_text='all-scalar, all-blocked, or a JSON list of slot-name groups',
    )
    iterations = forms.IntegerField(min_value=1)
    seed = forms.IntegerField(min_value=0, required=False, initial=0)

    def clean_plan(self):
        plan = self.cleaned_data['plan'].strip()
        if plan in PLAN_CHOICES:
            return plan
        try:
            groups = json.loads(plan)
        except json.JSONDecodeError:
            raise forms.ValidationError(
                f'Plan must be one of {", ".join(PLAN_CHOICES)}, a JSON list of groups or an existing plan file.'
            ) from None
        if not isinstance(groups, list) or not all(isinstance(g, list) and g for g in groups):
            raise forms.ValidationError('An explicit plan is a list of nonempty lists of slot names.')
        return groups

    def clean(self):
        cleaned_data = super().clean()
        if cleaned_data.get('seed') is None:
            cleaned_data['seed'] = 0
        return cleaned_data


class AutoblockForm(forms.Form):
    iterations = forms.IntegerField(min_value=100, required=False)
    seed = forms.IntegerField(min_value=0, required=False)
    grid = forms.CharField(required=False, help_text='Comma separated cut heights, e.g. 0,0.5,1')
    max_outer = forms.IntegerField(min_value=1, required=False)
    discard = forms.FloatField(min_value=0.0, max_value=0.99, required=False)
    parallel = forms.BooleanField(required=False)
    workers = forms.IntegerField(min_value=1, required=False)

    def clean_grid(self):
        raw = (self.cleaned_data.get('grid') or '').strip()
        if not raw:
            return None
        try:
            grid = [float(part) for part in raw.split(',')]
        except ValueError:
            raise forms.ValidationError('Cut heights must be numbers.') from None
        if any(not 0.0 <= h <= 1.0 for h in grid):
            raise forms.ValidationError('Cut heights must lie in [0, 1].')
        if grid != sorted(set(grid)):
            raise forms.ValidationError('Cut heights must be sorted and distinct.')
        if grid[0] != 0.0 or grid[-1] != 1.0:
            raise forms.ValidationError('The grid must contain 0 and 1.')
        return grid

    def config_overrides(self):
        data = self.cleaned_data
        return {
            'iterations': data.get('iterations'),
            'seed': data.get('seed') if data.get('seed') is not None else 0,
            'grid': data.get('grid'),
            'max_outer_iterations': data.get('max_outer'),
            'discard_fraction': data.get('discard'),
            'parallel': bool(data.get('parallel')),
            'workers': data.get('workers'),
        }


class BenchmarkForm(forms.Form):
    suite = forms.ChoiceField(choices=[(name, name) for name in SUITES])
    iterations = forms.IntegerField(min_value=100, required=False)
    seed = forms.IntegerField(min_value=0, required=False)
    repetitions = forms.IntegerField(min_value=1, required=False, initial=1)

    def clean(self):
        cleaned_data = super().clean()
        if cleaned_data.get('iterations') is None:
            cleaned_data['iterations'] = autoblock_setting('DEFAULT_ITERATIONS')
        if cleaned_data.get('seed') is None:
            cleaned_data['seed'] = 0
        if cleaned_data.get('repetitions') is None:
            cleaned_data['repetitions'] = 1
        return cleaned_data
