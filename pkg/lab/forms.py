# lab/forms.py
import math

from django import forms
from django.db import models

from domains.catalog import DomainKind, DomainSpec, InvalidDomain
from spectral.chi import ChiKind, ChiProfile, InvalidChiProfile
from spectral.projector import RotationGenerator, SpectralError


class Suite(models.TextChoices):
    LEADING = "leading", "Leading interior ratio and growth order"
    TRACE = "trace", "Trace scaling"
    INTERIOR = "interior", "Interior damping and decay"
    OFFDIAGONAL = "offdiag", "Off-diagonal decay"
    BOUNDARY = "boundary", "Boundary (Szegő) expansion"
    ORACLES = "oracles", "Oracle and structure checks"


class FloatListField(forms.Field):
    """A TOML array of numbers."""

    def __init__(self, *args, min_length: int = 0, **kwargs):
        self.min_length = min_length
        super().__init__(*args, **kwargs)

    def to_python(self, value):
        if value in self.empty_values:
            return []
        if not isinstance(value, (list, tuple)):
            raise forms.ValidationError("Expected a list of numbers.")
        try:
            values = [float(v) for v in value]
        except (TypeError, ValueError):
            raise forms.ValidationError("Expected a list of numbers.")
        if any(not math.isfinite(v) for v in values):
            raise forms.ValidationError("Numbers must be finite.")
        return values

    def validate(self, value):
        super().validate(value)
        if len(value) < self.min_length:
            raise forms.ValidationError(f"Expected at least {self.min_length} entries.")


def _complex_vector(value, label: str) -> tuple[complex, ...]:
    """``[[re, im], ...]`` or plain reals into a complex tuple."""
    if not isinstance(value, (list, tuple)) or not value:
        raise forms.ValidationError(f"{label} must be a non-empty list of coordinates.")
    out = []
    for entry in value:
        if isinstance(entry, (list, tuple)):
            if len(entry) != 2:
                raise forms.ValidationError(f"{label}: coordinates are [re, im] pairs.")
            re, im = entry
        else:
            re, im = entry, 0.0
        try:
            out.append(complex(float(re), float(im)))
        except (TypeError, ValueError):
            raise forms.ValidationError(f"{label}: coordinates must be numbers.")
    return tuple(out)


class PointListField(forms.Field):
    """``[[points]]`` tables: id, role and z."""

    ROLES = ("boundary", "interior")

    def to_python(self, value):
        if value in self.empty_values:
            return []
        if not isinstance(value, (list, tuple)):
            raise forms.ValidationError("points must be an array of tables.")
        points = []
        for i, table in enumerate(value):
            if not isinstance(table, dict) or "id" not in table or "z" not in table:
                raise forms.ValidationError(f"points[{i}] needs an id and a z.")
            role = table.get("role", "boundary")
            if role not in self.ROLES:
                raise forms.ValidationError(f"points[{i}]: role must be one of {', '.join(self.ROLES)}.")
            points.append({"id": str(table["id"]), "role": role, "z": _complex_vector(table["z"], f"points[{i}].z")})
        return points


class PairListField(forms.Field):
    """``[[pairs]]`` tables: id, z and w."""

    def to_python(self, value):
        if value in self.empty_values:
            return []
        if not isinstance(value, (list, tuple)):
            raise forms.ValidationError("pairs must be an array of tables.")
        pairs = []
        for i, table in enumerate(value):
            if not isinstance(table, dict) or not {"id", "z", "w"} <= set(table):
                raise forms.ValidationError(f"pairs[{i}] needs an id, a z and a w.")
            pairs.append(
                {
                    "id": str(table["id"]),
                    "z": _complex_vector(table["z"], f"pairs[{i}].z"),
                    "w": _complex_vector(table["w"], f"pairs[{i}].w"),
                }
            )
        return pairs


class RunConfigForm(forms.Form):
    """Validation of a flattened run configuration."""

    domain_kind = forms.ChoiceField(choices=DomainKind.choices)
    n = forms.IntegerField(min_value=1, max_value=8)
    a = FloatListField(required=False)
    weights = FloatListField(required=False)

    chi_center = forms.FloatField()
    chi_radius = forms.FloatField()
    chi_amplitude = forms.FloatField(required=False)
    chi_kind = forms.ChoiceField(choices=ChiKind.choices, required=False)
    chi_allow_signed = forms.BooleanField(required=False)

    k_ladder = FloatListField(min_length=1)
    points = PointListField(required=False)
    pairs = PairListField(required=False)
    suites = forms.MultipleChoiceField(choices=Suite.choices)

    depth = forms.FloatField(min_value=0.0, required=False)
    boundary_trace = forms.BooleanField(required=False)

    mc_samples = forms.IntegerField(min_value=10_000)
    random_indices = forms.IntegerField(min_value=1)
    max_degree = forms.IntegerField(min_value=0)
    hs_size = forms.IntegerField(min_value=1, max_value=200)
    galerkin_degree = forms.IntegerField(min_value=0, max_value=12)

    max_indices = forms.IntegerField()
    max_quadrature_nodes = forms.IntegerField()
    seed = forms.IntegerField(min_value=0)
    output_dir = forms.CharField(required=False)

    def clean_max_indices(self):
        value = self.cleaned_data["max_indices"]
        if value <= 0:
            raise forms.ValidationError("Budgets must be positive.")
        return value

    def clean_max_quadrature_nodes(self):
        value = self.cleaned_data["max_quadrature_nodes"]
        if value <= 0:
            raise forms.ValidationError("Budgets must be positive.")
        return value

    def clean_k_ladder(self):
        ladder = self.cleaned_data["k_ladder"]
        if any(k <= 0 for k in ladder):
            raise forms.ValidationError("k ladder entries must be positive.")
        if any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise forms.ValidationError("k ladder must be strictly ascending.")
        return ladder

    def clean(self):
        cleaned_data = super().clean()
        n = cleaned_data.get("n")
        if n is None:
            return cleaned_data

        domain = self._clean_domain(cleaned_data, n)
        self._clean_generator(cleaned_data, n)
        self._clean_chi(cleaned_data)

        for point in cleaned_data.get("points") or []:
            if len(point["z"]) != n:
                self.add_error("points", f"Point {point['id']} has {len(point['z'])} coordinates for n={n}.")
            elif domain is not None and point["role"] == "boundary" and not _on_boundary(domain, point["z"]):
                self.add_error("points", f"Point {point['id']} is not on the boundary of {domain.label()}.")
            elif domain is not None and point["role"] == "interior" and not domain.contains(point["z"], closed=False):
                self.add_error("points", f"Point {point['id']} is not inside {domain.label()}.")
        for pair in cleaned_data.get("pairs") or []:
            if len(pair["z"]) != n or len(pair["w"]) != n:
                self.add_error("pairs", f"Pair {pair['id']} does not have {n} coordinates per point.")

        ids = [p["id"] for p in cleaned_data.get("points") or []]
        if len(ids) != len(set(ids)):
            self.add_error("points", "Point ids must be unique.")

        suites = cleaned_data.get("suites") or []
        points = cleaned_data.get("points") or []
        roles = {p["role"] for p in points}
        if {"leading", "boundary", "interior"} & set(suites) and "boundary" not in roles:
            self.add_error("points", "The selected suites need at least one boundary point.")
        if "offdiag" in suites and not cleaned_data.get("pairs"):
            self.add_error("pairs", "The offdiag suite needs at least one pair.")
        depth = cleaned_data.get("depth")
        if depth is not None and depth > 0.05:
            self.add_error("depth", "Depth must not exceed 0.05.")
        return cleaned_data

    def _clean_domain(self, cleaned_data, n):
        kind = cleaned_data.get("domain_kind")
        a = cleaned_data.get("a") or [1.0] * n
        if len(a) != n:
            self.add_error("a", f"Expected {n} shape parameters, got {len(a)}.")
            return None
        try:
            domain = DomainSpec(kind, n, tuple(a)) if kind else None
        except InvalidDomain as err:
            self.add_error("domain_kind", str(err))
            return None
        cleaned_data["domain"] = domain
        return domain

    def _clean_generator(self, cleaned_data, n):
        weights = cleaned_data.get("weights") or [1.0] * n
        if len(weights) != n:
            self.add_error("weights", f"Expected {n} weights, got {len(weights)}.")
            return
        try:
            cleaned_data["generator"] = RotationGenerator(tuple(weights))
        except SpectralError as err:
            self.add_error("weights", str(err))

    def _clean_chi(self, cleaned_data):
        center, radius = cleaned_data.get("chi_center"), cleaned_data.get("chi_radius")
        if center is None or radius is None:
            return
        amplitude = cleaned_data.get("chi_amplitude")
        try:
            cleaned_data["chi"] = ChiProfile(
                center=center,
                radius=radius,
                amplitude=1.0 if amplitude is None else amplitude,
                kind=cleaned_data.get("chi_kind") or ChiKind.BUMP.value,
                allow_signed=bool(cleaned_data.get("chi_allow_signed")),
            )
        except InvalidChiProfile as err:
            self.add_error("chi_center", str(err))


def _on_boundary(domain: DomainSpec, z) -> bool:
    s = sum(a * abs(v) ** 2 for a, v in zip(domain.a, z))
    return abs(s - 1.0) <= 1e-9
