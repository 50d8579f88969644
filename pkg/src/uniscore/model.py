"""Domain types and file formats: datasets, criteria specs, score matrices, weight models.

Every other module builds on the types defined here. All types validate their
invariants at construction time and are immutable afterwards, so instances can
be shared freely across threads.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Union

import numpy as np

MODEL_FORMAT = "uniscore-weight-model"
MODEL_VERSION = 1

DEFAULT_OUTPUT_SPEC = (
    'Respond with JSON only, in exactly this form: {"score": N} '
    "where N is an integer from 1 to 5. Output nothing else."
)

SAATY_MIN = 1.0 / 9.0
SAATY_MAX = 9.0


@dataclass(frozen=True)
class DiscreteSignal:
    """Binary group label: 0 marks the low group, 1 the high group."""

    label: int

    def __post_init__(self) -> None:
        if isinstance(self.label, bool) or self.label not in (0, 1):
            raise ValueError(f"label outside {{0,1}}: {self.label!r}")


@dataclass(frozen=True)
class ContinuousSignal:
    """Real-valued quality signal (votes, time spent, annotation score, ...)."""

    value: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise ValueError(f"continuous signal must be finite, got {self.value!r}")


SignalValue = Union[DiscreteSignal, ContinuousSignal]


@dataclass(frozen=True)
class TextSample:
    """One text plus the observed signal used for group partitioning."""

    id: str
    text: str
    signal: SignalValue

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError(f"sample {self.id!r}: text is empty")


@dataclass(frozen=True)
class PromptSpec:
    """The four mandatory elements of a judge prompt, rendered in this order."""

    definition: str
    guidelines: str
    scale_description: str
    output_spec: str = DEFAULT_OUTPUT_SPEC

    def __post_init__(self) -> None:
        for name in ("definition", "guidelines", "scale_description", "output_spec"):
            if not getattr(self, name).strip():
                raise ValueError(f"prompt element {name!r} must be non-empty")


@dataclass(frozen=True)
class ZScoreScaling:
    """Standardize, stretch by sigma_scale, recenter on 3, clip into [1, 5]."""

    sigma_scale: float = 2.0

    def __post_init__(self) -> None:
        if not self.sigma_scale > 0:
            raise ValueError(f"sigma_scale must be positive, got {self.sigma_scale!r}")


@dataclass(frozen=True)
class MinMaxScaling:
    """Map the observed [min, max] linearly onto [1, 5]."""


Scaling = Union[ZScoreScaling, MinMaxScaling]

MEASURE_NAMES = ("word_count", "custom")


@dataclass(frozen=True)
class MeasureSpec:
    """A deterministic quantitative measurer plus how its raw values are scaled.

    ``word_count`` is built in; ``custom`` requires a ``measure_fn`` callable
    (library use only, not serializable to criteria files).
    """

    measure_name: str
    scaling: Scaling = field(default_factory=ZScoreScaling)
    measure_fn: Callable[[str], float] | None = None

    def __post_init__(self) -> None:
        if self.measure_name not in MEASURE_NAMES:
            raise ValueError(
                f"unknown measure {self.measure_name!r}; expected one of {MEASURE_NAMES}"
            )
        if self.measure_name == "custom" and self.measure_fn is None:
            raise ValueError("custom measure requires a measure_fn callable")


@dataclass(frozen=True)
class CriterionSpec:
    """A named criterion: either judge-scored via a prompt or measured directly."""

    name: str
    prompt: PromptSpec | None = None
    measure: MeasureSpec | None = None

    def __post_init__(self) -> None:
        if not self.name.strip():
            raise ValueError("criterion name must be non-empty")
        if (self.prompt is None) == (self.measure is None):
            raise ValueError(
                f"criterion {self.name!r}: exactly one of prompt/measure must be set"
            )

    @property
    def is_llm_judged(self) -> bool:
        return self.prompt is not None


def check_criteria(criteria: list[CriterionSpec]) -> None:
    """Reject empty or duplicate-named criteria sets."""
    if not criteria:
        raise ValueError("criteria set is empty")
    names = [c.name for c in criteria]
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise ValueError(f"duplicate criterion names: {dupes}")


@dataclass(eq=False)
class ScoreMatrix:
    """Dense per-sample x per-criterion scores, every cell in [1, 5].

    Columns flagged ``is_likert`` hold integer judge scores; unflagged columns
    hold scaled continuous measurements.
    """

    sample_ids: list[str]
    criteria: list[str]
    values: np.ndarray
    is_likert: list[bool]

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        shape = (len(self.sample_ids), len(self.criteria))
        if values.shape != shape:
            raise ValueError(f"values shape {values.shape} does not match {shape}")
        if len(self.is_likert) != len(self.criteria):
            raise ValueError("is_likert length does not match criteria")
        if len(set(self.sample_ids)) != len(self.sample_ids):
            raise ValueError("sample ids are not unique")
        if values.size:
            if not np.all(np.isfinite(values)):
                raise ValueError("scores must be finite")
            if values.min() < 1.0 or values.max() > 5.0:
                raise ValueError("scores must lie in [1.0, 5.0]")
        for j, likert in enumerate(self.is_likert):
            if likert and values.size:
                col = values[:, j]
                if not np.all(col == np.round(col)):
                    raise ValueError(
                        f"likert column {self.criteria[j]!r} contains non-integer scores"
                    )
        values.setflags(write=False)
        self.values = values

    @property
    def n_samples(self) -> int:
        return len(self.sample_ids)

    def column(self, name: str) -> np.ndarray:
        try:
            j = self.criteria.index(name)
        except ValueError:
            raise ValueError(f"unknown criterion {name!r}") from None
        return self.values[:, j]

    def to_dict(self) -> dict:
        return {
            "sample_ids": list(self.sample_ids),
            "criteria": list(self.criteria),
            "values": self.values.tolist(),
            "is_likert": list(self.is_likert),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ScoreMatrix":
        for key in ("sample_ids", "criteria", "values", "is_likert"):
            if key not in doc:
                raise ValueError(f"score matrix document missing field {key!r}")
        return cls(
            sample_ids=list(doc["sample_ids"]),
            criteria=list(doc["criteria"]),
            values=np.asarray(doc["values"], dtype=float),
            is_likert=list(doc["is_likert"]),
        )


@dataclass(eq=False)
class WeightModel:
    """The fitted artifact: distances, signs, eigen weights, and provenance.

    ``unsigned_weights`` sum to 1; ``signed_weights`` are the same weights
    multiplied by the per-criterion direction signs, without re-normalization.
    """

    criteria: list[str]
    jsd_distances: list[float]
    signs: list[int]
    unsigned_weights: list[float]
    signed_weights: list[float]
    comparison_matrix: np.ndarray
    lambda_max: float
    consistency_ratio: float
    fit_metadata: dict

    def __post_init__(self) -> None:
        m = len(self.criteria)
        if m < 2:
            raise ValueError("a weight model needs at least 2 criteria")
        if len(set(self.criteria)) != m:
            raise ValueError("criterion names are not unique")
        for name, seq in (
            ("jsd_distances", self.jsd_distances),
            ("signs", self.signs),
            ("unsigned_weights", self.unsigned_weights),
            ("signed_weights", self.signed_weights),
        ):
            if len(seq) != m:
                raise ValueError(f"{name} length {len(seq)} does not match {m} criteria")
        for d in self.jsd_distances:
            if not (0.0 <= d <= 1.0):
                raise ValueError(f"jsd distance {d!r} outside [0, 1]")
        for s in self.signs:
            if s not in (-1, 0, 1):
                raise ValueError(f"sign {s!r} outside {{-1, 0, +1}}")
        if any(w <= 0 for w in self.unsigned_weights):
            raise ValueError("unsigned weights must all be positive")
        total = sum(self.unsigned_weights)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"unsigned weights sum to {total!r}, expected 1")
        for k, (s, w, sw) in enumerate(
            zip(self.signs, self.unsigned_weights, self.signed_weights)
        ):
            if sw != s * w:
                raise ValueError(f"signed weight {k} does not equal sign * weight")
        a = np.array(self.comparison_matrix, dtype=float)
        if a.shape != (m, m):
            raise ValueError(f"comparison matrix shape {a.shape}, expected ({m}, {m})")
        if not np.all(np.diag(a) == 1.0):
            raise ValueError("comparison matrix diagonal must be exactly 1")
        if np.max(np.abs(a * a.T - 1.0)) > 1e-9:
            raise ValueError("comparison matrix is not reciprocal")
        if a.min() < SAATY_MIN - 1e-12 or a.max() > SAATY_MAX + 1e-12:
            raise ValueError("comparison matrix entries outside [1/9, 9]")
        a.setflags(write=False)
        self.comparison_matrix = a


_MODEL_FIELDS = (
    "criteria",
    "jsd_distances",
    "signs",
    "unsigned_weights",
    "signed_weights",
    "comparison_matrix",
    "lambda_max",
    "consistency_ratio",
    "fit_metadata",
)


def model_to_dict(model: WeightModel) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "criteria": list(model.criteria),
        "jsd_distances": [float(d) for d in model.jsd_distances],
        "signs": [int(s) for s in model.signs],
        "unsigned_weights": [float(w) for w in model.unsigned_weights],
        "signed_weights": [float(w) for w in model.signed_weights],
        "comparison_matrix": model.comparison_matrix.tolist(),
        "lambda_max": float(model.lambda_max),
        "consistency_ratio": float(model.consistency_ratio),
        "fit_metadata": model.fit_metadata,
    }


def model_from_dict(doc: dict) -> WeightModel:
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError(f"not a {MODEL_FORMAT} document")
    if doc.get("version") != MODEL_VERSION:
        raise ValueError(
            f"unsupported model version {doc.get('version')!r}, expected {MODEL_VERSION}"
        )
    for key in _MODEL_FIELDS:
        if key not in doc:
            raise ValueError(f"model document missing field {key!r}")
    return WeightModel(
        criteria=list(doc["criteria"]),
        jsd_distances=list(doc["jsd_distances"]),
        signs=[int(s) for s in doc["signs"]],
        unsigned_weights=list(doc["unsigned_weights"]),
        signed_weights=list(doc["signed_weights"]),
        comparison_matrix=np.asarray(doc["comparison_matrix"], dtype=float),
        lambda_max=float(doc["lambda_max"]),
        consistency_ratio=float(doc["consistency_ratio"]),
        fit_metadata=dict(doc["fit_metadata"]),
    )


def save_model(model: WeightModel, path: str | Path) -> None:
    """Write the model as a single JSON document (sorted keys, full precision)."""
    doc = model_to_dict(model)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> WeightModel:
    """Read a model document back; all construction invariants are re-checked."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON: {exc}") from exc
    return model_from_dict(doc)


@dataclass(frozen=True)
class DatasetSchema:
    """Field-name mapping from raw records to TextSample."""

    text_field: str
    signal_field: str
    signal_type: str  # "discrete" | "continuous"
    id_field: str | None = None

    def __post_init__(self) -> None:
        if self.signal_type not in ("discrete", "continuous"):
            raise ValueError(
                f"signal_type must be 'discrete' or 'continuous', got {self.signal_type!r}"
            )


def _parse_signal(value: object, schema: DatasetSchema) -> SignalValue:
    if schema.signal_type == "discrete":
        if isinstance(value, bool):
            raise ValueError(f"label outside {{0,1}}: {value!r}")
        if isinstance(value, int):
            label = value
        elif isinstance(value, str):
            try:
                label = int(value.strip())
            except ValueError:
                raise ValueError(f"signal {value!r} not parseable as a discrete label") from None
        elif isinstance(value, float) and value.is_integer():
            label = int(value)
        else:
            raise ValueError(f"signal {value!r} not parseable as a discrete label")
        return DiscreteSignal(label)
    try:
        return ContinuousSignal(float(value))  # type: ignore[arg-type]
    except (TypeError, ValueError) as exc:
        raise ValueError(f"signal {value!r} not parseable as a continuous value: {exc}") from None


def _iter_records(path: Path):
    """Yield (line_number, record_dict) from a JSONL or CSV file."""
    if path.suffix.lower() == ".csv":
        with path.open(newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            for record in reader:
                yield reader.line_num, record
        return
    with path.open(encoding="utf-8") as handle:
        for line_num, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: line {line_num}: invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise ValueError(f"{path}: line {line_num}: record is not an object")
            yield line_num, record


def load_dataset(path: str | Path, schema: DatasetSchema) -> list[TextSample]:
    """Load all samples in file order; ids are sequential when no id field is mapped."""
    path = Path(path)
    if not path.exists():
        raise ValueError(f"dataset file not found: {path}")
    samples: list[TextSample] = []
    seen_ids: set[str] = set()
    for index, (line_num, record) in enumerate(_iter_records(path)):
        where = f"{path}: line {line_num}"
        text = record.get(schema.text_field)
        if text is None:
            raise ValueError(f"{where}: missing text field {schema.text_field!r}")
        raw_signal = record.get(schema.signal_field)
        if raw_signal is None:
            raise ValueError(f"{where}: missing signal field {schema.signal_field!r}")
        if schema.id_field is not None:
            sample_id = record.get(schema.id_field)
            if sample_id is None:
                raise ValueError(f"{where}: missing id field {schema.id_field!r}")
            sample_id = str(sample_id)
        else:
            sample_id = str(index)
        if sample_id in seen_ids:
            raise ValueError(f"{where}: duplicate sample id {sample_id!r}")
        seen_ids.add(sample_id)
        try:
            signal = _parse_signal(raw_signal, schema)
            samples.append(TextSample(id=sample_id, text=str(text), signal=signal))
        except ValueError as exc:
            raise ValueError(f"{where}: {exc}") from None
    if not samples:
        raise ValueError(f"{path}: dataset is empty")
    return samples


def _scaling_from_dict(doc: dict) -> Scaling:
    method = doc.get("method", "zscore")
    if method == "zscore":
        return ZScoreScaling(sigma_scale=float(doc.get("sigma_scale", 2.0)))
    if method == "minmax":
        return MinMaxScaling()
    raise ValueError(f"unknown scaling method {method!r}")


def load_criteria(path: str | Path) -> list[CriterionSpec]:
    """Load a criteria-spec JSON file (a list, or an object with a 'criteria' list)."""
    path = Path(path)
    if not path.exists():
        raise ValueError(f"criteria file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON: {exc}") from exc
    entries = doc.get("criteria") if isinstance(doc, dict) else doc
    if not isinstance(entries, list):
        raise ValueError(f"{path}: expected a list of criteria")
    criteria: list[CriterionSpec] = []
    for i, entry in enumerate(entries):
        where = f"{path}: criteria[{i}]"
        if not isinstance(entry, dict) or "name" not in entry:
            raise ValueError(f"{where}: each criterion needs a 'name'")
        name = str(entry["name"])
        kind = entry.get("kind", "llm" if "prompt" in entry else "quantitative")
        try:
            if kind == "llm":
                prompt_doc = entry.get("prompt")
                if not isinstance(prompt_doc, dict):
                    raise ValueError("llm criterion needs a 'prompt' object")
                prompt = PromptSpec(
                    definition=str(prompt_doc.get("definition", "")),
                    guidelines=str(prompt_doc.get("guidelines", "")),
                    scale_description=str(prompt_doc.get("scale_description", "")),
                    output_spec=str(prompt_doc.get("output_spec", DEFAULT_OUTPUT_SPEC)),
                )
                criteria.append(CriterionSpec(name=name, prompt=prompt))
            elif kind == "quantitative":
                measure_doc = entry.get("measure")
                if not isinstance(measure_doc, dict):
                    raise ValueError("quantitative criterion needs a 'measure' object")
                measure_name = str(measure_doc.get("measure_name", "word_count"))
                if measure_name == "custom":
                    raise ValueError(
                        "custom measurers are code; construct CriterionSpec in Python"
                    )
                measure = MeasureSpec(
                    measure_name=measure_name,
                    scaling=_scaling_from_dict(measure_doc.get("scaling", {})),
                )
                criteria.append(CriterionSpec(name=name, measure=measure))
            else:
                raise ValueError(f"unknown criterion kind {kind!r}")
        except ValueError as exc:
            raise ValueError(f"{where}: {exc}") from None
    check_criteria(criteria)
    return criteria
