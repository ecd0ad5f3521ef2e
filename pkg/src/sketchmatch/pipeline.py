"""Dataset ingestion, configuration, model persistence and the train/query/evaluate flows."""

from __future__ import annotations

import dataclasses
import enum
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from . import classify, evaluate
from .classify import LinearSvmModel, RankedMatches
from .eigenspace import CenteringMode, EigenModel, FeatureVector, train
from .errors import ConfigError, DataError
from .image import GrayImage, load_pgm, resize_bilinear
from .modality import (
    OffsetI,
    SourceKind,
    compute_offset,
    rescaled_band,
    to_new_dimension,
)
from .wavelet import band_dims

log = logging.getLogger(__name__)

MODEL_MAGIC = "SKETCHMATCH-MODEL"
MODEL_VERSION = 1


class Classifier(str, enum.Enum):
    KNN = "knn"
    SVM = "svm"


class OffsetSpace(str, enum.Enum):
    POST_NEGATIVE = "post_negative"
    PRE_NEGATIVE = "pre_negative"


@dataclass
class PipelineConfig:
    resize_w: int = 50
    resize_h: int = 65
    wavelet_levels: int = 3
    centering_mode: CenteringMode = CenteringMode.PER_IMAGE_SCALAR
    eigen_threshold: float = 1e-10
    classifier: Classifier = Classifier.KNN
    knn_epsilon: float = classify.DEFAULT_KNN_EPSILON
    svm_c: float = classify.DEFAULT_SVM_C
    top_n: int = 5
    offset_space: OffsetSpace = OffsetSpace.POST_NEGATIVE

    def __post_init__(self):
        try:
            self.resize_w = int(self.resize_w)
            self.resize_h = int(self.resize_h)
            self.wavelet_levels = int(self.wavelet_levels)
            self.top_n = int(self.top_n)
            self.eigen_threshold = float(self.eigen_threshold)
            self.knn_epsilon = float(self.knn_epsilon)
            self.svm_c = float(self.svm_c)
            self.centering_mode = CenteringMode(self.centering_mode)
            self.classifier = Classifier(self.classifier)
            self.offset_space = OffsetSpace(self.offset_space)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        self.validate()

    def validate(self) -> None:
        if self.resize_w < 1 or self.resize_h < 1:
            raise ConfigError(f"resize dimensions must be positive: {self.resize_w}x{self.resize_h}")
        if self.top_n < 1:
            raise ConfigError(f"top_n must be >= 1, got {self.top_n}")
        if self.svm_c <= 0:
            raise ConfigError(f"svm_c must be positive, got {self.svm_c}")
        if self.eigen_threshold < 0 or self.knn_epsilon < 0:
            raise ConfigError("eigen_threshold and knn_epsilon must be non-negative")
        band_dims(self.resize_w, self.resize_h, self.wavelet_levels)

    @property
    def feature_dims(self) -> tuple[int, int]:
        return band_dims(self.resize_w, self.resize_h, self.wavelet_levels)

    def to_dict(self) -> dict:
        return {
            k: (v.value if isinstance(v, enum.Enum) else v)
            for k, v in dataclasses.asdict(self).items()
        }

    @classmethod
    def from_dict(cls, values: dict) -> PipelineConfig:
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**values)

    @classmethod
    def from_file(cls, path, overrides: Optional[dict] = None) -> PipelineConfig:
        values = parse_config_text(Path(path).read_text())
        values.update(overrides or {})
        return cls.from_dict(values)


def parse_config_text(text: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment; dashes in keys become underscores."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


@dataclass(frozen=True)
class ManifestEntry:
    label: str
    photo: Path
    sketch: Optional[Path] = None


@dataclass(frozen=True)
class DatasetManifest:
    root: Path
    entries: tuple[ManifestEntry, ...]

    @property
    def n_photos(self) -> int:
        return len(self.entries)

    @property
    def n_sketches(self) -> int:
        return sum(e.sketch is not None for e in self.entries)

    def paired(self) -> list[ManifestEntry]:
        return [e for e in self.entries if e.sketch is not None]


def _check_pgm(path: Path) -> None:
    try:
        load_pgm(path)
    except DataError as exc:
        raise type(exc)(f"{path}: {exc}") from None
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from None


def ingest(root) -> DatasetManifest:
    """Pair ``photos/<name>.pgm`` with ``sketches/<name>.pgm`` by basename."""
    root = Path(root)
    if not root.is_dir():
        raise DataError(f"dataset root {root} does not exist")
    photo_dir = root / "photos"
    if not photo_dir.is_dir():
        raise DataError(f"{photo_dir} does not exist")
    photos = sorted(photo_dir.glob("*.pgm"))
    if not photos:
        raise DataError(f"{photo_dir} contains no .pgm files")
    sketch_dir = root / "sketches"
    sketches = {p.stem: p for p in sketch_dir.glob("*.pgm")} if sketch_dir.is_dir() else {}

    entries = []
    for photo in photos:
        sketch = sketches.get(photo.stem)
        _check_pgm(photo)
        if sketch is not None:
            _check_pgm(sketch)
        entries.append(ManifestEntry(photo.stem, photo, sketch))
    return DatasetManifest(root, tuple(entries))


def preprocess(img: GrayImage, config: PipelineConfig) -> GrayImage:
    if img.dims == (config.resize_w, config.resize_h):
        return img
    return resize_bilinear(img, config.resize_w, config.resize_h)


def new_dimension_vector(
    img: GrayImage, kind: SourceKind, config: PipelineConfig, I: Optional[OffsetI] = None
) -> np.ndarray:
    nd = to_new_dimension(preprocess(img, config), kind, I, levels=config.wavelet_levels)
    return nd.img.flat()


@dataclass(frozen=True, eq=False)
class TrainedModel:
    """Everything a query needs: config, eigenspace, gallery and optional SVM."""

    config: PipelineConfig
    eigen: EigenModel
    svm: Optional[LinearSvmModel] = None
    warnings: tuple[str, ...] = field(default=())

    @property
    def offset(self) -> OffsetI:
        return self.eigen.offset_I

    def with_svm(self) -> TrainedModel:
        if self.svm is not None:
            return self
        return dataclasses.replace(self, svm=train_svm(self.eigen, self.config.svm_c, self.config.knn_epsilon))

    def rank(self, probe_coords: np.ndarray, classifier: Optional[Classifier] = None) -> RankedMatches:
        classifier = Classifier(classifier or self.config.classifier)
        eps = self.config.knn_epsilon * float(self.eigen.eigenvalues.max())
        if classifier is Classifier.SVM:
            return classify.svm_rank(self.with_svm().svm, whiten(self.eigen, probe_coords, eps))
        return classify.knn_rank(self.eigen, probe_coords, eps)

    def query(self, sketch: GrayImage, classifier: Optional[Classifier] = None) -> RankedMatches:
        vec = new_dimension_vector(sketch, SourceKind.SKETCH, self.config, self.offset)
        if vec.size != self.eigen.dim:
            raise DataError(f"query has {vec.size} features, model expects {self.eigen.dim}")
        return self.rank(self.eigen.project(vec), classifier)


def whiten(eigen: EigenModel, coords: np.ndarray, epsilon: float) -> np.ndarray:
    """Scale eigenspace coordinates by 1/sqrt(eigenvalue + epsilon).

    Euclidean geometry on the result is the Mahalanobis geometry used by
    K-NN. It also keeps the SVM dual well conditioned: raw coordinates
    span several orders of magnitude in scale.
    """
    return np.asarray(coords) / np.sqrt(eigen.eigenvalues + epsilon)


def train_svm(eigen: EigenModel, C: float, knn_epsilon: float = classify.DEFAULT_KNN_EPSILON) -> LinearSvmModel:
    eps = knn_epsilon * float(eigen.eigenvalues.max())
    gallery = list(zip(eigen.gallery_labels, whiten(eigen, eigen.gallery_coords, eps)))
    return classify.svm_train(gallery, C)


def _offset_for(photos: list[GrayImage], sketches: list[GrayImage], config: PipelineConfig) -> OffsetI:
    levels = config.wavelet_levels
    if config.offset_space is OffsetSpace.PRE_NEGATIVE:
        train_set = [rescaled_band(p, levels) for p in photos]
        test_set = [rescaled_band(s, levels) for s in sketches]
    else:
        train_set = [to_new_dimension(p, SourceKind.PHOTO, levels=levels).img for p in photos]
        test_set = [to_new_dimension(s, SourceKind.PHOTO, levels=levels).img for s in sketches]
    return compute_offset(train_set, test_set)


def train_model(manifest: DatasetManifest, config: PipelineConfig) -> TrainedModel:
    if manifest.n_photos < 2:
        raise DataError(f"training needs at least 2 photos, got {manifest.n_photos}")
    photos = [preprocess(load_pgm(e.photo), config) for e in manifest.entries]
    sketches = [preprocess(load_pgm(e.sketch), config) for e in manifest.paired()]

    warnings = []
    if sketches:
        offset = _offset_for(photos, sketches, config)
    else:
        offset = OffsetI(0)
        warnings.append("no sketches found; offset I set to 0")
        log.warning(warnings[-1])

    features = [
        FeatureVector(
            to_new_dimension(p, SourceKind.PHOTO, levels=config.wavelet_levels).img.flat(),
            e.label,
        )
        for p, e in zip(photos, manifest.entries)
    ]
    eigen = train(features, config.centering_mode, config.eigen_threshold, offset_I=offset)
    svm = train_svm(eigen, config.svm_c, config.knn_epsilon) if config.classifier is Classifier.SVM else None
    return TrainedModel(config, eigen, svm, tuple(warnings))


# model file ---------------------------------------------------------------

def _num(x: float) -> str:
    return format(float(x), ".17g")


def _nums(values) -> str:
    return " ".join(_num(v) for v in np.asarray(values).reshape(-1))


def dumps_model(model: TrainedModel) -> str:
    eig = model.eigen
    lines = [
        f"{MODEL_MAGIC} {MODEL_VERSION}",
        "config " + json.dumps(model.config.to_dict(), sort_keys=True),
        f"offset_I {model.offset.value}",
        f"warnings {len(model.warnings)}",
        *("warning " + json.dumps(w) for w in model.warnings),
        f"centering {eig.centering_mode.value}",
        f"dim {eig.dim}",
        f"components {eig.n_components}",
        "global_mean " + ("none" if eig.global_mean is None else _nums(eig.global_mean)),
        "eigenvalues " + _nums(eig.eigenvalues),
        "eigenvectors",
        *(_nums(row) for row in eig.eigenvectors),
        f"gallery {len(eig.gallery_labels)}",
        *(
            json.dumps(label) + " " + _nums(coords)
            for label, coords in zip(eig.gallery_labels, eig.gallery_coords)
        ),
    ]
    if model.svm is None:
        lines.append("svm none")
    else:
        svm = model.svm
        lines.append(f"svm {len(svm.labels)} {_num(svm.C)}")
        for label, b, w in zip(svm.labels, svm.biases, svm.weights):
            lines.append(json.dumps(label) + f" {_num(b)} " + _nums(w))
    lines.append("end")
    return "\n".join(lines) + "\n"


class _Lines:
    def __init__(self, text: str):
        self._it: Iterator[str] = iter(text.splitlines())
        self.lineno = 0

    def next(self) -> str:
        try:
            line = next(self._it)
        except StopIteration:
            raise DataError("model file is truncated") from None
        self.lineno += 1
        return line

    def field(self, key: str) -> str:
        line = self.next()
        name, _, rest = line.partition(" ")
        if name != key:
            raise DataError(f"model line {self.lineno}: expected {key!r}, got {name!r}")
        return rest


def _floats(text: str, n: Optional[int] = None) -> np.ndarray:
    try:
        values = np.array([float(t) for t in text.split()], dtype=np.float64)
    except ValueError as exc:
        raise DataError(f"bad number in model file: {exc}") from None
    if n is not None and values.size != n:
        raise DataError(f"expected {n} numbers in model file, got {values.size}")
    return values


def _labelled(line: str) -> tuple[str, str]:
    try:
        label, end = json.JSONDecoder().raw_decode(line)
    except json.JSONDecodeError as exc:
        raise DataError(f"bad label in model file: {exc}") from None
    return str(label), line[end:]


def loads_model(text: str) -> TrainedModel:
    lines = _Lines(text)
    header = lines.next().split()
    if not header or header[0] != MODEL_MAGIC:
        raise DataError("bad magic: not a model file")
    if len(header) != 2 or header[1] != str(MODEL_VERSION):
        raise DataError(f"unsupported model version {header[1:]}")
    try:
        config = PipelineConfig.from_dict(json.loads(lines.field("config")))
    except json.JSONDecodeError as exc:
        raise DataError(f"bad config record: {exc}") from None
    offset = OffsetI(int(lines.field("offset_I")))
    warnings = tuple(json.loads(lines.field("warning")) for _ in range(int(lines.field("warnings"))))
    mode = CenteringMode(lines.field("centering"))
    D = int(lines.field("dim"))
    K = int(lines.field("components"))
    mean_text = lines.field("global_mean")
    global_mean = None if mean_text == "none" else _floats(mean_text, D)
    eigenvalues = _floats(lines.field("eigenvalues"), K)
    lines.field("eigenvectors")
    eigenvectors = np.array([_floats(lines.next(), K) for _ in range(D)]).reshape(D, K)
    n_gallery = int(lines.field("gallery"))
    labels, coords = [], []
    for _ in range(n_gallery):
        label, rest = _labelled(lines.next())
        labels.append(label)
        coords.append(_floats(rest, K))
    svm_head = lines.field("svm").split()
    svm = None
    if svm_head != ["none"]:
        n_cls, C = int(svm_head[0]), float(svm_head[1])
        svm_labels, biases, weights = [], [], []
        for _ in range(n_cls):
            label, rest = _labelled(lines.next())
            values = _floats(rest, K + 1)
            svm_labels.append(label)
            biases.append(values[0])
            weights.append(values[1:])
        svm = LinearSvmModel(
            tuple(svm_labels), np.array(weights).reshape(n_cls, K), np.array(biases), C
        )
    if lines.next() != "end":
        raise DataError("model file missing end marker")

    eigen = EigenModel(
        dim=D,
        centering_mode=mode,
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
        gallery_labels=tuple(labels),
        gallery_coords=np.array(coords).reshape(n_gallery, K),
        global_mean=global_mean,
        offset_I=offset,
    )
    return TrainedModel(config, eigen, svm, warnings)


def save_model(model: TrainedModel, path) -> None:
    path = Path(path)
    try:
        path.write_text(dumps_model(model))
    except OSError as exc:
        raise DataError(f"cannot write model {path}: {exc.strerror or exc}") from None


def load_model(path) -> TrainedModel:
    path = Path(path)
    try:
        text = path.read_text()
    except UnicodeDecodeError:
        raise DataError(f"{path}: bad magic: not a model file") from None
    except OSError as exc:
        raise DataError(f"cannot read model {path}: {exc.strerror or exc}") from None
    return loads_model(text)


# commands -----------------------------------------------------------------

def cmd_train(config: PipelineConfig, root, model_path) -> TrainedModel:
    model = train_model(ingest(root), config)
    save_model(model, model_path)
    return model


def cmd_query(model_path, sketch_path, top_n: Optional[int] = None,
              classifier: Optional[Classifier] = None) -> RankedMatches:
    model = load_model(model_path)
    try:
        sketch = load_pgm(sketch_path)
    except OSError as exc:
        raise DataError(f"cannot read {sketch_path}: {exc.strerror or exc}") from None
    matches = model.query(sketch, classifier)
    return matches.top(top_n or model.config.top_n)


@dataclass(frozen=True)
class EvaluationResult:
    modality_rows: tuple[evaluate.ModalityRow, ...]
    curves: dict  # variant name -> full-length CmcCurve
    top_n: int

    def report_text(self) -> str:
        shown = {k: evaluate.CmcCurve(c.ranks[: self.top_n], c.n_probes) for k, c in self.curves.items()}
        n = next(iter(self.curves.values())).n_probes
        return (
            "Similarity between photo-sketch pairs (RMSE)\n\n"
            + evaluate.format_modality_table(self.modality_rows)
            + f"\nCumulative match scores (%), {n} probes\n\n"
            + evaluate.format_cmc_table(shown)
        )

    def report_csv(self) -> str:
        shown = {k: evaluate.CmcCurve(c.ranks[: self.top_n], c.n_probes) for k, c in self.curves.items()}
        return evaluate.to_csv(
            evaluate.modality_csv_rows(self.modality_rows) + evaluate.cmc_csv_rows(shown)
        )


def run_evaluation(model: TrainedModel, manifest: DatasetManifest) -> EvaluationResult:
    paired = manifest.paired()
    if not paired:
        raise DataError(f"{manifest.root}: no photo/sketch pairs to evaluate")
    config = model.config
    photos = [preprocess(load_pgm(e.photo), config) for e in paired]
    sketches = [preprocess(load_pgm(e.sketch), config) for e in paired]
    rows = evaluate.modality_report(
        list(zip(photos, sketches)), model.offset, config.wavelet_levels,
        names=[e.label for e in paired],
    )

    model = model.with_svm()
    coords = [
        model.eigen.project(new_dimension_vector(s, SourceKind.SKETCH, config, model.offset))
        for s in sketches
    ]
    gallery_size = len(set(model.eigen.gallery_labels))
    curves = {}
    for variant in (Classifier.KNN, Classifier.SVM):
        ranked = [(e.label, model.rank(c, variant)) for e, c in zip(paired, coords)]
        curves[variant.value] = evaluate.cmc(ranked, gallery_size)
    return EvaluationResult(tuple(rows), curves, min(config.top_n, gallery_size))


def report_paths(report_path) -> tuple[Path, Path]:
    path = Path(report_path)
    if path.suffix.lower() == ".csv":
        return path.with_suffix(".txt"), path
    return path, path.with_suffix(".csv")


def cmd_evaluate(model_path, root, report_path) -> EvaluationResult:
    result = run_evaluation(load_model(model_path), ingest(root))
    text_path, csv_path = report_paths(report_path)
    for path, body in ((text_path, result.report_text()), (csv_path, result.report_csv())):
        try:
            path.write_text(body)
        except OSError as exc:
            raise DataError(f"cannot write report {path}: {exc.strerror or exc}") from None
    return result
