"""
Dataset ingestion for the two supported on-disk formats.

content-cites (planetoid style)
    `<name>.content`: `node_id<TAB>f_1<TAB>...<TAB>f_d<TAB>label`, one node per line
    `<name>.cites`: `cited_id<TAB>citing_id`, one directed citation per line

json
    one object `{"edges": [[i, j], ...], "features": [[...], ...], "labels": [...]}` with integer node indices;
    optional keys: `name`, `n_classes`, `row_normalized`
"""
import json
import logging
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np
from smart_open import open

from featprop.common.exceptions import DatasetIntegrityError, DatasetParseError
from featprop.loaders.graph import Dataset, FeatureMatrix, Graph, LabelVector
from featprop.loaders.vocabulary import Vocabulary

logger = logging.getLogger(__name__)

FORMATS = ('content-cites', 'json')


def load_dataset(path: Union[str, Path], format: str = 'content-cites', row_normalize: bool = True,
                 strict_edges: bool = True, name: str = None) -> Dataset:
    """
    Load a dataset from disk

    :param path: for content-cites, a directory holding one `.content`/`.cites` pair, the `.content` file or the
           common prefix; for json, the json file
    :param format: `content-cites` or `json`
    :param row_normalize: scale feature rows to unit L1 norm
    :param strict_edges: if False, citations to undeclared nodes are dropped with a warning instead of failing
    :param name: dataset name, defaults to the file stem
    :return: the dataset, node order = first appearance in the node/content file
    """
    if format == 'content-cites':
        dataset = _load_content_cites(Path(str(path)).expanduser(), strict_edges=strict_edges, name=name)
    elif format == 'json':
        dataset = _load_json(Path(str(path)).expanduser(), name=name)
    else:
        raise ValueError(f"Unknown dataset format `{format}`, expected one of {', '.join(FORMATS)}")

    if row_normalize and not dataset.row_normalized:
        dataset = Dataset(graph=dataset.graph, features=dataset.features.row_normalized(), labels=dataset.labels,
                          name=dataset.name, node_vocab=dataset.node_vocab, label_vocab=dataset.label_vocab,
                          row_normalized=True)

    logger.info(f"Loaded {dataset}")
    return dataset


def _resolve_content_cites(path: Path) -> Tuple[Path, Path]:

    if path.is_dir():
        contents = sorted(path.glob('*.content'))
        if len(contents) != 1:
            raise FileNotFoundError(f"Expected exactly one .content file in {path}, found {len(contents)}")
        prefix = contents[0].with_suffix('')
    elif path.suffix in {'.content', '.cites'}:
        prefix = path.with_suffix('')
    else:
        prefix = path

    content, cites = prefix.with_suffix('.content'), prefix.with_suffix('.cites')
    for p in (content, cites):
        if not p.exists():
            raise FileNotFoundError(f"Missing dataset file {p}")
    return content, cites


def _load_content_cites(path: Path, strict_edges: bool, name: str) -> Dataset:

    content_path, cites_path = _resolve_content_cites(path)

    node_vocab = Vocabulary(name='node')
    label_vocab = Vocabulary(name='label')
    rows: List[List[float]] = []
    labels: List[int] = []

    with open(str(content_path), 'r') as f:
        for line_number, line in enumerate(f, start=1):
            line = line.rstrip('\r\n')
            if not line.strip():
                continue
            fields = line.split('\t')
            if len(fields) < 2:
                raise DatasetParseError(str(content_path), line_number, "expected `node_id<TAB>features...<TAB>label`")
            node_id, raw_features, label = fields[0], fields[1:-1], fields[-1]
            if node_id in node_vocab:
                raise DatasetIntegrityError(f"duplicate node id `{node_id}` at {content_path}:{line_number}")
            if rows and len(raw_features) != len(rows[0]):
                raise DatasetParseError(str(content_path), line_number,
                                        f"expected {len(rows[0])} features, got {len(raw_features)}")
            try:
                rows.append([float(v) for v in raw_features])
            except ValueError as e:
                raise DatasetParseError(str(content_path), line_number, str(e)) from None
            node_vocab.add_token(node_id)
            labels.append(label_vocab.add_token(label))

    edges: List[Tuple[int, int]] = []
    skipped = 0
    with open(str(cites_path), 'r') as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            fields = line.split()
            if len(fields) != 2:
                raise DatasetParseError(str(cites_path), line_number, "expected `cited_id<TAB>citing_id`")
            ends = [node_vocab.lookup_token(node_id) for node_id in fields]
            if None in ends:
                unknown = fields[ends.index(None)]
                if strict_edges:
                    raise DatasetIntegrityError(f"edge at {cites_path}:{line_number} references unknown node `{unknown}`")
                skipped += 1
                continue
            edges.append((ends[0], ends[1]))

    if skipped:
        logger.warning(f"Dropped {skipped} citations referencing undeclared nodes in {cites_path}")

    n_features = len(rows[0]) if rows else 0
    features = np.array(rows, dtype=np.float64).reshape(len(rows), n_features)
    return Dataset(graph=Graph(n_nodes=len(node_vocab), edges=edges),
                   features=FeatureMatrix(features),
                   labels=LabelVector(labels, n_classes=max(len(label_vocab), 2)),
                   name=name or content_path.stem,
                   node_vocab=node_vocab,
                   label_vocab=label_vocab)


def _load_json(path: Path, name: str) -> Dataset:

    with open(str(path), 'r') as f:
        try:
            payload = json.load(f)
        except json.JSONDecodeError as e:
            raise DatasetParseError(str(path), e.lineno, e.msg) from None

    if not isinstance(payload, dict) or not {'edges', 'features', 'labels'} <= set(payload):
        raise DatasetParseError(str(path), 1, "expected an object with `edges`, `features` and `labels`")

    raw_labels = payload['labels']
    features = payload['features']
    n_nodes = len(raw_labels)
    if len(features) != n_nodes:
        raise DatasetIntegrityError(f"{len(features)} feature rows for {n_nodes} labels")
    try:
        values = np.array(features, dtype=np.float64).reshape(n_nodes, -1 if n_nodes else 0)
    except ValueError as e:
        raise DatasetIntegrityError(f"ragged or non-numeric features: {e}") from None

    edges: List[Tuple[int, int]] = []
    for k, edge in enumerate(payload['edges']):
        if not isinstance(edge, (list, tuple)) or len(edge) != 2 or not all(isinstance(v, int) for v in edge):
            raise DatasetIntegrityError(f"edge #{k} must be a pair of integer node indices, got {edge!r}")
        if not all(0 <= v < n_nodes for v in edge):
            raise DatasetIntegrityError(f"edge #{k} {edge!r} references an unknown node")
        edges.append((edge[0], edge[1]))

    # integer labels included, classes are numbered by first appearance
    label_vocab = Vocabulary(name='label')
    labels = label_vocab.add_many(str(label) for label in raw_labels)
    n_classes = max(len(label_vocab), int(payload.get('n_classes', 0)), 2)

    return Dataset(graph=Graph(n_nodes=n_nodes, edges=edges),
                   features=FeatureMatrix(values),
                   labels=LabelVector(labels, n_classes=n_classes),
                   name=name or payload.get('name') or path.stem,
                   label_vocab=label_vocab,
                   row_normalized=bool(payload.get('row_normalized', False)))


def dataset_to_serializable(dataset: Dataset) -> Dict:

    return {
        'name': dataset.name,
        'n_classes': dataset.n_classes,
        'row_normalized': dataset.row_normalized,
        'edges': dataset.graph.edges.tolist(),
        'features': dataset.features.values.tolist(),
        'labels': dataset.labels.labels.tolist()}


def save_dataset_json(dataset: Dataset, path: Union[str, Path]) -> Path:

    path = Path(str(path)).expanduser()
    if path.parent:
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(str(path), 'w') as f:
        json.dump(dataset_to_serializable(dataset), f)
    logger.info(f"Wrote {dataset} to {path}")
    return path
