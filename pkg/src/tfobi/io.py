"""
Text file formats: tensor samples, fitted models, plain matrices, source-grid
specs, ``key=value`` configs and semeion-format digit records.

Floats are written with 17 significant digits so they round-trip exactly.
Parse failures raise ``ParseError`` naming the line (1-based) and, where it
applies, the column (1-based field index).
"""

import numpy as np

from .errors import ParseError
from .estimators import UnmixingModel
from .simulation.distributions import CATALOG
from .asymptotics import MomentProfile

TENSOR_MAGIC = "TBSS 1"
MODEL_MAGIC = "TFOBI-MODEL 1"
SEMEION_FIELDS = 266


def fmt(x):
    return format(float(x), ".17g")


def _fmt_row(values):
    return " ".join(fmt(v) for v in np.ravel(values))


def _read_lines(path):
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read().splitlines()


def _floats(tokens, line_no, first_col=1):
    out = np.empty(len(tokens))
    for j, tok in enumerate(tokens):
        try:
            out[j] = float(tok)
        except ValueError:
            raise ParseError(f"not a number: {tok!r}", line=line_no, column=first_col + j) from None
    return out


def _ints(tokens, line_no, what, minimum=0):
    out = []
    for j, tok in enumerate(tokens):
        try:
            v = int(tok)
        except ValueError:
            raise ParseError(f"{what}: expected an integer, got {tok!r}", line=line_no, column=j + 1) from None
        if v < minimum:
            raise ParseError(f"{what}: expected a value >= {minimum}, got {v}", line=line_no, column=j + 1)
        out.append(v)
    return out


# -- tensor samples ----------------------------------------------------------


def format_tensor_sample(X):
    X = np.asarray(X, dtype=float)
    if X.ndim < 2:
        raise ValueError("expected a sample of shape (n, p_1, ..., p_r)")
    n, dims = X.shape[0], X.shape[1:]
    lines = [TENSOR_MAGIC, f"{n} {len(dims)}", " ".join(str(p) for p in dims)]
    lines += [_fmt_row(x) for x in X.reshape(n, -1)]
    return "\n".join(lines) + "\n"


def write_tensor_sample(path, X):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_tensor_sample(X))


def parse_tensor_sample(text):
    lines = text.splitlines()
    if not lines or lines[0].strip() != TENSOR_MAGIC:
        raise ParseError(f"expected header {TENSOR_MAGIC!r}", line=1, column=1)
    if len(lines) < 3:
        raise ParseError("truncated header: need size and dims lines", line=len(lines) + 1)
    head = lines[1].split()
    if len(head) != 2:
        raise ParseError(f"expected 'n r', got {len(head)} fields", line=2)
    n, r = _ints(head, 2, "size line", minimum=1)
    dims = _ints(lines[2].split(), 3, "dims line", minimum=1)
    if len(dims) != r:
        raise ParseError(f"expected {r} dims, got {len(dims)}", line=3)
    width = int(np.prod(dims))
    records = [(i + 4, line) for i, line in enumerate(lines[3:]) if line.strip()]
    if len(records) != n:
        raise ParseError(f"expected {n} records, found {len(records)}", line=len(lines) + 1)
    X = np.empty((n, width))
    for i, (line_no, line) in enumerate(records):
        tokens = line.split()
        if len(tokens) != width:
            raise ParseError(f"expected {width} values, got {len(tokens)}", line=line_no,
                             column=min(len(tokens), width) + 1)
        X[i] = _floats(tokens, line_no)
    return X.reshape((n,) + tuple(dims))


def read_tensor_sample(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_tensor_sample(fh.read())


# -- plain matrices ----------------------------------------------------------


def write_matrix(path, M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(_fmt_row(row) for row in M) + "\n")


def read_matrix(path):
    """Whitespace-separated rows; blank lines and ``#`` comments are skipped."""
    rows, width = [], None
    for line_no, line in enumerate(_read_lines(path), start=1):
        body = line.split("#", 1)[0].split()
        if not body:
            continue
        if width is None:
            width = len(body)
        elif len(body) != width:
            raise ParseError(f"ragged matrix: expected {width} values, got {len(body)}", line=line_no)
        rows.append(_floats(body, line_no))
    if not rows:
        raise ParseError("empty matrix file", line=1)
    return np.array(rows)


# -- fitted models -----------------------------------------------------------


def format_model(model):
    out = [
        MODEL_MAGIC,
        "dims " + " ".join(str(p) for p in model.dims),
        f"n {model.n}",
        f"method {model.method}",
        "variant " + " ".join(str(v) for v in model.n_variant),
        f"scale {fmt(model.scale)}",
        "mean",
        _fmt_row(model.mean),
    ]
    for m, (g, ev) in enumerate(zip(model.gammas, model.eigenvalues), start=1):
        out.append(f"gamma {m}")
        out += [_fmt_row(row) for row in g]
        out.append(f"eigenvalues {m}")
        out.append(_fmt_row(ev))
    if model.whitening is not None:
        for m, h in enumerate(model.whitening, start=1):
            out.append(f"whitening {m}")
            out += [_fmt_row(row) for row in h]
    for w in model.warnings:
        out.append("warning " + " ".join(w.split()))
    return "\n".join(out) + "\n"


def write_model(path, model):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_model(model))


class _Cursor:
    def __init__(self, lines):
        self.lines = lines
        self.pos = 0

    @property
    def line_no(self):
        return self.pos + 1

    def next(self, what):
        if self.pos >= len(self.lines):
            raise ParseError(f"unexpected end of file, expected {what}", line=self.pos + 1)
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def keyed(self, key):
        line = self.next(key)
        parts = line.split()
        if not parts or parts[0] != key:
            raise ParseError(f"expected {key!r}, got {line[:40]!r}", line=self.pos, column=1)
        return parts[1:]

    def row(self, width, what):
        tokens = self.next(what).split()
        if len(tokens) != width:
            raise ParseError(f"{what}: expected {width} values, got {len(tokens)}", line=self.pos)
        return _floats(tokens, self.pos)


def parse_model(text):
    cur = _Cursor(text.splitlines())
    if cur.next("header").strip() != MODEL_MAGIC:
        raise ParseError(f"expected header {MODEL_MAGIC!r}", line=1, column=1)
    dims = tuple(_ints(cur.keyed("dims"), cur.pos, "dims", minimum=1))
    (n,) = _ints(cur.keyed("n"), cur.pos, "n", minimum=1)
    method = " ".join(cur.keyed("method"))
    variants = tuple(_ints(cur.keyed("variant"), cur.pos, "variant"))
    if len(variants) != len(dims) or any(v not in (0, 1) for v in variants):
        raise ParseError(f"need one variant in {{0, 1}} per mode, got {variants}", line=cur.pos)
    scale = float(_floats(cur.keyed("scale"), cur.pos, first_col=2)[0])
    cur.keyed("mean")
    mean = cur.row(int(np.prod(dims)), "mean").reshape(dims)
    gammas, eigenvalues, whitening, notes = [], [], [], []
    for m, p in enumerate(dims, start=1):
        if cur.keyed("gamma") != [str(m)]:
            raise ParseError(f"expected 'gamma {m}'", line=cur.pos)
        gammas.append(np.array([cur.row(p, f"gamma {m}") for _ in range(p)]))
        if cur.keyed("eigenvalues") != [str(m)]:
            raise ParseError(f"expected 'eigenvalues {m}'", line=cur.pos)
        eigenvalues.append(cur.row(p, f"eigenvalues {m}"))
    while cur.pos < len(cur.lines):
        line = cur.next("section")
        if not line.strip():
            continue
        key, _, rest = line.partition(" ")
        if key == "whitening":
            m = int(rest)
            p = dims[m - 1]
            whitening.append(np.array([cur.row(p, f"whitening {m}") for _ in range(p)]))
        elif key == "warning":
            notes.append(rest)
        else:
            raise ParseError(f"unknown section {key!r}", line=cur.pos, column=1)
    return UnmixingModel(
        gammas=tuple(gammas),
        eigenvalues=tuple(eigenvalues),
        mean=mean,
        n_variant=variants,
        scale=scale,
        dims=dims,
        n=n,
        whitening=tuple(whitening) if whitening else None,
        method=method,
        warnings=tuple(notes),
    )


def read_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_model(fh.read())


# -- source-grid specs -------------------------------------------------------


def _cell_moments(tok, line_no, col):
    if tok in CATALOG:
        d = CATALOG[tok]
        return d.beta, d.gamma3, d.m6
    parts = tok.split(":")
    if len(parts) == 3:
        try:
            return tuple(float(x) for x in parts)
        except ValueError:
            pass
    raise ParseError(
        f"cell {tok!r} is neither a catalog distribution nor 'beta:gamma3:m6'",
        line=line_no, column=col,
    )


def parse_grid_spec(text):
    """Moment profile from a grid spec.

    Each cell is a catalog distribution name or an explicit ``beta:gamma3:m6``
    triple. Without a header the lines are the rows of a matrix grid; a
    leading ``dims p_1 ... p_r`` line instead takes the cells in storage order
    (last index fastest) across any number of lines.
    """
    cells, dims, width = [], None, None
    for line_no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].split()
        if not body:
            continue
        if dims is None and not cells and body[0] == "dims":
            dims = tuple(_ints(body[1:], line_no, "dims", minimum=1))
            continue
        if dims is None:
            if width is None:
                width = len(body)
            elif len(body) != width:
                raise ParseError(f"ragged grid: expected {width} cells, got {len(body)}", line=line_no)
        cells += [_cell_moments(tok, line_no, j + 1) for j, tok in enumerate(body)]
    if not cells:
        raise ParseError("empty grid spec", line=1)
    if dims is None:
        dims = (len(cells) // width, width)
    if int(np.prod(dims)) != len(cells):
        raise ParseError(f"dims {dims} need {int(np.prod(dims))} cells, got {len(cells)}", line=1)
    beta, gamma3, m6 = (np.array(c).reshape(dims) for c in zip(*cells))
    return MomentProfile.from_moments(beta, gamma3, m6)


def read_grid_spec(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_grid_spec(fh.read())


# -- key=value configs -------------------------------------------------------


def parse_config(text):
    out = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, value = body.partition("=")
        if not sep or not key.strip():
            raise ParseError(f"expected key=value, got {body!r}", line=line_no, column=1)
        out[key.strip()] = value.strip()
    return out


def read_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


# -- semeion digits ----------------------------------------------------------


def parse_semeion(text):
    """Images ``(n, 16, 16)`` and digit labels from semeion-format text."""
    images, labels = [], []
    for line_no, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) != SEMEION_FIELDS:
            raise ParseError(f"expected {SEMEION_FIELDS} fields, got {len(tokens)}", line=line_no)
        values = _floats(tokens, line_no)
        bad = np.flatnonzero((values != 0) & (values != 1))
        if bad.size:
            raise ParseError(f"expected a binary value, got {tokens[bad[0]]!r}", line=line_no, column=int(bad[0]) + 1)
        onehot = values[256:]
        if onehot.sum() != 1:
            raise ParseError(f"label block must contain exactly one 1, found {int(onehot.sum())}",
                             line=line_no, column=257)
        images.append(values[:256].reshape(16, 16))
        labels.append(int(np.argmax(onehot)))
    return np.array(images).reshape(-1, 16, 16), np.array(labels, dtype=int)


def read_semeion(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_semeion(fh.read())


def filter_digits(images, labels, digits):
    keep = np.isin(labels, list(digits))
    return images[keep], labels[keep]


def write_labels(path, labels):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("index,digit\n")
        fh.writelines(f"{i},{d}\n" for i, d in enumerate(labels))
