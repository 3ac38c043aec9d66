"""Synthetic problem generation and natural-signal ingestion.

Dictionaries are sampled entrywise (normal or uniform), column-normalized,
and the ground-truth sparse code is rescaled by the pre-normalization
column norms so that x = D @ alpha_true + noise keeps holding afterwards.
Natural signals come from grayscale PGM images as vectorized patches.

RNG: numpy PCG64, with independent substreams per purpose (dictionary /
support / truth / noise) so that e.g. changing sigma does not alter D.
"""

from dataclasses import dataclass, field

import numpy as np

from .linalg import as_matrix, as_vector

PRNG_NAME = "PCG64"

_DISTS = ("normal", "uniform")


@dataclass(frozen=True)
class GenSpec:
    """Parameters of one synthetic instance."""

    dist: str
    d: int
    K: int
    s: int
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.dist not in _DISTS:
            raise ValueError(f"dist must be one of {_DISTS}, got {self.dist!r}")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not 0 < self.s <= self.K:
            raise ValueError(f"need 0 < s <= K, got s={self.s}, K={self.K}")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")


@dataclass
class Problem:
    """A sensing instance: unit-column dictionary, observed signal, optional truth."""

    dictionary: np.ndarray  # d x K, unit-norm columns
    signal: np.ndarray      # length d
    truth: np.ndarray | None = None  # length K sparse code, if known

    def __post_init__(self):
        self.dictionary = as_matrix(self.dictionary)
        self.signal = as_vector(self.signal)
        if self.signal.shape[0] != self.dictionary.shape[0]:
            raise ValueError("signal length does not match dictionary rows")
        if self.truth is not None:
            self.truth = as_vector(self.truth)
            if self.truth.shape[0] != self.dictionary.shape[1]:
                raise ValueError("truth length does not match dictionary columns")

    @property
    def d(self):
        return self.dictionary.shape[0]

    @property
    def K(self):
        return self.dictionary.shape[1]


def normalize_columns(m):
    """Scale each column of `m` to unit l2 norm.

    Returns (normalized matrix, vector of original column norms); the
    pre-norms let callers rescale a code so the product is preserved.
    """
    m = as_matrix(m)
    norms = np.linalg.norm(m, axis=0)
    if np.any(norms == 0.0):
        raise ValueError("cannot normalize a zero column")
    return np.asfortranarray(m / norms), norms


def _substreams(seed):
    ss = np.random.SeedSequence(seed)
    keys = ("dictionary", "support", "truth", "noise")
    return dict(zip(keys, (np.random.Generator(np.random.PCG64(c)) for c in ss.spawn(len(keys)))))


def generate(spec):
    """Draw a Problem from `spec`; deterministic for a fixed seed."""
    rngs = _substreams(spec.seed)
    if spec.dist == "normal":
        raw = rngs["dictionary"].standard_normal((spec.d, spec.K))
    else:
        raw = rngs["dictionary"].uniform(-1.0, 1.0, (spec.d, spec.K))
    dictionary, pre_norms = normalize_columns(raw)

    support = rngs["support"].choice(spec.K, size=spec.s, replace=False)
    truth = np.zeros(spec.K)
    if spec.dist == "normal":
        vals = rngs["truth"].standard_normal(spec.s)
    else:
        vals = rngs["truth"].uniform(-1.0, 1.0, spec.s)
    # avoid accidental exact zeros so nnz(truth) == s holds
    vals[vals == 0.0] = 1.0
    truth[support] = vals

    x = raw @ truth
    if spec.sigma > 0:
        if spec.dist == "normal":
            x = x + rngs["noise"].normal(0.0, spec.sigma, spec.d)
        else:
            x = x + rngs["noise"].uniform(-spec.sigma, spec.sigma, spec.d)

    # keep x = D @ truth + noise valid after column normalization
    truth *= pre_norms
    return Problem(dictionary=dictionary, signal=x, truth=truth), pre_norms


def read_pgm(path):
    """Read a PGM image (P2 ASCII or P5 binary, maxval <= 65535).

    Returns a 2-D float64 array with values scaled to [0, 1].
    """
    with open(path, "rb") as fh:
        data = fh.read()

    tokens = []
    pos = 0
    # header: magic, width, height, maxval; '#' starts a comment line
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise ValueError("truncated PGM header")
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    magic = tokens[0]
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"not a PGM file (magic {magic!r})")
    width, height, maxval = (int(t) for t in tokens[1:4])
    if not 0 < maxval <= 65535:
        raise ValueError(f"unsupported maxval {maxval}")

    if magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        dtype = ">u2" if maxval > 255 else "u1"
        pix = np.frombuffer(data, dtype=dtype, count=width * height, offset=pos)
    else:
        pix = np.array(data[pos:].split()[: width * height], dtype=np.int64)
    if pix.size != width * height:
        raise ValueError("truncated PGM pixel data")
    img = pix.reshape(height, width).astype(np.float64) / maxval
    return img


def extract_patches(image, patch, count, seed):
    """Extract `count` random square patches, flattened row-major.

    Top-left offsets are drawn uniformly; deterministic per seed.
    """
    image = np.asarray(image, dtype=np.float64)
    h, w = image.shape
    if patch > min(h, w):
        raise ValueError(f"patch size {patch} exceeds image dims {image.shape}")
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    out = []
    for _ in range(count):
        i = int(rng.integers(0, h - patch + 1))
        j = int(rng.integers(0, w - patch + 1))
        out.append(image[i : i + patch, j : j + patch].reshape(-1).copy())
    return out
