"""Python access to the melcond C++ core."""

from ._melcond import (
    MelcondError,
    TokenizedSong,
    __version__,
    corpus_bleu,
    detokenize_canonical,
    evaluate,
    features,
    generate,
    ingest_paths,
    ingest_synthetic,
    kl_divergence,
    parse_tokens,
    synthetic_corpus,
    tokenize_canonical,
    train,
    valid_configurations,
)

__all__ = [
    "MelcondError",
    "TokenizedSong",
    "__version__",
    "corpus_bleu",
    "detokenize_canonical",
    "evaluate",
    "features",
    "generate",
    "ingest_paths",
    "ingest_synthetic",
    "kl_divergence",
    "parse_tokens",
    "synthetic_corpus",
    "tokenize_canonical",
    "train",
    "valid_configurations",
]
