"""Python interface to the hseq core.

The heavy lifting lives in the compiled ``_hseq`` extension; this package
re-exports its surface so ``import hseq`` works both from an installed wheel
and from a build tree on ``PYTHONPATH``.
"""

from _hseq import (  # noqa: F401
    DecisionParseError,
    Hseq,
    HseqParseError,
    canonicalize,
    check_coverage,
    classify_question,
    decode_text_bodies,
    deserialize,
    em_f1,
    encode_corpus,
    encode_kg,
    encode_table,
    encode_text,
    evidence_id,
    normalize_answer,
    parse_decision_json,
    run_episode,
    simulate_stochastic,
    template_guidance,
    verify_package,
    __version__,
)

__all__ = [
    "DecisionParseError",
    "Hseq",
    "HseqParseError",
    "canonicalize",
    "check_coverage",
    "classify_question",
    "decode_text_bodies",
    "deserialize",
    "em_f1",
    "encode_corpus",
    "encode_kg",
    "encode_table",
    "encode_text",
    "evidence_id",
    "normalize_answer",
    "parse_decision_json",
    "run_episode",
    "simulate_stochastic",
    "template_guidance",
    "verify_package",
    "__version__",
]
