"""Compositional memory-safety analysis for C programs."""

from nlverify._core import (  # noqa: F401
    __version__,
    call_graph,
    extract,
    extract_json,
    load_compilation_db,
    metrics,
    render_external_prompt,
    rule_complete,
    run_property,
    split_blocks,
    svcomp_score,
    validate_summary,
)
