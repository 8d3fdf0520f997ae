"""Matching pursuit over sequences of time-frequency subdictionaries."""

from ._core import (
    DecodeError,
    QuadratureError,
    decode,
    decompose,
    encode,
    order_moment,
    order_pdf,
    predict_fixed,
    predict_redraw,
    shift_sequence_hash,
    simulate_greedy,
    srr_db,
    synthetic_audio,
)

__all__ = [
    "DecodeError",
    "QuadratureError",
    "decode",
    "decompose",
    "encode",
    "order_moment",
    "order_pdf",
    "predict_fixed",
    "predict_redraw",
    "shift_sequence_hash",
    "simulate_greedy",
    "srr_db",
    "synthetic_audio",
]

__version__ = "0.1.0"
