"""Python bindings for the voxweave C++ core."""

from ._voxweave import (
    EmptyAudio,
    EmptyReference,
    GroupTooSmall,
    InvalidConfig,
    InvalidToken,
    MalformedSequence,
    MissingParameter,
    ParseError,
    UnexpectedParameter,
    UnknownTool,
    VoxweaveError,
    adaptor_frames,
    binary_length_reward,
    bleu,
    corpus_bleu,
    demux,
    edit_distance,
    embed_text,
    encoder_frames,
    error_rate,
    group_advantage,
    interleaved_length,
    mean_of_subsets,
    mux,
    parse_tool_call,
    round_half_away,
    run_cli,
    serialize_tool_call,
    toolcall_metrics,
    vad,
)

__version__ = "0.1.0"
