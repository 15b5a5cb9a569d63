"""Containers, codecs, benchmarks and edge-to-cloud transport for intermediate deep features."""

from ._core import (
    ArgumentError,
    ConnectionError,
    CorruptionError,
    EdgeServer,
    Error,
    FeatureTensor,
    FormatError,
    IntegrityError,
    IoError,
    OversizeFrameError,
    ProtocolError,
    RemoteStatusError,
    ValidationError,
    codec_names,
    compress_payload,
    compression_rate,
    compute_stats,
    decode_feature,
    decompress_payload,
    encode_feature,
    format_volume,
    generate_synthetic,
    header_size,
    load_container,
    measure,
    parse_header,
    profile_dims,
    read_container,
    request_feature,
    run_benchmark,
    save_container,
    write_container,
)

__version__ = "0.1.0"
