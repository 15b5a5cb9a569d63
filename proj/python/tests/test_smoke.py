import gzip
import zlib

import numpy as np
import pytest

import featstream as fs


def test_synthetic_count_and_stats():
    t = fs.generate_synthetic([14, 14, 512], 0.068, seed=7)
    assert t.dims == [14, 14, 512]
    assert t.category == "conv"
    stats = fs.compute_stats(t)
    assert stats["nonzero_count"] == 6824
    assert stats["volume_bytes"] == 401408
    assert t.values.shape == (14, 14, 512)
    assert t.values.dtype == np.float32


def test_tensor_from_numpy_roundtrip_every_codec():
    rng = np.random.default_rng(3)
    arr = rng.standard_normal((6, 5, 4)).astype(np.float32)
    arr[arr < 0] = 0
    arr[0, 0, 0] = -0.0
    t = fs.FeatureTensor(arr, network="vgg16", layer="conv5", source="a.jpg")
    for codec in fs.codec_names():
        back = fs.decode_feature(fs.encode_feature(t, codec))
        assert back.bit_equal(t), codec
        assert back.values.tobytes() == arr.tobytes()
    assert len(fs.codec_names()) == 9


def test_container_bytes_match_reference_layout():
    t = fs.FeatureTensor(np.array([1.0, -2.5], dtype=np.float32), network="n", layer="l", source="s")
    b = fs.write_container(t)
    payload = np.array([1.0, -2.5], dtype="<f4").tobytes()
    assert b[:8] == b"FTC1\x01\x01\x01\x02"
    assert b[-4:] == zlib.crc32(payload).to_bytes(4, "little")
    assert fs.read_container(b).bit_equal(t)


def test_gzip_payload_interoperates_with_stdlib():
    raw = bytes(range(256)) * 40
    assert gzip.decompress(fs.compress_payload(raw, "gzip")) == raw
    assert fs.decompress_payload(gzip.compress(raw), "gzip") == raw
    assert fs.decompress_payload(zlib.compress(raw), "zlib") == raw


def test_header_and_rate():
    t = fs.generate_synthetic([4096], 0.25, seed=1)
    b = fs.encode_feature(t, "bzip2")
    h = fs.parse_header(b)
    assert h["codec"] == "bzip2" and h["dims"] == [4096]
    assert h["header_len"] + h["compressed_len"] == len(b)
    assert fs.header_size(3) == 43
    assert fs.compression_rate(250, 1000) == 0.25
    rec = fs.measure(t, "gzip")
    assert rec["original_len"] == 16384


def test_quantized_encode():
    t = fs.generate_synthetic([8, 8, 8], 0.5, seed=2)
    b = fs.encode_feature(t, "gzip", quant_bits=8)
    h = fs.parse_header(b)
    assert h["mode"] == "quantized" and h["quant_bits"] == 8
    step = (h["quant_max"] - h["quant_min"]) / 255
    back = fs.decode_feature(b)
    assert np.max(np.abs(back.values - t.values)) <= step / 2 + 1e-6


def test_errors_are_typed():
    t = fs.generate_synthetic([100], 0.5, seed=4)
    b = bytearray(fs.encode_feature(t, "zlib"))
    b[-1] ^= 1
    with pytest.raises(fs.IntegrityError):
        fs.decode_feature(bytes(b))
    assert issubclass(fs.IntegrityError, fs.CorruptionError)
    with pytest.raises(fs.FormatError):
        fs.decode_feature(b"XXXX" + bytes(60))
    with pytest.raises(fs.ArgumentError):
        fs.encode_feature(t, "nope")
    with pytest.raises(fs.ValidationError):
        fs.FeatureTensor(np.array([np.nan], dtype=np.float32))


def test_benchmark_and_transport(tmp_path):
    for i in range(3):
        t = fs.generate_synthetic(fs.profile_dims("vgg16", "pool5"), 0.2, seed=i)
        t.network, t.layer, t.source = "vgg16", "pool5", f"img{i}"
        fs.save_container(tmp_path / f"s{i}.ftc", t)
    report, records = fs.run_benchmark(tmp_path, ["gzip", "zeromask"], repeat=1, format="csv")
    assert report.startswith("feat_type,feat_shape,")
    assert len(records) == 6

    with fs.EdgeServer(tmp_path) as server:
        endpoint = f"127.0.0.1:{server.port}"
        got, stats = fs.request_feature(endpoint, network="vgg16", layer="pool5", source="img1", codec="lzma")
        assert got.bit_equal(fs.load_container(tmp_path / "s1.ftc"))
        assert stats["wire_bytes"] > 0
        with pytest.raises(fs.RemoteStatusError) as info:
            fs.request_feature(endpoint, network="vgg16", layer="fc9")
        assert info.value.status == "NOT_FOUND"
