"""Protobuf wire walker, exercised on handcrafted model bytes."""

import pytest

from signet_exporter import onnxwire


def _varint(v):
    out = bytearray()
    while True:
        b = v & 0x7F
        v >>= 7
        if v:
            out.append(b | 0x80)
        else:
            out.append(b)
            return bytes(out)


def _ld(field, payload):
    return bytes([(field << 3) | 2]) + _varint(len(payload)) + payload


def _vi(field, value):
    return bytes([(field << 3) | 0]) + _varint(value)


def _dim(value=None, param=None):
    body = b""
    if value is not None:
        body += _vi(1, value)
    if param is not None:
        body += _ld(2, param.encode())
    return _ld(1, body)                       # TensorShapeProto.dim


def _value_info(name, dims):
    shape = b"".join(_dim(value=d) if isinstance(d, int) else _dim(param=d)
                     for d in dims)
    tensor = _vi(1, 1) + _ld(2, shape)        # elem_type float + shape
    return _ld(1, name.encode()) + _ld(2, _ld(1, tensor))


def _model(inputs, outputs):
    graph = b"".join(_ld(11, _value_info(n, d)) for n, d in inputs)
    graph += b"".join(_ld(12, _value_info(n, d)) for n, d in outputs)
    return _ld(7, graph)


def test_graph_io_names_and_dims():
    raw = _model([("image", [1, 3, 224, 224])], [("embedding", ["batch", 512])])
    ins, outs = onnxwire.graph_io(raw)
    assert ins == [("image", [1, 3, 224, 224])]
    assert outs == [("embedding", ["batch", 512])]


def test_output_width_with_symbolic_batch():
    raw = _model([("image", [1, 3, 224, 224])], [("embedding", ["batch", 1920])])
    assert onnxwire.output_width(raw) == 1920


def test_output_width_requires_single_output():
    raw = _model([("image", [1])], [("a", [1, 2]), ("b", [1, 2])])
    with pytest.raises(onnxwire.WireError, match="one graph output"):
        onnxwire.output_width(raw)


def test_output_width_rejects_symbolic_trailing_dim():
    raw = _model([("image", [1])], [("embedding", [1, "d"])])
    with pytest.raises(onnxwire.WireError, match="concrete"):
        onnxwire.output_width(raw)


def test_no_graph_rejected():
    with pytest.raises(onnxwire.WireError, match="graph"):
        onnxwire.graph_io(b"")
    with pytest.raises(onnxwire.WireError, match="graph"):
        onnxwire.graph_io(_ld(3, b"not a graph"))


def test_truncated_message_rejected():
    raw = _model([("image", [1])], [("embedding", [1, 4])])
    with pytest.raises(onnxwire.WireError):
        list(onnxwire.iter_fields(raw[:-2]))


def test_multibyte_varint_dims():
    raw = _model([("image", [1])], [("embedding", [1, 100000])])
    assert onnxwire.output_width(raw) == 100000
