"""Minimal ONNX graph introspection via the protobuf wire format.

Reads just enough of a serialized model to list graph inputs and outputs
with their declared tensor shapes -- no onnx package required. Field
numbers follow the ONNX schema: ModelProto.graph = 7; GraphProto.input /
output = 11 / 12; ValueInfoProto.name = 1, .type = 2; TypeProto
.tensor_type = 1; Tensor.shape = 2; TensorShapeProto.dim = 1;
Dimension.dim_value = 1, .dim_param = 2.
"""


class WireError(ValueError):
    """Bytes do not parse as a protobuf message."""


def iter_fields(buf):
    """Yield (field_number, wire_type, value) triples of one message.

    Varint fields yield ints; length-delimited fields yield bytes; fixed
    32/64-bit fields yield their raw bytes.
    """
    i, n = 0, len(buf)
    while i < n:
        key, i = _varint(buf, i)
        field, wtype = key >> 3, key & 7
        if wtype == 0:
            value, i = _varint(buf, i)
        elif wtype == 1:
            value, i = buf[i:i + 8], i + 8
        elif wtype == 2:
            length, i = _varint(buf, i)
            if i + length > n:
                raise WireError("length-delimited field runs past the buffer")
            value, i = buf[i:i + length], i + length
        elif wtype == 5:
            value, i = buf[i:i + 4], i + 4
        else:
            raise WireError(f"unsupported wire type {wtype} for field {field}")
        if i > n:
            raise WireError("field runs past the buffer")
        yield field, wtype, value


def _varint(buf, i):
    value = shift = 0
    while True:
        if i >= len(buf):
            raise WireError("truncated varint")
        b = buf[i]
        i += 1
        value |= (b & 0x7F) << shift
        shift += 7
        if not b & 0x80:
            return value, i


def _sub(buf, field):
    return [v for f, w, v in iter_fields(buf) if f == field and w == 2]


def _value_info(buf):
    """ValueInfoProto -> (name, [dim, ...]); symbolic dims come out as str."""
    name, dims = None, []
    for f, w, v in iter_fields(buf):
        if f == 1 and w == 2:
            name = v.decode("utf-8")
        elif f == 2 and w == 2:                      # TypeProto
            for tensor in _sub(v, 1):                # .tensor_type
                for shape in _sub(tensor, 2):        # .shape
                    for dim in _sub(shape, 1):       # .dim
                        value = None
                        for f5, w5, v5 in iter_fields(dim):
                            if f5 == 1 and w5 == 0:
                                value = v5           # dim_value
                            elif f5 == 2 and w5 == 2:
                                value = v5.decode("utf-8")   # dim_param
                        dims.append(value)
    return name, dims


def graph_io(model_bytes):
    """([(input_name, dims)], [(output_name, dims)]) of a serialized model."""
    graphs = _sub(model_bytes, 7)
    if not graphs:
        raise WireError("no graph found in model bytes")
    graph = graphs[0]
    inputs = [_value_info(v) for v in _sub(graph, 11)]
    outputs = [_value_info(v) for v in _sub(graph, 12)]
    return inputs, outputs


def output_width(model_bytes):
    """Flat width of the single graph output; raises unless exactly one."""
    _, outputs = graph_io(model_bytes)
    if len(outputs) != 1:
        raise WireError(f"expected exactly one graph output, found {len(outputs)}")
    name, dims = outputs[0]
    if not dims or not isinstance(dims[-1], int):
        raise WireError(f"output {name!r} has no concrete trailing dimension: {dims}")
    return dims[-1]
