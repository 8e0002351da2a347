def compress(data: bytes) -> bytes:
    import zlib
    return zlib.compress(data, 9)
