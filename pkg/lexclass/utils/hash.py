import hashlib


hashlib_methods = {
    "md5": hashlib.md5,
    "sha1": hashlib.sha1,
    "sha256": hashlib.sha256,
    "sha512": hashlib.sha512,
    "blake2b": hashlib.blake2b,
}

# Seeds are kept below 2**63 so they fit numpy's and JSON's integer range.
SEED_BITS = 63


def hash_string(s, method="sha256", length=None):
    """Hash a Python string.

    Args:
        s (str): String to hash.
        method (str, optional): Hash method to use. Defaults to "sha256".
        length (int, optional): Truncate the hexadecimal result to this length.

    Raises:
        ValueError: String is not able to be encoded to 'UTF-8'
        ValueError: Hash method specified is not in 'hashlib_methods'

    Returns:
        str: Hexadecimal string representation of hash.
    """
    try:
        data = s.encode("utf-8")
    except UnicodeEncodeError:
        raise ValueError("String must be encoded as UTF-8.")

    if method not in hashlib_methods:
        raise ValueError(f"Invalid hash method: {method}")

    result = hashlib_methods[method](data).hexdigest()
    if length:
        result = result[:length]
    return result


def fingerprint(text, method="sha256"):
    """Content fingerprint of a serialized artifact, e.g. `sha256:9f86d0...`."""
    return f"{method}:{hash_string(text, method)}"


def derive_seed(base_seed, *keys):
    """Derive a reproducible child seed from 'base_seed' and any number of keys.

    The derivation only depends on the values, never on call order, so work
    split across processes draws the same random streams.

    Example:
        derive_seed(0, "doc-17") -> same integer on every run and platform.
    """
    material = ":".join([str(int(base_seed)), *(str(k) for k in keys)])
    return int(hash_string(material, "sha256", 16), 16) & ((1 << SEED_BITS) - 1)
