"""PAC code workbench: encoding, list decoding and min-weight codeword analysis."""

__version__ = "0.1.0"
