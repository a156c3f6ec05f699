"""qrlab: exact restriction-exponent algebra plus a numerical scaling lab
for semiclassical quasimodes restricted to submanifolds."""

__version__ = "0.1.0"
