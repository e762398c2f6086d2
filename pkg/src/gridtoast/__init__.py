"""gridtoast: toast decompositions, almost-box tilings, and certified
pattern constructors on finite Z^d windows."""

__version__ = "0.1.0"
