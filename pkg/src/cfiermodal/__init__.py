"""Modal spectra and sphere scattering for regularized combined-field operators."""

__version__ = "0.1.0"
