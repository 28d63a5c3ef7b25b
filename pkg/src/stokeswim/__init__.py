"""stokeswim: spherical microswimmer laboratory for exterior Stokes flow."""

__version__ = "0.1.0"
