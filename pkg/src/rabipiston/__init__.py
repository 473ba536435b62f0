"""Classical piston driven by a Rabi-coupled two-component condensate."""

__version__ = "0.1.0"
