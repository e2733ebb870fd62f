"""Coverage analysis of two-tier multi-antenna networks with user-centric interference nulling."""

__version__ = "0.1.0"
