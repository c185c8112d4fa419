"""humeval: self-hosted human evaluation for machine translation and NLG."""

__version__ = "0.1.0"
