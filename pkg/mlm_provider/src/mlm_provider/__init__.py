"""HTTP microservice returning top-k masked-LM replacement candidates.

The server is deterministic: all sampling happens client-side, so the
same request always yields the same response.
"""

__version__ = "0.1.0"
