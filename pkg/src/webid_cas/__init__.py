"""WebID-authenticated content access service.

A proof-of-concept stack for cross-domain linked-data exchange: an RDF quad
store with per-actor named graphs, WebID-TLS identity and verification,
graph-level access control with document management, a ZIP exchange format,
and an HTTPS server plus CLI tying it together.
"""

__version__ = "0.1.0"
