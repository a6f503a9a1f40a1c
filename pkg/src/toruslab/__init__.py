"""Numerical laboratory for flat minimal tori in round spheres.

Modules: ``grid`` (lattices, FFT derivatives, quadrature), ``geometry``
(immersions and their structure equations), ``zoo`` (closed-form tori),
``jacobi`` (Jacobi operator and spectrum), ``sections`` (explicit normal
sections), ``variation`` (finite-difference area checks) and ``cli``.
"""

__version__ = "0.1.0"
