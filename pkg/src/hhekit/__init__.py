"""Edge-side hybrid homomorphic encryption toolkit.

Modules: ``field`` (primes, Barrett), ``transforms`` (NTT, fixed-point FFT),
``ckks`` (edge RNS-CKKS), ``rubato`` (stream cipher), ``hhe`` (mode logic),
``accelsim`` (accelerator model), ``netmodel`` (latency model), ``packets``.
"""
__version__ = "0.1.0"
