"""Scale-invariant MERA toolkit for 1D critical spin chains.

Subpackages:

- :mod:`merakit.tensor` — dense tensor algebra and eigensolvers
- :mod:`merakit.symmetry` — abelian charge-conserving block tensors
- :mod:`merakit.models` — critical spin-chain Hamiltonians and oracles
- :mod:`merakit.schemes` — MERA coarse-graining schemes and superoperators
- :mod:`merakit.optimizer` — variational ground-state optimization
- :mod:`merakit.conformal` — scaling dimensions, correlators, OPE data
- :mod:`merakit.cli` — command-line front end
"""

__version__ = "0.1.0"
