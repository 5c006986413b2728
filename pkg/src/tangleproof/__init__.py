"""tangleproof: validated numerics for the universal area-preserving map.

The package rebuilds, at desk scale, the computer-assisted proofs around the
period-doubling renormalization fixed point of area-preserving maps: the
generating-function map and its third iterate, covering relations and cone
conditions over chains of h-sets, a certified horseshoe, and two-sided bounds
on the Hausdorff dimension of the resulting hyperbolic set.
"""

__version__ = "0.1.0"
