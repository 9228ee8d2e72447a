"""Pair partitions, broken pair partitions and t-deformed Gaussian/Fock calculus.

Everything is exact over the rationals (gmpy2 ``mpq``); floats appear only
in the advisory eigenvalue routines.
"""

from .kernel import (ONE, ZERO, KernelError, Matrix, PSDCertificate, Scalar, SymMatrix,
                     ldlt_psd_certificate, quotient_basis, scalar, symmetric_eigs)
from .partitions import (BlockDecomposition, PairPartition, PartitionError, block_count, blocks,
                         crossings, enumerate_partitions, from_permutation, nest_insert, rotate)
from .semigroup import (COHOOK, EMPTY, HOOK, PAIR, Diagram, DiagramError, involution, multiply,
                        parse_diagram, permute_legs, standard_form, underline)
from .weights import (BOSONIC, FERMIONIC, FREE, Weight, WeightError, block_q, crossing_q, custom,
                      evaluate, evaluate_hat, is_multiplicative_upto, is_rotation_invariant_upto,
                      parse_weight)
from .wick import (WickError, WickExpression, WickMonomial, fock_moment, gaussian_moment,
                   moments_from_wick, monomial, unit, wick_from_moments, wick_inner_product)
from .gns import (GramModel, fock_model, gram_model, theta_matrix, theta_quadratic_identity)

__version__ = "0.1.0"
